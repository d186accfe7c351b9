"""Command-line front end: ``deltaspec <command> --config PATH ...``.

Exit status is 0 on success, 1 when a command finds a disagreement or an
inconsistency, and 2 for unusable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from deltaspec import criteria, jacobi, negspec, spectra
from deltaspec.campaign import state_relative_error, verify_campaign
from deltaspec.errors import (
    ConfigError,
    ConfigParse,
    DeltaSpecError,
    Inapplicable,
    InsufficientSequence,
    InternalInconsistency,
    KindMismatch,
    UnknownCommand,
)
from deltaspec.model import HamiltonianConfig, Kind, load_config

COMMANDS = ("analyze", "kappa", "jacobi", "eigs", "oracle-compare", "verify")
FORMATS = ("json", "csv", "text")

EXIT_OK, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2


class UsageError(DeltaSpecError):
    """Flags that are individually valid but unusable together."""


@dataclass
class RunSpec:
    command: str
    config: str | None = None
    format: str = "json"
    seed: int = 0
    instances: int = 100
    tol: float | None = None
    out: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UnknownCommand(self.command)
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.command == "verify":
            if self.instances < 1:
                raise UsageError("--instances must be at least 1")
        elif self.config is None:
            raise UsageError(f"{self.command} needs --config")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")


@dataclass
class Artifact:
    """What a command produced: a JSON document plus a flat table for csv/text."""

    document: dict
    header: list[str]
    rows: list[list]
    findings: bool = False


# formatting


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating, Fraction)):
        return format(float(value), ".17g")
    return "" if value is None else str(value)


def render(artifact: Artifact, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_plain(artifact.document), indent=2) + "\n"
    cells = [[_cell(v) for v in row] for row in artifact.rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(artifact.header)
        writer.writerows(cells)
        return buf.getvalue()
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(artifact.header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(artifact.header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


# commands


def cmd_analyze(cfg: HamiltonianConfig, spec: RunSpec) -> Artifact:
    try:
        report = criteria.analyze(cfg)
    except InternalInconsistency as exc:
        return Artifact({"error": "InternalInconsistency", "message": str(exc)}, ["error"], [[str(exc)]], True)
    rows = [
        [v.criterion_id, v.category, criteria.conclusion_name(v.conclusion), v.applicable, v.paper_anchor]
        for v in report.verdicts
    ]
    rows += [["aggregate", cat, concl, "", ""] for cat, concl in report.to_json()["aggregate"].items()]
    return Artifact(report.to_json(), ["criterion", "category", "conclusion", "applicable", "anchor"], rows)


def cmd_kappa(cfg: HamiltonianConfig, spec: RunSpec) -> Artifact:
    if not cfg.is_finite:
        raise Inapplicable("kappa needs finitely many interactions")
    secular = spectra.secular_scan(cfg).count
    bound = None
    if cfg.kind is Kind.DELTA:
        if not cfg.potential.is_zero:
            raise Inapplicable("the M-matrix count is stated for q = 0")
        kappa = negspec.kappa_minus_delta(cfg.support, cfg.strengths)
        oracle = {"value": spectra.kappa_oracle_delta(cfg), "secular": secular}
        method = "M-matrix"
        try:
            bound = negspec.bargmann_bound(cfg)
        except Inapplicable:
            pass
    else:
        kappa = negspec.kappa_minus_delta_prime(cfg.strengths_values())
        oracle = {"value": secular, "secular": secular}
        method = "beta-count"
    agrees = oracle["value"] == oracle["secular"] == kappa
    oracle["agrees"] = agrees
    doc = {"kappa_minus": kappa, "method": method, "bargmann_bound": bound, "oracle": oracle}
    rows = [["kappa_minus", kappa], ["method", method], ["bargmann_bound", bound],
            ["oracle_value", oracle["value"]], ["oracle_secular", secular], ["agrees", agrees]]
    return Artifact(doc, ["field", "value"], rows, not agrees)


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--sweep expects comma-separated integers, got {text!r}") from exc
    if not sizes or min(sizes) < 1:
        raise UsageError("--sweep sizes must be positive")
    return sizes


def cmd_jacobi(cfg: HamiltonianConfig, spec: RunSpec) -> Artifact:
    sweep = spec.options.get("sweep")
    if sweep:
        result = jacobi.truncation_sweep(cfg, _parse_sizes(sweep))
        doc = {"sweep": [{"n": n, "kappa_minus": k} for n, k in result.rows], "stabilized": result.stabilized,
               "final": result.final}
        return Artifact(doc, ["n", "kappa_minus"], [list(r) for r in result.rows])
    n = spec.options.get("n") or 16
    mat = jacobi.truncation_matrix(cfg, n)
    tri = jacobi.inertia(mat)
    doc = {
        "n": n,
        "diag": mat.diag,
        "offdiag": mat.offdiag,
        "inertia": {"kappa_minus": tri.kappa_minus, "kappa_zero": tri.kappa_zero, "kappa_plus": tri.kappa_plus},
    }
    rows = []
    for i in range(n):
        if i:
            rows.append([i + 1, i, mat.offdiag[i - 1]])
        rows.append([i + 1, i + 1, mat.diag[i]])
        if i < n - 1:
            rows.append([i + 1, i + 2, mat.offdiag[i]])
    return Artifact(doc, ["row", "col", "value"], rows)


def cmd_eigs(cfg: HamiltonianConfig, spec: RunSpec) -> Artifact:
    length = spec.options.get("length")
    if length is not None:
        count = spec.options.get("count") or 5
        result = spectra.truncated_eigs(cfg, length, count, **({"tol": spec.tol} if spec.tol else {}))
        mode = "dirichlet"
    else:
        kw = {"grid_points": spec.options.get("grid_points") or 2048}
        if spec.options.get("kappa_max"):
            kw["kappa_max"] = spec.options["kappa_max"]
        result = spectra.secular_scan(cfg, **kw)
        mode = "negative"
    if spec.options.get("samples"):
        doc = {"mode": mode, "samples": [{"kappa": k, "A": a} for k, a in result.samples]}
        return Artifact(doc, ["kappa", "A"], [list(s) for s in result.samples])
    eigs = [{"index": i, "E": e.E, "E_low": e.E_low, "E_high": e.E_high, "oscillation_index": e.index}
            for i, e in enumerate(result.eigs)]
    doc = {"mode": mode, "count": result.count, "eigenvalues": eigs, "flags": list(result.flags)}
    header = ["index", "E", "E_low", "E_high", "oscillation_index"]
    return Artifact(doc, header, [[e[h] for h in header] for e in eigs])


def _parse_energies(text: str | None) -> list[float]:
    if not text:
        return list(np.linspace(-10.0, 10.0, 21))
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--energies expects comma-separated numbers, got {text!r}") from exc


def cmd_oracle_compare(cfg: HamiltonianConfig, spec: RunSpec) -> Artifact:
    if not cfg.is_finite:
        raise Inapplicable("oracle comparison needs finitely many interactions")
    tol = spec.tol or 1e-8
    to = spec.options.get("length") or spectra.last_edge(cfg) + 1.0
    rows, worst = [], 0.0
    for E in _parse_energies(spec.options.get("energies")):
        a = spectra.propagate(cfg, E, to)
        b = spectra.quasi_derivative_propagate(cfg, E, to)
        err = state_relative_error(a, b)
        worst = max(worst, err)
        rows.append([E, *a.unscaled(), *b.unscaled(), err])
    header = ["E", "f_transfer", "fprime_transfer", "f_quasi", "fprime_quasi", "relative_error"]
    doc = {"position": to, "tol": tol, "max_relative_error": worst, "agrees": worst <= tol,
           "samples": [dict(zip(header, r)) for r in rows]}
    return Artifact(doc, header, rows, worst > tol)


def cmd_verify(spec: RunSpec) -> Artifact:
    workers = spec.options.get("workers") or min(os.cpu_count() or 1, 8)
    summary = verify_campaign(spec.seed, spec.instances, spec.tol or 1e-10, workers=workers)
    doc = summary.to_json()
    rows = [[name, t.passed, t.failed, t.skipped] for name, t in summary.checks.items()]
    return Artifact(doc, ["check", "passed", "failed", "skipped"], rows, summary.disagreements > 0)


_HANDLERS = {
    "analyze": cmd_analyze,
    "kappa": cmd_kappa,
    "jacobi": cmd_jacobi,
    "eigs": cmd_eigs,
    "oracle-compare": cmd_oracle_compare,
}

# raised by a command when the configuration cannot serve it
_INPUT_ERRORS = (ConfigError, ConfigParse, KindMismatch, Inapplicable, InsufficientSequence, UsageError,
                 UnknownCommand, OSError, ValueError)


def run(spec: RunSpec, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if spec.command == "verify":
            artifact = cmd_verify(spec)
        else:
            artifact = _HANDLERS[spec.command](load_config(spec.config), spec)
        text = render(artifact, spec.format)
        if spec.out:
            with open(spec.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except _INPUT_ERRORS as exc:
        print(f"deltaspec: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INPUT
    except DeltaSpecError as exc:
        print(f"deltaspec: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_FINDINGS
    return EXIT_FINDINGS if artifact.findings else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--instances", type=int, default=100)
    common.add_argument("--tol", type=float)
    common.add_argument("--out", help="write the artifact here instead of stdout")

    parser = argparse.ArgumentParser(prog="deltaspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("analyze", parents=[common], help="run every spectral criterion")
    sub.add_parser("kappa", parents=[common], help="count negative eigenvalues with an oracle cross-check")
    j = sub.add_parser("jacobi", parents=[common], help="truncated Jacobi matrix or truncation sweep")
    j.add_argument("--n", type=int, help="matrix size (default 16)")
    j.add_argument("--sweep", help="comma-separated sizes, e.g. 8,16,32,64")
    e = sub.add_parser("eigs", parents=[common], help="negative eigenvalues, or Dirichlet eigenvalues with --length")
    e.add_argument("--length", type=float, help="Dirichlet truncation point L")
    e.add_argument("--count", type=int, help="number of Dirichlet eigenvalues (default 5)")
    e.add_argument("--kappa-max", type=float, dest="kappa_max")
    e.add_argument("--grid-points", type=int, dest="grid_points")
    e.add_argument("--samples", action="store_true", help="emit the secular samples (kappa, A) instead")
    o = sub.add_parser("oracle-compare", parents=[common], help="transfer-matrix vs quasi-derivative shooting")
    o.add_argument("--energies", help="comma-separated energies (default 21 points in [-10, 10])")
    o.add_argument("--length", type=float, help="comparison point (default last interaction + 1)")
    v = sub.add_parser("verify", parents=[common], help="seeded randomized cross-module campaign")
    v.add_argument("--workers", type=int, help="worker processes (default: CPU count, at most 8)")
    return parser


_SPEC_FIELDS = {"command", "config", "format", "seed", "instances", "tol", "out"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    values = vars(args)
    try:
        spec = RunSpec(**{k: values[k] for k in _SPEC_FIELDS},
                       options={k: v for k, v in values.items() if k not in _SPEC_FIELDS})
    except (UsageError, UnknownCommand) as exc:
        print(f"deltaspec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
