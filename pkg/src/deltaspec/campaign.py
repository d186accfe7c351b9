"""Seeded random finite configurations and the cross-module verification campaign."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from deltaspec import jacobi, negspec, spectra
from deltaspec.errors import DeltaSpecError
from deltaspec.model import HamiltonianConfig, delta, delta_prime

GAP_RANGE = (1e-2, 10.0)
ALPHA_RANGE = (-5.0, 5.0)
ALPHA_DEAD_ZONE = 1e-3
BETA_RANGE = (1e-2, 10.0)


def _log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def random_points(rng: np.random.Generator, count: int) -> list[float]:
    return list(np.cumsum(_log_uniform(rng, *GAP_RANGE, count)))


def random_alpha(rng: np.random.Generator, count: int) -> list[float]:
    out = []
    while len(out) < count:
        a = float(rng.uniform(*ALPHA_RANGE))
        if abs(a) >= ALPHA_DEAD_ZONE:
            out.append(a)
    return out


def random_beta(rng: np.random.Generator, count: int) -> list[float]:
    mags = _log_uniform(rng, *BETA_RANGE, count)
    signs = rng.choice([-1.0, 1.0], count)
    return [float(m * s) for m, s in zip(mags, signs)]


def random_delta(rng: np.random.Generator, max_points: int = 8) -> HamiltonianConfig:
    n = int(rng.integers(1, max_points + 1))
    return delta(random_points(rng, n), random_alpha(rng, n))


def random_delta_prime(rng: np.random.Generator, max_points: int = 8) -> HamiltonianConfig:
    n = int(rng.integers(1, max_points + 1))
    return delta_prime(random_points(rng, n), random_beta(rng, n))


def state_relative_error(a: spectra.ShootState, b: spectra.ShootState) -> float:
    fa, pa = a.unscaled()
    fb, pb = b.unscaled()
    return math.hypot(fa - fb, pa - pb) / max(math.hypot(fb, pb), np.finfo(float).tiny)


# campaign


CHECKS = (
    "kappa_delta",
    "bargmann",
    "trace_identity",
    "kappa_delta_prime",
    "factorization",
    "cross_oracle",
    "truncation",
)


@dataclass
class CheckTally:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first_failure: dict | None = None

    def record(self, ok: bool | None, instance: int, config: HamiltonianConfig, detail: dict) -> None:
        if ok is None:
            self.skipped += 1
        elif ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = {"instance": instance, "config": config.to_json(), **detail}

    def to_json(self) -> dict:
        return {"passed": self.passed, "failed": self.failed, "skipped": self.skipped,
                "first_failure": self.first_failure}


@dataclass
class CampaignSummary:
    seed: int
    instances: int
    tol: float
    checks: dict = field(default_factory=dict)

    @property
    def disagreements(self) -> int:
        return sum(t.failed for t in self.checks.values())

    def to_json(self) -> dict:
        return {"seed": self.seed, "instances": self.instances, "tol": self.tol,
                "disagreements": self.disagreements,
                "checks": {name: t.to_json() for name, t in self.checks.items()}}


def _safe(fn):
    try:
        ok, detail = fn()
    except DeltaSpecError as exc:
        return False, {"error": f"{type(exc).__name__}: {exc}"}
    return ok, detail


def _delta_checks(cfg: HamiltonianConfig, tol: float, energy: float) -> dict:
    res = {}

    def kappa():
        m = negspec.kappa_minus_delta(cfg.support, cfg.strengths)
        o = spectra.kappa_oracle_delta(cfg)
        s = spectra.secular_scan(cfg).count
        return m == o == s, {"M_matrix": m, "oracle": o, "secular": s}

    res["kappa_delta"] = _safe(kappa)

    def bargmann():
        if not np.any(cfg.strengths_values() < 0):
            return None, {}
        k = negspec.kappa_minus_delta(cfg.support, cfg.strengths)
        bound = negspec.bargmann_bound(cfg)
        return k < bound, {"kappa": k, "bound": bound}

    res["bargmann"] = _safe(bargmann)

    def trace():
        neg = -np.abs(cfg.strengths_values())
        t = negspec.trace_identity_check(cfg.support, neg)
        return t.difference <= tol * max(1.0, abs(t.rhs)), {"lhs": t.lhs, "rhs": t.rhs}

    res["trace_identity"] = _safe(trace)

    def cross():
        to = spectra.last_edge(cfg) + 1.0
        a = spectra.propagate(cfg, energy, to)
        b = spectra.quasi_derivative_propagate(cfg, energy, to)
        err = state_relative_error(a, b)
        return err <= max(tol, 1e-8), {"E": energy, "relative_error": err}

    res["cross_oracle"] = _safe(cross)

    def truncation():
        sweep = jacobi.truncation_sweep(cfg, [8, 16, 32, 64])
        o = spectra.kappa_oracle_delta(cfg)
        return sweep.stabilized and sweep.final == o, {"rows": [list(r) for r in sweep.rows], "oracle": o}

    res["truncation"] = _safe(truncation)
    return res


def _delta_prime_checks(cfg: HamiltonianConfig) -> dict:
    res = {}

    def kappa():
        s = spectra.secular_scan(cfg).count
        k = negspec.kappa_minus_delta_prime(cfg.strengths_values())
        return s == k, {"secular": s, "negative_beta": k}

    res["kappa_delta_prime"] = _safe(kappa)

    def factor():
        n = 2 * cfg.n_points
        parts = jacobi.factor_delta_prime(cfg.support, cfg.strengths, n)
        return parts.residual < 1e-12, {"n": n, "residual": parts.residual}

    res["factorization"] = _safe(factor)
    return res


def _run_instance(job: tuple) -> list[tuple]:
    d_cfg, energy, p_cfg, tol = job
    out = [(name, ok, d_cfg, detail) for name, (ok, detail) in _delta_checks(d_cfg, tol, energy).items()]
    out += [(name, ok, p_cfg, detail) for name, (ok, detail) in _delta_prime_checks(p_cfg).items()]
    return out


def campaign_jobs(seed: int, instances: int, tol: float) -> list[tuple]:
    rng = np.random.default_rng(seed)
    jobs = []
    for _ in range(instances):
        d_cfg = random_delta(rng)
        energy = float(rng.uniform(-10.0, 10.0))
        jobs.append((d_cfg, energy, random_delta_prime(rng, max_points=5), tol))
    return jobs


def verify_campaign(seed: int, instances: int, tol: float = 1e-10, workers: int = 1) -> CampaignSummary:
    """Run every cross-module check on a deterministic stream of random configurations.

    Instances are drawn up front from one generator, so the summary does not
    depend on ``workers``.
    """
    if instances < 1:
        raise ValueError("instances must be at least 1")
    jobs = campaign_jobs(seed, instances, tol)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_instance, jobs, chunksize=max(1, instances // (4 * workers))))
    else:
        results = [_run_instance(job) for job in jobs]
    summary = CampaignSummary(seed, instances, tol, {name: CheckTally() for name in CHECKS})
    for i, rows in enumerate(results):
        for name, ok, cfg, detail in rows:
            summary.checks[name].record(ok, i, cfg, detail)
    return summary
