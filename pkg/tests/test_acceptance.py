"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import rule, symbolic
from deltaspec import criteria, jacobi, negspec, spectra
from deltaspec.campaign import random_beta, random_delta, random_delta_prime, random_points, state_relative_error
from deltaspec.errors import DeltaSpecError
from deltaspec.model import delta, delta_prime

SEED = 20240611


@pytest.fixture(scope="module")
def report(request):
    lines = []
    yield lambda n, ok, detail: lines.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    writer = request.config.pluginmanager.get_plugin("terminalreporter")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        if writer is not None:
            writer.write_line(line)
        else:
            print(line)


@lru_cache(maxsize=None)
def delta_instances(count=200, seed=SEED):
    rng = np.random.default_rng(seed)
    return tuple(random_delta(rng) for _ in range(count))


def test_01_m_matrix_matches_oracles(report):
    configs = delta_instances()
    start = time.perf_counter()
    bad = []
    for i, cfg in enumerate(configs):
        try:
            m = negspec.kappa_minus_delta(cfg.support, cfg.strengths)
            o = spectra.kappa_oracle_delta(cfg)
            s = spectra.secular_scan(cfg).count
        except DeltaSpecError as exc:
            bad.append((i, repr(exc)))
            continue
        if not m == o == s:
            bad.append((i, (m, o, s)))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10.0
    report(1, ok, f"{len(configs)} delta configs, {len(bad)} disagreements, {elapsed:.2f} s (limit 10 s)")
    assert not bad, bad[:3]
    assert elapsed < 10.0


def test_02_delta_prime_count_is_negative_beta(report):
    rng = np.random.default_rng(SEED + 1)
    configs = [random_delta_prime(rng, max_points=5) for _ in range(100)]
    start = time.perf_counter()
    bad = []
    for i, cfg in enumerate(configs):
        try:
            s = spectra.secular_scan(cfg).count
        except DeltaSpecError as exc:
            bad.append((i, repr(exc)))
            continue
        if s != negspec.kappa_minus_delta_prime(cfg.strengths_values()):
            bad.append((i, s))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30.0
    report(2, ok, f"{len(configs)} delta' configs, {len(bad)} disagreements, {elapsed:.2f} s (limit 30 s)")
    assert not bad, bad[:3]
    assert elapsed < 30.0


def test_03_bargmann_strict(report):
    applicable = violations = 0
    for cfg in delta_instances():
        if not np.any(cfg.strengths_values() < 0):
            continue
        applicable += 1
        k = negspec.kappa_minus_delta(cfg.support, cfg.strengths)
        if not k < negspec.bargmann_bound(cfg):
            violations += 1
    report(3, violations == 0, f"{applicable} applicable instances, {violations} violations")
    assert applicable > 0 and violations == 0


def test_04_trace_identity(report):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(100):
        cfg = random_delta(rng)
        t = negspec.trace_identity_check(cfg.support, -np.abs(cfg.strengths_values()))
        worst = max(worst, t.difference / max(abs(t.rhs), np.finfo(float).tiny))
    report(4, worst <= 1e-10, f"100 all-negative instances, worst relative gap {worst:.2e} (limit 1e-10)")
    assert worst <= 1e-10


def test_05_factorization_residual(report):
    rng = np.random.default_rng(SEED + 5)
    worst, sizes = 0.0, []
    for _ in range(50):
        n_points = int(rng.integers(1, 101))
        cfg = delta_prime(random_points(rng, n_points), random_beta(rng, n_points))
        parts = jacobi.factor_delta_prime(cfg.support, cfg.strengths, 2 * n_points)
        worst = max(worst, parts.residual)
        sizes.append(2 * n_points)
    report(5, worst < 1e-12, f"50 delta' configs, n from {min(sizes)} to {max(sizes)}, "
                             f"worst max-entry residual {worst:.2e} (limit 1e-12)")
    assert max(sizes) <= 200 and worst < 1e-12


def test_06_cross_oracle_propagation(report):
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(100):
        cfg = random_delta(rng, max_points=6)
        E = float(rng.uniform(-10.0, 10.0))
        to = spectra.last_edge(cfg) + 1.0
        err = state_relative_error(spectra.propagate(cfg, E, to), spectra.quasi_derivative_propagate(cfg, E, to))
        worst = max(worst, err)
    report(6, worst <= 1e-8, f"100 delta configs, worst relative error {worst:.2e} (limit 1e-8)")
    assert worst <= 1e-8


def _interleaved(odd, even):
    return {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": odd},
                     "even": {"type": "expr", "expr": even}}}


REGRESSION = [
    ("strong harmonic attraction", ("delta", {"gaps": rule("1/k")}, rule("-(2*k+1)")),
     "self_adjointness", "NotSelfAdjoint_n1"),
    ("harmonic, cubic growth", ("delta", {"gaps": rule("1/k")}, rule("k^3")), "self_adjointness", "SelfAdjoint"),
    ("harmonic, -5k", ("delta", {"gaps": rule("1/k")}, rule("-5*k")), "self_adjointness", "SelfAdjoint"),
    ("harmonic, -1/k", ("delta", {"gaps": rule("1/k")}, rule("-1/k")), "self_adjointness", "SelfAdjoint"),
    ("harmonic, -(2k+1) + k^-1/2", ("delta", {"gaps": rule("1/k")}, rule("-(2*k+1)+k^(-1/2)")),
     "self_adjointness", "NotSelfAdjoint_n1"),
    ("harmonic, -1.5(2k+1) + 1/k", ("delta", {"gaps": rule("1/k")}, rule("-(3/2)*(2*k+1)+1/k")),
     "self_adjointness", "NotSelfAdjoint_n1"),
    ("gaps k^-1/2, -k^3", ("delta", {"gaps": rule("k^(-1/2)")}, rule("-k^3")), "self_adjointness", "SelfAdjoint"),
    ("gaps k^-1/3, -k^2", ("delta", {"gaps": rule("k^(-1/3)")}, rule("-k^2")), "self_adjointness", "SelfAdjoint"),
    ("x = 2 sqrt k, C = 5", ("delta", rule("2*sqrt(k)"), rule("-5*sqrt(k)")), "discreteness", "Discrete"),
    ("x = 2 sqrt k, C = 2", ("delta", rule("2*sqrt(k)"), rule("-2*sqrt(k)")), "discreteness", "NotDiscrete"),
    ("positive delta' strengths", ("delta_prime", {"gaps": rule("1/k")}, rule("k")), "discreteness", "NotDiscrete"),
    ("gaps outside l3", ("delta_prime", {"gaps": rule("k^(-1/4)")}, rule("-k")), "discreteness", "NotDiscrete"),
    ("delta' with d_k -> 0", ("delta_prime", {"gaps": rule("1/k")}, rule("k^3")),
     "essential_spectrum", "ZeroSingleton"),
    ("mixed-sign close pairs", ("delta", _interleaved("k", "k+2^(-3*k)"), _interleaved("2^k", "-2^k")),
     "semiboundedness", "Unknown"),
]


def test_07_verdict_regression(report):
    mismatches = []
    for label, (kind, support, strengths), category, expected in REGRESSION:
        got = criteria.analyze(symbolic(kind, support, strengths)).conclusion(category)
        if got != expected:
            mismatches.append(f"{label}: {category} {got} != {expected}")
    report(7, not mismatches, f"{len(REGRESSION)} families, {len(mismatches)} mismatches")
    assert not mismatches


def test_08_truncation_stabilizes(report):
    rng = np.random.default_rng(SEED + 8)
    failures = []
    for i in range(20):
        if i % 2:
            cfg = random_delta_prime(rng, max_points=6)
            oracle = negspec.kappa_minus_delta_prime(cfg.strengths_values())
        else:
            cfg = random_delta(rng, max_points=6)
            oracle = spectra.kappa_oracle_delta(cfg)
        sweep = jacobi.truncation_sweep(cfg, [8, 16, 32, 64])
        if not (sweep.stabilized and sweep.final == oracle):
            failures.append((i, [list(r) for r in sweep.rows], oracle))
    report(8, not failures, f"20 configs (10 delta, 10 delta'), {len(failures)} not stabilized at the oracle by n = 64")
    assert not failures, failures[:3]


def test_09_free_dirichlet(report):
    vals = spectra.truncated_eigs(delta([], []), math.pi, 5).values
    err = float(np.max(np.abs(vals - np.array([1.0, 4.0, 9.0, 16.0, 25.0]))))
    report(9, err <= 1e-8, f"L = pi, first five eigenvalues, max error {err:.2e} (limit 1e-8)")
    assert err <= 1e-8


def test_10_form_identity(report):
    rng = np.random.default_rng(SEED + 10)
    pairs, worst = 0, 0.0
    while pairs < 20:
        cfg = random_delta(rng, max_points=4)
        for e in spectra.secular_scan(cfg).eigs[:2]:
            fn = spectra.eigenfunction(cfg, e.E)
            norm = fn.norm_sq()
            worst = max(worst, abs(spectra.eval_form(cfg, fn) - e.E * norm) / abs(e.E * norm))
            pairs += 1
    report(10, worst <= 1e-8, f"{pairs} bound states, worst relative defect {worst:.2e} (limit 1e-8)")
    assert worst <= 1e-8
