"""Exact negative-eigenvalue counts for finite configurations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from deltaspec.errors import (
    Inapplicable,
    KindMismatch,
    NegativeResult,
    NonNegativeAlpha,
    ZeroAlpha,
    ZeroBetaStrength,
)
from deltaspec.jacobi import PIVOT_TOL, InertiaTriple, dense_inertia
from deltaspec.model import HamiltonianConfig, Kind, Part, Support


def _finite_arrays(support: Support, alpha) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([float(p) for p in support.points], dtype=float)
    a = np.asarray(alpha.values(len(x)) if hasattr(alpha, "values") else alpha, dtype=float)
    if len(a) != len(x):
        raise ValueError(f"{len(a)} strengths for {len(x)} points")
    return x, a


def build_M_matrix(support: Support, alpha) -> np.ndarray:
    """``M[j, j] = 1/alpha_j + x_j`` and ``M[j, k] = x_min(j,k)``."""
    x, a = _finite_arrays(support, alpha)
    if np.any(a == 0):
        raise ZeroAlpha("zero strengths must be removed before building M")
    idx = np.arange(len(x))
    m = x[np.minimum.outer(idx, idx)]
    m[idx, idx] += 1.0 / a
    return m


def symmetric_inertia(a: np.ndarray) -> InertiaTriple:
    """Signature by Bunch-Kaufman LDL^T; tiny pivots defer to eigenvalues."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return InertiaTriple(0, 0, 0)
    tol = PIVOT_TOL * max(float(np.abs(a).max()), np.finfo(float).tiny)
    _, d, _ = scipy.linalg.ldl(a, lower=True)
    ev = []
    i, n = 0, len(a)
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0:
            ev.extend(np.linalg.eigvalsh(d[i : i + 2, i : i + 2]))
            i += 2
        else:
            ev.append(d[i, i])
            i += 1
    ev = np.array(ev)
    if np.any(np.abs(ev) <= tol):
        return dense_inertia(a, tol)
    return InertiaTriple(int(np.sum(ev < 0)), 0, int(np.sum(ev > 0)))


def _strip_zeros(support: Support, alpha) -> tuple[Support, np.ndarray]:
    x, a = _finite_arrays(support, alpha)
    keep = a != 0
    return Support.finite([p for p, k in zip(support.points, keep) if k]), a[keep]


def kappa_minus_delta(support: Support, alpha) -> int:
    """Number of negative eigenvalues of a finite delta configuration with q = 0.

    Zero strengths are dropped together with their points.
    """
    support, a = _strip_zeros(support, alpha)
    if len(a) == 0:
        return 0
    plus_m = symmetric_inertia(build_M_matrix(support, a)).kappa_plus
    result = plus_m - int(np.sum(a > 0))
    if result < 0:
        raise NegativeResult(f"kappa_plus(M) = {plus_m} is below the number of positive strengths")
    return result


def kappa_minus_delta_prime(beta) -> int:
    values = [float(b) for b in beta]
    if any(b == 0 for b in values):
        raise ZeroBetaStrength("beta entries must be nonzero")
    return sum(1 for b in values if b < 0)


def bargmann_bound(config: HamiltonianConfig) -> float:
    """``int q_- + sum alpha_k^- x_k``, a strict upper bound for kappa_minus."""
    if config.kind is not Kind.DELTA:
        raise KindMismatch("the bound is stated for delta interactions")
    x, a = _finite_arrays(config.support, config.strengths)
    pot = config.potential
    if pot.tail < 0:
        raise Inapplicable("negative tail potential has infinite negative mass")
    q_mass = pot.integral(0.0, pot.last_breakpoint, Part.NEGATIVE)
    alpha_mass = math.fsum(max(-v, 0.0) * xk for v, xk in zip(a, x))
    if q_mass == 0 and alpha_mass == 0:
        raise Inapplicable("no negative part in q or alpha")
    return q_mass + alpha_mass


def check_bargmann(config: HamiltonianConfig, kappa: int) -> bool:
    return kappa < bargmann_bound(config)


@dataclass(frozen=True)
class TraceCheck:
    lhs: float
    rhs: float
    difference: float


def trace_identity_check(support: Support, alpha) -> TraceCheck:
    """Compare ``tr(L^1/2 M_X L^1/2)`` with ``sum |alpha_k| x_k`` where ``M_X[j,k] = x_min(j,k)``."""
    x, a = _finite_arrays(support, alpha)
    if np.any(a >= 0):
        raise NonNegativeAlpha("all strengths must be negative")
    idx = np.arange(len(x))
    mx = x[np.minimum.outer(idx, idx)]
    root = np.diag(np.sqrt(np.abs(a)))
    lhs = float(np.trace(root @ mx @ root))
    rhs = math.fsum(np.abs(a) * x)
    return TraceCheck(lhs, rhs, abs(lhs - rhs))
