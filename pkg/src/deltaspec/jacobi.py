"""Jacobi matrices of delta and delta' configurations, and tridiagonal inertia."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from deltaspec.errors import (
    InsufficientSequence,
    KindMismatch,
    NonPositiveBeta,
    NonPositiveSpacing,
)
from deltaspec.model import HamiltonianConfig, Kind, Support
from deltaspec.sequences import Finite, SymbolicSequence

#: Relative pivot size below which a pivot is treated as zero.
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class SymTridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        off = np.asarray(self.offdiag, dtype=float)
        if off.shape != (max(len(diag) - 1, 0),):
            raise ValueError("offdiag must have length n - 1")
        if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
            raise ValueError("tridiagonal entries must be finite")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def n(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def max_abs(self) -> float:
        vals = np.concatenate((np.abs(self.diag), np.abs(self.offdiag)))
        return float(vals.max()) if vals.size else 0.0


@dataclass(frozen=True)
class InertiaTriple:
    kappa_minus: int
    kappa_zero: int
    kappa_plus: int

    @property
    def size(self) -> int:
        return self.kappa_minus + self.kappa_zero + self.kappa_plus


def _gaps(support: Support, count: int) -> np.ndarray:
    if support.is_finite and support.size < count:
        raise InsufficientSequence(f"need {count} gaps, support has {support.size}")
    return support.d(count)


def build_delta_jacobi(support: Support, alpha: SymbolicSequence, n: int) -> SymTridiagonal:
    d = _gaps(support, n + 1)
    a = alpha.values(n)
    r2 = d[:n] + d[1 : n + 1]
    diag = (a + 1.0 / d[:n] + 1.0 / d[1 : n + 1]) / r2
    r = np.sqrt(r2)
    off = 1.0 / (r[:-1] * r[1:] * d[1:n])
    return SymTridiagonal(diag, off)


def _inv(beta: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(np.isinf(beta), 0.0, 1.0 / beta)


def build_delta_prime_jacobi(support: Support, beta: SymbolicSequence, n: int) -> SymTridiagonal:
    d = _gaps(support, (n + 1) // 2)  # row 2k+1 needs d_{k+1}
    b_count = n // 2
    ib = _inv(beta.values(b_count)) if b_count else np.zeros(0)
    diag = np.empty(n)
    off = np.empty(max(n - 1, 0))
    diag[0] = d[0] ** -2
    for i in range(1, n):  # 0-based row i is 1-based row i+1
        row = i + 1
        k = row // 2
        if row % 2 == 0:
            diag[i] = ib[k - 1] / d[k - 1] + d[k - 1] ** -2
        else:
            diag[i] = ib[k - 1] / d[k] + d[k] ** -2
    for i in range(n - 1):
        row = i + 1
        if row % 2 == 1:
            k = (row + 1) // 2
            off[i] = d[k - 1] ** -2
        else:
            k = row // 2
            off[i] = ib[k - 1] / math.sqrt(d[k - 1] * d[k])
    return SymTridiagonal(diag, off)


class ShiftConvention(str, enum.Enum):
    ROW_SHIFT = "RowShift"  # ones on the subdiagonal
    COLUMN_SHIFT = "ColumnShift"  # ones on the superdiagonal


@dataclass(frozen=True)
class FactorizationParts:
    R: np.ndarray
    D: np.ndarray
    shift_convention: ShiftConvention
    residual: float


def _shift(n: int, convention: ShiftConvention) -> np.ndarray:
    return np.eye(n, k=-1 if convention is ShiftConvention.ROW_SHIFT else 1)


def _reconstruct(R: np.ndarray, D: np.ndarray, convention: ShiftConvention) -> np.ndarray:
    n = len(R)
    left = np.eye(n) + _shift(n, convention)
    rinv = np.diag(1.0 / R)
    return rinv @ left @ np.diag(1.0 / D) @ left.T @ rinv


def _factor_diagonals(d: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.repeat(np.sqrt(d), 2), np.column_stack((d, beta)).ravel()


def _pick_convention() -> ShiftConvention:
    """Choose the convention whose product reproduces the builder at size four."""
    d = np.array([1.0, 2.0, 3.0])
    beta = np.array([0.5, 4.0])
    target = build_delta_prime_jacobi(Support.finite([1, 3, 6]), Finite(tuple(beta)), 4).dense()
    R, D = _factor_diagonals(d[:2], beta)
    errs = {c: np.abs(_reconstruct(R, D, c) - target).max() for c in ShiftConvention}
    return min(errs, key=errs.get)


def factor_delta_prime(support: Support, beta: SymbolicSequence, n: int) -> FactorizationParts:
    if n % 2:
        raise ValueError("factorization needs an even dimension")
    m = n // 2
    d = _gaps(support, m)
    if np.any(d <= 0):
        raise NonPositiveSpacing("gaps must be positive")
    b = beta.values(m)
    if np.any(~np.isfinite(b)) or np.any(b == 0):
        raise ValueError("factorization needs finite nonzero beta")
    conv = _pick_convention()
    R, D = _factor_diagonals(d, b)
    target = build_delta_prime_jacobi(support, beta, n).dense()
    # scaled by the largest entry: an absolute bound is below one ulp once entries pass ~1e4
    residual = float(np.abs(_reconstruct(R, D, conv) - target).max() / max(np.abs(target).max(), 1.0))
    return FactorizationParts(np.diag(R), np.diag(D), conv, residual)


def krein_string_map(support: Support, beta: SymbolicSequence, count: int | None = None):
    """Lengths ``(d_1, beta_1, d_2, beta_2, ...)`` and masses ``(d_1, d_1, d_2, d_2, ...)``."""
    count = count if count is not None else support.size
    if count is None:
        raise ValueError("count is required for infinite supports")
    d = _gaps(support, count)
    b = beta.values(count)
    if np.any(b <= 0) or np.any(~np.isfinite(b)):
        raise NonPositiveBeta("the string picture needs positive finite beta")
    lengths = np.column_stack((d, b)).ravel()
    masses = np.repeat(d, 2)
    return lengths, masses


def inertia(matrix: SymTridiagonal, shift: float = 0.0) -> InertiaTriple:
    """Signature of ``matrix - shift*I`` by the LDL^T pivot recurrence.

    A pivot smaller than ``PIVOT_TOL`` times the largest entry hands the whole
    matrix to a symmetric eigendecomposition, counted with the same threshold.
    """
    n = matrix.n
    if n == 0:
        return InertiaTriple(0, 0, 0)
    scale = max(matrix.max_abs(), abs(shift), np.finfo(float).tiny)
    tol = PIVOT_TOL * scale
    a = matrix.diag - shift
    b2 = matrix.offdiag**2
    neg = pos = 0
    pivot = a[0]
    for i in range(n):
        if i:
            pivot = a[i] - b2[i - 1] / pivot
        if abs(pivot) <= tol:
            return dense_inertia(matrix.dense() - shift * np.eye(n), tol)
        if pivot < 0:
            neg += 1
        else:
            pos += 1
    return InertiaTriple(neg, 0, pos)


def dense_inertia(a: np.ndarray, tol: float | None = None) -> InertiaTriple:
    """Signature from eigenvalues; eigenvalues within ``tol`` of zero count as zero."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return InertiaTriple(0, 0, 0)
    if tol is None:
        tol = PIVOT_TOL * max(float(np.abs(a).max()), np.finfo(float).tiny)
    ev = np.linalg.eigvalsh(a)
    zero = np.abs(ev) <= tol * max(1.0, len(a))
    return InertiaTriple(int(np.sum((ev < 0) & ~zero)), int(np.sum(zero)), int(np.sum((ev > 0) & ~zero)))


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[tuple[int, int], ...]
    stabilized: bool

    @property
    def final(self) -> int:
        return self.rows[-1][1]


def _padded(config: HamiltonianConfig, count: int) -> tuple[Support, SymbolicSequence]:
    """Finite data extended by unit gaps and inert strengths (0 for delta, inf for delta')."""
    sup = config.support
    if not sup.is_finite or sup.size >= count:
        return sup, config.strengths
    pad = 0.0 if config.kind is Kind.DELTA else math.inf
    pts = list(sup.points)
    last = pts[-1] if pts else Fraction(0)
    pts += [last + i for i in range(1, count - len(pts) + 1)]
    vals = list(config.strengths.values(sup.size)) + [pad] * (count - sup.size)
    return Support.finite(pts), Finite(tuple(vals))


def truncation_matrix(config: HamiltonianConfig, n: int) -> SymTridiagonal:
    if config.kind is Kind.DELTA:
        sup, seq = _padded(config, n + 1)
        return build_delta_jacobi(sup, seq, n)
    if config.kind is Kind.DELTA_PRIME:
        sup, seq = _padded(config, (n + 1) // 2)
        return build_delta_prime_jacobi(sup, seq, n)
    raise KindMismatch(config.kind)


def truncation_sweep(config: HamiltonianConfig, n_list) -> SweepResult:
    """kappa_minus of each ``n x n`` truncation; stabilized when the trailing half agrees."""
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list is empty")
    rows = tuple((n, inertia(truncation_matrix(config, n)).kappa_minus) for n in n_list)
    tail = [k for _, k in rows[len(rows) // 2 :]]
    return SweepResult(rows, len(set(tail)) == 1)
