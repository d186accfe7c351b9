"""Shooting oracles for finite configurations.

Solutions of ``-f'' + q f = E f`` are propagated cell by cell in closed form
(trigonometric, hyperbolic or linear) and composed with the interaction jumps.
States are kept normalised with a separate log-scale so long hyperbolic
stretches cannot overflow; every sign and zero count is scale-free.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from deltaspec.errors import (
    DecoupledBeyondWall,
    Inapplicable,
    KindMismatch,
    RegularityMismatch,
    SuspectClustering,
    SweepResolution,
)
from deltaspec.model import HamiltonianConfig, Kind, primitive_V

log = logging.getLogger(__name__)

KAPPA_MIN = 1e-4
DEGENERATE_TOL = 1e-13
#: dips of |A| shallower than this fraction of their neighbours are never read as hidden root pairs
NEAR_DOUBLE_DEPTH = 1e-3
#: bracket refinement: samples per level, stopping width (relative) and depth cap
RESOLVE_SAMPLES = 16
RESOLVE_WIDTH = 1e-10
RESOLVE_DEPTH = 12
ZOOM_LEVELS = 12
#: samples within this fraction of a straight line certify a single simple root
LINEAR_FIT_TOL = 1e-3


@dataclass(frozen=True)
class ShootState:
    """``(f, f')`` at ``position``; true values are these times ``exp(log_scale)``."""

    position: float
    f: float
    fprime: float
    log_scale: float = 0.0
    decoupled: bool = False

    def unscaled(self) -> tuple[float, float]:
        s = math.exp(self.log_scale)
        return self.f * s, self.fprime * s


@dataclass(frozen=True)
class Eigenpair:
    E: float
    E_low: float
    E_high: float
    index: int | None


@dataclass(frozen=True)
class EigList:
    eigs: tuple[Eigenpair, ...]
    samples: tuple[tuple[float, float], ...] = field(default=(), repr=False)
    flags: tuple[str, ...] = ()

    @property
    def count(self) -> int:
        return len(self.eigs)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.E for e in self.eigs])


# layout of a configuration


def _interactions(config: HamiltonianConfig, upto: float) -> list[tuple[float, float]]:
    """``(x_k, strength_k)`` with ``x_k <= upto``."""
    sup = config.support
    if sup.is_finite:
        n = sup.size
        xs, vs = sup.x(n), config.strengths.values(n)
        return [(float(x), float(v)) for x, v in zip(xs, vs) if x <= upto]
    count = 16
    while True:
        xs = sup.x(count)
        if xs[-1] > upto or count > 1 << 20:
            vs = config.strengths.values(count)
            return [(float(x), float(v)) for x, v in zip(xs, vs) if x <= upto]
        count *= 2


def _program(config: HamiltonianConfig, upto: float) -> list[tuple]:
    """Operations ``("cell", length, q)`` and ``("jump", x, strength)`` covering ``(0, upto]``."""
    events = {x: s for x, s in _interactions(config, upto)}
    for b in config.potential.breakpoints:
        if b <= upto:
            events.setdefault(b, None)
    ops, prev = [], 0.0
    for x in sorted(events):
        if x > prev:
            ops.append(("cell", x - prev, config.potential.value(prev), prev))
        if events[x] is not None:
            ops.append(("jump", x, events[x]))
        prev = x
    if upto > prev and math.isfinite(upto):
        ops.append(("cell", upto - prev, config.potential.value(prev), prev))
    return ops


def last_edge(config: HamiltonianConfig) -> float:
    """Position beyond which the configuration is free with constant tail potential."""
    if not config.is_finite:
        raise Inapplicable("needs finitely many interactions")
    xs = [float(p) for p in config.support.points]
    return max(xs + [config.potential.last_breakpoint, 0.0])


# vectorised closed-form kernels


def _renorm(f, fp, logs):
    nrm = np.hypot(f, fp)
    nrm = np.where(nrm > 0, nrm, 1.0)
    return f / nrm, fp / nrm, logs + np.log(nrm)


def _cell(f, fp, logs, lam, length):
    """Advance across a cell of constant ``lam = q - E``."""
    lam = np.asarray(lam, dtype=float)
    s = np.sqrt(np.abs(lam))
    safe = np.where(s > 0, s, 1.0)
    u = s * length
    e = np.exp(-2.0 * u)
    ch = 0.5 * (1.0 + e)
    sh_s = np.where(s > 0, -0.5 * np.expm1(-2.0 * u) / safe, length)
    fh = f * ch + fp * sh_s
    fph = f * lam * sh_s + fp * ch
    with np.errstate(invalid="ignore"):
        c, sn = np.cos(u), np.sin(u)
    sn_s = np.where(s > 0, sn / safe, length)
    ft = f * c + fp * sn_s
    fpt = -f * s * sn + fp * c
    hyp, trig = lam > 0, lam < 0
    f_new = np.where(hyp, fh, np.where(trig, ft, f + fp * length))
    fp_new = np.where(hyp, fph, np.where(trig, fpt, fp))
    return _renorm(f_new, fp_new, logs + np.where(hyp, u, 0.0))


def _jump(kind: Kind, f, fp, strength):
    if kind is Kind.DELTA:
        return f, fp + strength * f
    return f + strength * fp, fp


def _run(kind: Kind, ops, E, start=(0.0, 1.0)):
    E = np.asarray(E, dtype=float)
    f = np.full(E.shape, start[0], dtype=float)
    fp = np.full(E.shape, start[1], dtype=float)
    logs = np.zeros(E.shape)
    for op in ops:
        if op[0] == "cell":
            f, fp, logs = _cell(f, fp, logs, op[2] - E, op[1])
        else:
            f, fp = _jump(kind, f, fp, op[2])
            f, fp, logs = _renorm(f, fp, logs)
    return f, fp, logs


# propagation


def propagate(config: HamiltonianConfig, E: float, to: float, side: str = "+", strict: bool = False) -> ShootState:
    """Dirichlet solution ``(f, f')(0) = (0, 1)`` at ``to`` (after a jump at ``to`` when ``side='+'``)."""
    if to < 0:
        raise ValueError("position must be nonnegative")
    ops = _program(config, to)
    if side == "-":
        ops = [op for op in ops if not (op[0] == "jump" and op[1] == to)]
    f, fp, logs = np.array(0.0), np.array(1.0), np.array(0.0)
    decoupled = False
    for op in ops:
        if op[0] == "cell":
            f, fp, logs = _cell(f, fp, logs, op[2] - E, op[1])
        elif config.kind is Kind.DELTA_PRIME and math.isinf(op[2]):
            if strict:
                raise DecoupledBeyondWall(f"Neumann point at {op[1]}")
            decoupled = True
            fp = np.array(0.0)
            f, fp, logs = _renorm(f, fp, logs)
        else:
            f, fp = _jump(config.kind, f, fp, op[2])
            f, fp, logs = _renorm(f, fp, logs)
    state = ShootState(float(to), float(f), float(fp), float(logs), decoupled)
    if state.log_scale < 700:
        fv, fpv = state.unscaled()
        return ShootState(float(to), fv, fpv, 0.0, decoupled)
    return state


# zero counting (delta only)


def _sign(v: float) -> int:
    return 0 if v == 0 else (1 if v > 0 else -1)


def _cell_zeros(f0, fp0, lam, length, f1) -> int:
    """Zeros in ``(0, length]`` of the cell solution starting at ``(f0, fp0)``."""
    s0, s1 = _sign(f0), _sign(f1)
    if lam < 0:
        k = math.sqrt(-lam)
        th0 = math.atan2(k * f0, fp0)
        th1 = th0 + k * length
        c = math.floor(th1 / math.pi) - math.floor(th0 / math.pi)
        if s0 != 0 and s1 != 0 and s1 != s0 * (-1) ** c:
            frac = th1 / math.pi - math.floor(th1 / math.pi)
            c += -1 if frac < 0.5 else 1
        return max(c, 0)
    return 1 if s0 != 0 and s1 != s0 else 0


def _tail_zeros(f0, fp0, lam) -> int:
    """Zeros in ``(0, inf)`` of a solution on an infinite cell with ``lam >= 0``."""
    if lam < 0:
        raise ValueError("infinitely many zeros above the tail potential")
    if f0 == 0 or fp0 == 0 or _sign(f0) == _sign(fp0):
        return 0
    if lam == 0:
        return 1
    return 1 if abs(fp0) > math.sqrt(lam) * abs(f0) else 0


def zero_count(config: HamiltonianConfig, E: float, interval=(0.0, math.inf)) -> int:
    """Zeros of the Dirichlet solution in the open interval; a zero at a cell edge counts once."""
    if config.kind is not Kind.DELTA:
        raise KindMismatch("oscillation counting is used for delta interactions only")
    a, b = float(interval[0]), float(interval[1])
    if not 0 <= a < b:
        raise ValueError("interval must satisfy 0 <= a < b")
    end = b if math.isfinite(b) else last_edge(config)
    ops = _program(config, max(end, a))
    cuts = sorted({a, end})
    f, fp, logs = np.array(0.0), np.array(1.0), np.array(0.0)
    pos, count = 0.0, 0
    for op in ops:
        if op[0] == "jump":
            f, fp = _jump(Kind.DELTA, f, fp, op[2])
            f, fp, logs = _renorm(f, fp, logs)
            continue
        lo, hi, q = pos, pos + op[1], op[2]
        pieces = [lo] + [c for c in cuts if lo < c < hi] + [hi]
        for p0, p1 in zip(pieces, pieces[1:]):
            nf, nfp, nlogs = _cell(f, fp, logs, q - E, p1 - p0)
            if p0 >= a and p1 <= end:
                count += _cell_zeros(float(f), float(fp), q - E, p1 - p0, float(nf))
            f, fp, logs = nf, nfp, nlogs
        pos = hi
    if math.isfinite(b):
        if abs(float(f)) < DEGENERATE_TOL and count:
            count -= 1  # a zero exactly at b lies outside the open interval
        return count
    return count + _tail_zeros(float(f), float(fp), config.potential.tail - E)


def kappa_oracle_delta(config: HamiltonianConfig) -> int:
    """Number of negative eigenvalues from the zeros of the zero-energy solution."""
    if config.kind is not Kind.DELTA:
        raise KindMismatch("the oscillation oracle is for delta interactions")
    if config.potential.tail != 0:
        raise Inapplicable("the oscillation oracle needs q = 0 beyond the last breakpoint")
    state = propagate(config, 0.0, last_edge(config))
    if abs(state.f) < DEGENERATE_TOL * max(1.0, abs(state.fprime)):
        log.warning("zero-energy solution vanishes at the last edge")
    return zero_count(config, 0.0)


# secular scan


@dataclass(frozen=True)
class _Segment:
    start: tuple[float, float]
    ops: list
    wall_end: bool
    tail: float


def _segments(config: HamiltonianConfig) -> list[_Segment]:
    """Split the half-line at Neumann decoupling points."""
    X = last_edge(config)
    ops = _program(config, X)
    segs, cur, start = [], [], (0.0, 1.0)
    for op in ops:
        if op[0] == "jump" and config.kind is Kind.DELTA_PRIME and math.isinf(op[2]):
            segs.append(_Segment(start, cur, True, 0.0))
            cur, start = [], (1.0, 0.0)
        else:
            cur.append(op)
    segs.append(_Segment(start, cur, False, config.potential.tail))
    return segs


def _secular(kind: Kind, seg: _Segment, kappa) -> np.ndarray:
    """Growing-mode coefficient divided by the free growth ``exp(sum sqrt(q - E) * length)``.

    Keeping the true magnitude (rather than a unit state) lets a root pair inside
    one grid cell show up as a dip of ``|A|``.
    """
    kappa = np.asarray(kappa, dtype=float)
    E = -(kappa**2)
    f, fp, logs = _run(kind, seg.ops, E, seg.start)
    growth = sum(np.sqrt(np.maximum(op[2] - E, 0.0)) * op[1] for op in seg.ops if op[0] == "cell")
    scale = np.exp(logs - growth)
    if seg.wall_end:
        return fp * scale
    mu = np.sqrt(seg.tail + kappa**2)
    return 0.5 * (f + fp / mu) * scale


def _low_sign(kind: Kind, seg: _Segment) -> int:
    """Sign of the secular function as ``kappa -> 0+``."""
    f, fp, _ = _run(kind, seg.ops, np.array(0.0), seg.start)
    f, fp = float(f), float(fp)
    if not seg.wall_end and seg.tail > 0:
        v = f + fp / math.sqrt(seg.tail)
    else:
        v = fp
    if abs(v) > DEGENERATE_TOL:
        return _sign(v)
    return _sign(f) or 1


def _bracket_kappa(config: HamiltonianConfig) -> float:
    """Decay-rate bound for delta' bound states by Neumann bracketing.

    Cutting at the midpoints between points only lowers the spectrum; a piece
    with half-widths ``a``, ``b`` around a negative ``beta`` has its bound state
    at ``coth(ka) + coth(kb) = |beta| k``, so ``k <= (1 + sqrt(1 + |beta|(1/a + 1/b))) / |beta|``.
    """
    xs = [0.0] + [float(p) for p in config.support.points]
    vals = config.strengths.values(len(xs) - 1)
    best = 0.0
    for k, b in enumerate(vals, start=1):
        if not (math.isfinite(b) and b < 0):
            continue
        left = (xs[k] - xs[k - 1]) / 2
        right = (xs[k + 1] - xs[k]) / 2 if k + 1 < len(xs) else math.inf
        m = abs(b)
        best = max(best, (1 + math.sqrt(1 + m * (1 / left + 1 / right))) / m)
    return best


def default_kappa_max(config: HamiltonianConfig) -> float:
    n = config.n_points
    vals = config.strengths.values(n) if n else np.zeros(0)
    if config.kind is Kind.DELTA:
        cap = 10.0 * (1.0 + (float(np.max(np.abs(vals))) if n else 0.0))
    else:
        finite = vals[np.isfinite(vals)]
        cap = 10.0 * (1.0 + (float(np.max(2.0 / np.abs(finite))) if finite.size else 0.0))
        cap = max(cap, 2.0 * _bracket_kappa(config))
    return cap + math.sqrt(max(0.0, -config.potential.lower_bound()))


def _bisect(kind, seg, lo, hi, sign_lo, tol):
    lo, hi, sign_lo = np.array(lo, float), np.array(hi, float), np.array(sign_lo, float)
    for _ in range(200):
        if np.all(hi - lo <= tol * np.maximum(hi, 1e-300)):
            break
        mid = 0.5 * (lo + hi)
        sm = np.sign(_secular(kind, seg, mid))
        same = sm == sign_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return lo, hi


def _zoom_min(fun, a, b, levels=ZOOM_LEVELS):
    """Vectorised minimum search on brackets ``[a, b]``.

    Each level samples ``RESOLVE_SAMPLES + 1`` points and keeps the two
    sub-cells around the smallest value; a bracket stops shrinking once a
    negative value turns up.
    """
    a, b = np.array(a, float), np.array(b, float)
    t = np.linspace(0.0, 1.0, RESOLVE_SAMPLES + 1)
    xmin, fmin = a.copy(), np.full(a.shape, np.inf)
    done = np.zeros(a.shape, dtype=bool)
    for _ in range(levels):
        pts = a[:, None] + (b - a)[:, None] * t
        vals = fun(pts)
        i = np.argmin(vals, axis=1)
        rows = np.arange(len(a))
        better = ~done & (vals[rows, i] < fmin)
        xmin = np.where(better, pts[rows, i], xmin)
        fmin = np.where(better, vals[rows, i], fmin)
        done |= fmin < 0
        lo = np.maximum(i - 1, 0)
        hi = np.minimum(i + 1, RESOLVE_SAMPLES)
        a = np.where(done, a, pts[rows, lo])
        b = np.where(done, b, pts[rows, hi])
        if np.all(done):
            break
    return xmin, fmin


def _v_shaped(kind, seg, xmin, fmin, s) -> np.ndarray:
    """True where ``|A|`` rises linearly rather than quadratically away from a dip.

    A smooth minimum grows like the square of the offset; a root pair closer than
    double precision can separate leaves a kink instead.
    """
    rises = []
    for scale in (1e-6, 1e-7):
        h = scale * xmin
        up = np.minimum(s * _secular(kind, seg, xmin + h), s * _secular(kind, seg, xmin - h))
        rises.append(up - fmin)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = rises[0] / rises[1]
    return (rises[1] > 0) & (ratio < 30.0)


def _hidden_pairs(kind, seg, pts, vals):
    """Brackets ``(lo, hi, sign_lo)`` for root pairs sitting between two samples.

    Such a pair leaves both ends of a cell with one sign, but an end of that
    cell is then a local minimum of ``|A|``.  The minimum inside the cell is
    located and, if ``A`` changes sign there, the cell is split in two.
    """
    sg = np.where(vals >= 0, 1.0, -1.0)
    mag = np.abs(vals)
    low = np.ones(len(pts), dtype=bool)
    low[1:] &= mag[1:] <= mag[:-1]
    low[:-1] &= mag[:-1] <= mag[1:]
    cells = np.nonzero((sg[:-1] == sg[1:]) & (low[:-1] | low[1:]))[0]
    if not cells.size:
        return []
    s = sg[cells]
    a, b = pts[cells], pts[cells + 1]
    xmin, fmin = _zoom_min(lambda k: s[:, None] * _secular(kind, seg, k), a, b)
    edge = np.maximum(mag[cells], mag[cells + 1])
    hit = fmin < 0
    flat = np.abs(fmin) <= DEGENERATE_TOL * edge
    deep = np.abs(fmin) < NEAR_DOUBLE_DEPTH * edge
    if np.any(~hit & (flat | (deep & _v_shaped(kind, seg, xmin, fmin, s)))):
        raise SuspectClustering("a near-double root cannot be resolved; increase grid_points")
    out = []
    for j in np.nonzero(hit)[0]:
        out += [(a[j], xmin[j], s[j]), (xmin[j], b[j], -s[j])]
    return out


def _nearly_linear(pts, vals) -> bool:
    """A line through the samples leaves no room for extra roots in between."""
    fit = np.polyval(np.polyfit(pts - pts[0], vals, 1), pts - pts[0])
    return bool(np.max(np.abs(vals - fit)) <= LINEAR_FIT_TOL * np.max(np.abs(vals)))


def _resolve(kind, seg, lo, hi, sign_lo, depth=0):
    """Split a sign-change bracket until each piece holds one crossing.

    An odd cluster of roots looks like a single crossing at coarse resolution, so
    every bracket is resampled down to ``RESOLVE_WIDTH`` relative width.
    """
    if hi - lo <= RESOLVE_WIDTH * hi or depth >= RESOLVE_DEPTH:
        return [(lo, hi, sign_lo)]
    pts = np.linspace(lo, hi, RESOLVE_SAMPLES + 1)
    vals = _secular(kind, seg, pts)
    if not np.any(vals):
        raise SuspectClustering("secular function vanishes across a bracket")
    sg = np.where(vals >= 0, 1.0, -1.0)
    sg[0], sg[-1] = sign_lo, -sign_lo
    crossings = np.nonzero(sg[:-1] != sg[1:])[0]
    if len(crossings) == 1 and _nearly_linear(pts, vals):
        return [(lo, hi, sign_lo)]
    pieces = [(pts[i], pts[i + 1], sg[i]) for i in crossings]
    pieces += _hidden_pairs(kind, seg, pts, np.abs(vals) * sg)
    out = []
    for a, b, c in pieces:
        out += _resolve(kind, seg, a, b, c, depth + 1)
    return out


def _scan_segment(kind, seg, kappa_max, grid_points, tol):
    kap = np.geomspace(KAPPA_MIN, kappa_max, grid_points)
    vals = _secular(kind, seg, kap)
    while vals[-1] <= 0 and kappa_max < 1e12:
        kappa_max *= 10.0
        more = np.geomspace(kap[-1], kappa_max, grid_points // 4 + 2)[1:]
        kap = np.concatenate((kap, more))
        vals = np.concatenate((vals, _secular(kind, seg, more)))
    sg = np.where(vals >= 0, 1.0, -1.0)
    brackets = []
    low = _low_sign(kind, seg)
    if low != sg[0]:
        brackets.append((0.0, kap[0], low))
    idx = np.nonzero(sg[:-1] != sg[1:])[0]
    coarse = [(kap[i], kap[i + 1], sg[i]) for i in idx] + _hidden_pairs(kind, seg, kap, vals)
    for a, b, c in coarse:
        brackets += _resolve(kind, seg, a, b, c)
    if not brackets:
        return [], list(zip(kap, vals))
    lows, highs, signs = zip(*brackets)
    lo, hi = _bisect(kind, seg, lows, highs, signs, tol)
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    if np.any(lo[1:] <= hi[:-1]):
        raise SuspectClustering("two roots share one bracket; increase grid_points")
    return list(zip(lo, hi)), list(zip(kap, vals))


def secular_scan(config: HamiltonianConfig, kappa_max: float | None = None, grid_points: int = 2048, refine_tol: float = 1e-12) -> EigList:
    """Negative eigenvalues ``E = -kappa^2`` from the roots of the growing-mode coefficient."""
    if not config.is_finite:
        raise Inapplicable("secular scan needs finitely many interactions")
    if config.potential.tail < 0:
        raise Inapplicable("negative tail potential puts essential spectrum below zero")
    if grid_points < 4:
        raise ValueError("grid_points must be at least 4")
    kappa_max = kappa_max or default_kappa_max(config)
    roots, samples, flags = [], [], []
    segs = _segments(config)
    if len(segs) > 1:
        flags.append(f"decoupled into {len(segs)} segments at Neumann points")
    for seg in segs:
        r, smp = _scan_segment(config.kind, seg, kappa_max, grid_points, refine_tol)
        roots += r
        if not samples:
            samples = smp
    roots.sort(key=lambda b: -b[1])
    single = config.kind is Kind.DELTA
    eigs = tuple(
        Eigenpair(-(0.25 * (lo + hi) ** 2), -(hi**2), -(lo**2), j if single else None)
        for j, (lo, hi) in enumerate(roots)
    )
    return EigList(eigs, tuple((float(k), float(a)) for k, a in samples), tuple(flags))


# truncated Dirichlet problems on [0, L]


def _lower_energy(config: HamiltonianConfig) -> float:
    if config.kind is Kind.DELTA_PRIME:
        return config.potential.lower_bound() - _bracket_kappa(config) ** 2 - 1.0
    return config.potential.lower_bound() - default_kappa_max(config) ** 2


def _check_truncation(config, L):
    if not config.is_finite:
        raise Inapplicable("truncated problems need finitely many interactions")
    xs = [float(p) for p in config.support.points]
    if xs and L <= max(xs):
        raise ValueError("L must lie beyond the last interaction")


def truncated_eigs(config: HamiltonianConfig, L: float, count: int, tol: float = 1e-13) -> EigList:
    """First ``count`` Dirichlet eigenvalues on ``[0, L]``."""
    if count < 1:
        raise ValueError("count must be positive")
    _check_truncation(config, L)
    if config.kind is Kind.DELTA:
        return _truncated_delta(config, L, count, tol)
    return _truncated_delta_prime(config, L, count, tol)


def _truncated_delta(config, L, count, tol):
    def n_below(E):
        return zero_count(config, E, (0.0, L))

    lo = _lower_energy(config)
    while n_below(lo) > 0:
        lo = 4 * lo - 1
    hi = abs(lo) + 1.0
    while n_below(hi) < count:
        hi = 2 * hi + 1
    eigs = []
    a = lo
    for j in range(1, count + 1):
        left, right = a, hi
        while right - left > tol * max(1.0, abs(right)):
            mid = 0.5 * (left + right)
            if n_below(mid) >= j:
                right = mid
            else:
                left = mid
        eigs.append(Eigenpair(0.5 * (left + right), left, right, j - 1))
        a = left
    return EigList(tuple(eigs))


def _boundary(config, L, E):
    ops = _program(config, L)
    f, fp, _ = _run(config.kind, ops, np.asarray(E, float))
    return f, fp


def _truncated_delta_prime(config, L, count, tol, max_steps=200000):
    if any(math.isinf(v) for v in config.strengths.values(config.n_points)):
        raise Inapplicable("truncated sweep does not handle Neumann points")
    E = _lower_energy(config)
    f, fp = _boundary(config, L, E)
    theta = math.atan2(float(f), float(fp))
    h = 1.0 / L**2
    min_h = 1e-13 * max(1.0, abs(E))
    brackets = []
    steps = floor_steps = 0
    while len(brackets) < count:
        steps += 1
        if steps > max_steps:
            raise SweepResolution("energy sweep budget exhausted")
        E1, Em = E + h, E + 0.5 * h
        (f1, fp1), (fm, fpm) = _boundary(config, L, E1), _boundary(config, L, Em)
        t1, tm = math.atan2(float(f1), float(fp1)), math.atan2(float(fm), float(fpm))
        d1 = _wrap(tm - theta)
        d2 = _wrap(t1 - tm)
        if d1 < 0 or d2 < 0 or d1 + d2 > math.pi / 4:
            if h > min_h:
                h *= 0.5
                continue
            # the angle is monotone in E, so an unresolvable step still turns forward
            floor_steps += 1
            if floor_steps > 1000:
                raise SweepResolution(f"phase not resolvable near E = {E}")
        if _sign(float(f1)) != _sign(math.sin(theta)) or f1 == 0:
            brackets.append((E, E1))
        E, theta = E1, t1
        h *= 1.5
    eigs = []
    for j, (a, b) in enumerate(brackets[:count]):
        sa = _sign(float(_boundary(config, L, a)[0]))
        while b - a > tol * max(1.0, abs(b)):
            m = 0.5 * (a + b)
            if _sign(float(_boundary(config, L, m)[0])) == sa:
                a = m
            else:
                b = m
        eigs.append(Eigenpair(0.5 * (a + b), a, b, None))
    return EigList(tuple(eigs))


def _wrap(d: float) -> float:
    return (d + math.pi) % (2 * math.pi) - math.pi


# quasi-derivative formulation


def quasi_derivative_propagate(config: HamiltonianConfig, E: float, to: float, rtol: float = 1e-10) -> ShootState:
    """Integrate ``y' = V y + y1``, ``y1' = -(E + V^2) y - V y1`` with ``y1 = f' - V f``."""
    if config.kind is not Kind.DELTA:
        raise KindMismatch("the quasi-derivative form excludes delta' interactions")
    V = primitive_V(config)
    edges = [0.0] + [b for b in V.breakpoints if 0 < b < to] + [to]
    y = np.array([0.0, 1.0])
    for lo, hi in zip(edges, edges[1:]):
        plo, start, slope = _affine_at(V, lo)

        def rhs(x, z, start=start, slope=slope, plo=plo):
            v = start + slope * (x - plo)
            return [v * z[0] + z[1], -(E + v * v) * z[0] - v * z[1]]

        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=1e-14 * max(1.0, float(np.abs(y).max())))
        if not sol.success:
            raise RuntimeError(sol.message)
        y = sol.y[:, -1]
    v_right = V(to) + sum(a for x, a in _interactions(config, to) if x == to)
    return ShootState(float(to), float(y[0]), float(y[1] + v_right * y[0]))


def _affine_at(V, x: float) -> tuple[float, float, float]:
    """``(piece start, V there, slope)`` of the affine piece covering ``(x, x + eps)``."""
    for lo, hi, start, slope in V.pieces:
        if lo <= x < hi:
            return lo, start, slope
    lo, _, start, slope = V.pieces[-1]
    return lo, start, slope


# test functions and quadratic forms


@dataclass(frozen=True)
class Piece:
    """Closed-form piece on ``[lo, hi]`` in the local variable ``t = x - lo``.

    ``poly``: ascending coefficients; ``trig``: ``(A, B, k)`` for
    ``A cos kt + B sin kt``; ``exp``: terms ``(c, s, anchor)`` for
    ``c exp(s (t - anchor))``.
    """

    lo: float
    hi: float
    kind: str
    coeffs: tuple

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def value(self, t: float) -> float:
        if self.kind == "poly":
            return float(np.polynomial.polynomial.polyval(t, self.coeffs))
        if self.kind == "trig":
            A, B, k = self.coeffs
            return A * math.cos(k * t) + B * math.sin(k * t)
        return math.fsum(c * math.exp(s * (t - a)) for c, s, a in self.coeffs)

    def derivative(self) -> "Piece":
        if self.kind == "poly":
            return Piece(self.lo, self.hi, "poly", tuple(np.polynomial.polynomial.polyder(self.coeffs)) or (0.0,))
        if self.kind == "trig":
            A, B, k = self.coeffs
            return Piece(self.lo, self.hi, "trig", (k * B, -k * A, k))
        return Piece(self.lo, self.hi, "exp", tuple((c * s, s, a) for c, s, a in self.coeffs))

    def int_sq(self, t0: float, t1: float) -> float:
        """``int_{t0}^{t1} |piece|^2`` in closed form (``t1`` may be infinite)."""
        if t1 <= t0:
            return 0.0
        if self.kind == "poly":
            sq = np.polynomial.polynomial.polypow(self.coeffs, 2)
            prim = np.polynomial.polynomial.polyint(sq)
            return float(np.polynomial.polynomial.polyval(t1, prim) - np.polynomial.polynomial.polyval(t0, prim))
        if self.kind == "trig":
            A, B, k = self.coeffs
            if k == 0:
                return A * A * (t1 - t0)
            return ((A * A + B * B) / 2 * (t1 - t0)
                    + (A * A - B * B) / (4 * k) * (math.sin(2 * k * t1) - math.sin(2 * k * t0))
                    - A * B / (2 * k) * (math.cos(2 * k * t1) - math.cos(2 * k * t0)))
        total = []
        for ci, si, ai in self.coeffs:
            for cj, sj, aj in self.coeffs:
                sig = si + sj
                shift = si * ai + sj * aj
                if math.isinf(t1):
                    if sig >= 0:
                        raise RegularityMismatch("non-decaying piece on an infinite cell")
                    total.append(-ci * cj * math.exp(sig * t0 - shift) / sig)
                elif sig == 0:
                    total.append(ci * cj * (t1 - t0) * math.exp(-shift))
                else:
                    total.append(ci * cj * math.exp(sig * t0 - shift) * math.expm1(sig * (t1 - t0)) / sig)
        return math.fsum(total)


@dataclass(frozen=True)
class PiecewiseFn:
    """Contiguous closed-form pieces starting at 0; zero beyond the last piece."""

    pieces: tuple[Piece, ...]

    def __post_init__(self):
        if not self.pieces or self.pieces[0].lo != 0:
            raise ValueError("pieces must start at 0")
        for p, q in zip(self.pieces, self.pieces[1:]):
            if p.hi != q.lo:
                raise ValueError("pieces must be contiguous")

    @property
    def end(self) -> float:
        return self.pieces[-1].hi

    @property
    def breakpoints(self) -> list[float]:
        return [p.hi for p in self.pieces[:-1]]

    def _piece_at(self, x: float, side: str) -> Piece | None:
        for p in self.pieces:
            if (p.lo < x <= p.hi) if side == "-" else (p.lo <= x < p.hi):
                return p
        return None

    def left(self, x: float) -> float:
        p = self._piece_at(x, "-")
        return 0.0 if p is None else p.value(x - p.lo)

    def right(self, x: float) -> float:
        p = self._piece_at(x, "+")
        return 0.0 if p is None else p.value(x - p.lo)

    def __call__(self, x: float) -> float:
        return self.right(x)

    def scale(self) -> float:
        return max(abs(p.value(0.0)) for p in self.pieces) or 1.0

    def _integral(self, upto: float, weight) -> float:
        total = []
        for p in self.pieces:
            hi = min(p.hi, upto)
            if hi <= p.lo:
                break
            total.append(weight(p, p.lo, hi))
        return math.fsum(total)

    def norm_sq(self, upto: float = math.inf) -> float:
        return self._integral(upto, lambda p, lo, hi: p.int_sq(0.0, hi - lo))

    def kinetic(self, upto: float = math.inf) -> float:
        return self._integral(upto, lambda p, lo, hi: p.derivative().int_sq(0.0, hi - lo))

    def potential_energy(self, potential, upto: float = math.inf) -> float:
        def weight(p, lo, hi):
            return math.fsum(q * p.int_sq(a - p.lo, b - p.lo) for a, b, q in _cells(potential, lo, hi))

        return self._integral(upto, weight)


def _cells(potential, lo, hi):
    if math.isinf(hi):
        last = max(potential.last_breakpoint, lo)
        yield from potential.cells(lo, last) if last > lo else ()
        yield last, math.inf, potential.tail
    else:
        yield from potential.cells(lo, hi)


def eigenfunction(config: HamiltonianConfig, E: float, L: float | None = None) -> PiecewiseFn:
    """Dirichlet solution at energy ``E`` as closed-form pieces.

    With ``L`` the function lives on ``[0, L]``; otherwise the pieces end at
    the last edge and continue with the decaying exponential.
    """
    if config.kind is Kind.DELTA_PRIME and any(math.isinf(v) for v in config.strengths.values(config.n_points)):
        raise Inapplicable("eigenfunctions across Neumann points are not assembled")
    end = L if L is not None else last_edge(config)
    ops = _program(config, end)
    f, fp, logs = np.array(0.0), np.array(1.0), np.array(0.0)
    raw, pos = [], 0.0
    for op in ops:
        if op[0] == "cell":
            raw.append((pos, pos + op[1], op[2], float(f), float(fp), float(logs)))
            f, fp, logs = _cell(f, fp, logs, op[2] - E, op[1])
            pos += op[1]
        else:
            f, fp = _jump(config.kind, f, fp, op[2])
            f, fp, logs = _renorm(f, fp, logs)
    tail = None
    if L is None:
        lam = config.potential.tail - E
        if lam <= 0:
            raise Inapplicable("energy is not below the tail potential")
        tail = (pos, float(f), float(logs), math.sqrt(lam))
    ref = max([r[5] + (math.sqrt(max(r[2] - E, 0.0)) * (r[1] - r[0])) for r in raw] + ([tail[2]] if tail else [0.0]))
    pieces = [_piece(lo, hi, lam_q - E, f0, fp0, lg - ref) for lo, hi, lam_q, f0, fp0, lg in raw]
    if tail:
        lo, f0, lg, mu = tail
        pieces.append(Piece(lo, math.inf, "exp", ((f0 * math.exp(lg - ref), -mu, 0.0),)))
    return PiecewiseFn(tuple(pieces))


def _piece(lo, hi, lam, f0, fp0, lg) -> Piece:
    w = math.exp(lg) if lg > -745 else 0.0
    if lam < 0:
        k = math.sqrt(-lam)
        return Piece(lo, hi, "trig", (f0 * w, fp0 / k * w, k))
    if lam == 0:
        return Piece(lo, hi, "poly", (f0 * w, fp0 * w))
    s = math.sqrt(lam)
    length = hi - lo
    P, Q = 0.5 * (f0 + fp0 / s), 0.5 * (f0 - fp0 / s)
    grow = math.copysign(math.exp(math.log(abs(P)) + s * length + lg), P) if P != 0 and math.log(abs(P)) + s * length + lg > -745 else 0.0
    return Piece(lo, hi, "exp", ((grow, s, length), (Q * w, -s, 0.0)))


@dataclass(frozen=True)
class FormPartial:
    k: int
    x: float
    kinetic: float
    potential: float
    interaction: float
    norm_sq: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.interaction


def _check_regularity(config: HamiltonianConfig, fn: PiecewiseFn, points: set[float]) -> None:
    tol = 1e-9 * fn.scale()
    for b in fn.breakpoints:
        if config.kind is Kind.DELTA_PRIME and b in points:
            continue
        if abs(fn.left(b) - fn.right(b)) > tol:
            raise RegularityMismatch(f"test function jumps at {b}")


def _interaction_term(config: HamiltonianConfig, fn: PiecewiseFn, x: float, s: float) -> float:
    if config.kind is Kind.DELTA:
        return s * fn.right(x) ** 2
    if math.isinf(s):
        return 0.0
    return (fn.right(x) - fn.left(x)) ** 2 / s


def _form_interactions(config: HamiltonianConfig, fn: PiecewiseFn, upto: int | None):
    if math.isfinite(fn.end):
        return _interactions(config, fn.end)
    if config.is_finite:
        return _interactions(config, math.inf)
    if upto is None:
        raise Inapplicable("the full form over infinitely many interactions is only available as partial sums")
    xs, vs = config.support.x(upto), config.strengths.values(upto)
    return [(float(x), float(v)) for x, v in zip(xs, vs)]


def eval_form(config: HamiltonianConfig, fn: PiecewiseFn, upto: int | None = None):
    """Quadratic form of ``fn``; with ``upto`` the partial sums over the first interactions."""
    inter = _form_interactions(config, fn, upto)
    _check_regularity(config, fn, {x for x, _ in inter})
    if upto is None:
        total = [fn.kinetic(), fn.potential_energy(config.potential)]
        total += [_interaction_term(config, fn, x, s) for x, s in inter]
        return math.fsum(total)
    out, acc = [], 0.0
    for k, (x, s) in enumerate(inter[:upto], start=1):
        acc += _interaction_term(config, fn, x, s)
        out.append(FormPartial(k, x, fn.kinetic(x), fn.potential_energy(config.potential, x), acc, fn.norm_sq(x)))
    return out
