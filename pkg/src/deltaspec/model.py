"""Interaction configurations and the functionals defined on them.

A :class:`HamiltonianConfig` describes ``-d^2/dx^2 + q`` on the half-line with
a Dirichlet condition at 0 and point interactions at ``x_1 < x_2 < ...``:

* ``Kind.DELTA``: ``f`` continuous, ``f'(x_k+) - f'(x_k-) = alpha_k f(x_k)``;
* ``Kind.DELTA_PRIME``: ``f'`` continuous, ``f(x_k+) - f(x_k-) = beta_k f'(x_k)``,
  with ``beta_k = inf`` meaning ``f'(x_k+-) = 0`` (Neumann decoupling).
"""

from __future__ import annotations

import bisect
import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np
import sympy as sp

from deltaspec import asymptotics as asy
from deltaspec.asymptotics import Branched
from deltaspec.errors import (
    ConfigParse,
    InfiniteAlphaStrength,
    KindMismatch,
    NonIncreasingSupport,
    UnknownAsymptotics,
    ZeroBetaStrength,
)
from deltaspec.sequences import Finite, SymbolicSequence, exact, sequence_from_json

#: Number of leading entries checked exactly when validating infinite rules.
VALIDATE_PREFIX = 64


class Kind(str, enum.Enum):
    DELTA = "delta"
    DELTA_PRIME = "delta_prime"


class Part(str, enum.Enum):
    NEGATIVE = "negative"
    SIGNED = "signed"
    ABSOLUTE = "absolute"


def _part(value: float, part: Part) -> float:
    if part is Part.NEGATIVE:
        return max(-value, 0.0)
    if part is Part.ABSOLUTE:
        return abs(value)
    return value


# support


@dataclass(frozen=True)
class Support:
    """Interaction positions; exactly one of ``points``, ``rule``, ``gaps`` is set.

    ``points`` holds finite data as exact fractions, ``rule`` gives ``x_k``
    and ``gaps`` gives ``d_k = x_k - x_{k-1}`` (with ``x_0 = 0``).
    """

    points: tuple[Fraction, ...] | None = None
    rule: SymbolicSequence | None = None
    gaps: SymbolicSequence | None = None

    @classmethod
    def finite(cls, points) -> "Support":
        return cls(points=tuple(Fraction(p) for p in points))

    @classmethod
    def from_rule(cls, rule: SymbolicSequence) -> "Support":
        return cls(rule=rule)

    @classmethod
    def from_gaps(cls, gaps: SymbolicSequence) -> "Support":
        if isinstance(gaps, Finite):
            acc, pts = Fraction(0), []
            for g in gaps.items:
                acc += Fraction(g)
                pts.append(acc)
            return cls.finite(pts)
        return cls(gaps=gaps)

    @property
    def is_finite(self) -> bool:
        return self.points is not None

    @property
    def size(self) -> int | None:
        return len(self.points) if self.points is not None else None

    def x(self, count: int) -> np.ndarray:
        """Numeric ``x_1..x_count``."""
        if self.points is not None:
            if count > len(self.points):
                from deltaspec.errors import InsufficientSequence

                raise InsufficientSequence(f"support has {len(self.points)} points, need {count}")
            return np.array([float(p) for p in self.points[:count]])
        if self.rule is not None:
            return self.rule.values(count)
        return np.cumsum(self.gaps.values(count))

    def d(self, count: int) -> np.ndarray:
        """Numeric ``d_1..d_count``."""
        if self.points is not None:
            return np.array([float(g) for g in _exact_gaps(self.points[:count])])
        if self.gaps is not None:
            return self.gaps.values(count)
        x = self.rule.values(count)
        return np.diff(np.concatenate(([0.0], x)))

    def exact_x(self, n: int):
        if self.points is not None:
            return self.points[n - 1]
        if self.rule is not None:
            return self.rule.exact_value(n)
        return sp.Add(*[self.gaps.exact_value(j) for j in range(1, n + 1)])

    def x_asymptotic(self) -> Branched:
        if self.rule is not None:
            return self.rule.asymptotic()
        if self.gaps is not None:
            return asy.partial_sums(self.gaps.asymptotic())
        raise UnknownAsymptotics("finite support has no asymptotic class")

    def d_asymptotic(self) -> Branched:
        if self.gaps is not None:
            return self.gaps.asymptotic()
        if self.rule is not None:
            x = self.rule.asymptotic()
            return (x - x.shift(-1)).simplified()
        raise UnknownAsymptotics("finite support has no asymptotic class")

    def to_json(self) -> dict:
        if self.points is not None:
            return {"points": [float(p) for p in self.points]}
        if self.rule is not None:
            return self.rule.to_json()
        return {"gaps": self.gaps.to_json()}


def _exact_gaps(points) -> list[Fraction]:
    prev, out = Fraction(0), []
    for p in points:
        out.append(p - prev)
        prev = p
    return out


# potential


@dataclass(frozen=True)
class PiecewisePotential:
    """``q = values[i]`` on ``[breakpoints[i-1], breakpoints[i])`` (first cell starts at 0), ``tail`` beyond."""

    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    tail: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.breakpoints) != len(self.values):
            raise ConfigParse("potential needs one value per breakpoint")
        if any(b <= a for a, b in zip((0.0,) + self.breakpoints, self.breakpoints)):
            raise ConfigParse("potential breakpoints must be positive and increasing")
        if not all(map(math.isfinite, self.values + (self.tail,))):
            raise ConfigParse("potential values must be finite")

    @classmethod
    def constant(cls, value: float) -> "PiecewisePotential":
        return cls((), (), value)

    @property
    def is_zero(self) -> bool:
        return self.tail == 0.0 and all(v == 0.0 for v in self.values)

    @property
    def last_breakpoint(self) -> float:
        return self.breakpoints[-1] if self.breakpoints else 0.0

    def value(self, x: float) -> float:
        i = bisect.bisect_right(self.breakpoints, x)
        return self.values[i] if i < len(self.values) else self.tail

    def cells(self, a: float, b: float) -> Iterator[tuple[float, float, float]]:
        """Constant pieces ``(lo, hi, q)`` covering ``[a, b]``."""
        edges = [a] + [t for t in self.breakpoints if a < t < b] + [b]
        for lo, hi in zip(edges, edges[1:]):
            yield lo, hi, self.value(lo)

    def integral(self, a: float, b: float, part: Part = Part.SIGNED) -> float:
        return math.fsum((hi - lo) * _part(q, part) for lo, hi, q in self.cells(a, b))

    def lower_bound(self) -> float:
        return min(self.values + (self.tail,))

    def upper_bound(self) -> float:
        return max(self.values + (self.tail,))

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values), "tail": self.tail}


# configuration


@dataclass(frozen=True)
class HamiltonianConfig:
    kind: Kind
    support: Support
    strengths: SymbolicSequence
    potential: PiecewisePotential = field(default_factory=PiecewisePotential)

    @property
    def is_finite(self) -> bool:
        return self.support.is_finite

    @property
    def n_points(self) -> int | None:
        return self.support.size

    def strengths_values(self) -> np.ndarray:
        return self.strengths.values(self.n_points)

    def points(self) -> np.ndarray:
        return self.support.x(self.n_points)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "support": self.support.to_json(),
            "strengths": self.strengths.to_json(),
            "potential": self.potential.to_json(),
        }


def delta(points, alpha, potential: PiecewisePotential | None = None) -> HamiltonianConfig:
    """Finite delta configuration from plain lists."""
    return HamiltonianConfig(Kind.DELTA, Support.finite(points), Finite(tuple(alpha)), potential or PiecewisePotential())


def delta_prime(points, beta, potential: PiecewisePotential | None = None) -> HamiltonianConfig:
    """Finite delta' configuration from plain lists (``math.inf`` allowed)."""
    return HamiltonianConfig(Kind.DELTA_PRIME, Support.finite(points), Finite(tuple(beta)), potential or PiecewisePotential())


def validate(config: HamiltonianConfig) -> None:
    """Raise on the first violated invariant; infinite rules are checked exactly on a prefix."""
    sup = config.support
    count = sup.size if sup.is_finite else VALIDATE_PREFIX
    prev = 0
    for n in range(1, count + 1):
        xn = sup.exact_x(n)
        if not xn > prev:
            raise NonIncreasingSupport(f"x_{n} = {xn} does not exceed x_{n - 1} = {prev}")
        prev = xn
    seq = config.strengths
    if sup.is_finite:
        if seq.length is not None and seq.length != sup.size:
            raise ConfigParse(f"{seq.length} strengths for {sup.size} points")
    elif seq.length is not None:
        raise ConfigParse("finite strengths need a finite support")
    for n in range(1, count + 1):
        v = seq.value(n)
        if config.kind is Kind.DELTA and not math.isfinite(v):
            raise InfiniteAlphaStrength(f"alpha_{n} = {v}")
        if config.kind is Kind.DELTA_PRIME:
            if v == 0:
                raise ZeroBetaStrength(f"beta_{n} = 0; delete the point instead")
            if math.isinf(v) and v < 0:
                raise ConfigParse(f"beta_{n} = -inf")
            if math.isnan(v):
                raise ConfigParse(f"beta_{n} is not a number")
    if config.kind is Kind.DELTA_PRIME and not seq.is_finite:
        try:
            if any(sp.simplify(b) == 0 for b in seq.asymptotic().branches):
                raise ZeroBetaStrength("beta rule is identically zero")
        except UnknownAsymptotics:
            pass


# spacings


@dataclass(frozen=True)
class Spacings:
    """``d`` is exact (fractions) for finite data and a :class:`Branched` class otherwise.

    For rules ``d_star`` is ``0`` exactly when ``liminf d_k = 0`` and otherwise
    the smaller of the limit inferior and the minimum over the first
    ``VALIDATE_PREFIX`` gaps.
    """

    d: tuple[Fraction, ...] | Branched
    d_star: float
    d_upper: float
    d_star_positive: bool
    d_upper_finite: bool


def spacings(support: Support) -> Spacings:
    if support.is_finite:
        d = tuple(_exact_gaps(support.points))
        if not d:
            return Spacings(d, math.inf, 0.0, True, True)
        return Spacings(d, float(min(d)), float(max(d)), min(d) > 0, True)
    d = support.d_asymptotic()
    lo, hi = asy.liminf(d), asy.limsup(d)
    prefix = support.d(VALIDATE_PREFIX)
    pos = bool(lo > 0)
    upper_finite = bool(hi.is_finite)
    d_star = min(float(lo), float(prefix.min())) if pos else 0.0
    d_upper = max(float(hi), float(prefix.max())) if upper_finite else math.inf
    return Spacings(d, d_star, d_upper, pos, upper_finite)


# window functional


@dataclass(frozen=True)
class WindowReport:
    """Supremum of masses over windows ``[x, x + width]``, ``x > 0``.

    Finite data: ``value`` is exact and ``status`` is ``'finite'``.  Rules:
    ``status`` is ``'bounded'`` or ``'divergent'`` and ``witnesses`` lists
    ``(x, mass)`` for windows anchored at support points.
    """

    status: str
    value: float | None
    witnesses: tuple[tuple[float, float], ...] = ()
    certificate: dict = field(default_factory=dict)


def _point_window_sup(xs: list, ws: list, width: float, part: Part) -> float:
    xs = [float(x) for x in xs]
    vals = [_part(float(w), part) for w in ws]
    cands = set(xs) | {x - width for x in xs if x - width > 0}
    cands.add(min(xs + [width]) * 0.5 if xs else 1.0)
    best = 0.0  # windows beyond the last point are empty
    for left in cands:
        lo = bisect.bisect_left(xs, left)
        hi = bisect.bisect_right(xs, left + width)
        best = max(best, math.fsum(vals[lo:hi]))
    return best


def _potential_window_sup(pot: PiecewisePotential, width: float, part: Part) -> float:
    tail = _part(pot.tail, part) * width
    cands = {1e-300} | set(pot.breakpoints) | {b - width for b in pot.breakpoints if b - width > 0}
    best = tail
    for left in cands:
        best = max(best, pot.integral(left, left + width, part))
    return best


def window_functional(obj, width: float, part: Part = Part.NEGATIVE) -> WindowReport:
    """Sliding-window supremum for a potential or for a configuration's strengths."""
    part = Part(part)
    if width <= 0:
        raise ValueError("width must be positive")
    if isinstance(obj, PiecewisePotential):
        return WindowReport("finite", _potential_window_sup(obj, width, part))
    config: HamiltonianConfig = obj
    if config.is_finite:
        n = config.n_points
        return WindowReport("finite", _point_window_sup(list(config.support.points), list(config.strengths.values(n)), width, part))
    return _symbolic_window(config, width, part)


def branch_window_mass(x: Branched, v: Branched, width) -> Branched:
    """Per-branch equivalent of the window mass ``v_k * max(1, width / g_k)``.

    ``g_k`` is the gap between consecutive points of the same branch; summed
    over branches this is, up to bounded factors, the mass of a window of
    the given width near ``x_k`` for regularly varying data.
    """
    p = math.lcm(x.period, v.period)
    xb, vb = x.expand_to(p), v.expand_to(p)
    out = []
    for j in range(p):
        y = xb.branches[j]
        g = sp.simplify(y - y.subs(asy.K, asy.K - 1))
        g_lim = asy.limit(g)
        if g_lim == 0:
            out.append(vb.branches[j] * sp.sympify(width) / g)
        else:
            out.append(vb.branches[j])
    return Branched(tuple(out))


def _symbolic_window(config: HamiltonianConfig, width: float, part: Part) -> WindowReport:
    v = config.strengths.asymptotic()
    if part is Part.NEGATIVE:
        v = asy.negative_part(v)
    elif part is Part.ABSOLUTE:
        v = asy.absolute(v)
    else:
        signs = {asy.eventual_sign(b) for b in v.branches} - {0}
        if len(signs) > 1:
            raise UnknownAsymptotics("signed window sums of mixed-sign branches are not classified")
    x = config.support.x_asymptotic()
    mass = branch_window_mass(x, v, exact(width))
    sups = [asy.limit(b) for b in mass.branches]
    divergent = any(s is sp.oo for s in sups)
    if part is Part.SIGNED and any(s is -sp.oo for s in sups):
        divergent = True
    status = "divergent" if divergent else "bounded"
    return WindowReport(
        status,
        None,
        _witnesses(config, width, part),
        {"window_mass_class": str(mass), "branch_limits": [asy.describe(s) for s in sups]},
    )


def _witnesses(config: HamiltonianConfig, width: float, part: Part, count: int = 12) -> tuple:
    """Exact masses of windows anchored at the first support points."""
    sup, seq = config.support, config.strengths
    xs, vs = [], []
    n = 1
    while len(xs) < count + 2 or xs[-1] <= xs[count - 1] + width:
        xs.append(sp.nsimplify(sup.exact_x(n)))
        vs.append(seq.exact_value(n))
        n += 1
        if n > 4000:
            break
    out = []
    for i in range(count):
        left = xs[i]
        mass = sp.Integer(0)
        for xj, vj in zip(xs, vs):
            if left <= xj <= left + sp.nsimplify(width):
                mass += _part_exact(vj, part)
        out.append((float(left), float(mass)))
    return tuple(out)


def _part_exact(v, part: Part):
    if part is Part.NEGATIVE:
        return -v if v < 0 else sp.Integer(0)
    if part is Part.ABSOLUTE:
        return abs(v)
    return v


# primitive V


@dataclass(frozen=True)
class PiecewiseAffine:
    """``V(x) = start + slope * (x - lo)`` on ``(lo, hi]``; ``V(0) = 0``."""

    pieces: tuple[tuple[float, float, float, float], ...]

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        for lo, hi, start, slope in self.pieces:
            if lo < x <= hi:
                return start + slope * (x - lo)
        lo, hi, start, slope = self.pieces[-1]
        return start + slope * (x - lo)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(p[0] for p in self.pieces[1:])


def primitive_V(config: HamiltonianConfig) -> PiecewiseAffine:
    """``V(x) = int_0^x q + sum_{x_k < x} alpha_k`` for finite delta configurations."""
    if config.kind is not Kind.DELTA:
        raise KindMismatch("primitive_V is defined for delta interactions only")
    if not config.is_finite:
        raise ConfigParse("primitive_V needs finitely many interactions")
    xs = [float(p) for p in config.support.points]
    alpha = list(config.strengths.values(len(xs)))
    pot = config.potential
    edges = sorted(set(xs) | set(pot.breakpoints))
    pieces = []
    lo, level = 0.0, 0.0
    jumps = dict(zip(xs, alpha))
    for hi in edges + [math.inf]:
        slope = pot.value(lo)
        pieces.append((lo, hi, level, slope))
        if math.isinf(hi):
            break
        level = level + slope * (hi - lo) + jumps.get(hi, 0.0)
        lo = hi
    return PiecewiseAffine(tuple(pieces))


# JSON


_TOP_KEYS = {"kind", "support", "strengths", "potential"}


def config_from_json(doc: dict) -> HamiltonianConfig:
    if not isinstance(doc, dict):
        raise ConfigParse("configuration must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigParse(f"unknown keys: {sorted(unknown)}")
    for key in ("kind", "support", "strengths"):
        if key not in doc:
            raise ConfigParse(f"missing key {key!r}")
    try:
        kind = Kind(doc["kind"])
    except ValueError as exc:
        raise ConfigParse(f"unknown kind {doc['kind']!r}") from exc
    sdoc = doc["support"]
    if not isinstance(sdoc, dict) or len(sdoc) != 1:
        raise ConfigParse("support must have exactly one of 'points', 'rule', 'gaps'")
    (skey, sval), = sdoc.items()
    if skey == "points":
        if not isinstance(sval, list):
            raise ConfigParse("support points must be a list")
        support = Support.finite([Fraction(_json_float(p)) for p in sval])
    elif skey == "rule":
        support = Support.from_rule(sequence_from_json({"rule": sval}))
    elif skey == "gaps":
        support = Support.from_gaps(sequence_from_json(sval))
    else:
        raise ConfigParse(f"unknown support key {skey!r}")
    strengths = sequence_from_json(doc["strengths"], allow_inf=kind is Kind.DELTA_PRIME)
    pdoc = doc.get("potential", {"breakpoints": [], "values": [], "tail": 0.0})
    if not isinstance(pdoc, dict) or set(pdoc) - {"breakpoints", "values", "tail"}:
        raise ConfigParse("potential accepts only 'breakpoints', 'values', 'tail'")
    potential = PiecewisePotential(
        tuple(_json_float(b) for b in pdoc.get("breakpoints", [])),
        tuple(_json_float(v) for v in pdoc.get("values", [])),
        _json_float(pdoc.get("tail", 0.0)),
    )
    config = HamiltonianConfig(kind, support, strengths, potential)
    validate(config)
    return config


def _json_float(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigParse(f"expected a number, got {v!r}")
    return float(v)


def load_config(path) -> HamiltonianConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path}: {exc}") from exc
    return config_from_json(doc)
