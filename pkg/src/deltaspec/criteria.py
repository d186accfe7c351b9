"""Classifiers for self-adjointness, semiboundedness and spectral structure.

Every classifier returns :class:`Verdict` objects.  Sufficient conditions can
only ever conclude the positive statement; negative conclusions come from
necessity clauses, equivalences or explicitly solved model families, and each
carries the hypotheses it checked in its certificate.

Limits are decided symbolically over the sequence vocabulary of
:mod:`deltaspec.sequences`; an undecidable limit turns into an ``Unknown``
verdict, never into a guess.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import sympy as sp

from deltaspec import asymptotics as asy
from deltaspec.asymptotics import K, Branched
from deltaspec.errors import InsufficientSequence, InternalInconsistency, KindMismatch, UnknownAsymptotics
from deltaspec.model import VALIDATE_PREFIX, HamiltonianConfig, Kind, Part, spacings, window_functional
from deltaspec.sequences import _Closed


class SelfAdjointness(str, enum.Enum):
    SELF_ADJOINT = "SelfAdjoint"
    NOT_SELF_ADJOINT = "NotSelfAdjoint_n1"
    UNKNOWN = "Unknown"


class Semiboundedness(str, enum.Enum):
    LSB = "LSB"
    NOT_LSB = "NotLSB"
    UNKNOWN = "Unknown"


class Discreteness(str, enum.Enum):
    DISCRETE = "Discrete"
    NOT_DISCRETE = "NotDiscrete"
    UNKNOWN = "Unknown"


class EssentialSpectrum(str, enum.Enum):
    EQUALS_FREE = "EqualsFree"
    EQUALS_NEUMANN = "EqualsNeumann"
    ZERO_SINGLETON = "ZeroSingleton"
    NON_NEGATIVE = "NonNegative"
    UNKNOWN = "Unknown"


class SpectralType(str, enum.Enum):
    AC_PRESERVED = "ACpreserved"
    AC_EMPTY = "ACempty"
    SPARSE_PARTITION = "SparsePartition"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class SparsePartition:
    """Sparse-support split: point spectrum in ``[0, 1/a]``, singular continuous from ``1/a`` on."""

    a: float

    @property
    def kind(self) -> SpectralType:
        return SpectralType.SPARSE_PARTITION

    def __str__(self) -> str:
        return f"SparsePartition({_fmt(self.a)})"


Conclusion = Union[SelfAdjointness, Semiboundedness, Discreteness, EssentialSpectrum, SpectralType, SparsePartition]

_CATEGORY = {
    SelfAdjointness: "self_adjointness",
    Semiboundedness: "semiboundedness",
    Discreteness: "discreteness",
    EssentialSpectrum: "essential_spectrum",
    SpectralType: "spectral_type",
    SparsePartition: "spectral_type",
}


def category_of(conclusion: Conclusion) -> str:
    return _CATEGORY[type(conclusion)]


def conclusion_name(conclusion: Conclusion) -> str:
    return str(conclusion) if isinstance(conclusion, SparsePartition) else conclusion.value


def _is_unknown(conclusion: Conclusion) -> bool:
    return not isinstance(conclusion, SparsePartition) and conclusion.value == "Unknown"


@dataclass(frozen=True)
class Verdict:
    criterion_id: str
    applicable: bool
    conclusion: Conclusion
    certificate: dict = field(default_factory=dict)
    paper_anchor: str = ""

    def __post_init__(self):
        if not self.applicable and not _is_unknown(self.conclusion):
            raise ValueError("an inapplicable criterion must conclude Unknown")

    @property
    def category(self) -> str:
        return category_of(self.conclusion)

    @property
    def decided(self) -> bool:
        return not _is_unknown(self.conclusion)

    def to_json(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "applicable": self.applicable,
            "conclusion": conclusion_name(self.conclusion),
            "certificate": _jsonable(self.certificate),
            "paper_anchor": self.paper_anchor,
        }


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "+inf" if value > 0 else "-inf"
        return repr(value)
    return asy.describe(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else _fmt(obj)
    if isinstance(obj, sp.Basic):
        return asy.describe(obj)
    return str(obj)


# configuration facts shared by the classifiers


class _Facts:
    """Lazily computed symbolic and numeric data of one configuration."""

    def __init__(self, config: HamiltonianConfig):
        self.config = config
        self.kind = config.kind
        self.finite = config.is_finite
        pot = config.potential
        self.q_zero = pot.is_zero
        self.q_min = pot.lower_bound()
        self.q_max = pot.upper_bound()
        self.q_tail = pot.tail

    @cached_property
    def spacing(self):
        return spacings(self.config.support)

    @cached_property
    def x(self) -> Branched:
        return self.config.support.x_asymptotic()

    @cached_property
    def d(self) -> Branched:
        return self.config.support.d_asymptotic()

    @cached_property
    def v(self) -> Branched:
        return self.config.strengths.asymptotic()

    @cached_property
    def values(self) -> list[float]:
        n = self.config.n_points if self.finite else VALIDATE_PREFIX
        return [float(s) for s in self.config.strengths.values(n)]

    @cached_property
    def gaps(self) -> list[float]:
        n = self.config.n_points if self.finite else VALIDATE_PREFIX
        return [float(g) for g in self.config.support.d(n)]

    @cached_property
    def half_line(self) -> bool:
        if self.finite:
            return True
        sup = self.config.support
        if sup.rule is not None:
            return all(v is sp.oo for v in asy.branch_limits(self.x))
        return not asy.series_converges(self.d)

    @cached_property
    def d_to_zero(self) -> bool:
        return not self.finite and all(v == 0 for v in asy.branch_limits(self.d))

    @cached_property
    def d_limsup_positive(self) -> bool:
        return not self.finite and bool(asy.limsup(self.d) > 0)

    def strengths_all(self, relation: str) -> bool:
        """``strength rel 0`` for every index (prefix checked exactly, tail symbolically)."""
        test = {">0": lambda s: s > 0, ">=0": lambda s: s >= 0, "<0": lambda s: s < 0, "<=0": lambda s: s <= 0}[relation]
        if not all(test(s) for s in self.values):
            return False
        if self.finite:
            return True
        answers = [asy.holds_for_all(b, relation) for b in self.v.branches]
        if any(a is False for a in answers):
            return False
        if all(a is True for a in answers):
            return True
        raise UnknownAsymptotics(f"sign pattern '{relation}' of {self.v} undecided")


def _yes(cid: str, conclusion: Conclusion, anchor: str, **cert) -> Verdict:
    return Verdict(cid, True, conclusion, cert, anchor)


def _no(cid: str, unknown: Conclusion, anchor: str, reason: str, **cert) -> Verdict:
    return Verdict(cid, False, unknown, {"reason": reason, **cert}, anchor)


def _guard(cid: str, unknown: Conclusion, anchor: str, body: Callable[[], Verdict]) -> Verdict:
    try:
        return body()
    except (UnknownAsymptotics, InsufficientSequence) as exc:
        return _no(cid, unknown, anchor, "undecided", detail=str(exc))


def _require(config: HamiltonianConfig, kind: Kind) -> _Facts:
    if config.kind is not kind:
        raise KindMismatch(f"classifier expects {kind.value}, got {config.kind.value}")
    return _Facts(config)


def _limits(seq: Branched) -> list:
    return list(asy.branch_limits(seq))


def _all_limits(seq: Branched, pred) -> bool:
    return all(pred(v) for v in _limits(seq))


def _rule_expr(seq) -> sp.Expr | None:
    if isinstance(seq, _Closed):
        b = seq.expr()
        if b.period == 1:
            return b.branches[0]
    return None


# aggregation


_CONTRADICTIONS = [
    ("SelfAdjoint", "NotSelfAdjoint_n1"),
    ("LSB", "NotLSB"),
    ("Discrete", "NotDiscrete"),
    ("ZeroSingleton", "EqualsFree"),
    ("ACpreserved", "ACempty"),
    ("ACpreserved", "SparsePartition"),
    ("Discrete", "EqualsFree"),
    ("Discrete", "EqualsNeumann"),
    ("Discrete", "ZeroSingleton"),
    ("Discrete", "ACpreserved"),
    ("Discrete", "SparsePartition"),
]

_PRIORITY = {
    "essential_spectrum": ["ZeroSingleton", "EqualsNeumann", "EqualsFree", "NonNegative"],
    "spectral_type": ["SparsePartition", "ACempty", "ACpreserved"],
}


@dataclass(frozen=True)
class AggregationContext:
    """Facts the cross-implications need beyond the verdicts themselves."""

    kind: Kind
    q_bounded: bool = True
    half_line: bool = True

    @classmethod
    def of(cls, config: HamiltonianConfig) -> "AggregationContext":
        facts = _Facts(config)
        try:
            half = facts.half_line
        except UnknownAsymptotics:
            half = False
        return cls(config.kind, True, half)


@dataclass(frozen=True)
class Report:
    verdicts: tuple[Verdict, ...]
    summary: dict

    def conclusion(self, category: str) -> str:
        return self.summary.get(category, "Unknown")

    def by_id(self, criterion_id: str) -> Verdict:
        for v in self.verdicts:
            if v.criterion_id == criterion_id:
                return v
        raise KeyError(criterion_id)

    def to_json(self) -> dict:
        return {"verdicts": [v.to_json() for v in self.verdicts], "aggregate": dict(self.summary)}


def _kind_key(conclusion: Conclusion) -> str:
    return SpectralType.SPARSE_PARTITION.value if isinstance(conclusion, SparsePartition) else conclusion.value


def aggregate(verdicts, context: AggregationContext | None = None) -> Report:
    """Fold verdicts into one conclusion per category and apply the cross-implications.

    On the half-line, lower semiboundedness implies self-adjointness (so
    non-self-adjointness implies failure of semiboundedness); for delta' with a
    bounded potential it also rules out purely discrete spectrum.  Any two
    incompatible decided conclusions raise :class:`InternalInconsistency`.
    """
    verdicts = list(verdicts)
    seen = {_kind_key(v.conclusion) for v in verdicts if v.decided}
    half = context is None or context.half_line
    if half and "LSB" in seen and "SelfAdjoint" not in seen:
        verdicts.append(_yes("glazman_povzner_wienholtz", SelfAdjointness.SELF_ADJOINT,
                             "Glazman-Povzner-Wienholtz: semibounded implies self-adjoint", derived_from="LSB"))
    if half and "NotSelfAdjoint_n1" in seen and "NotLSB" not in seen:
        verdicts.append(_yes("glazman_povzner_wienholtz", Semiboundedness.NOT_LSB,
                             "Glazman-Povzner-Wienholtz: semibounded implies self-adjoint",
                             derived_from="NotSelfAdjoint_n1"))
    delta_prime_rule = (
        context is not None and context.kind is Kind.DELTA_PRIME and context.q_bounded and context.half_line
    )
    if delta_prime_rule and "LSB" in seen and "NotDiscrete" not in seen:
        verdicts.append(_yes("semibounded_not_discrete", Discreteness.NOT_DISCRETE,
                             "semibounded delta' Hamiltonians on the half-line with bounded q are not discrete",
                             derived_from="LSB", q_bounded=True, half_line=True))
    seen = {}
    for v in verdicts:
        if v.decided:
            seen.setdefault(_kind_key(v.conclusion), v.criterion_id)
    for a, b in _CONTRADICTIONS:
        if a in seen and b in seen:
            raise InternalInconsistency(f"{seen[a]} gives {a} but {seen[b]} gives {b}")
    summary: dict = {}
    for v in verdicts:
        if not v.decided:
            summary.setdefault(v.category, "Unknown")
            continue
        cat, name = v.category, conclusion_name(v.conclusion)
        current = summary.get(cat, "Unknown")
        if current == "Unknown":
            summary[cat] = name
        elif cat in _PRIORITY:
            order = _PRIORITY[cat]
            key = lambda s: order.index(s.split("(")[0])  # noqa: E731
            summary[cat] = min(current, name, key=key)
    return Report(tuple(verdicts), summary)


# self-adjointness, delta


_GK = "Gesztesy-Kirsch: q bounded below and centres uniformly separated"
_CARLEMAN = "Carleman test transferred through the delta Jacobi matrix: sum of d_k^2 diverges, q bounded"
_SHUBIN_STOLZ = "Shubin-Stolz: separated centres, q >= -C1 x^2 - C2, alpha_k >= -C3 x_k - C4"
_HARMONIC = "harmonic-gap family d_k = 1/k, q = 0"


_SCOPE = "delta results concern centres escaping to infinity on the half-line"


def _out_of_scope(f: _Facts, unknown: Conclusion) -> list[Verdict]:
    """A single Unknown verdict when the centres accumulate at a finite point."""
    try:
        if f.half_line:
            return []
    except UnknownAsymptotics as exc:
        return [_no("half_line_scope", unknown, _SCOPE, "undecided", detail=str(exc))]
    return [_no("half_line_scope", unknown, _SCOPE, "support accumulates at a finite point")]


def _self_adjointness_delta_verdicts(f: _Facts) -> list[Verdict]:
    U = SelfAdjointness.UNKNOWN
    if scope := _out_of_scope(f, U):
        return scope
    out = [
        _guard("gesztesy_kirsch", U, _GK, lambda: _gesztesy_kirsch(f)),
        _guard("carleman", U, _CARLEMAN, lambda: _carleman(f)),
        _guard("shubin_stolz", U, _SHUBIN_STOLZ, lambda: _shubin_stolz(f)),
    ]
    out.extend(_harmonic_family(f))
    return out


def _gesztesy_kirsch(f: _Facts) -> Verdict:
    cid = "gesztesy_kirsch"
    cert = {"q_lower_bound": f.q_min, "d_star": f.spacing.d_star}
    if f.spacing.d_star_positive:
        return _yes(cid, SelfAdjointness.SELF_ADJOINT, _GK, **cert)
    return _no(cid, SelfAdjointness.UNKNOWN, _GK, "d_* = 0", **cert)


def _carleman(f: _Facts) -> Verdict:
    cid = "carleman"
    if f.finite:
        return _no(cid, SelfAdjointness.UNKNOWN, _CARLEMAN, "finite data")
    converges = asy.series_converges(f.d**2)
    cert = {"d_class": str(f.d), "sum_d_squared": "convergent" if converges else "divergent"}
    if converges:
        return _no(cid, SelfAdjointness.UNKNOWN, _CARLEMAN, "sum of d_k^2 converges", **cert)
    return _yes(cid, SelfAdjointness.SELF_ADJOINT, _CARLEMAN, **cert)


def _shubin_stolz(f: _Facts) -> Verdict:
    cid = "shubin_stolz"
    if not f.spacing.d_star_positive:
        return _no(cid, SelfAdjointness.UNKNOWN, _SHUBIN_STOLZ, "d_* = 0")
    if f.finite:
        return _yes(cid, SelfAdjointness.SELF_ADJOINT, _SHUBIN_STOLZ, C3=0.0, C4=max(0.0, -min(f.values, default=0.0)))
    ratio = f.v / f.x
    neg = asy.negative_part(f.v) / f.x
    lims = _limits(neg)
    cert = {"alpha_minus_over_x_limits": lims}
    if all(asy.is_finite(v) for v in lims):
        return _yes(cid, SelfAdjointness.SELF_ADJOINT, _SHUBIN_STOLZ, ratio_class=str(ratio), **cert)
    return _no(cid, SelfAdjointness.UNKNOWN, _SHUBIN_STOLZ, "alpha_k^-/x_k unbounded", **cert)


def _harmonic_data(f: _Facts):
    """``(alpha expression, a, remainder)`` with ``alpha = -a(2k+1) + remainder`` or ``None``."""
    if f.finite or not f.q_zero or f.d.period != 1 or f.v.period != 1:
        return None
    if sp.simplify(f.d.branches[0] - 1 / K) != 0:
        return None
    alpha = f.v.branches[0]
    slope = asy.limit(alpha / K)
    if not asy.is_finite(slope):
        return alpha, None, None
    a = sp.nsimplify(-slope / 2)
    return alpha, a, sp.simplify(alpha + a * (2 * K + 1))


def _big_o(remainder: sp.Expr, power: sp.Expr) -> bool:
    """``remainder = O(k**power)``."""
    if remainder == 0:
        return True
    return asy.is_finite(asy.limit(sp.Abs(remainder) * K ** (-power)))


def _harmonic_family(f: _Facts) -> list[Verdict]:
    U, SA, NSA = SelfAdjointness.UNKNOWN, SelfAdjointness.SELF_ADJOINT, SelfAdjointness.NOT_SELF_ADJOINT
    ids = ["harmonic_divergent_series", "harmonic_strong_attraction", "harmonic_weak_attraction",
           "harmonic_critical", "harmonic_intermediate"]
    try:
        data = _harmonic_data(f)
    except UnknownAsymptotics as exc:
        return [_no(cid, U, _HARMONIC, "undecided", detail=str(exc)) for cid in ids]
    if data is None:
        return [_no(cid, U, _HARMONIC, "not the harmonic-gap family with q = 0") for cid in ids]
    alpha, a, rho = data
    cert = {"alpha": str(alpha), "a": "undefined" if a is None else a,
            "remainder": "undefined" if rho is None else str(rho)}

    def series():
        converges = asy.series_converges(asy.absolute(Branched.plain(alpha)) / K**3)
        if converges:
            return _no(ids[0], U, _HARMONIC, "sum |alpha_k|/k^3 converges", **cert)
        return _yes(ids[0], SA, _HARMONIC, sum_abs_alpha_over_k3="divergent", **cert)

    def strong():
        if a is not None and (a > 2 or (a == 2 and asy.limit(rho * K) is not sp.oo)):
            return _yes(ids[1], SA, _HARMONIC, bound="alpha_k <= -2(2k+1) + O(1/k)", **cert)
        return _no(ids[1], U, _HARMONIC, "alpha_k <= -2(2k+1) + O(1/k) fails", **cert)

    def weak():
        if asy.eventual_sign(alpha) >= 0 or asy.limit(alpha * K) is not -sp.oo:
            return _yes(ids[2], SA, _HARMONIC, bound="alpha_k >= -C/k", **cert)
        return _no(ids[2], U, _HARMONIC, "alpha_k k -> -inf", **cert)

    def critical():
        if a == 1:
            exponent = -sp.oo if rho == 0 else asy.limit(sp.log(sp.Abs(rho)) / sp.log(K))
            if rho == 0 or exponent < 0:
                return _yes(ids[3], NSA, _HARMONIC, remainder_exponent=exponent, deficiency=1, **cert)
        return _no(ids[3], U, _HARMONIC, "alpha_k = -(2k+1) + O(k^-eps) fails", **cert)

    def intermediate():
        if a is not None and 0 < a < 2 and _big_o(rho, -1):
            return _yes(ids[4], NSA, _HARMONIC, deficiency=1, **cert)
        return _no(ids[4], U, _HARMONIC, "alpha_k = -a(2k+1) + O(1/k), 0 < a < 2 fails", **cert)

    return [_guard(cid, U, _HARMONIC, fn) for cid, fn in zip(ids, (series, strong, weak, critical, intermediate))]


def self_adjointness_delta(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA)
    return aggregate(_self_adjointness_delta_verdicts(f), AggregationContext.of(config))


# self-adjointness, delta'


_HAMBURGER = "Hamburger criterion for the Krein-Stieltjes string of the delta' Jacobi matrix"


def _hamburger(f: _Facts, interval_length) -> Verdict:
    cid = "hamburger"
    SA, NSA = SelfAdjointness.SELF_ADJOINT, SelfAdjointness.NOT_SELF_ADJOINT
    if f.finite:
        return _yes(cid, SA, _HAMBURGER, sum_d="divergent", reason="free half-line beyond the last centre")
    half = f.half_line
    if interval_length is not None:
        if math.isinf(interval_length) != half:
            raise ValueError(f"interval length {interval_length} disagrees with the support (sum of gaps "
                             f"{'diverges' if half else 'converges'})")
    if half:
        return _yes(cid, SA, _HAMBURGER, sum_d="divergent")
    partial = asy.partial_sums((f.v + f.d).simplified())
    term = (f.d.shift(1) * partial**2).simplified()
    converges = asy.series_converges(term)
    cert = {"sum_d": "convergent", "partial_sums_beta_plus_d": str(partial), "series_term": str(term),
            "series": "convergent" if converges else "divergent"}
    if converges:
        return _yes(cid, NSA, _HAMBURGER, deficiency=1, **cert)
    return _yes(cid, SA, _HAMBURGER, **cert)


def self_adjointness_delta_prime(config: HamiltonianConfig, interval_length: float | None = None) -> Report:
    """Self-adjointness of a delta' Hamiltonian; ``interval_length`` is checked against the support."""
    f = _require(config, Kind.DELTA_PRIME)
    V = [_guard("hamburger", SelfAdjointness.UNKNOWN, _HAMBURGER, lambda: _hamburger(f, interval_length))]
    return aggregate(V, AggregationContext.of(config))


# semiboundedness, delta


_BRINCK = "Brasche window condition: sup of the negative masses over unit windows"
_BRINCK_NEC = "Brasche window condition, necessity for nonpositive q and alpha"
_UNIFORM = "separated centres with bounded q: semibounded iff inf alpha > -inf"
_IK = "Ismagilov-Kostyuchenko: negative strengths dominating the gap scale"


def _brinck_window(f: _Facts):
    report = window_functional(f.config, 1.0, Part.NEGATIVE)
    q_sup = window_functional(f.config.potential, 1.0, Part.NEGATIVE).value
    return report, q_sup


def _brinck(f: _Facts) -> Verdict:
    cid = "brinck"
    report, q_sup = _brinck_window(f)
    cert = {"q_window_sup": q_sup, "alpha_window_status": report.status, "alpha_window_value": report.value,
            **report.certificate}
    if report.status == "divergent":
        return _no(cid, Semiboundedness.UNKNOWN, _BRINCK, "alpha^- window sums unbounded", **cert)
    return _yes(cid, Semiboundedness.LSB, _BRINCK, **cert)


def _brinck_necessity(f: _Facts) -> Verdict:
    cid = "brinck_necessity"
    if f.q_max > 0:
        return _no(cid, Semiboundedness.UNKNOWN, _BRINCK_NEC, "q takes positive values")
    if not f.strengths_all("<=0"):
        return _no(cid, Semiboundedness.UNKNOWN, _BRINCK_NEC, "alpha takes positive values")
    report, q_sup = _brinck_window(f)
    cert = {"q_window_sup": q_sup, "alpha_window_status": report.status, **report.certificate}
    if report.status == "divergent":
        return _yes(cid, Semiboundedness.NOT_LSB, _BRINCK_NEC, **cert)
    return _yes(cid, Semiboundedness.LSB, _BRINCK_NEC, **cert)


def _uniform_gaps(f: _Facts) -> Verdict:
    cid = "uniform_gaps_semibounded"
    if not f.spacing.d_star_positive:
        return _no(cid, Semiboundedness.UNKNOWN, _UNIFORM, "d_* = 0")
    if f.finite:
        return _yes(cid, Semiboundedness.LSB, _UNIFORM, inf_alpha=min(f.values, default=0.0))
    low = asy.liminf(f.v)
    cert = {"liminf_alpha": low, "d_star": f.spacing.d_star}
    if low is -sp.oo:
        return _yes(cid, Semiboundedness.NOT_LSB, _UNIFORM, **cert)
    return _yes(cid, Semiboundedness.LSB, _UNIFORM, **cert)


def _ik_condition(f: _Facts) -> tuple[bool, dict, str]:
    if f.finite:
        return False, {}, "finite data"
    if not f.strengths_all("<0"):
        return False, {}, "not all strengths negative"
    if not f.d_to_zero:
        return False, {}, "d_k does not tend to 0"
    nxt = f.d.shift(1)
    expr = (-f.v) / (f.d + nxt) - 2 / (f.d * nxt)
    lims = _limits(expr)
    cert = {"balance_limits": lims}
    if all(v is sp.oo for v in lims):
        return True, cert, ""
    return False, cert, "|alpha_k|/(d_k+d_{k+1}) - 2/(d_k d_{k+1}) does not tend to +inf"


def _ik_semibounded(f: _Facts) -> Verdict:
    ok, cert, why = _ik_condition(f)
    if ok:
        return _yes("ismagilov_kostyuchenko", Semiboundedness.NOT_LSB, _IK, **cert)
    return _no("ismagilov_kostyuchenko", Semiboundedness.UNKNOWN, _IK, why, **cert)


def _semibounded_delta_verdicts(f: _Facts) -> list[Verdict]:
    U = Semiboundedness.UNKNOWN
    if scope := _out_of_scope(f, U):
        return scope
    return [
        _guard("brinck", U, _BRINCK, lambda: _brinck(f)),
        _guard("brinck_necessity", U, _BRINCK_NEC, lambda: _brinck_necessity(f)),
        _guard("uniform_gaps_semibounded", U, _UNIFORM, lambda: _uniform_gaps(f)),
        _guard("ismagilov_kostyuchenko", U, _IK, lambda: _ik_semibounded(f)),
    ]


def semibounded_delta(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA)
    return aggregate(_semibounded_delta_verdicts(f), AggregationContext.of(config))


# semiboundedness, delta'


_KLMN = "form bound for delta': cell averages of q_- bounded and 1/beta_k^- <= C1 min(d_k, d_{k+1})"
_NEC = "necessary conditions for semibounded delta' forms with q = 0"


def _klmn_condition(f: _Facts) -> tuple[bool, dict]:
    """Whether the form-bound conditions hold, with witness constants."""
    q_avg = max(0.0, -f.q_min)
    if f.finite:
        d = f.gaps + [math.inf]
        ratios = [1.0 / (-b * min(d[i], d[i + 1])) for i, b in enumerate(f.values) if b < 0]
        return True, {"C0": q_avg, "C1": max(ratios, default=0.0)}
    if not f.spacing.d_upper_finite:
        return False, {"d_upper": "+inf"}
    neg = asy.negative_part(f.v)
    lims = []
    for t in (neg * f.d, neg * f.d.shift(1)):
        lims += [asy.limit(b) for b in t.branches if b != 0]
    prefix = [1.0 / (-b * min(f.gaps[i], f.gaps[i + 1])) for i, b in enumerate(f.values[:-1]) if b < 0]
    cert = {"C0": q_avg, "beta_minus_times_gap_limits": lims, "C1_prefix": max(prefix, default=0.0)}
    return all(v > 0 for v in lims), cert


def _klmn(f: _Facts) -> Verdict:
    cid = "klmn_delta_prime"
    ok, cert = _klmn_condition(f)
    if ok:
        return _yes(cid, Semiboundedness.LSB, _KLMN, **cert)
    return _no(cid, Semiboundedness.UNKNOWN, _KLMN, "1/beta_k^- is not O(min(d_k, d_{k+1}))", **cert)


def _negative_gaps(v: Branched, d: Branched) -> tuple[list[int], Branched | None, Branched]:
    """Branches of eventually negative strengths and the gaps between consecutive ones."""
    p = math.lcm(v.period, d.period)
    ve, de = v.expand_to(p), d.expand_to(p)
    neg = [j for j, b in enumerate(ve.branches) if asy.eventual_sign(b) < 0]
    if not neg:
        return neg, None, ve
    gaps = []
    for t, j in enumerate(neg):
        if t:
            gaps.append(sp.Add(*de.branches[neg[t - 1] + 1 : j + 1]))
        else:
            prev = sp.Add(*[b.subs(K, K - 1) for b in de.branches[neg[-1] + 1 :]])
            gaps.append(prev + sp.Add(*de.branches[: j + 1]))
    return neg, Branched(tuple(gaps)), ve


def _necessity(f: _Facts) -> Verdict:
    cid = "negative_strength_necessity"
    U = Semiboundedness.UNKNOWN
    if f.finite:
        return _no(cid, U, _NEC, "finite data satisfies the necessary conditions for a suitable C")
    if not f.q_zero:
        return _no(cid, U, _NEC, "q is not identically zero")
    neg, dminus, ve = _negative_gaps(f.v, f.d)
    if not neg:
        return _no(cid, U, _NEC, "finitely many negative strengths")
    strengths = Branched(tuple(-ve.branches[j] for j in neg))
    inv_limits = _limits(strengths)
    cert = {"negative_branches": neg, "beta_minus_limits": inv_limits}
    if any(v == 0 for v in inv_limits):
        return _yes(cid, Semiboundedness.NOT_LSB, _NEC, violated="1/beta_k^- unbounded", **cert)
    products = _limits(strengths * dminus) + _limits(strengths * dminus.shift(1))
    cert["beta_minus_times_negative_gap_limits"] = products
    if any(v == 0 for v in products):
        return _yes(cid, Semiboundedness.NOT_LSB, _NEC, violated="1/beta_j^- not O(min negative gaps)", **cert)
    return _no(cid, U, _NEC, "necessary conditions hold", **cert)


def _semibounded_delta_prime_verdicts(f: _Facts) -> list[Verdict]:
    U = Semiboundedness.UNKNOWN
    if scope := _out_of_scope(f, U):
        return scope
    return [
        _guard("klmn_delta_prime", U, _KLMN, lambda: _klmn(f)),
        _guard("negative_strength_necessity", U, _NEC, lambda: _necessity(f)),
    ]


def semibounded_delta_prime(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA_PRIME)
    return aggregate(_semibounded_delta_prime_verdicts(f), AggregationContext.of(config))


# discreteness, delta


_FINITE = "finitely many interactions: a finite-rank resolvent perturbation of the potential problem"
_GAPS_NEC = "Jacobi-matrix transfer: a purely discrete self-adjoint Hamiltonian needs d_k -> 0"
_MOLCHANOV = "Molchanov-type criterion under the Brasche window condition"
_RATIO = "bounded q, alpha^- window-bounded, d_k -> 0 and alpha_k/d_k -> +inf"
_CHIHARA = "Chihara condition transferred through the delta Jacobi matrix"
_SQRT = "square-root family x_k = 2 sqrt(k), alpha_k = -C sqrt(k): discrete iff C > 4"


def _finite_not_discrete(f: _Facts) -> Verdict:
    if f.finite:
        return _yes("finite_rank", Discreteness.NOT_DISCRETE, _FINITE, essential_spectrum_from=f.q_tail)
    return _no("finite_rank", Discreteness.UNKNOWN, _FINITE, "infinitely many interactions")


def _gap_necessity(f: _Facts, self_adjoint: bool) -> Verdict:
    cid = "gap_necessity"
    U = Discreteness.UNKNOWN
    if f.finite:
        return _no(cid, U, _GAPS_NEC, "finite data")
    if not self_adjoint:
        return _no(cid, U, _GAPS_NEC, "self-adjointness not established")
    if not f.spacing.d_upper_finite:
        return _no(cid, U, _GAPS_NEC, "d^* = +inf")
    if f.d_limsup_positive:
        return _yes(cid, Discreteness.NOT_DISCRETE, _GAPS_NEC, limsup_d=asy.limsup(f.d))
    return _no(cid, U, _GAPS_NEC, "d_k -> 0")


def _molchanov(f: _Facts, brinck_holds: bool) -> Verdict:
    cid = "molchanov"
    U = Discreteness.UNKNOWN
    if f.finite:
        return _no(cid, U, _MOLCHANOV, "limit x -> inf undefined for finite data")
    if not brinck_holds:
        return _no(cid, U, _MOLCHANOV, "Brasche window condition fails")
    if f.d_limsup_positive:
        return _yes(cid, Discreteness.NOT_DISCRETE, _MOLCHANOV, limsup_d=asy.limsup(f.d),
                    reason="windows inside long gaps carry only the bounded potential")
    if f.v.period != 1 or f.d.period != 1:
        return _no(cid, U, _MOLCHANOV, "window sums of interleaved data are not classified")
    ratio = asy.limit(f.v.branches[0] / f.d.branches[0])
    cert = {"alpha_over_d_limit": ratio, "window_sum_class": f"eps * ({f.v.branches[0]}) / ({f.d.branches[0]})"}
    if ratio is sp.oo:
        return _yes(cid, Discreteness.DISCRETE, _MOLCHANOV, **cert)
    return _yes(cid, Discreteness.NOT_DISCRETE, _MOLCHANOV, **cert)


def _alpha_over_gap(f: _Facts, brinck_holds: bool) -> Verdict:
    cid = "alpha_over_gap"
    U = Discreteness.UNKNOWN
    if f.finite or not f.d_to_zero:
        return _no(cid, U, _RATIO, "d_k does not tend to 0")
    if not brinck_holds:
        return _no(cid, U, _RATIO, "alpha^- window sums unbounded")
    lims = _limits(f.v / f.d)
    if all(v is sp.oo for v in lims):
        return _yes(cid, Discreteness.DISCRETE, _RATIO, alpha_over_d_limits=lims)
    return _no(cid, U, _RATIO, "alpha_k/d_k does not tend to +inf", alpha_over_d_limits=lims)


def _chihara(f: _Facts, self_adjoint: bool) -> Verdict:
    cid = "chihara"
    U = Discreteness.UNKNOWN
    if f.finite or not f.d_to_zero:
        return _no(cid, U, _CHIHARA, "d_k does not tend to 0")
    if not self_adjoint:
        return _no(cid, U, _CHIHARA, "self-adjointness of the Jacobi matrix not established")
    ratio = _limits(asy.absolute(f.v) / f.d)
    inv = _limits(1 / (f.v * f.d))
    cert = {"abs_alpha_over_d_limits": ratio, "inverse_alpha_d_limits": inv}
    if not all(v is sp.oo for v in ratio):
        return _no(cid, U, _CHIHARA, "|alpha_k|/d_k does not tend to +inf", **cert)
    if len(set(inv)) != 1:
        return _no(cid, U, _CHIHARA, "lim 1/(alpha_k d_k) does not exist", **cert)
    limit = inv[0]
    quarter = sp.Rational(-1, 4)
    if limit == quarter:
        return _no(cid, U, _CHIHARA, "boundary case lim 1/(alpha_k d_k) = -1/4", **cert)
    if limit > quarter:
        return _yes(cid, Discreteness.DISCRETE, _CHIHARA, **cert)
    return _no(cid, U, _CHIHARA, "lim 1/(alpha_k d_k) < -1/4", **cert)


def _ik_discrete(f: _Facts) -> Verdict:
    ok, cert, why = _ik_condition(f)
    if ok:
        return _yes("ismagilov_kostyuchenko", Discreteness.DISCRETE, _IK, **cert)
    return _no("ismagilov_kostyuchenko", Discreteness.UNKNOWN, _IK, why, **cert)


def _sqrt_family(f: _Facts) -> Verdict:
    cid = "square_root_family"
    U = Discreteness.UNKNOWN
    rule = f.config.support.rule
    x = _rule_expr(rule) if rule is not None else None
    alpha = _rule_expr(f.config.strengths)
    if not f.q_zero or x is None or alpha is None or sp.simplify(x - 2 * sp.sqrt(K)) != 0:
        return _no(cid, U, _SQRT, "not the square-root family with q = 0")
    c = sp.simplify(-alpha / sp.sqrt(K))
    if c.has(K) or not c.is_positive:
        return _no(cid, U, _SQRT, "alpha_k is not -C sqrt(k) with C > 0")
    if c == 4:
        return _no(cid, U, _SQRT, "C = 4 is excluded", C=c)
    return _yes(cid, Discreteness.DISCRETE if c > 4 else Discreteness.NOT_DISCRETE, _SQRT, C=c)


def _discreteness_delta_verdicts(f: _Facts, self_adjoint: bool, brinck_holds: bool) -> list[Verdict]:
    U = Discreteness.UNKNOWN
    if scope := _out_of_scope(f, U):
        return scope
    return [
        _finite_not_discrete(f),
        _guard("gap_necessity", U, _GAPS_NEC, lambda: _gap_necessity(f, self_adjoint)),
        _guard("molchanov", U, _MOLCHANOV, lambda: _molchanov(f, brinck_holds)),
        _guard("alpha_over_gap", U, _RATIO, lambda: _alpha_over_gap(f, brinck_holds)),
        _guard("chihara", U, _CHIHARA, lambda: _chihara(f, self_adjoint)),
        _guard("ismagilov_kostyuchenko", U, _IK, lambda: _ik_discrete(f)),
        _guard("square_root_family", U, _SQRT, lambda: _sqrt_family(f)),
    ]


def _brinck_holds(f: _Facts) -> bool:
    try:
        return _brinck(f).decided
    except UnknownAsymptotics:
        return False


def discreteness_delta(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA)
    sa = self_adjointness_delta(config).conclusion("self_adjointness") == "SelfAdjoint"
    return aggregate(_discreteness_delta_verdicts(f, sa, _brinck_holds(f)), AggregationContext.of(config))


# discreteness, delta'


_CUBIC = "Kac-Krein test: lim x_k sum_{j>=k} d_j^3 > 0 excludes discreteness"
_WEAK_NEG = "Kac-Krein test: beta_k >= -C d_k^3 excludes discreteness"
_STRONG_NEG = "Kac-Krein test: beta_k <= -C(1/d_k + 1/d_{k+1}) excludes discreteness"
_STRING_IFF = "Kac-Krein criterion when beta_k + d_k >= 0"
_NEUMANN_SUFF = "Molchanov condition for q plus growing cell averages (Neumann comparison)"
_NEUMANN_NEC = "semibounded delta' with discrete spectrum forces Molchanov's condition on q"
_ALT_GAPS = "alternating long/short gaps with d_{2k} beta_{2k-1} -> 0"
_SB_ND = "semibounded delta' Hamiltonians on the half-line with bounded q are not discrete"


def _half_line_q_zero(f: _Facts) -> str | None:
    if f.finite:
        return "finite data"
    if not f.half_line:
        return "support accumulates at a finite point"
    if not f.q_zero:
        return "q is not identically zero"
    return None


def _x_times_tail(f: _Facts, terms: Branched) -> tuple[list, Branched]:
    """Limits of ``x_k * sum_{j>=k} terms_j``; a divergent tail gives ``+inf``."""
    tail = asy.tail_sums(terms)
    p = math.lcm(tail.period, f.x.period)
    xs, ts = f.x.expand_to(p).branches, tail.expand_to(p).branches
    return [sp.oo if t is sp.oo else asy.limit(x * t) for x, t in zip(xs, ts)], tail


def _cubic_tail(f: _Facts) -> Verdict:
    cid, U = "cubic_gap_tail", Discreteness.UNKNOWN
    why = _half_line_q_zero(f) or (None if f.d_to_zero else "d_k does not tend to 0")
    if why:
        return _no(cid, U, _CUBIC, why)
    lims, tail = _x_times_tail(f, f.d**3)
    cert = {"x_times_cubic_tail_limits": lims, "cubic_tail_class": str(tail)}
    if all(v > 0 for v in lims):
        return _yes(cid, Discreteness.NOT_DISCRETE, _CUBIC, **cert)
    return _no(cid, U, _CUBIC, "lim x_k sum d_j^3 is not positive", **cert)


def _weak_negative(f: _Facts) -> Verdict:
    cid, U = "weak_negative_strengths", Discreteness.UNKNOWN
    why = _half_line_q_zero(f) or (None if f.d_to_zero else "d_k does not tend to 0")
    if why:
        return _no(cid, U, _WEAK_NEG, why)
    ratio = asy.negative_part(f.v) / f.d**3
    lims = _limits(ratio)
    if all(asy.is_finite(v) for v in lims):
        return _yes(cid, Discreteness.NOT_DISCRETE, _WEAK_NEG, beta_minus_over_d3_limits=lims)
    return _no(cid, U, _WEAK_NEG, "beta_k^-/d_k^3 unbounded", beta_minus_over_d3_limits=lims)


def _strong_negative(f: _Facts) -> Verdict:
    cid, U = "strong_negative_strengths", Discreteness.UNKNOWN
    why = _half_line_q_zero(f) or (None if f.d_to_zero else "d_k does not tend to 0")
    if why:
        return _no(cid, U, _STRONG_NEG, why)
    if not f.strengths_all("<0"):
        return _no(cid, U, _STRONG_NEG, "not all strengths negative")
    nxt = f.d.shift(1)
    lims = _limits((-f.v) * f.d * nxt / (f.d + nxt))
    if all(v > 0 for v in lims):
        return _yes(cid, Discreteness.NOT_DISCRETE, _STRONG_NEG, scaled_strength_limits=lims)
    return _no(cid, U, _STRONG_NEG, "|beta_k| is not >= C(1/d_k + 1/d_{k+1})", scaled_strength_limits=lims)


def _string_iff(f: _Facts) -> Verdict:
    cid, U = "krein_stieltjes_iff", Discreteness.UNKNOWN
    why = _half_line_q_zero(f)
    if why:
        return _no(cid, U, _STRING_IFF, why)
    shifted = (f.v + f.d).simplified()
    prefix = [b + g for b, g in zip(f.values, f.gaps)]
    answers = [asy.holds_for_all(b, ">=0") for b in shifted.branches]
    if any(p < 0 for p in prefix) or any(a is False for a in answers):
        return _no(cid, U, _STRING_IFF, "beta_k + d_k takes negative values")
    if not all(a is True for a in answers):
        raise UnknownAsymptotics(f"sign of beta_k + d_k = {shifted} undecided")
    cubic = _x_times_tail(f, f.d**3)[0]
    linear = _x_times_tail(f, shifted)[0]
    cert = {"x_times_cubic_tail_limits": cubic, "x_times_beta_plus_d_tail_limits": linear}
    discrete = all(v == 0 for v in cubic + linear)
    return _yes(cid, Discreteness.DISCRETE if discrete else Discreteness.NOT_DISCRETE, _STRING_IFF, **cert)


def _neumann_sufficient(f: _Facts) -> Verdict:
    return _no("neumann_molchanov_sufficient", Discreteness.UNKNOWN, _NEUMANN_SUFF,
               "a bounded potential has bounded window integrals", q_lower=f.q_min, q_upper=f.q_max)


def _neumann_necessity(f: _Facts) -> Verdict:
    cid, U = "neumann_molchanov_necessity", Discreteness.UNKNOWN
    if f.finite:
        return _no(cid, U, _NEUMANN_NEC, "finite data")
    if not f.half_line:
        return _no(cid, U, _NEUMANN_NEC, "support accumulates at a finite point")
    if not f.spacing.d_upper_finite:
        return _no(cid, U, _NEUMANN_NEC, "d^* = +inf")
    ok, cert = _klmn_condition(f)
    if not ok:
        return _no(cid, U, _NEUMANN_NEC, "form-bound conditions fail", **cert)
    return _yes(cid, Discreteness.NOT_DISCRETE, _NEUMANN_NEC, q_window_bounded=True, **cert)


def _alternating_gaps(f: _Facts) -> Verdict:
    return _no("alternating_gaps", Discreteness.UNKNOWN, _ALT_GAPS,
               "Molchanov's condition on q fails for bounded potentials", q_lower=f.q_min, q_upper=f.q_max)


def _semibounded_not_discrete(f: _Facts, lsb: bool) -> Verdict:
    cid, U = "semibounded_not_discrete", Discreteness.UNKNOWN
    if f.finite:
        return _no(cid, U, _SB_ND, "finite data")
    if not f.half_line:
        return _no(cid, U, _SB_ND, "support accumulates at a finite point")
    if not lsb:
        return _no(cid, U, _SB_ND, "semiboundedness not established")
    return _yes(cid, Discreteness.NOT_DISCRETE, _SB_ND, q_bounded=True, half_line=True)


def _gap_necessity_prime(f: _Facts, self_adjoint: bool) -> Verdict:
    v = _gap_necessity(f, self_adjoint)
    return Verdict("gap_necessity", v.applicable, v.conclusion, v.certificate,
                   "Jacobi-matrix transfer for delta': a purely discrete Hamiltonian needs d_k -> 0")


def _discreteness_delta_prime_verdicts(f: _Facts, self_adjoint: bool, lsb: bool) -> list[Verdict]:
    U = Discreteness.UNKNOWN
    return [
        _finite_not_discrete(f),
        _guard("gap_necessity", U, _GAPS_NEC, lambda: _gap_necessity_prime(f, self_adjoint)),
        _guard("cubic_gap_tail", U, _CUBIC, lambda: _cubic_tail(f)),
        _guard("weak_negative_strengths", U, _WEAK_NEG, lambda: _weak_negative(f)),
        _guard("strong_negative_strengths", U, _STRONG_NEG, lambda: _strong_negative(f)),
        _guard("krein_stieltjes_iff", U, _STRING_IFF, lambda: _string_iff(f)),
        _neumann_sufficient(f),
        _guard("neumann_molchanov_necessity", U, _NEUMANN_NEC, lambda: _neumann_necessity(f)),
        _alternating_gaps(f),
        _guard("semibounded_not_discrete", U, _SB_ND, lambda: _semibounded_not_discrete(f, lsb)),
    ]


def discreteness_delta_prime(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA_PRIME)
    sa = self_adjointness_delta_prime(config).conclusion("self_adjointness") == "SelfAdjoint"
    lsb = semibounded_delta_prime(config).conclusion("semiboundedness") == "LSB"
    return aggregate(_discreteness_delta_prime_verdicts(f, sa, lsb), AggregationContext.of(config))


# essential spectrum and spectral type, delta


_BIRMAN = "Birman-type stability: unit-window sums of |alpha_k| vanish"
_BIRMAN_RATIO = "Birman-type stability: alpha_k/d_k -> 0"
_AC_KEPT = "trace-class stability: sum |alpha_k|/d_{k+1} < inf with d^* < inf, bounded q"
_AC_POS = "Shubin-Stolz: separated centres, alpha_k >= 0 and limsup alpha_k = +inf"
_AC_UNB = "Mikhailets: separated centres, bounded q and limsup |alpha_k| = +inf"
_LOT = "Lotoreichik: sparse centres with alpha_k -> +inf"


def _finite_rank_spectra(f: _Facts) -> list[Verdict]:
    if not f.finite:
        return [_no("finite_rank", EssentialSpectrum.UNKNOWN, _FINITE, "infinitely many interactions"),
                _no("finite_rank", SpectralType.UNKNOWN, _FINITE, "infinitely many interactions")]
    cert = {"essential_spectrum": f"[{_fmt(f.q_tail)}, +inf)"}
    return [_yes("finite_rank", EssentialSpectrum.EQUALS_FREE, _FINITE, **cert),
            _yes("finite_rank", SpectralType.AC_PRESERVED, _FINITE, **cert)]


def _free_set(f: _Facts) -> str:
    return f"[{_fmt(f.q_tail)}, +inf)"


def _birman(f: _Facts) -> Verdict:
    cid, U = "birman", EssentialSpectrum.UNKNOWN
    if f.finite:
        return _no(cid, U, _BIRMAN, "finite data (see finite_rank)")
    report = window_functional(f.config, 1.0, Part.ABSOLUTE)
    lims = report.certificate.get("branch_limits", [])
    if lims and all(v == "0" for v in lims):
        return _yes(cid, EssentialSpectrum.EQUALS_FREE, _BIRMAN, essential_spectrum=_free_set(f), **report.certificate)
    return _no(cid, U, _BIRMAN, "unit-window sums of |alpha_k| do not vanish", **report.certificate)


def _birman_ratio(f: _Facts) -> Verdict:
    cid, U = "birman_ratio", EssentialSpectrum.UNKNOWN
    if f.finite:
        return _no(cid, U, _BIRMAN_RATIO, "finite data (see finite_rank)")
    lims = _limits(f.v / f.d)
    if all(v == 0 for v in lims):
        return _yes(cid, EssentialSpectrum.EQUALS_FREE, _BIRMAN_RATIO, alpha_over_d_limits=lims,
                    essential_spectrum=_free_set(f))
    return _no(cid, U, _BIRMAN_RATIO, "alpha_k/d_k does not tend to 0", alpha_over_d_limits=lims)


def _ac_preserved(f: _Facts) -> Verdict:
    cid, U = "ac_preserved", SpectralType.UNKNOWN
    if f.finite:
        return _no(cid, U, _AC_KEPT, "finite data (see finite_rank)")
    if not f.spacing.d_upper_finite:
        return _no(cid, U, _AC_KEPT, "d^* = +inf")
    if not asy.series_converges(asy.absolute(f.v) / f.d.shift(1)):
        return _no(cid, U, _AC_KEPT, "sum |alpha_k|/d_{k+1} diverges")
    cert = {"ac_spectrum": "[0, +inf)" if f.q_tail == 0 else "that of the potential problem",
            "purely_ac_on_positive_axis": bool(f.q_zero and f.spacing.d_star_positive)}
    return _yes(cid, SpectralType.AC_PRESERVED, _AC_KEPT, **cert)


def _ac_absent_positive(f: _Facts) -> Verdict:
    cid, U = "ac_absent_positive", SpectralType.UNKNOWN
    if f.finite or not f.spacing.d_star_positive:
        return _no(cid, U, _AC_POS, "needs infinitely many separated centres")
    if not f.strengths_all(">=0"):
        return _no(cid, U, _AC_POS, "negative strengths present")
    top = asy.limsup(f.v)
    if top is sp.oo:
        return _yes(cid, SpectralType.AC_EMPTY, _AC_POS, limsup_alpha=top)
    return _no(cid, U, _AC_POS, "alpha bounded above", limsup_alpha=top)


def _ac_absent_unbounded(f: _Facts) -> Verdict:
    cid, U = "ac_absent_unbounded", SpectralType.UNKNOWN
    if f.finite or not f.spacing.d_star_positive:
        return _no(cid, U, _AC_UNB, "needs infinitely many separated centres")
    top = asy.limsup(asy.absolute(f.v))
    if top is sp.oo:
        return _yes(cid, SpectralType.AC_EMPTY, _AC_UNB, limsup_abs_alpha=top)
    return _no(cid, U, _AC_UNB, "alpha bounded", limsup_abs_alpha=top)


def _lotoreichik_data(f: _Facts):
    if f.finite:
        return None, "finite data"
    if not f.q_zero:
        return None, "q is not identically zero"
    prev = f.d.shift(-1)
    if not _all_limits(f.d / prev, lambda v: v is sp.oo):
        return None, "d_k/d_{k-1} does not tend to +inf"
    if not _all_limits(f.v, lambda v: v is sp.oo):
        return None, "alpha_k does not tend to +inf"
    return asy.liminf(f.d / (prev * f.v**2)), ""


def _lotoreichik(f: _Facts) -> list[Verdict]:
    cid = "lotoreichik"
    a, why = _lotoreichik_data(f)
    if a is None:
        return [_no(cid, SpectralType.UNKNOWN, _LOT, why), _no(cid, EssentialSpectrum.UNKNOWN, _LOT, why)]
    cert = {"a": a}
    if a == 0:
        return [_no(cid, SpectralType.UNKNOWN, _LOT, "a = 0", **cert),
                _no(cid, EssentialSpectrum.UNKNOWN, _LOT, "a = 0", **cert)]
    if a is sp.oo:
        if not f.strengths_all(">0"):
            reason = "a = +inf with strengths of both signs"
            return [_no(cid, SpectralType.UNKNOWN, _LOT, reason, **cert),
                    _no(cid, EssentialSpectrum.UNKNOWN, _LOT, reason, **cert)]
        cert.update(spectrum="[0, +inf)", singular_continuous="[0, +inf)")
        return [_yes(cid, SparsePartition(math.inf), _LOT, **cert),
                _yes(cid, EssentialSpectrum.EQUALS_FREE, _LOT, **cert)]
    inv = 1 / a
    cert.update(point_spectrum_within=f"[0, {_fmt(inv)}]", singular_continuous_contains=f"[{_fmt(inv)}, +inf)")
    return [_yes(cid, SparsePartition(float(a)), _LOT, **cert),
            _yes(cid, EssentialSpectrum.NON_NEGATIVE, _LOT, **cert)]


def _essential_delta_verdicts(f: _Facts) -> list[Verdict]:
    E, T = EssentialSpectrum.UNKNOWN, SpectralType.UNKNOWN
    if scope := _out_of_scope(f, E) + _out_of_scope(f, T):
        return scope
    out = _finite_rank_spectra(f)
    out += [
        _guard("birman", E, _BIRMAN, lambda: _birman(f)),
        _guard("birman_ratio", E, _BIRMAN_RATIO, lambda: _birman_ratio(f)),
        _guard("ac_preserved", T, _AC_KEPT, lambda: _ac_preserved(f)),
        _guard("ac_absent_positive", T, _AC_POS, lambda: _ac_absent_positive(f)),
        _guard("ac_absent_unbounded", T, _AC_UNB, lambda: _ac_absent_unbounded(f)),
    ]
    try:
        out += _lotoreichik(f)
    except UnknownAsymptotics as exc:
        out += [_no("lotoreichik", T, _LOT, "undecided", detail=str(exc)),
                _no("lotoreichik", E, _LOT, "undecided", detail=str(exc))]
    return out


def essential_and_type_delta(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA)
    return aggregate(_essential_delta_verdicts(f), AggregationContext.of(config))


# essential spectrum, delta'


_NEUMANN_ESS = "Neumann comparison: |beta_k|^-1 / min(d_k, d_{k+1}) -> 0"
_ZERO = "Neumann comparison with d_k -> 0 and vanishing cell averages of |q|"


def _neumann_ratio(f: _Facts) -> tuple[bool, dict]:
    mag = asy.absolute(f.v)
    lims = _limits(1 / (mag * f.d)) + _limits(1 / (mag * f.d.shift(1)))
    return all(v == 0 for v in lims), {"inverse_beta_over_gap_limits": lims}


def _essential_delta_prime_verdicts(f: _Facts) -> list[Verdict]:
    E = EssentialSpectrum.UNKNOWN
    if f.finite:
        return [_yes("finite_rank", EssentialSpectrum.EQUALS_FREE, _FINITE, essential_spectrum=_free_set(f))]

    def comparison():
        if not f.half_line:
            return _no("neumann_comparison", E, _NEUMANN_ESS, "support accumulates at a finite point")
        ok, cert = _neumann_ratio(f)
        if ok:
            return _yes("neumann_comparison", EssentialSpectrum.EQUALS_NEUMANN, _NEUMANN_ESS,
                        potential_free_reference=f.q_tail == 0, **cert)
        return _no("neumann_comparison", E, _NEUMANN_ESS, "ratio does not vanish", **cert)

    def accumulation():
        if not f.half_line:
            return _no("neumann_accumulation", E, _ZERO, "support accumulates at a finite point")
        ok, cert = _neumann_ratio(f)
        if not ok:
            return _no("neumann_accumulation", E, _ZERO, "ratio does not vanish", **cert)
        if f.q_tail != 0:
            return _no("neumann_accumulation", E, _ZERO, "cell averages of |q| do not vanish", **cert)
        if not f.d_to_zero:
            return _no("neumann_accumulation", E, _ZERO, "d_k does not tend to 0", **cert)
        return _yes("neumann_accumulation", EssentialSpectrum.ZERO_SINGLETON, _ZERO, **cert)

    return [_guard("neumann_comparison", E, _NEUMANN_ESS, comparison),
            _guard("neumann_accumulation", E, _ZERO, accumulation)]


def essential_delta_prime(config: HamiltonianConfig) -> Report:
    f = _require(config, Kind.DELTA_PRIME)
    return aggregate(_essential_delta_prime_verdicts(f), AggregationContext.of(config))


# everything at once


def analyze(config: HamiltonianConfig) -> Report:
    """All classifiers for one configuration, folded into a single report."""
    f = _Facts(config)
    if config.kind is Kind.DELTA:
        sa = _self_adjointness_delta_verdicts(f)
        sb = _semibounded_delta_verdicts(f)
        sa_known = aggregate(sa + sb).conclusion("self_adjointness") == "SelfAdjoint"
        brinck = any(v.criterion_id == "brinck" and v.decided for v in sb)
        verdicts = sa + sb + _discreteness_delta_verdicts(f, sa_known, brinck) + _essential_delta_verdicts(f)
    elif config.kind is Kind.DELTA_PRIME:
        sa = [_guard("hamburger", SelfAdjointness.UNKNOWN, _HAMBURGER, lambda: _hamburger(f, None))]
        sb = _semibounded_delta_prime_verdicts(f)
        partial = aggregate(sa + sb)
        verdicts = sa + sb + _discreteness_delta_prime_verdicts(
            f, partial.conclusion("self_adjointness") == "SelfAdjoint", partial.conclusion("semiboundedness") == "LSB"
        ) + _essential_delta_prime_verdicts(f)
    else:
        raise KindMismatch(config.kind)
    return aggregate(verdicts, AggregationContext.of(config))
