"""Asymptotic classes of integer sequences, decided symbolically.

A sequence is held as a :class:`Branched` object: ``P`` sympy expressions in
the positive integer symbol :data:`K`, where branch ``j`` gives the value at
index ``n = P*(k-1) + j + 1``.  Period one covers the closed-form families;
period two covers interleaved supports such as ``x_{2k-1} = k,
x_{2k} = k + a**(-3k)``.

Limits go through sympy's Gruntz algorithm, which is a decision procedure for
exp-log expressions.  Whenever sympy cannot decide (oscillation, unevaluated
``Limit``, exceptions) an :class:`UnknownAsymptotics` is raised; nothing here
falls back to sampling.

Partial sums and tails are returned as asymptotic *equivalents*: they are
valid inside limits of products and quotients, not of differences.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import sympy as sp

from deltaspec.errors import UnknownAsymptotics

K = sp.Symbol("k", positive=True, integer=True)
_S = sp.Symbol("s", positive=True)

oo = sp.oo


def _bad(value) -> bool:
    if value is sp.nan or isinstance(value, (sp.AccumBounds, sp.Limit)):
        return True
    return bool(getattr(value, "has", lambda *_: False)(sp.AccumBounds, sp.Limit, sp.nan, sp.zoo))


@functools.lru_cache(maxsize=4096)
def limit(expr: sp.Expr) -> sp.Expr:
    """``lim_{k->oo} expr``; raises if the limit does not exist or is undecided."""
    expr = sp.sympify(expr)
    if not expr.has(K):
        return expr
    try:
        value = sp.limit(expr, K, oo)
    except (NotImplementedError, ValueError, TypeError, RecursionError, sp.PoleError) as exc:
        raise UnknownAsymptotics(f"limit of {expr} undecided: {exc}") from exc
    if _bad(value):
        raise UnknownAsymptotics(f"limit of {expr} does not exist ({value})")
    return value


@functools.lru_cache(maxsize=4096)
def eventual_sign(expr: sp.Expr) -> int:
    """Sign of ``expr`` for all large ``k`` (0 means eventually identically zero)."""
    expr = sp.sympify(expr)
    if sp.simplify(expr) == 0:
        return 0
    if not expr.has(K):
        return int(sp.sign(expr))
    value = limit(sp.sign(expr))
    if value not in (1, -1, 0):
        raise UnknownAsymptotics(f"no eventual sign for {expr}")
    return int(value)


def holds_for_all(expr: sp.Expr, relation: str) -> bool | None:
    """Decide ``expr rel 0`` for every k >= 1 from sympy assumptions.

    ``relation`` is one of ``'>0'``, ``'>=0'``, ``'<0'``, ``'<=0'``.  Returns
    ``None`` when the assumption system cannot decide and the eventual sign
    does not refute it.
    """
    expr = sp.simplify(sp.sympify(expr))
    attr = {">0": "is_positive", ">=0": "is_nonnegative", "<0": "is_negative", "<=0": "is_nonpositive"}[relation]
    answer = getattr(expr, attr)
    if answer is not None:
        return bool(answer)
    try:
        s = eventual_sign(expr)
    except UnknownAsymptotics:
        return None
    ok = {">0": s > 0, ">=0": s >= 0, "<0": s < 0, "<=0": s <= 0}[relation]
    return None if ok else False


@dataclass(frozen=True)
class Branched:
    """A sequence given by ``period`` sympy branches in :data:`K`."""

    branches: tuple[sp.Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(sp.sympify(b) for b in self.branches))

    @classmethod
    def plain(cls, expr) -> "Branched":
        return cls((sp.sympify(expr),))

    @property
    def period(self) -> int:
        return len(self.branches)

    def expand_to(self, period: int) -> "Branched":
        if period == self.period:
            return self
        if period % self.period:
            raise ValueError(f"period {period} is not a multiple of {self.period}")
        m = period // self.period
        out = []
        for j in range(period):
            j0 = j % self.period
            kk = m * (K - 1) + j // self.period + 1
            out.append(self.branches[j0].subs(K, kk))
        return Branched(tuple(out))

    def shift(self, s: int) -> "Branched":
        """Sequence ``n -> self[n + s]``."""
        p = self.period
        out = []
        for j in range(p):
            q, j2 = divmod(j + s, p)
            out.append(self.branches[j2].subs(K, K + q))
        return Branched(tuple(out))

    def combine(self, other, op: Callable) -> "Branched":
        if not isinstance(other, Branched):
            other = Branched.plain(other)
        p = math.lcm(self.period, other.period)
        a, b = self.expand_to(p), other.expand_to(p)
        return Branched(tuple(op(x, y) for x, y in zip(a.branches, b.branches)))

    def map(self, op: Callable) -> "Branched":
        return Branched(tuple(op(b) for b in self.branches))

    def __add__(self, other):
        return self.combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self.combine(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self.combine(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self.combine(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.combine(other, lambda x, y: x / y)

    def __rtruediv__(self, other):
        return self.combine(other, lambda x, y: y / x)

    def __neg__(self):
        return self.map(lambda x: -x)

    def __pow__(self, e):
        return self.map(lambda x: x**e)

    def simplified(self) -> "Branched":
        return self.map(sp.simplify)

    def is_zero(self) -> bool:
        return all(sp.simplify(b) == 0 for b in self.branches)

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def __str__(self):
        if self.period == 1:
            return str(self.branches[0])
        return "interleaved(" + ", ".join(str(b) for b in self.branches) + ")"

    # numeric evaluation, for witnesses and matrix assembly only
    def evaluate(self, n: int) -> float:
        q, j = divmod(n - 1, self.period)
        fn = _lambdified(self.branches[j])
        try:
            return float(fn(q + 1))
        except OverflowError:
            return math.inf
        except (ZeroDivisionError, ValueError):
            return math.nan


@functools.lru_cache(maxsize=1024)
def _lambdified(expr):
    return sp.lambdify(K, expr, modules=["math"])


# limits over all branches

def branch_limits(seq: Branched) -> tuple:
    return tuple(limit(b) for b in seq.branches)


def lim(seq: Branched):
    """The limit when every branch agrees, else ``None`` (limit does not exist)."""
    values = branch_limits(seq)
    first = values[0]
    if all(v == first for v in values):
        return first
    return None


def liminf(seq: Branched):
    return sp.Min(*branch_limits(seq))


def limsup(seq: Branched):
    return sp.Max(*branch_limits(seq))


def negative_part(seq: Branched) -> Branched:
    """Eventual ``(|v| - v)/2`` branchwise."""
    return seq.map(lambda e: -e if eventual_sign(e) < 0 else sp.Integer(0))


def positive_part(seq: Branched) -> Branched:
    return seq.map(lambda e: e if eventual_sign(e) > 0 else sp.Integer(0))


def absolute(seq: Branched) -> Branched:
    return seq.map(lambda e: e * eventual_sign(e))


def is_finite(value) -> bool:
    return value.is_finite is True


# series and sums of period-1 terms

def _ratio(term: sp.Expr):
    try:
        return limit(sp.Abs(term.subs(K, K + 1) / term))
    except UnknownAsymptotics:
        return None


def _converges_plain(term: sp.Expr) -> bool:
    term = sp.simplify(term)
    if term == 0:
        return True
    s = eventual_sign(term)
    if s == 0:
        return True
    t = s * term
    r = _ratio(t)
    if r is not None and r != 1:
        return bool(r < 1)
    try:
        e = limit(sp.log(t) / sp.log(K))
    except UnknownAsymptotics:
        e = None
    if e is not None and e != -1:
        return bool(e < -1)
    try:
        verdict = sp.Sum(t, (K, 1, oo)).is_convergent()
    except (NotImplementedError, ValueError, TypeError) as exc:
        raise UnknownAsymptotics(f"convergence of sum {t} undecided") from exc
    if verdict is None or not isinstance(verdict, (bool, sp.logic.boolalg.BooleanAtom)):
        raise UnknownAsymptotics(f"convergence of sum {t} undecided")
    return bool(verdict)


def series_converges(seq: Branched) -> bool:
    """Whether ``sum_n seq[n]`` converges (terms eventually one-signed per branch)."""
    return all(_converges_plain(b) for b in seq.branches)


def _group(seq: Branched) -> sp.Expr:
    return sp.Add(*seq.branches)


def _partial_plain(term: sp.Expr) -> sp.Expr:
    term = sp.simplify(term)
    if term == 0:
        return sp.Integer(0)
    s = eventual_sign(term)
    if s == 0:
        return sp.Integer(0)
    r = _ratio(term)
    if r is not None and r != 1:
        if r is oo:
            return term
        if r > 1:
            return term * r / (r - 1)
    if _converges_plain(term):
        total = sp.Sum(term, (K, 1, oo)).evalf(30)
        if not total.is_finite or total == 0:
            raise UnknownAsymptotics(f"sum of {term} has no usable nonzero value")
        return total
    integral = sp.integrate(term.subs(K, _S), (_S, 1, K))
    if integral.has(sp.Integral):
        raise UnknownAsymptotics(f"no partial-sum equivalent for {term}")
    return integral


def _tail_plain(term: sp.Expr) -> sp.Expr:
    term = sp.simplify(term)
    if term == 0:
        return sp.Integer(0)
    if not _converges_plain(term):
        return oo
    r = _ratio(term)
    if r is not None and r != 1:
        return term / (1 - r)
    integral = sp.integrate(term.subs(K, _S), (_S, K, oo))
    if integral.has(sp.Integral) or _bad(integral):
        raise UnknownAsymptotics(f"no tail equivalent for {term}")
    return integral


def partial_sums(seq: Branched) -> Branched:
    """Equivalent of ``n -> sum_{j<=n} seq[j]`` (constant when convergent)."""
    if seq.period == 1:
        return Branched.plain(_partial_plain(seq.branches[0]))
    whole = _partial_plain(_group(seq))
    prev = whole.subs(K, K - 1) if whole.has(K) else whole
    out = []
    acc = sp.Integer(0)
    for b in seq.branches:
        acc = acc + b
        out.append(prev + acc)
    return Branched(tuple(out))


def tail_sums(seq: Branched) -> Branched:
    """Equivalent of ``n -> sum_{j>=n} seq[j]`` (``oo`` when divergent)."""
    if seq.period == 1:
        return Branched.plain(_tail_plain(seq.branches[0]))
    rest = _tail_plain(_group(seq))
    nxt = rest.subs(K, K + 1) if rest.has(K) else rest
    out = []
    for j in range(seq.period):
        out.append(sp.Add(*seq.branches[j:]) + nxt)
    return Branched(tuple(out))


def describe(value) -> str:
    """Render a sympy limit value for certificates."""
    if value is oo:
        return "+inf"
    if value is -oo:
        return "-inf"
    try:
        f = float(value)
    except TypeError:
        return str(value)
    return repr(f) if f != int(f) or abs(f) > 1e15 else str(int(f))
