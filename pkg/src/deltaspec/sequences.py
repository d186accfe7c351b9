"""Closed vocabulary of strength/position sequences (indices start at 1)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy as sp

from deltaspec.asymptotics import K, Branched
from deltaspec.errors import ConfigParse, InsufficientSequence, UnknownAsymptotics

#: Strength marker for a Neumann decoupling point (delta' with beta = +inf).
NEUMANN = math.inf


def exact(value) -> sp.Expr:
    """Turn a JSON number into an exact sympy number (0.1 -> 1/10)."""
    if isinstance(value, sp.Basic):
        return value
    if isinstance(value, bool):
        raise ConfigParse("booleans are not numbers")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        if math.isinf(value):
            return sp.oo if value > 0 else -sp.oo
        return sp.nsimplify(value, rational=True)
    raise ConfigParse(f"not a number: {value!r}")


class SymbolicSequence:
    """Base class: value rule ``n -> value`` for ``n >= 1``."""

    #: number of entries, ``None`` for infinite sequences
    length: int | None = None

    def value(self, n: int) -> float:
        raise NotImplementedError

    def exact_value(self, n: int):
        """Exact value (sympy number) where available; used for ordering checks."""
        return exact(self.value(n))

    def values(self, count: int) -> np.ndarray:
        if self.length is not None and count > self.length:
            raise InsufficientSequence(f"need {count} entries, sequence has {self.length}")
        return np.array([self.value(n) for n in range(1, count + 1)], dtype=float)

    def asymptotic(self) -> Branched:
        raise UnknownAsymptotics(f"{type(self).__name__} has no asymptotic class")

    @property
    def is_finite(self) -> bool:
        return self.length is not None

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Finite(SymbolicSequence):
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(float(v) for v in self.items))

    @property
    def length(self) -> int:  # type: ignore[override]
        return len(self.items)

    def value(self, n: int) -> float:
        if not 1 <= n <= len(self.items):
            raise InsufficientSequence(f"index {n} outside 1..{len(self.items)}")
        return self.items[n - 1]

    def exact_value(self, n: int):
        v = self.value(n)
        return sp.oo if math.isinf(v) and v > 0 else exact(v)

    def to_json(self) -> dict:
        return {"values": ["inf" if math.isinf(v) and v > 0 else v for v in self.items]}


class _Closed(SymbolicSequence):
    """Rule families with an exact sympy expression."""

    def expr(self) -> Branched:
        raise NotImplementedError

    def asymptotic(self) -> Branched:
        return self.expr()

    def value(self, n: int) -> float:
        return self.expr().evaluate(n)

    def exact_value(self, n: int):
        b = self.expr()
        q, j = divmod(n - 1, b.period)
        return b.branches[j].subs(K, q + 1)


@dataclass(frozen=True)
class PowerLaw(_Closed):
    """``c * k**p``."""

    c: float
    p: float

    def expr(self) -> Branched:
        return Branched.plain(exact(self.c) * K ** exact(self.p))

    def to_json(self) -> dict:
        return {"rule": {"type": "power", "c": self.c, "p": self.p}}


@dataclass(frozen=True)
class AffinePower(_Closed):
    """``c0 + c1*k + c2*k**p`` with ``p < 0``."""

    c0: float
    c1: float
    c2: float
    p: float

    def __post_init__(self):
        if not self.p < 0:
            raise ConfigParse("affine_power requires p < 0")

    def expr(self) -> Branched:
        return Branched.plain(exact(self.c0) + exact(self.c1) * K + exact(self.c2) * K ** exact(self.p))

    def to_json(self) -> dict:
        return {"rule": {"type": "affine_power", "c0": self.c0, "c1": self.c1, "c2": self.c2, "p": self.p}}


@dataclass(frozen=True)
class Geometric(_Closed):
    """``c * r**k``."""

    c: float
    r: float

    def expr(self) -> Branched:
        return Branched.plain(exact(self.c) * exact(self.r) ** K)

    def to_json(self) -> dict:
        return {"rule": {"type": "geometric", "c": self.c, "r": self.r}}


_EXPR_OK = re.compile(r"^[0-9k+\-*/().\s^a-z_]*$")
_EXPR_NAMES = {"sqrt": sp.sqrt, "log": sp.log, "exp": sp.exp, "k": K, "pi": sp.pi, "E": sp.E}


@dataclass(frozen=True)
class Expr(_Closed):
    """Elementary exp-log expression in ``k`` (its own asymptotic annotation)."""

    text: str
    _parsed: sp.Expr = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not _EXPR_OK.match(self.text):
            raise ConfigParse(f"expression contains forbidden characters: {self.text!r}")
        names = set(re.findall(r"[a-z_]+", self.text))
        unknown = names - set(_EXPR_NAMES)
        if unknown:
            raise ConfigParse(f"unknown names in expression: {sorted(unknown)}")
        try:
            parsed = sp.sympify(self.text.replace("^", "**"), locals=_EXPR_NAMES, rational=True)
        except (sp.SympifyError, SyntaxError, TypeError) as exc:
            raise ConfigParse(f"cannot parse expression {self.text!r}") from exc
        object.__setattr__(self, "_parsed", parsed)

    def expr(self) -> Branched:
        return Branched.plain(self._parsed)

    def to_json(self) -> dict:
        return {"rule": {"type": "expr", "expr": self.text}}


@dataclass(frozen=True)
class Interleaved(_Closed):
    """``value_{2k-1} = odd(k)``, ``value_{2k} = even(k)``."""

    odd: _Closed
    even: _Closed

    def expr(self) -> Branched:
        a, b = self.odd.expr(), self.even.expr()
        if a.period != 1 or b.period != 1:
            raise ConfigParse("interleaved branches must be plain rules")
        return Branched((a.branches[0], b.branches[0]))

    def to_json(self) -> dict:
        return {"rule": {"type": "interleaved", "odd": self.odd.to_json()["rule"], "even": self.even.to_json()["rule"]}}


@dataclass(frozen=True)
class Custom(SymbolicSequence):
    """Arbitrary evaluator; ``annotation`` is an asymptotic equivalent in ``k`` or ``None``."""

    fn: Callable[[int], float]
    annotation: sp.Expr | None = None

    def value(self, n: int) -> float:
        return float(self.fn(n))

    def exact_value(self, n: int):
        v = self.fn(n)
        return v if isinstance(v, sp.Basic) else exact(v)

    def asymptotic(self) -> Branched:
        if self.annotation is None:
            raise UnknownAsymptotics("custom sequence without asymptotic annotation")
        return Branched.plain(self.annotation)

    def to_json(self) -> dict:
        raise ConfigParse("custom sequences cannot be serialized")


_RULE_KEYS = {
    "power": {"c", "p"},
    "affine_power": {"c0", "c1", "c2", "p"},
    "geometric": {"c", "r"},
    "expr": {"expr"},
    "interleaved": {"odd", "even"},
}


def rule_from_json(doc: dict) -> _Closed:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigParse("rule needs a 'type'")
    kind = doc["type"]
    if kind not in _RULE_KEYS:
        raise ConfigParse(f"unknown rule type {kind!r}")
    keys = set(doc) - {"type"}
    if keys != _RULE_KEYS[kind]:
        raise ConfigParse(f"rule {kind!r} needs keys {sorted(_RULE_KEYS[kind])}, got {sorted(keys)}")
    if kind == "power":
        return PowerLaw(_num(doc["c"]), _num(doc["p"]))
    if kind == "affine_power":
        return AffinePower(_num(doc["c0"]), _num(doc["c1"]), _num(doc["c2"]), _num(doc["p"]))
    if kind == "geometric":
        return Geometric(_num(doc["c"]), _num(doc["r"]))
    if kind == "expr":
        if not isinstance(doc["expr"], str):
            raise ConfigParse("expr must be a string")
        return Expr(doc["expr"])
    return Interleaved(rule_from_json(doc["odd"]), rule_from_json(doc["even"]))


def _num(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigParse(f"expected a number, got {v!r}")
    return float(v) if isinstance(v, float) else v


def sequence_from_json(doc: dict, allow_inf: bool = False, list_key: str = "values") -> SymbolicSequence:
    if not isinstance(doc, dict) or len(doc) != 1 or next(iter(doc)) not in (list_key, "rule"):
        raise ConfigParse(f"sequence must be {{'{list_key}': [...]}} or {{'rule': {{...}}}}, got {doc!r}")
    if "rule" in doc:
        return rule_from_json(doc["rule"])
    items = []
    for v in doc[list_key]:
        if v == "inf":
            if not allow_inf:
                raise ConfigParse("'inf' strengths are only allowed for delta_prime")
            items.append(math.inf)
        else:
            items.append(float(_num(v)))
    return Finite(tuple(items))


