"""Exact utilities with infinitesimal benefits.

A :class:`UtilityValue` is a real part plus rational multiples of three
positive infinitesimals ``alpha``, ``eps`` and ``rho`` with
``rho < eps < alpha < every positive real``.  Values are compared
lexicographically on ``(real, alpha, eps, rho)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import ParseError

Rational = Union[int, Fraction]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
_COMPONENTS = ("real", "alpha", "eps", "rho")


def parse_rational(text: object, where: str = "value") -> Fraction:
    """Parse an integer or a ``"p/q"`` string.  Floats are rejected."""
    if isinstance(text, bool):
        raise ParseError(f"{where}: expected a rational, got a boolean")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if isinstance(text, str):
        m = _RATIONAL_RE.match(text)
        if m:
            num, den = m.group(1), m.group(2)
            if den is not None and int(den) == 0:
                raise ParseError(f"{where}: zero denominator in {text!r}")
            return Fraction(int(num), int(den) if den else 1)
        raise ParseError(f"{where}: {text!r} is not an integer or p/q rational")
    raise ParseError(f"{where}: expected an integer or p/q string, got {type(text).__name__}")


def _frac(x: object) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; use Fraction or 'p/q'")
    return Fraction(x)  # type: ignore[arg-type]


@dataclass(frozen=True, eq=True)
class UtilityValue:
    real: Fraction = Fraction(0)
    alpha: Fraction = Fraction(0)
    eps: Fraction = Fraction(0)
    rho: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for name in _COMPONENTS:
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @classmethod
    def of(cls, x: "UtilityValue | Rational") -> "UtilityValue":
        if isinstance(x, UtilityValue):
            return x
        return cls(real=_frac(x))

    def key(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.real, self.alpha, self.eps, self.rho)

    # arithmetic
    def __add__(self, other: "UtilityValue | Rational") -> "UtilityValue":
        try:
            o = UtilityValue.of(other)
        except TypeError:
            return NotImplemented
        return UtilityValue(self.real + o.real, self.alpha + o.alpha,
                            self.eps + o.eps, self.rho + o.rho)

    __radd__ = __add__

    def __neg__(self) -> "UtilityValue":
        return UtilityValue(-self.real, -self.alpha, -self.eps, -self.rho)

    def __sub__(self, other: "UtilityValue | Rational") -> "UtilityValue":
        try:
            o = UtilityValue.of(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: "UtilityValue | Rational") -> "UtilityValue":
        return UtilityValue.of(other) - self

    # ordering
    def __lt__(self, other: "UtilityValue") -> bool:
        return self.key() < UtilityValue.of(other).key()

    def __le__(self, other: "UtilityValue") -> bool:
        return self.key() <= UtilityValue.of(other).key()

    def __gt__(self, other: "UtilityValue") -> bool:
        return self.key() > UtilityValue.of(other).key()

    def __ge__(self, other: "UtilityValue") -> bool:
        return self.key() >= UtilityValue.of(other).key()

    def is_real(self) -> bool:
        return self.alpha == 0 and self.eps == 0 and self.rho == 0

    def to_json(self) -> dict[str, str]:
        return {name: str(getattr(self, name)) for name in _COMPONENTS}

    @classmethod
    def from_json(cls, data: object, where: str = "utility") -> "UtilityValue":
        """Accept the four-key object form, or a bare rational as a real value."""
        if isinstance(data, dict):
            unknown = set(data) - set(_COMPONENTS)
            if unknown:
                raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
            parts = {k: parse_rational(data.get(k, 0), f"{where}.{k}") for k in _COMPONENTS}
            return cls(**parts)
        return cls(real=parse_rational(data, where))

    def __str__(self) -> str:
        terms: list[str] = []
        for name, coeff in (("alpha", self.alpha), ("eps", self.eps), ("rho", self.rho)):
            if coeff == 0:
                continue
            mag = abs(coeff)
            body = name if mag == 1 else f"{mag}*{name}"
            terms.append(("-" if coeff < 0 else "+") + body)
        if self.real != 0 or not terms:
            head = str(self.real)
        else:
            first = terms.pop(0)
            head = first[1:] if first[0] == "+" else first
        return head + "".join(terms)

    def __repr__(self) -> str:
        return f"UtilityValue({self})"


ZERO = UtilityValue()
ALPHA = UtilityValue(alpha=1)
EPS = UtilityValue(eps=1)
RHO = UtilityValue(rho=1)

LT, EQ, GT = -1, 0, 1


def cmp(u: UtilityValue, v: UtilityValue) -> int:
    """Three-way comparison returning ``LT``, ``EQ`` or ``GT``."""
    ku, kv = u.key(), v.key()
    return LT if ku < kv else (GT if ku > kv else EQ)


def add(u: UtilityValue, v: UtilityValue) -> UtilityValue:
    return u + v


def neg(u: UtilityValue) -> UtilityValue:
    return -u


def usum(values: Iterable[UtilityValue]) -> UtilityValue:
    total = ZERO
    for v in values:
        total = total + v
    return total


def parse_utility_text(text: str) -> UtilityValue:
    """Parse a compact textual utility such as ``"3/2+alpha-eps"`` or ``"-2*rho"``."""
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty utility expression")
    if s[0] not in "+-":
        s = "+" + s
    parts = re.findall(r"[+-][^+-]+", s)
    if "".join(parts) != s:
        raise ParseError(f"cannot parse utility expression {text!r}")
    acc = {k: Fraction(0) for k in _COMPONENTS}
    for part in parts:
        sign = -1 if part[0] == "-" else 1
        body = part[1:]
        for name in ("alpha", "eps", "rho"):
            if body == name:
                acc[name] += sign
                break
            if body.endswith("*" + name):
                acc[name] += sign * parse_rational(body[: -len(name) - 1], text)
                break
        else:
            acc["real"] += sign * parse_rational(body, text)
    return UtilityValue(**acc)
