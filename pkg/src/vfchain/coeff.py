"""Base fields, the action monoid Gamma and truncated Novikov arithmetic.

Scalars are plain Python objects: :class:`fractions.Fraction` over the
rationals, :class:`ModP` residues over a prime field and ``int`` over the
integers.  Novikov elements are finite sums ``sum c_g T^g`` over ``g`` in
``Z^r`` together with an explicit precision cutoff: every term whose action
is ``>= cutoff`` is unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

INF = math.inf


class PrecisionError(ArithmeticError):
    """Raised when a truncated computation cannot certify a result."""


def parse_rational(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class ModP:
    """Residue class modulo a prime."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.p = p
        self.v = int(v) % p

    def _other(self, other):
        if isinstance(other, ModP):
            if other.p != self.p:
                raise ValueError("mixing residues of different primes")
            return other.v
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return ModP(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return ModP(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return ModP(o - self.v, self.p)

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return ModP(self.v * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return ModP(-self.v, self.p)

    def __pos__(self):
        return self

    def inverse(self) -> "ModP":
        if self.v == 0:
            raise ZeroDivisionError("zero residue")
        return ModP(pow(self.v, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self * ModP(o, self.p).inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return ModP(o, self.p) * self.inverse()

    def __eq__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return False
        return (self.v - o) % self.p == 0

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"{self.v} mod {self.p}"


@dataclass(frozen=True)
class BaseField:
    """Coefficient ring: the rationals, a prime field, or the integers.

    The integers are not a field; they are only accepted by the Smith
    normal form paths (homology with torsion).
    """

    kind: str  # "rationals" | "prime" | "integers"
    characteristic: int = 0

    def __post_init__(self):
        if self.kind not in ("rationals", "prime", "integers"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "prime" and not _is_prime(self.characteristic):
            raise ValueError(f"{self.characteristic} is not prime")
        if self.kind != "prime" and self.characteristic != 0:
            raise ValueError("characteristic must be 0 unless prime field")

    @classmethod
    def rationals(cls) -> "BaseField":
        return cls("rationals", 0)

    @classmethod
    def prime(cls, p: int) -> "BaseField":
        return cls("prime", p)

    @classmethod
    def integers(cls) -> "BaseField":
        return cls("integers", 0)

    @classmethod
    def parse(cls, text: str) -> "BaseField":
        """Parse ``q``, ``z``, ``f2`` or ``fp:N``."""
        t = text.strip().lower()
        if t in ("q", "qq", "rationals"):
            return cls.rationals()
        if t in ("z", "zz", "integers"):
            return cls.integers()
        if t.startswith("fp:"):
            return cls.prime(int(t[3:]))
        if t.startswith("f") and t[1:].isdigit():
            return cls.prime(int(t[1:]))
        raise ValueError(f"cannot parse field {text!r}")

    @property
    def is_field(self) -> bool:
        return self.kind != "integers"

    def __call__(self, x):
        """Coerce ``x`` into this ring."""
        if self.kind == "prime":
            if isinstance(x, ModP):
                if x.p != self.characteristic:
                    raise ValueError("residue of the wrong prime")
                return x
            x = parse_rational(x) if isinstance(x, str) else x
            if isinstance(x, Fraction):
                if x.denominator % self.characteristic == 0:
                    raise ZeroDivisionError(f"{x} has no image mod {self.characteristic}")
                return ModP(x.numerator, self.characteristic) / x.denominator
            return ModP(int(x), self.characteristic)
        if self.kind == "integers":
            x = parse_rational(x) if isinstance(x, str) else Fraction(x)
            if x.denominator != 1:
                raise ValueError(f"{x} is not an integer")
            return int(x)
        if isinstance(x, ModP):
            raise ValueError("cannot coerce a residue into the rationals")
        return parse_rational(x) if isinstance(x, str) else Fraction(x)

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def inv(self, x):
        if not x:
            raise ZeroDivisionError("inverse of zero")
        if self.kind == "integers":
            if x in (1, -1):
                return x
            raise ZeroDivisionError(f"{x} is not a unit in Z")
        return self.one / x

    def format(self, x) -> str:
        if isinstance(x, ModP):
            return str(x.v)
        return format_rational(x)

    def name(self) -> str:
        if self.kind == "prime":
            return f"fp:{self.characteristic}"
        return {"rationals": "q", "integers": "z"}[self.kind]


QQ = BaseField.rationals()
ZZ = BaseField.integers()
F2 = BaseField.prime(2)


@dataclass(frozen=True)
class GammaMonoid:
    """The group Z^r with a rational action vector.

    Gamma_+ is the submonoid of non-negative action.  Elements are tuples of
    ints.  Ties in action are broken lexicographically when a total order is
    needed.
    """

    action_vector: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "action_vector", tuple(parse_rational(a) for a in self.action_vector)
        )

    @classmethod
    def trivial(cls) -> "GammaMonoid":
        return cls(())

    @property
    def rank(self) -> int:
        return len(self.action_vector)

    @property
    def zero(self) -> tuple:
        return (0,) * self.rank

    def check(self, g) -> tuple:
        g = tuple(int(x) for x in g)
        if len(g) != self.rank:
            raise ValueError(f"element {g} has length {len(g)}, monoid rank is {self.rank}")
        return g

    def action(self, g) -> Fraction:
        g = self.check(g)
        return sum((a * x for a, x in zip(self.action_vector, g)), Fraction(0))

    def in_plus(self, g) -> bool:
        return self.action(g) >= 0

    def add(self, g, h) -> tuple:
        return tuple(x + y for x, y in zip(self.check(g), self.check(h)))

    def sub(self, g, h) -> tuple:
        return tuple(x - y for x, y in zip(self.check(g), self.check(h)))

    def neg(self, g) -> tuple:
        return tuple(-x for x in self.check(g))

    def key(self, g):
        """Total order: action first, then lexicographic."""
        return (self.action(g), tuple(g))

    def injective_on(self, gs: Iterable) -> bool:
        seen = {}
        for g in gs:
            a = self.action(g)
            if a in seen and seen[a] != tuple(g):
                return False
            seen[a] = tuple(g)
        return True


def action_of(monoid: GammaMonoid, g) -> Fraction:
    """The action homomorphism A(g) = A . g."""
    return monoid.action(g)


class NovikovElement:
    """A truncated element of the Novikov ring over ``monoid`` and ``field``.

    ``terms`` maps exponents (tuples in Z^r) to nonzero scalars; every term
    has action strictly below ``cutoff``.  Instances are immutable.
    """

    __slots__ = ("monoid", "field", "_terms", "cutoff")

    def __init__(self, monoid: GammaMonoid, field: BaseField,
                 terms: Mapping | None = None, cutoff=INF):
        self.monoid = monoid
        self.field = field
        cutoff = INF if cutoff is None or cutoff == INF else parse_rational(cutoff)
        self.cutoff = cutoff
        clean = {}
        for g, c in (terms or {}).items():
            g = monoid.check(g)
            c = field(c)
            if not c:
                continue
            if monoid.action(g) >= cutoff:
                continue
            clean[g] = clean.get(g, field.zero) + c
            if not clean[g]:
                del clean[g]
        self._terms = clean

    # constructors
    @classmethod
    def zero(cls, monoid, field, cutoff=INF):
        return cls(monoid, field, {}, cutoff)

    @classmethod
    def constant(cls, monoid, field, c, cutoff=INF):
        return cls(monoid, field, {monoid.zero: c}, cutoff)

    @classmethod
    def monomial(cls, monoid, field, g, c=1, cutoff=INF):
        return cls(monoid, field, {tuple(g): c}, cutoff)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def support(self) -> list:
        return sorted(self._terms, key=self.monoid.key)

    def coefficient(self, g):
        g = self.monoid.check(g)
        if self.monoid.action(g) >= self.cutoff:
            raise PrecisionError(f"coefficient of T^{g} lies beyond the cutoff {self.cutoff}")
        return self._terms.get(g, self.field.zero)

    def valuation(self):
        """Minimal action over the support (``inf`` for zero up to cutoff)."""
        if not self._terms:
            return INF
        return min(self.monoid.action(g) for g in self._terms)

    def leading_term(self):
        """(exponent, coefficient) of the least term in the total order."""
        if not self._terms:
            raise PrecisionError("zero up to cutoff has no leading term")
        g = min(self._terms, key=self.monoid.key)
        return g, self._terms[g]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def _compatible(self, other) -> "NovikovElement":
        if isinstance(other, NovikovElement):
            if other.monoid != self.monoid or other.field != self.field:
                raise ValueError("Novikov elements over different monoids or fields")
            return other
        if isinstance(other, (int, Fraction, ModP)):
            return NovikovElement.constant(self.monoid, self.field, other)
        return NotImplemented

    def __add__(self, other):
        other = self._compatible(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for g, c in other._terms.items():
            terms[g] = terms.get(g, self.field.zero) + c
        return NovikovElement(self.monoid, self.field, terms, min(self.cutoff, other.cutoff))

    __radd__ = __add__

    def __neg__(self):
        return NovikovElement(self.monoid, self.field,
                              {g: -c for g, c in self._terms.items()}, self.cutoff)

    def __sub__(self, other):
        other = self._compatible(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._compatible(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._compatible(other)
        if other is NotImplemented:
            return other
        va, vb = self.valuation(), other.valuation()
        cutoff = min(self.cutoff + vb, other.cutoff + va, self.cutoff + other.cutoff)
        terms = {}
        zero = self.field.zero
        for g, c in self._terms.items():
            for h, d in other._terms.items():
                k = tuple(x + y for x, y in zip(g, h))
                terms[k] = terms.get(k, zero) + c * d
        return NovikovElement(self.monoid, self.field, terms, cutoff)

    __rmul__ = __mul__

    def scale(self, c) -> "NovikovElement":
        c = self.field(c)
        return NovikovElement(self.monoid, self.field,
                              {g: c * x for g, x in self._terms.items()}, self.cutoff)

    def shift(self, g) -> "NovikovElement":
        """Multiply by T^g."""
        g = self.monoid.check(g)
        a = self.monoid.action(g)
        return NovikovElement(
            self.monoid, self.field,
            {self.monoid.add(h, g): c for h, c in self._terms.items()},
            self.cutoff + a,
        )

    def truncate(self, cutoff) -> "NovikovElement":
        cutoff = INF if cutoff == INF else parse_rational(cutoff)
        return NovikovElement(self.monoid, self.field, self._terms, min(cutoff, self.cutoff))

    def __eq__(self, other):
        other = self._compatible(other) if not isinstance(other, NovikovElement) else other
        if other is NotImplemented or not isinstance(other, NovikovElement):
            return False
        return self._terms == other._terms and self.cutoff == other.cutoff

    def agrees_with(self, other, cutoff=None) -> bool:
        """Equality of all terms below ``cutoff`` (default: common cutoff)."""
        other = self._compatible(other)
        diff = self - other
        if cutoff is None:
            return diff.is_zero()
        if cutoff > diff.cutoff:
            raise PrecisionError(f"cannot compare beyond precision {diff.cutoff}")
        return diff.truncate(cutoff).is_zero()

    def __hash__(self):
        return hash((frozenset(self._terms.items()), self.cutoff))

    def __repr__(self):
        if not self._terms:
            body = "0"
        else:
            parts = []
            for g in self.support():
                c = self.field.format(self._terms[g])
                parts.append(c if not any(g) else f"{c}*T^{list(g) if len(g) != 1 else g[0]}")
            body = " + ".join(parts)
        if self.cutoff != INF:
            body += f" + O({format_rational(self.cutoff)})"
        return body

    # serialization
    def to_json(self) -> dict:
        return {
            "terms": [[list(g), self.field.format(self._terms[g])] for g in self.support()],
            "cutoff": "inf" if self.cutoff == INF else format_rational(self.cutoff),
        }

    @classmethod
    def from_json(cls, data, monoid: GammaMonoid, field: BaseField) -> "NovikovElement":
        cutoff = data.get("cutoff", "inf")
        cutoff = INF if cutoff in ("inf", None) else parse_rational(cutoff)
        terms = {}
        for g, c in data["terms"]:
            terms[tuple(g)] = field(parse_rational(c))
        return cls(monoid, field, terms, cutoff)


def nov_add(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return a + b


def nov_mul(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return a * b


def nov_invert_unipotent(a: NovikovElement, cutoff) -> NovikovElement:
    """Inverse of ``u + n`` (u a nonzero constant, val(n) > 0) up to ``cutoff``.

    Uses the truncated geometric series; each power of ``n`` raises the
    valuation by at least ``val(n)``, so finitely many terms suffice.
    """
    monoid, field = a.monoid, a.field
    zero_g = monoid.zero
    u = a._terms.get(zero_g)
    if u is None:
        raise ValueError("not unipotent: no invertible constant term")
    rest = {g: c for g, c in a._terms.items() if g != zero_g}
    for g in rest:
        if monoid.action(g) <= 0:
            raise ValueError(f"not unipotent: term T^{g} has non-positive action")
    cutoff = INF if cutoff == INF else parse_rational(cutoff)
    if cutoff == INF and rest:
        raise PrecisionError("an infinite series needs a finite cutoff")
    uinv = field.inv(u)
    n = NovikovElement(monoid, field, rest, a.cutoff)
    ratio = n.scale(-uinv)  # -u^{-1} n
    result = NovikovElement.constant(monoid, field, uinv, cutoff)
    power = NovikovElement.constant(monoid, field, uinv, INF)
    step = ratio.valuation()
    if step == INF:
        # n is zero below its cutoff; the inverse is only known to that precision
        return NovikovElement(monoid, field, {zero_g: uinv}, min(cutoff, a.cutoff))
    while True:
        power = power * ratio
        if power.valuation() >= cutoff or power.valuation() >= power.cutoff:
            result = result + power
            break
        result = result + power
    return result.truncate(cutoff)


def nov_inverse(a: NovikovElement, cutoff=None) -> NovikovElement:
    """Inverse in the Novikov field for an element with a unique leading term.

    ``a = c T^g (1 + n)`` with ``val(n) > 0``; the result is known up to
    ``a.cutoff - 2 val(a)`` (or ``cutoff`` when smaller).
    """
    if a.is_zero():
        raise PrecisionError("cannot invert an element that is zero up to its cutoff")
    monoid, field = a.monoid, a.field
    g, c = a.leading_term()
    v = monoid.action(g)
    for h in a._terms:
        if h != g and monoid.action(h) == v:
            raise PrecisionError(f"leading action {v} attained by several exponents")
    normalized = a.shift(monoid.neg(g)).scale(field.inv(c))  # 1 + n
    target = normalized.cutoff
    if cutoff is not None:
        target = min(target, parse_rational(cutoff) + v)
    if normalized.is_zero() or target <= 0:
        raise PrecisionError("insufficient precision to invert")
    if target == INF and len(normalized._terms) == 1:
        inv = NovikovElement.constant(monoid, field, 1)
    else:
        inv = nov_invert_unipotent(normalized, target)
    return inv.shift(monoid.neg(g)).scale(field.inv(c))


@dataclass(frozen=True)
class ScalarRing:
    """Coefficients that are plain field (or integer) scalars."""

    field: BaseField

    novikov = False

    @property
    def zero(self):
        return self.field.zero

    @property
    def one(self):
        return self.field.one

    def __call__(self, x):
        if isinstance(x, NovikovElement):
            raise TypeError("Novikov coefficient in a scalar complex")
        return self.field(x)

    def is_zero(self, x) -> bool:
        return not x

    def to_json(self, x):
        return self.field.format(x)

    def from_json(self, x):
        return self.field(parse_rational(x))


@dataclass(frozen=True)
class NovikovRing:
    """Coefficients in the truncated Novikov ring over ``monoid`` and ``field``."""

    monoid: GammaMonoid
    field: BaseField

    novikov = True

    @property
    def zero(self):
        return NovikovElement.zero(self.monoid, self.field)

    @property
    def one(self):
        return NovikovElement.constant(self.monoid, self.field, 1)

    def __call__(self, x):
        if isinstance(x, NovikovElement):
            if x.monoid != self.monoid or x.field != self.field:
                raise ValueError("Novikov element over a different monoid or field")
            return x
        return NovikovElement.constant(self.monoid, self.field, x)

    def monomial(self, g, c=1, cutoff=INF):
        return NovikovElement.monomial(self.monoid, self.field, g, c, cutoff)

    def is_zero(self, x) -> bool:
        return not x

    def to_json(self, x):
        return x.to_json()

    def from_json(self, x):
        return NovikovElement.from_json(x, self.monoid, self.field)


def ring_for(field: BaseField, monoid: GammaMonoid | None = None):
    return ScalarRing(field) if monoid is None else NovikovRing(monoid, field)
