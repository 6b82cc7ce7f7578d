"""Exact arithmetic over K = Q(lambda), lambda^2 = -lambda1*lambda2*lambda3.

Elements are pairs of rationals ``a + b*L``. When the discriminant is a
rational square the extension collapses and every element is stored with
``b = 0``. Polynomial code works over the matching sympy domain, which
``FieldSpec.domain`` provides together with the conversions in both
directions.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import sympy
from sympy import QQ, integer_nthroot
from sympy.external.gmpy import MPQ
from sympy.ntheory.factor_ import core

from towercert.errors import DegenerateParameters, DivisionByZero, MixedFieldSpecs


logger = logging.getLogger(__name__)

Rational = MPQ

FieldOp = Literal["add", "sub", "mul", "div"]


def to_rational(value: "int | str | Rational | sympy.Rational") -> Rational:
    """Coerce ints, strings like ``"-1/2"`` and sympy rationals to a Rational."""
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, sympy.Basic):
        return QQ.from_sympy(value)
    if QQ.of_type(value):
        return value
    return QQ.convert(value)


def parse_rational(text: str) -> Rational:
    """Parse ``"3"``, ``"-7/2"`` style literals; floats are rejected."""
    cleaned = text.strip()
    if not cleaned or "." in cleaned or "e" in cleaned.lower():
        raise ValueError(f"not a rational literal: {text!r}")
    try:
        return QQ.from_sympy(sympy.Rational(cleaned))
    except (TypeError, ValueError, sympy.SympifyError) as e:
        raise ValueError(f"not a rational literal: {text!r}") from e


def _rational_sqrt(q: Rational) -> Rational | None:
    """Exact square root of a rational, or None when it is irrational."""
    if q < 0:
        return None
    num, den = int(q.numerator), int(q.denominator)
    root, exact = integer_nthroot(num * den, 2)
    if not exact:
        return None
    return MPQ(int(root), den)


@dataclass(frozen=True)
class FieldSpec:
    """The base field determined by the three branch points of f.

    ``lambda`` is stored as ``scale * sqrt(squarefree)`` so sympy can build the
    algebraic field from an integer radicand.
    """

    lambda1: Rational
    lambda2: Rational
    lambda3: Rational
    disc: Rational
    is_square: bool
    sqrt_disc: Rational | None
    squarefree: int
    scale: Rational

    @property
    def lambdas(self) -> tuple[Rational, Rational, Rational]:
        return (self.lambda1, self.lambda2, self.lambda3)

    # --- Constructors ---
    def elem(self, a: "int | str | Rational" = 0, b: "int | str | Rational" = 0) -> "FieldElem":
        return FieldElem(to_rational(a), to_rational(b), self)

    @property
    def zero(self) -> "FieldElem":
        return self.elem(0)

    @property
    def one(self) -> "FieldElem":
        return self.elem(1)

    @property
    def lam(self) -> "FieldElem":
        return self.elem(0, 1)

    @property
    def roots(self) -> tuple["FieldElem", "FieldElem", "FieldElem"]:
        return tuple(self.elem(r) for r in self.lambdas)

    # --- sympy bridge ---
    @cached_property
    def domain(self):
        """QQ when the discriminant is a square, else QQ(sqrt(D))."""
        if self.is_square:
            return QQ
        return QQ.algebraic_field(sympy.sqrt(sympy.Integer(self.squarefree)))

    @cached_property
    def _generator(self):
        return self.domain.from_sympy(sympy.sqrt(sympy.Integer(self.squarefree)))

    def to_domain(self, x: "FieldElem"):
        if x.spec != self:
            raise MixedFieldSpecs(f"element of {x.spec.label} used in {self.label}")
        if self.is_square:
            return x.a
        dom = self.domain
        return dom.convert(x.a) + dom.convert(x.b * self.scale) * self._generator

    def from_domain(self, value) -> "FieldElem":
        if self.is_square:
            return self.elem(QQ.convert(value))
        coeffs = _pair(value.to_list())
        gen = _pair(self._generator.to_list())
        b_gen = coeffs[0] / gen[0]
        a = coeffs[1] - b_gen * gen[1]
        return FieldElem(a, b_gen / self.scale, self)

    @property
    def label(self) -> str:
        lams = ", ".join(str(x) for x in self.lambdas)
        return f"K(lambdas=({lams}), disc={self.disc})"

    @classmethod
    def unchecked(cls, lambda1, lambda2, lambda3) -> "FieldSpec":
        """Build a spec without the distinctness and nonvanishing checks.

        Only fault injection uses this; everything else goes through make_field.
        """
        l1, l2, l3 = (to_rational(v) for v in (lambda1, lambda2, lambda3))
        disc = -l1 * l2 * l3
        root = _rational_sqrt(disc)
        if root is not None:
            return cls(l1, l2, l3, disc, True, root, 1, MPQ(1))
        num, den = int(disc.numerator), int(disc.denominator)
        radicand = num * den
        d = core(abs(radicand)) * (1 if radicand > 0 else -1)
        scale_root, exact = integer_nthroot(abs(radicand) // abs(d), 2)
        assert exact
        return cls(l1, l2, l3, disc, False, None, d, MPQ(int(scale_root), den))


def _pair(coeffs: list) -> tuple[Rational, Rational]:
    padded = [MPQ(0)] * (2 - len(coeffs)) + [QQ.convert(c) for c in coeffs]
    return padded[0], padded[1]


def make_field(lambda1, lambda2, lambda3) -> FieldSpec:
    """Validate the three lambdas and build the field they determine.

    Args:
        lambda1: First root of f, any rational.
        lambda2: Second root.
        lambda3: Third root.

    Returns:
        FieldSpec with ``disc = -lambda1*lambda2*lambda3`` and square detection
        resolved by an exact integer square root.

    Raises:
        DegenerateParameters: A lambda is zero or two of them coincide.
    """
    lams = tuple(to_rational(v) for v in (lambda1, lambda2, lambda3))
    if any(x == 0 for x in lams):
        raise DegenerateParameters(f"lambdas must be nonzero, got {[str(x) for x in lams]}")
    if len(set(lams)) != 3:
        raise DegenerateParameters(f"lambdas must be pairwise distinct, got {[str(x) for x in lams]}")
    spec = FieldSpec.unchecked(*lams)
    logger.debug(f"Built {spec.label}, square={spec.is_square}")
    return spec


@dataclass(frozen=True)
class FieldElem:
    a: Rational
    b: Rational
    spec: FieldSpec

    def __post_init__(self):
        if self.spec.is_square and self.b != 0:
            object.__setattr__(self, "a", self.a + self.b * self.spec.sqrt_disc)
            object.__setattr__(self, "b", MPQ(0))

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.spec != self.spec:
                raise MixedFieldSpecs(f"{self.spec.label} vs {other.spec.label}")
            return other
        return self.spec.elem(other)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElem(self.a + o.a, self.b + o.b, self.spec)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElem(self.a - o.a, self.b - o.b, self.spec)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return FieldElem(-self.a, -self.b, self.spec)

    def __mul__(self, other):
        o = self._coerce(other)
        disc = self.spec.disc
        return FieldElem(
            self.a * o.a + self.b * o.b * disc,
            self.a * o.b + self.b * o.a,
            self.spec,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * invert(self._coerce(other))

    def __rtruediv__(self, other):
        return self._coerce(other) * invert(self)

    def __pow__(self, k: int):
        if k < 0:
            return invert(self) ** (-k)
        result = self.spec.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __str__(self) -> str:
        return format_elem(self)


def field_arith(x: FieldElem, y: FieldElem, op: FieldOp) -> FieldElem:
    if x.spec != y.spec:
        raise MixedFieldSpecs(f"{x.spec.label} vs {y.spec.label}")
    match op:
        case "add":
            return x + y
        case "sub":
            return x - y
        case "mul":
            return x * y
        case "div":
            return x / y
    raise ValueError(f"unknown field operation {op!r}")


def is_zero(x: FieldElem) -> bool:
    return x.a == 0 and x.b == 0


def norm(x: FieldElem) -> Rational:
    return x.a * x.a - x.b * x.b * x.spec.disc


def conjugate(x: FieldElem) -> FieldElem:
    return FieldElem(x.a, -x.b, x.spec)


def invert(x: FieldElem) -> FieldElem:
    if is_zero(x):
        raise DivisionByZero("inverse of zero in K")
    # (a + bL)^-1 = (a - bL) / (a^2 - b^2 disc); the norm vanishes only at 0
    n = norm(x)
    return FieldElem(x.a / n, -x.b / n, x.spec)


def format_elem(x: FieldElem) -> str:
    """Render ``a + b*L`` in the polynomial grammar, dropping zero parts."""
    if x.b == 0:
        return str(x.a)
    b_part = "L" if x.b == 1 else "-L" if x.b == -1 else f"{x.b}*L"
    if x.a == 0:
        return b_part
    if b_part.startswith("-"):
        return f"{x.a} - {b_part[1:]}"
    return f"{x.a} + {b_part}"
