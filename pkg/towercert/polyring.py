"""Multivariate polynomials over K with declared monomial orders.

Arithmetic is delegated to sympy's sparse ``PolyRing``; this module adds the
named-variable layer the geometry needs: variable sets, block orders keyed by
variable names, substitution between rings, evaluation at K-points, and a
text grammar with a canonical printer (``L`` stands for lambda).
"""

import logging
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Literal

import sympy
from sympy import QQ
from sympy.polys.orderings import ProductOrder, grevlex, lex
from sympy.polys.rings import PolyElement
from sympy.polys.rings import PolyRing as SympyPolyRing

from towercert.errors import (
    ArityMismatch,
    MissingImage,
    PolySyntaxError,
    RingMismatch,
    UnknownVariable,
)
from towercert.exactfield import FieldElem, FieldSpec, Rational


logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


# --- Variables and orders ---
@dataclass(frozen=True)
class VarSet:
    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if not _IDENT.match(name) or name == "L":
                raise ValueError(f"invalid variable name {name!r}")

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"{name!r} is not one of {', '.join(self.names)}") from None

    def extend(self, *names: str) -> "VarSet":
        return VarSet(self.names + names)


@dataclass(frozen=True)
class _Block:
    """Picks the exponents of one block out of a monomial."""

    indices: tuple[int, ...]

    def __call__(self, monom: Monomial) -> Monomial:
        return tuple(monom[i] for i in self.indices)


@dataclass(frozen=True)
class MonomialOrder:
    """grevlex, lex, or a two-block elimination order.

    For ``block`` the variables named in ``leading`` form the first block and
    dominate the rest; both blocks are compared by grevlex. Ties follow the
    variable order of the ring.
    """

    kind: Literal["grevlex", "lex", "block"] = "grevlex"
    leading: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def block(cls, leading: Iterable[str]) -> "MonomialOrder":
        return cls("block", frozenset(leading))

    @classmethod
    def block_split(cls, varset: VarSet, split: int) -> "MonomialOrder":
        return cls.block(varset.names[:split])

    def key(self, varset: VarSet):
        match self.kind:
            case "grevlex":
                return grevlex
            case "lex":
                return lex
            case "block":
                first = tuple(i for i, v in enumerate(varset) if v in self.leading)
                rest = tuple(i for i, v in enumerate(varset) if v not in self.leading)
                if not first or not rest:
                    return grevlex
                return ProductOrder((grevlex, _Block(first)), (grevlex, _Block(rest)))
        raise ValueError(f"unknown monomial order {self.kind!r}")

    def extended(self, names: Iterable[str]) -> "MonomialOrder":
        """Order for a ring with extra variables; they join the leading block."""
        if self.kind != "block":
            return self
        return MonomialOrder.block(self.leading | set(names))

    def describe(self) -> str:
        if self.kind == "block":
            return f"block({', '.join(sorted(self.leading))} > rest)"
        return self.kind


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


@lru_cache(maxsize=512)
def _sympy_ring(varset: VarSet, domain, order: MonomialOrder) -> SympyPolyRing:
    symbols = [sympy.Symbol(name) for name in varset]
    return SympyPolyRing(symbols, domain, order.key(varset))


# --- Rings ---
@dataclass(frozen=True)
class PolyRing:
    """K[vars] (or Q[vars] when ``rational``) under a fixed monomial order."""

    varset: VarSet
    field: FieldSpec
    order: MonomialOrder = GREVLEX
    rational: bool = False

    @classmethod
    def of(cls, names: Sequence[str], spec: FieldSpec, order: MonomialOrder = GREVLEX, rational: bool = False) -> "PolyRing":
        return cls(VarSet(tuple(names)), spec, order, rational)

    @cached_property
    def sympy(self) -> SympyPolyRing:
        domain = QQ if self.rational else self.field.domain
        return _sympy_ring(self.varset, domain, self.order)

    @property
    def names(self) -> tuple[str, ...]:
        return self.varset.names

    @property
    def ngens(self) -> int:
        return len(self.varset)

    def wrap(self, rep: PolyElement) -> "Poly":
        return Poly(self, rep)

    def gen(self, name: str) -> "Poly":
        return Poly(self, self.sympy.gens[self.varset.index(name)])

    def gens(self) -> dict[str, "Poly"]:
        return {name: Poly(self, g) for name, g in zip(self.names, self.sympy.gens, strict=True)}

    def coerce(self, value) -> object:
        """Convert an int, Rational or FieldElem into the ground domain."""
        domain = self.sympy.domain
        if isinstance(value, FieldElem):
            if value.spec != self.field:
                raise RingMismatch(f"coefficient from {value.spec.label} in ring over {self.field.label}")
            if self.rational:
                if value.b != 0:
                    raise RingMismatch(f"irrational coefficient {value} in a ring over Q")
                return value.a
            return self.field.to_domain(value)
        return domain.convert(value)

    def to_elem(self, coeff) -> FieldElem:
        if self.rational:
            return self.field.elem(coeff)
        return self.field.from_domain(coeff)

    def const(self, value) -> "Poly":
        return Poly(self, self.sympy.ground_new(self.coerce(value)))

    @property
    def zero(self) -> "Poly":
        return Poly(self, self.sympy.zero)

    @property
    def one(self) -> "Poly":
        return Poly(self, self.sympy.one)

    def from_terms(self, terms: Mapping[Monomial, object]) -> "Poly":
        rep = self.sympy.zero.copy()
        for monom, coeff in terms.items():
            c = self.coerce(coeff)
            if c:
                rep[tuple(monom)] = c
        return Poly(self, rep)

    def poly(self, text: str) -> "Poly":
        return parse_poly(text, self)

    def with_order(self, order: MonomialOrder) -> "PolyRing":
        return PolyRing(self.varset, self.field, order, self.rational)

    def extend(self, *names: str) -> "PolyRing":
        return PolyRing(self.varset.extend(*names), self.field, self.order.extended(names), self.rational)

    def fresh_name(self, stem: str = "u") -> str:
        candidate, k = stem, 0
        while candidate in self.varset:
            k += 1
            candidate = f"{stem}{k}"
        return candidate

    def describe(self) -> str:
        ground = "Q" if self.rational else "K"
        return f"{ground}[{', '.join(self.names)}] ({self.order.describe()})"


class Poly:
    """A polynomial tied to one PolyRing. Immutable."""

    __slots__ = ("rep", "ring")

    def __init__(self, ring: PolyRing, rep: PolyElement):
        self.ring = ring
        self.rep = rep

    def _check(self, other: "Poly") -> None:
        if other.ring is not self.ring and other.ring != self.ring:
            raise RingMismatch(f"{self.ring.describe()} vs {other.ring.describe()}")

    def _lift(self, other) -> PolyElement:
        if isinstance(other, Poly):
            self._check(other)
            return other.rep
        return self.ring.sympy.ground_new(self.ring.coerce(other))

    def __add__(self, other) -> "Poly":
        return Poly(self.ring, self.rep + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        return Poly(self.ring, self.rep - self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return Poly(self.ring, self._lift(other) - self.rep)

    def __mul__(self, other) -> "Poly":
        return Poly(self.ring, self.rep * self._lift(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Poly":
        return Poly(self.ring, -self.rep)

    def __pow__(self, k: int) -> "Poly":
        return Poly(self.ring, self.rep**k)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.rep == other.rep

    def __hash__(self) -> int:
        return hash((self.ring.varset, self.rep))

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    @property
    def is_zero(self) -> bool:
        return not self.rep

    @property
    def is_constant(self) -> bool:
        return all(not any(m) for m in self.rep.keys())

    def constant_value(self) -> FieldElem:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return self.ring.to_elem(self.rep.get(self.ring.sympy.zero_monom, self.ring.sympy.domain.zero))

    def terms(self) -> list[tuple[Monomial, FieldElem]]:
        """Terms in descending monomial order."""
        return [(m, self.ring.to_elem(c)) for m, c in self.rep.terms()]

    def total_degree(self) -> int:
        return max((sum(m) for m in self.rep.keys()), default=-1)

    def variables(self) -> set[str]:
        used = set()
        for monom in self.rep.keys():
            used.update(name for name, e in zip(self.ring.names, monom, strict=True) if e)
        return used

    def monic(self) -> "Poly":
        return Poly(self.ring, self.rep.monic()) if self.rep else self


# --- Operations ---
def poly_arith(p: Poly, q: Poly, op: Literal["add", "sub", "mul"]) -> Poly:
    p._check(q)
    match op:
        case "add":
            return p + q
        case "sub":
            return p - q
        case "mul":
            return p * q
    raise ValueError(f"unknown polynomial operation {op!r}")


def build_f(spec: FieldSpec, var: str = "x", ring: PolyRing | None = None) -> Poly:
    """The cubic f(var) = (var - lambda1)(var - lambda2)(var - lambda3)."""
    if ring is None:
        ring = PolyRing.of([var], spec)
    x = ring.gen(var)
    f = ring.one
    for root in spec.lambdas:
        f = f * (x - root)
    return f


def is_squarefree(p: Poly, var: str) -> bool:
    """gcd(p, dp/dvar) = 1 for a polynomial in the single variable ``var``."""
    if p.variables() - {var}:
        raise ValueError(f"{p} is not univariate in {var}")
    a = p.rep
    b = p.rep.diff(p.ring.sympy.gens[p.ring.varset.index(var)])
    while b:
        a, b = b, a.rem(b)
    # a is now a gcd; squarefree iff it is a nonzero constant
    return all(not any(m) for m in a.keys())


def evaluate(p: Poly, point: Sequence[FieldElem]) -> FieldElem:
    ring = p.ring
    if len(point) != ring.ngens:
        raise ArityMismatch(f"point has {len(point)} coordinates, ring has {ring.ngens} variables")
    dom = ring.sympy.domain
    values = [ring.coerce(v) for v in point]
    total = dom.zero
    for monom, coeff in p.rep.items():
        term = coeff
        for value, e in zip(values, monom, strict=True):
            if e:
                term = term * value**e
        total = total + term
    return ring.to_elem(total)


def substitute(p: Poly, images: Mapping[str, Poly], target: PolyRing | None = None) -> Poly:
    """Apply the ring homomorphism sending each variable of p to its image.

    Args:
        p: Polynomial to transform.
        images: Variable name to Poly, all over one target ring.
        target: The target ring; needed only when ``images`` is empty.

    Raises:
        MissingImage: A variable occurring in p has no image.
        RingMismatch: Images live in different rings.
    """
    rings = {id(img.ring): img.ring for img in images.values()}
    if target is None:
        if not rings:
            raise MissingImage("no images and no target ring")
        target = next(iter(rings.values()))
    for ring in rings.values():
        if ring != target:
            raise RingMismatch(f"images over {ring.describe()} and {target.describe()}")

    src = p.ring
    reps: list[PolyElement | None] = []
    for name in src.names:
        img = images.get(name)
        reps.append(img.rep if img is not None else None)

    same_domain = src.sympy.domain == target.sympy.domain
    tgt = target.sympy
    result = tgt.zero
    powers: dict[tuple[int, int], PolyElement] = {}
    for monom, coeff in p.rep.items():
        c = coeff if same_domain else target.coerce(src.to_elem(coeff))
        term = tgt.ground_new(c)
        for i, e in enumerate(monom):
            if not e:
                continue
            if reps[i] is None:
                raise MissingImage(f"no image for variable {src.names[i]!r}")
            key = (i, e)
            if key not in powers:
                powers[key] = reps[i] ** e
            term = term * powers[key]
        result = result + term
    return Poly(target, result)


def partial_derivative(p: Poly, var: str) -> Poly:
    index = p.ring.varset.index(var)
    return Poly(p.ring, p.rep.diff(p.ring.sympy.gens[index]))


def move(p: Poly, target: PolyRing) -> Poly:
    """Re-home p in a ring whose variables include all variables of p."""
    return substitute(p, {v: target.gen(v) for v in p.ring.names if v in target.varset}, target)


# --- Text grammar ---
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


class _Parser:
    def __init__(self, text: str, ring: PolyRing):
        self.text = text
        self.ring = ring
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise PolySyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
            start = m.start(m.lastindex)
            if m.group(1):
                self.tokens.append(("num", m.group(1), start))
            elif m.group(2):
                self.tokens.append(("ident", m.group(2), start))
            else:
                self.tokens.append(("op", m.group(3), start))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise PolySyntaxError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, op: str) -> None:
        kind, value, pos = self.take()
        if kind != "op" or value != op:
            raise PolySyntaxError(f"expected {op!r}, found {value!r}", pos)

    def parse(self) -> Poly:
        if not self.tokens:
            raise PolySyntaxError("empty polynomial", 0)
        result = self.expr()
        tok = self.peek()
        if tok is not None:
            raise PolySyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return result

    def expr(self) -> Poly:
        sign = self._sign()
        total = self.term() * sign
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            sign = (1 if tok[1] == "+" else -1) * self._sign()
            total = total + self.term() * sign
        return total

    def _sign(self) -> int:
        sign = 1
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            if tok[1] == "-":
                sign = -sign
        return sign

    def term(self) -> Poly:
        value = self.factor()
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] == "*":
            self.i += 1
            value = value * self.factor()
        return value

    def factor(self) -> Poly:
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in ("^", "**"):
            self.i += 1
            kind, value, pos = self.take()
            if kind != "num":
                raise PolySyntaxError(f"exponent must be a non-negative integer, found {value!r}", pos)
            return base ** int(value)
        return base

    def atom(self) -> Poly:
        kind, value, pos = self.take()
        if kind == "num":
            num = int(value)
            tok = self.peek()
            if tok is not None and tok[0] == "op" and tok[1] == "/":
                self.i += 1
                dkind, dvalue, dpos = self.take()
                if dkind != "num" or int(dvalue) == 0:
                    raise PolySyntaxError(f"bad denominator {dvalue!r}", dpos)
                return self.ring.const(Rational(num, int(dvalue)))
            return self.ring.const(num)
        if kind == "ident":
            if value == "L":
                lam = self.ring.field.lam
                if self.ring.rational and lam.b != 0:
                    raise PolySyntaxError("L is not rational in a ring over Q", pos)
                return self.ring.const(lam)
            if value not in self.ring.varset:
                raise UnknownVariable(f"{value!r} at position {pos} is not one of {', '.join(self.ring.names)}")
            return self.ring.gen(value)
        if value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise PolySyntaxError(f"unexpected {value!r}", pos)


def parse_poly(text: str, ring: PolyRing) -> Poly:
    """Parse the polynomial grammar: signed terms, ``^`` powers, ``*`` products,
    rational literals ``p/q``, ring variables and ``L`` for lambda."""
    return _Parser(text, ring).parse()


def _format_monomial(names: Sequence[str], monom: Monomial) -> str:
    parts = []
    for name, e in zip(names, monom, strict=True):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    """Canonical text, terms in descending monomial order; parse_poly inverts it."""
    if p.is_zero:
        return "0"
    chunks: list[tuple[bool, str]] = []
    for monom, c in p.terms():
        mono = _format_monomial(p.ring.names, monom)
        if c.b == 0 or c.a == 0:
            value = c.a if c.b == 0 else c.b
            negative = value < 0
            mag = -value if negative else value
            coeff = str(mag) if c.b == 0 else ("L" if mag == 1 else f"{mag}*L")
            if not mono:
                body = coeff
            elif coeff == "1":
                body = mono
            else:
                body = f"{coeff}*{mono}"
        else:
            negative = False
            b_abs = -c.b if c.b < 0 else c.b
            b_text = "L" if b_abs == 1 else f"{b_abs}*L"
            coeff = f"({c.a} {'-' if c.b < 0 else '+'} {b_text})"
            body = f"{coeff}*{mono}" if mono else coeff
        chunks.append((negative, body))
    first_neg, first = chunks[0]
    out = [f"-{first}" if first_neg else first]
    for negative, body in chunks[1:]:
        out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


def nonzero_constant(p: Poly) -> bool:
    return p.is_constant and not p.is_zero
