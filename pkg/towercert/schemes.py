"""Presented rings, ring maps and quasi-affine varieties.

Ring maps are written contravariantly: a ``RingMap`` from ``source`` to
``target`` sends each source variable to a polynomial over the target, and
stands for the morphism Spec(target) -> Spec(source). Quasi-affines carry
their removed closed subsets as a list of ideals.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from towercert.errors import ArityMismatch, IllDefinedMap, MissingImage, PointNotOnVariety, RingMismatch
from towercert.exactfield import FieldElem, format_elem, is_zero
from towercert.groebner import (
    Ideal,
    ideal_member,
    ideal_product,
    ideal_sum,
    is_unit_ideal,
    radical_member,
)
from towercert.polyring import GREVLEX, MonomialOrder, Poly, PolyRing, VarSet, evaluate, format_poly, move, substitute


logger = logging.getLogger(__name__)


# --- Types ---
@dataclass(frozen=True, eq=False)
class PresentedRing:
    """K[vars]/I."""

    ring: PolyRing
    ideal: Ideal
    label: str = ""

    def __post_init__(self):
        if self.ideal.ring != self.ring:
            raise RingMismatch(f"ideal of {self.ideal.ring.describe()} presenting {self.ring.describe()}")

    @classmethod
    def of(cls, ring: PolyRing, generators: Sequence[Poly | str] = (), label: str = "") -> "PresentedRing":
        gens = [ring.poly(g) if isinstance(g, str) else g for g in generators]
        return cls(ring, Ideal(ring, gens), label)

    @property
    def vars(self) -> VarSet:
        return self.ring.varset

    def gen(self, name: str) -> Poly:
        return self.ring.gen(name)

    def describe(self) -> str:
        return f"{self.label or 'R'} = {self.ring.describe()} / {self.ideal.describe()}"


def same_presentation(a: PresentedRing, b: PresentedRing) -> bool:
    if a is b:
        return True
    return a.ring == b.ring and set(a.ideal.generators) == set(b.ideal.generators)


@dataclass(eq=False)
class RingMap:
    source: PresentedRing
    target: PresentedRing
    images: dict[str, Poly]
    label: str = ""
    verified: bool = False

    def __post_init__(self):
        for name, img in self.images.items():
            if name not in self.source.vars:
                raise RingMismatch(f"image given for {name!r}, not a variable of {self.source.label}")
            if img.ring != self.target.ring:
                raise RingMismatch(f"image of {name} lives over {img.ring.describe()}, expected {self.target.ring.describe()}")

    @classmethod
    def parse(cls, source: PresentedRing, target: PresentedRing, images: Mapping[str, str | Poly], label: str = "") -> "RingMap":
        parsed = {k: target.ring.poly(v) if isinstance(v, str) else v for k, v in images.items()}
        return cls(source, target, parsed, label)

    def apply(self, p: Poly) -> Poly:
        return substitute(p, self.images, self.target.ring)

    def describe(self) -> str:
        parts = ", ".join(f"{v} -> {format_poly(self.images[v])}" for v in self.source.vars if v in self.images)
        return f"{self.label or 'map'}*: {self.source.label} -> {self.target.label}: {parts}"


@dataclass(frozen=True, eq=False)
class QuasiAffine:
    """Spec(ring) minus the union of V(E) over the excluded ideals E."""

    ring: PresentedRing
    excluded: tuple[Ideal, ...] = ()
    label: str = ""

    def __post_init__(self):
        for ideal in self.excluded:
            if ideal.ring != self.ring.ring:
                raise RingMismatch(f"excluded ideal of {ideal.ring.describe()} on {self.ring.ring.describe()}")

    def describe(self) -> str:
        removed = " u ".join(f"V{e.describe()}" for e in self.excluded) or "nothing"
        return f"{self.label or 'X'}: {self.ring.describe()} minus {removed}"


@dataclass(frozen=True)
class RatPoint:
    varset: VarSet
    coords: tuple[FieldElem, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) != len(self.varset):
            raise ArityMismatch(f"{len(self.coords)} coordinates for variables {', '.join(self.varset)}")

    def __getitem__(self, name: str) -> FieldElem:
        return self.coords[self.varset.index(name)]

    def describe(self) -> str:
        return "(" + ", ".join(format_elem(c) for c in self.coords) + ")"


@dataclass(eq=False)
class FiberProduct:
    ring: PresentedRing
    left: RingMap
    right: RingMap
    f: RingMap
    g: RingMap
    rename: dict[str, str] = field(default_factory=dict)


# --- Ring maps ---
def verify_ring_map(m: RingMap) -> bool:
    """Check that every generator of the source ideal lands in the target ideal.

    Sets ``m.verified`` and returns it.

    Raises:
        MissingImage: Some source variable has no image.
    """
    for name in m.source.vars:
        if name not in m.images:
            raise MissingImage(f"{m.label or 'map'} has no image for {name!r}")
    m.verified = all(ideal_member(m.apply(g), m.target.ideal) for g in m.source.ideal.generators)
    if not m.verified:
        logger.debug(f"Ill-defined ring map {m.describe()}")
    return m.verified


def _ensure_verified(m: RingMap) -> None:
    if not m.verified and not verify_ring_map(m):
        raise IllDefinedMap(m.describe())


def identity_map(r: PresentedRing, label: str = "id") -> RingMap:
    return RingMap(r, r, r.ring.gens(), label, verified=True)


def compose(f: RingMap, g: RingMap, label: str = "") -> RingMap:
    """The ring map g o f (so the morphism of f after the morphism of g)."""
    if f.target.ring != g.source.ring:
        raise RingMismatch(f"cannot compose {f.label} into {f.target.label} with {g.label} from {g.source.label}")
    images = {v: g.apply(img) for v, img in f.images.items()}
    return RingMap(f.source, g.target, images, label or f"{g.label}.{f.label}", verified=f.verified and g.verified)


def maps_equal(f: RingMap, g: RingMap) -> bool:
    """Images agree variable by variable modulo the target ideal."""
    if f.source.ring != g.source.ring or f.target.ring != g.target.ring:
        raise RingMismatch(f"{f.label} and {g.label} have different source or target")
    return all(ideal_member(f.images[v] - g.images[v], f.target.ideal) for v in f.source.vars)


def check_iso(f: RingMap, g: RingMap) -> bool:
    """Both composites fix every variable modulo the respective ideals."""
    if f.target.ring != g.source.ring or g.target.ring != f.source.ring:
        raise RingMismatch(f"{f.label} and {g.label} are not candidate inverses")
    if not (f.verified or verify_ring_map(f)) or not (g.verified or verify_ring_map(g)):
        return False
    a, b = f.source, f.target
    for v in a.vars:
        if not ideal_member(g.apply(f.images[v]) - a.gen(v), a.ideal):
            logger.debug(f"{g.label}.{f.label} moves {v}")
            return False
    for v in b.vars:
        if not ideal_member(f.apply(g.images[v]) - b.gen(v), b.ideal):
            logger.debug(f"{f.label}.{g.label} moves {v}")
            return False
    return True


def pullback_ideal(m: RingMap, ideal: Ideal) -> Ideal:
    """Ideal of the preimage of V(ideal) under the morphism of m."""
    if ideal.ring != m.source.ring:
        raise RingMismatch(f"ideal over {ideal.ring.describe()} pulled back along {m.label}")
    return Ideal(m.target.ring, [m.apply(g) for g in ideal.generators])


# --- Fiber products ---
def _product_order(a: PolyRing, b: PolyRing, rename: Mapping[str, str]) -> MonomialOrder:
    leading = set()
    for ring, names in ((a, None), (b, rename)):
        if ring.order.kind == "block":
            leading |= {names[v] if names else v for v in ring.order.leading}
    return MonomialOrder.block(leading) if leading else GREVLEX


def fiber_product(
    A: PresentedRing,
    B: PresentedRing,
    C: PresentedRing,
    f: RingMap,
    g: RingMap,
    suffix: str = "r",
    rename: Mapping[str, str] | None = None,
    label: str = "",
) -> FiberProduct:
    """A tensor_C B, presented with A's variables and B's variables renamed.

    Args:
        A: First factor.
        B: Second factor.
        C: Base.
        f: Structure map C -> A (ring side).
        g: Structure map C -> B.
        suffix: Default renaming ``v -> v_suffix`` for B's variables.
        rename: Explicit renaming of B's variables; overrides ``suffix``.
        label: Name of the product.

    Returns:
        FiberProduct with the presentation and both coprojections.
    """
    for m, dom, cod in ((f, C, A), (g, C, B)):
        if m.source.ring != dom.ring or m.target.ring != cod.ring:
            raise RingMismatch(f"{m.label} does not go from {dom.label} to {cod.label}")
        _ensure_verified(m)

    names = dict(rename) if rename is not None else {v: f"{v}_{suffix}" for v in B.vars}
    clash = set(names.values()) & set(A.vars)
    if clash or len(set(names.values())) != len(names):
        raise ValueError(f"renaming of {B.label} collides with {A.label}: {sorted(clash)}")

    ring = PolyRing(
        VarSet(A.vars.names + tuple(names[v] for v in B.vars)),
        A.ring.field,
        _product_order(A.ring, B.ring, names),
    )
    into_a = {v: ring.gen(v) for v in A.vars}
    into_b = {v: ring.gen(names[v]) for v in B.vars}
    gens = [substitute(p, into_a, ring) for p in A.ideal.generators]
    gens += [substitute(p, into_b, ring) for p in B.ideal.generators]
    gens += [substitute(f.images[c], into_a, ring) - substitute(g.images[c], into_b, ring) for c in C.vars]

    product = PresentedRing(ring, Ideal(ring, gens), label or f"{A.label} x_{C.label} {B.label}")
    # generators of A and B map to generators of the product
    left = RingMap(A, product, into_a, f"in_{A.label}", verified=True)
    right = RingMap(B, product, into_b, f"in_{B.label}", verified=True)
    return FiberProduct(product, left, right, f, g, names)


def fiber_product_quasi(
    X: QuasiAffine,
    Y: QuasiAffine,
    C: PresentedRing,
    f: RingMap,
    g: RingMap,
    suffix: str = "r",
    rename: Mapping[str, str] | None = None,
    label: str = "",
) -> tuple[QuasiAffine, FiberProduct]:
    """Fiber product of quasi-affines: both factors' removed loci pulled back."""
    fp = fiber_product(X.ring, Y.ring, C, f, g, suffix, rename, label)
    excluded = tuple(pullback_ideal(fp.left, e) for e in X.excluded) + tuple(pullback_ideal(fp.right, e) for e in Y.excluded)
    return QuasiAffine(fp.ring, excluded, fp.ring.label), fp


def glue_points(fp: FiberProduct, p: RatPoint, q: RatPoint) -> RatPoint:
    """The unique point of the product over (p, q).

    Raises:
        PointNotOnVariety: p and q have different images in the base.
    """
    if evaluate_morphism(fp.f, p) != evaluate_morphism(fp.g, q):
        raise PointNotOnVariety(f"{p.describe()} and {q.describe()} lie over different base points")
    return RatPoint(fp.ring.vars, p.coords + q.coords)


# --- Points ---
def point_on(X: QuasiAffine, p: RatPoint) -> bool:
    ring = X.ring.ring
    if p.varset != ring.varset:
        raise ArityMismatch(f"point over ({', '.join(p.varset)}) tested on {X.label}")
    if not all(is_zero(evaluate(g, p.coords)) for g in X.ring.ideal.generators):
        return False
    return all(any(not is_zero(evaluate(g, p.coords)) for g in e.generators) for e in X.excluded)


def evaluate_morphism(m: RingMap, p: RatPoint) -> RatPoint:
    """Image of a point of Spec(target) in Spec(source)."""
    if p.varset != m.target.vars:
        raise ArityMismatch(f"point over ({', '.join(p.varset)}) fed to {m.label}")
    for name in m.source.vars:
        if name not in m.images:
            raise MissingImage(f"{m.label or 'map'} has no image for {name!r}")
    return RatPoint(m.source.vars, tuple(evaluate(m.images[v], p.coords) for v in m.source.vars))


def point_ideal(ring: PolyRing, coords: Mapping[str, FieldElem]) -> Ideal:
    """<v - c> for the given coordinates; unnamed variables stay free."""
    return Ideal(ring, [ring.gen(v) - c for v, c in coords.items()])


# --- Loci ---
def locus_contained(R: PresentedRing, ideal: Ideal, ideals: Sequence[Ideal]) -> bool:
    """V(R.ideal + ideal) lies inside the union of the V(ideals)."""
    closed = ideal_sum(R.ideal, ideal)
    if is_unit_ideal(closed):
        return True
    if not ideals:
        return False
    for e in ideals:
        if all(radical_member(g, closed) for g in e.generators):
            return True
    product = ideals[0]
    for e in ideals[1:]:
        product = ideal_product(product, e)
    return all(radical_member(g, closed) for g in product.generators)


def excluded_violation(m: RingMap, X: QuasiAffine, Y: QuasiAffine) -> Ideal | None:
    """First removed locus of Y whose preimage meets X, or None."""
    if m.source.ring != Y.ring.ring or m.target.ring != X.ring.ring:
        raise RingMismatch(f"{m.label} does not go between {Y.label} and {X.label}")
    for e in Y.excluded:
        if not locus_contained(X.ring, pullback_ideal(m, e), X.excluded):
            return e
    return None


def morphism_avoids_excluded(m: RingMap, X: QuasiAffine, Y: QuasiAffine) -> bool:
    """The morphism X -> Spec(Y.ring) of m misses everything Y removes."""
    _ensure_verified(m)
    return excluded_violation(m, X, Y) is None


def locus_equal(X: QuasiAffine, Y: QuasiAffine) -> bool:
    """Same presentation and the same removed locus."""
    if X.ring.ring != Y.ring.ring:
        raise RingMismatch(f"{X.label} and {Y.label} live in different rings")
    return all(locus_contained(X.ring, e, Y.excluded) for e in X.excluded) and all(
        locus_contained(Y.ring, e, X.excluded) for e in Y.excluded
    )


def restrict(X: QuasiAffine, extra: Sequence[Ideal], label: str = "") -> QuasiAffine:
    return QuasiAffine(X.ring, X.excluded + tuple(extra), label or X.label)


def affine_line_times(U: QuasiAffine, var: str, label: str = "") -> QuasiAffine:
    """A1 x U with the new coordinate ``var`` placed first."""
    src = U.ring.ring
    ring = PolyRing(VarSet((var, *src.names)), src.field, src.order, src.rational)
    moved = [move(g, ring) for g in U.ring.ideal.generators]
    base = PresentedRing(ring, Ideal(ring, moved), label or f"A1x{U.label}")
    excluded = tuple(Ideal(ring, [move(g, ring) for g in e.generators]) for e in U.excluded)
    return QuasiAffine(base, excluded, base.label)


# --- Localization ---
def localize(R: PresentedRing, s: Poly, var: str = "u") -> PresentedRing:
    """R[var]/(1 - var*s), the ring of the open set where s is invertible."""
    ring = R.ring.extend(var)
    gens = [move(g, ring) for g in R.ideal.generators]
    gens.append(ring.one - ring.gen(var) * move(s, ring))
    return PresentedRing(ring, Ideal(ring, gens), f"{R.label}[1/{format_poly(s)}]")


def localized_iso(m: RingMap, inverted: Poly, inverse: RingMap) -> bool:
    """m becomes an isomorphism once ``inverted`` is made a unit.

    Args:
        m: Verified map source -> target.
        inverted: Element of the source ring to invert.
        inverse: Candidate inverse from ``m.target`` into ``localize(m.source, inverted, u)``
            for some fresh variable u.
    """
    _ensure_verified(m)
    if inverted.ring != m.source.ring:
        raise RingMismatch(f"{format_poly(inverted)} is not in {m.source.label}")
    if inverse.source.ring != m.target.ring:
        raise RingMismatch(f"{inverse.label} does not start at {m.target.label}")
    extra = [v for v in inverse.target.vars if v not in m.source.vars]
    if len(extra) != 1:
        raise RingMismatch(f"{inverse.label} must land in a one-variable localization of {m.source.label}")
    u = extra[0]

    src = localize(m.source, inverted, u)
    tgt = localize(m.target, m.apply(inverted), u)
    if src.ring != inverse.target.ring:
        raise RingMismatch(f"{inverse.label} lands in {inverse.target.ring.describe()}, expected {src.ring.describe()}")

    forward = {v: move(img, tgt.ring) for v, img in m.images.items()}
    forward[u] = tgt.gen(u)
    backward = {v: move(img, src.ring) for v, img in inverse.images.items()}
    backward[u] = src.gen(u)
    m_loc = RingMap(src, tgt, forward, f"{m.label}[1/s]")
    inv_loc = RingMap(tgt, src, backward, f"{inverse.label}[1/s]")
    if not verify_ring_map(m_loc) or not verify_ring_map(inv_loc):
        return False
    return check_iso(m_loc, inv_loc)
