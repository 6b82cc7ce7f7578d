"""The tower X_n inside Y_n and everything glued onto it.

Y_n = Spec K[x0, x1, y1, ..., xn, yn] / <y_i^2 - x_{i-1}^2 f(x_i)>, X_n removes
the n loci <x_{i-1}, x_i, y_i>. phi_n forgets (x_n, y_n), psi_n forgets x0 and
shifts indices down. The cover of A1 by V1 (a piece of the curve E) and V2
(the punctured line) carries the gluing maps h1, h2 and the homotopy H, which
lift level by level as h x id.

Tower rings order the y-variables first, so the defining equations lead with
y_i^2 and already form a Groebner basis.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal

from towercert.errors import CompatibilityFailure, IllDefinedMap, PointNotOnVariety, ZeroParameter
from towercert.exactfield import FieldElem, FieldSpec, is_zero
from towercert.groebner import Ideal, ideal_equal, ideal_sum, is_unit_ideal
from towercert.polyring import MonomialOrder, Poly, PolyRing, build_f, partial_derivative, substitute
from towercert.schemes import (
    FiberProduct,
    PresentedRing,
    QuasiAffine,
    RatPoint,
    RingMap,
    affine_line_times,
    check_iso,
    compose,
    fiber_product_quasi,
    identity_map,
    locus_contained,
    locus_equal,
    maps_equal,
    morphism_avoids_excluded,
    point_ideal,
    point_on,
    pullback_ideal,
    restrict,
    verify_ring_map,
)


logger = logging.getLogger(__name__)

FAULTS = frozenset({"retain-ramification", "exclude-plus-lambda", "keep-origin", "corrupt-rho", "repeated-root"})


# --- Rings of the tower ---
def tower_names(n: int) -> tuple[str, ...]:
    names = ["x0"]
    for i in range(1, n + 1):
        names += [f"x{i}", f"y{i}"]
    return tuple(names)


def tower_ring(spec: FieldSpec, n: int) -> PolyRing:
    return PolyRing.of(tower_names(n), spec, MonomialOrder.block(f"y{i}" for i in range(1, n + 1)))


def level_equation(ring: PolyRing, i: int) -> Poly:
    """y_i^2 - x_{i-1}^2 f(x_i)."""
    f = build_f(ring.field, f"x{i}", ring)
    return ring.gen(f"y{i}") ** 2 - ring.gen(f"x{i - 1}") ** 2 * f


def presented_Y(spec: FieldSpec, n: int) -> PresentedRing:
    ring = tower_ring(spec, n)
    return PresentedRing(ring, Ideal(ring, [level_equation(ring, i) for i in range(1, n + 1)]), f"Y{n}")


def origin_ideal(ring: PolyRing, i: int) -> Ideal:
    """<x_{i-1}, x_i, y_i>: the removed point of the i-th copy of X1."""
    return Ideal(ring, [ring.gen(f"x{i - 1}"), ring.gen(f"x{i}"), ring.gen(f"y{i}")])


def curve_ring(spec: FieldSpec) -> PresentedRing:
    """E = Spec K[x1, y1] / <y1^2 - f(x1)>."""
    ring = PolyRing.of(("x1", "y1"), spec, MonomialOrder.block(["y1"]))
    f = build_f(spec, "x1", ring)
    return PresentedRing(ring, Ideal(ring, [ring.gen("y1") ** 2 - f]), "E")


def line_ring(spec: FieldSpec, var: str = "x0", label: str = "A1") -> PresentedRing:
    ring = PolyRing.of((var,), spec, MonomialOrder.block(()))
    return PresentedRing(ring, Ideal(ring), label)


def _images(target: PresentedRing, mapping: dict[str, str | Poly | FieldElem | int]) -> dict[str, Poly]:
    ring = target.ring
    out = {}
    for k, v in mapping.items():
        if isinstance(v, Poly):
            out[k] = v
        elif isinstance(v, str):
            out[k] = ring.poly(v)
        else:
            out[k] = ring.const(v)
    return out


def phi_bar(source: PresentedRing, target: PresentedRing, n: int) -> RingMap:
    """Y_n -> Y_{n-1}: every variable of Y_{n-1} to itself."""
    return RingMap(source, target, {v: target.gen(v) for v in source.vars}, f"phi{n}")


def psi_bar(source: PresentedRing, target: PresentedRing, n: int) -> RingMap:
    """Y_n -> Y_{n-1}: x_i -> x_{i+1}, y_i -> y_{i+1}."""
    return RingMap(source, target, {v: target.gen(_shift(v, 1)) for v in source.vars}, f"psi{n}")


def _shift(name: str, by: int) -> str:
    return f"{name[0]}{int(name[1:]) + by}"


# --- Points ---
def alternating_point(spec: FieldSpec, n: int, start: Literal["alpha", "beta"]) -> RatPoint:
    """alpha_n (starting with alpha1) or beta_n as explicit coordinates.

    Consecutive factors glue along "second copy's x0 is the first copy's x1";
    alpha_0 = 1 and beta_0 = 0 in A1.
    """
    one, zero, lam = spec.one, spec.zero, spec.lam
    ring = tower_ring(spec, n)
    if n == 0:
        return RatPoint(ring.varset, (one if start == "alpha" else zero,))
    a1, b1 = (one, zero, lam), (zero, one, zero)
    factors = [a1 if (i % 2 == 0) == (start == "alpha") else b1 for i in range(n)]
    coords = [factors[0][0]]
    for factor in factors:
        coords += [factor[1], factor[2]]
    return RatPoint(ring.varset, tuple(coords))


# --- Context ---
@dataclass(eq=False)
class CoverDatum:
    V1: QuasiAffine
    V2: QuasiAffine
    W: QuasiAffine
    W_product: QuasiAffine
    W_fiber: FiberProduct
    A1xW: QuasiAffine
    p1: RingMap
    p2: RingMap
    h1: RingMap
    h2: RingMap
    H: RingMap
    to_V2: RingMap


@dataclass(eq=False)
class TowerContext:
    """All objects of the construction up to level n. Built once, then read only."""

    spec: FieldSpec
    n: int
    faults: frozenset[str]
    A1: QuasiAffine
    E: QuasiAffine
    A1xE: QuasiAffine
    Y: list[QuasiAffine]
    X: list[QuasiAffine]
    phi: list[RingMap | None]
    psi: list[RingMap | None]
    rho1: RingMap
    alpha: list[RatPoint]
    beta: list[RatPoint]
    cover: CoverDatum | None = None
    _cache: dict = field(default_factory=dict)

    def to_base(self, n: int) -> RingMap:
        """X_n -> A1 by the x0 coordinate (phi1 o ... o phi_n)."""
        key = ("to_base", n)
        if key not in self._cache:
            Yn = self.Y[n].ring
            self._cache[key] = RingMap(self.A1.ring, Yn, {"x0": Yn.gen("x0")}, f"pr0_{n}", verified=True)
        return self._cache[key]


def build_tower(spec: FieldSpec, n: int, faults: Sequence[str] = ()) -> TowerContext:
    """Construct E, Y_0..Y_n, X_0..X_n, phi, psi, rho1, alpha, beta and the cover.

    Args:
        spec: Base field.
        n: Top level, at least 1.
        faults: Deliberate breaks for exercising failure paths; see FAULTS.
    """
    if n < 1:
        raise ValueError(f"tower level must be positive, got {n}")
    unknown = set(faults) - FAULTS
    if unknown:
        raise ValueError(f"unknown faults {sorted(unknown)}")
    faults = frozenset(faults)

    A1 = QuasiAffine(line_ring(spec), (), "A1")
    E_ring = curve_ring(spec)
    E = QuasiAffine(E_ring, (), "E")
    A1xE = affine_line_times(E, "x0", "A1xE")

    Y: list[QuasiAffine] = [A1]
    X: list[QuasiAffine] = [A1]
    phi: list[RingMap | None] = [None]
    psi: list[RingMap | None] = [None]
    for k in range(1, n + 1):
        Yk = presented_Y(spec, k)
        Y.append(QuasiAffine(Yk, (), f"Y{k}"))
        removed = () if "keep-origin" in faults else tuple(origin_ideal(Yk.ring, i) for i in range(1, k + 1))
        X.append(QuasiAffine(Yk, removed, f"X{k}"))
        phi.append(phi_bar(Y[k - 1].ring, Yk, k))
        psi.append(psi_bar(Y[k - 1].ring, Yk, k))

    rho_y = "y1" if "corrupt-rho" in faults else "x0*y1"
    rho1 = RingMap(Y[1].ring, A1xE.ring, _images(A1xE.ring, {"x0": "x0", "x1": "x1", "y1": rho_y}), "rho1")

    ctx = TowerContext(
        spec=spec,
        n=n,
        faults=faults,
        A1=A1,
        E=E,
        A1xE=A1xE,
        Y=Y,
        X=X,
        phi=phi,
        psi=psi,
        rho1=rho1,
        alpha=[alternating_point(spec, k, "alpha") for k in range(n + 1)],
        beta=[alternating_point(spec, k, "beta") for k in range(n + 1)],
    )
    ctx.cover = build_cover(ctx)
    logger.info(f"Built tower to level {n} over {spec.label}" + (f" with faults {sorted(faults)}" if faults else ""))
    return ctx


# --- Presentation of Y_n ---
@dataclass
class PresentationReport:
    level: int
    iso: bool = False
    fold_iso: bool = False
    projections: bool = False
    exclusions: bool = False
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.iso and self.fold_iso and self.projections and self.exclusions


def _identify(ctx: TowerContext, fp: FiberProduct, n: int, offset: int) -> tuple[RingMap, RingMap]:
    """Maps between closed Y_n and a fiber product whose second factor's
    variables v_r correspond to v shifted up by ``offset``."""
    closed = ctx.Y[n].ring
    P = fp.ring
    first = set(fp.left.source.vars)
    back = {}
    for v in P.vars:
        if v in first:
            back[v] = closed.gen(v)
    for v, renamed in fp.rename.items():
        back[renamed] = closed.gen(_shift(v, offset))
    forward = {}
    for v in closed.vars:
        if v in first:
            forward[v] = P.gen(v)
        else:
            forward[v] = P.gen(fp.rename[_shift(v, -offset)])
    return (
        RingMap(closed, P, forward, f"Y{n}->P"),
        RingMap(P, closed, back, f"P->Y{n}"),
    )


def presentation_matches(ctx: TowerContext, n: int) -> PresentationReport:
    """Closed-form Y_n agrees with the pullback construction and the n-fold fold.

    For n >= 2 builds Y_{n-1} x_{psi, Y_{n-2}, phi} Y_{n-1} and Y1 x_{A1} Y_{n-1},
    certifies both are isomorphic to the closed form, that the pullback's
    coprojections are phi_n and psi_n, and that the removed loci match.
    """
    report = PresentationReport(level=n)
    if n == 1:
        fold, fold_fp = fiber_product_quasi(ctx.X[1], ctx.X[0], ctx.A1.ring, ctx.psi[1], identity_map(ctx.A1.ring), label="X1xA1")
        fwd, back = _identify(ctx, fold_fp, 1, 1)
        report.iso = report.fold_iso = check_iso(fwd, back)
        report.projections = maps_equal(compose(fold_fp.left, back), identity_map(ctx.Y[1].ring))
        report.exclusions = _exclusions_match(ctx, 1, fold, back)
        return _finish(report)

    X_prev = ctx.X[n - 1]
    pulled, fp = fiber_product_quasi(X_prev, X_prev, ctx.Y[n - 2].ring, ctx.psi[n - 1], ctx.phi[n - 1], label=f"P{n}")
    fwd, back = _identify(ctx, fp, n, 1)
    report.iso = check_iso(fwd, back)
    if not report.iso:
        report.witness = f"pullback presentation {pulled.ring.describe()} not isomorphic to {ctx.Y[n].ring.describe()}"
        return report
    report.projections = maps_equal(compose(fp.left, back), ctx.phi[n]) and maps_equal(compose(fp.right, back), ctx.psi[n])
    report.exclusions = _exclusions_match(ctx, n, pulled, back)

    fold, fold_fp = fiber_product_quasi(ctx.X[1], X_prev, ctx.A1.ring, ctx.psi[1], ctx.to_base(n - 1), label=f"X1xX{n - 1}")
    fold_fwd, fold_back = _identify(ctx, fold_fp, n, 1)
    report.fold_iso = check_iso(fold_fwd, fold_back) and _exclusions_match(ctx, n, fold, fold_back)
    return _finish(report)


def _exclusions_match(ctx: TowerContext, n: int, product: QuasiAffine, back: RingMap) -> bool:
    transported = QuasiAffine(ctx.Y[n].ring, tuple(pullback_ideal(back, e) for e in product.excluded), "transported")
    return locus_equal(ctx.X[n], transported)


def _finish(report: PresentationReport) -> PresentationReport:
    if not report.ok and not report.witness:
        failed = [k for k in ("iso", "fold_iso", "projections", "exclusions") if not getattr(report, k)]
        report.witness = f"level {report.level}: {', '.join(failed)} failed"
    return report


# --- The Nisnevich cover ---
def _cover_piece(ctx: TowerContext, excluded_sign: int, label: str) -> QuasiAffine:
    """E minus the ramification points and (0, excluded_sign * lambda)."""
    E = ctx.E.ring
    spec = ctx.spec
    removed = []
    for i, root in enumerate(spec.roots):
        if i == 0 and "retain-ramification" in ctx.faults:
            continue
        removed.append(point_ideal(E.ring, {"x1": root, "y1": spec.zero}))
    removed.append(point_ideal(E.ring, {"x1": spec.zero, "y1": spec.lam * excluded_sign}))
    if excluded_sign == -1 and "exclude-plus-lambda" in ctx.faults:
        removed.append(point_ideal(E.ring, {"x1": spec.zero, "y1": spec.lam}))
    return QuasiAffine(E, tuple(removed), label)


def build_cover(ctx: TowerContext) -> CoverDatum:
    """V1, V2, W = V1 x_A1 V2, the covering maps and the gluing data on X1."""
    spec = ctx.spec
    A1 = ctx.A1.ring
    V1 = _cover_piece(ctx, -1, "V1")
    v2_ring = line_ring(spec, "x1", "V2")
    V2 = QuasiAffine(v2_ring, (Ideal(v2_ring.ring, [v2_ring.gen("x1")]),), "V2")

    p1 = RingMap(A1, V1.ring, {"x0": V1.ring.gen("x1")}, "p1")
    p2 = RingMap(A1, V2.ring, {"x0": V2.ring.gen("x1")}, "p2")
    X1 = ctx.X[1].ring
    h1 = RingMap(X1, V1.ring, _images(V1.ring, {"x0": 1, "x1": "x1", "y1": "y1"}), "h1")
    h2 = RingMap(X1, V2.ring, _images(V2.ring, {"x0": 0, "x1": "x1", "y1": 0}), "h2")

    W_product, W_fiber = fiber_product_quasi(V1, V2, A1, p1, p2, label="V1xV2")
    W = restrict(V1, [point_ideal(V1.ring.ring, {"x1": spec.zero, "y1": spec.lam})], "W")
    A1xW = affine_line_times(W, "x0", "A1xW")
    H = RingMap(X1, A1xW.ring, dict(ctx.rho1.images), "H")
    to_V2 = RingMap(V2.ring, W.ring, {"x1": W.ring.gen("x1")}, "W->V2")
    return CoverDatum(V1, V2, W, W_product, W_fiber, A1xW, p1, p2, h1, h2, H, to_V2)


def tilde_piece(ctx: TowerContext) -> QuasiAffine:
    """E minus the ramification points and (0, lambda)."""
    return _cover_piece(ctx, 1, "V1~")


def w_matches_description(ctx: TowerContext) -> bool:
    """V1 x_A1 V2 is V1 minus (0, lambda), checked as an isomorphism plus equal loci."""
    cover = ctx.cover
    fp = cover.W_fiber
    P = fp.ring
    E = cover.V1.ring
    # collapse the second copy of x1 onto the first
    back = RingMap(P, E, {v: E.gen("x1") if v == fp.rename["x1"] else E.gen(v) for v in P.vars}, "V1xV2->E")
    if not check_iso(fp.left, back):
        return False
    described = QuasiAffine(P, tuple(pullback_ideal(fp.left, e) for e in cover.W.excluded), "W")
    return locus_equal(cover.W_product, described)


@dataclass
class NisnevichReport:
    open_inclusion: bool = False
    etale: bool = False
    fiber_over_zero: bool = False
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.open_inclusion and self.etale and self.fiber_over_zero


def check_nisnevich(ctx: TowerContext, V1: QuasiAffine | None = None) -> NisnevichReport:
    """V1 u V2 -> A1 is an elementary Nisnevich cover.

    (a) p2 is the open inclusion of A1 minus 0, (b) p1 is etale on V1, (c) over
    the closed complement {0} exactly one reduced K-point of V1 remains.
    """
    cover = ctx.cover
    V1 = V1 or cover.V1
    spec = ctx.spec
    report = NisnevichReport()
    notes = []

    # (a)
    V2 = cover.V2
    inverse = RingMap(V2.ring, ctx.A1.ring, {"x1": ctx.A1.ring.gen("x0")}, "p2^-1")
    complement = QuasiAffine(V2.ring, (pullback_ideal(cover.p2, Ideal(ctx.A1.ring.ring, [ctx.A1.ring.gen("x0")])),), "A1-0")
    report.open_inclusion = check_iso(cover.p2, inverse) and locus_equal(V2, complement)
    if not report.open_inclusion:
        notes.append("p2 is not the inclusion of A1 minus 0")

    # (b) p1 fixes x1, so it is etale where d/dy1 of the curve equation is a unit
    relation = V1.ring.ideal.generators[0]
    jacobian = Ideal(V1.ring.ring, [partial_derivative(relation, "y1")])
    report.etale = locus_contained(V1.ring, jacobian, V1.excluded)
    if not report.etale:
        notes.append(f"ramification locus V{jacobian.describe()} meets {V1.label}")

    # (c)
    ring = V1.ring.ring
    plus = point_ideal(ring, {"x1": spec.zero, "y1": spec.lam})
    minus = point_ideal(ring, {"x1": spec.zero, "y1": -spec.lam})
    fiber = ideal_sum(V1.ring.ideal, Ideal(ring, [ring.gen("x1")]))
    y1 = ring.gen("y1")
    split = Ideal(ring, [ring.gen("x1"), (y1 - spec.lam) * (y1 + spec.lam)])
    two_points = ideal_equal(fiber, split) and is_unit_ideal(ideal_sum(plus, minus))
    retained = [name for name, pt in (("(0, L)", plus), ("(0, -L)", minus)) if not locus_contained(V1.ring, pt, V1.excluded)]
    report.fiber_over_zero = two_points and len(retained) == 1
    if not report.fiber_over_zero:
        notes.append(f"fiber over 0 keeps {retained or 'no points'} of {V1.label}")

    report.witness = "; ".join(notes)
    return report


# --- Endpoints and lifts ---
def endpoint(H: RingMap, t: FieldElem | int, U: PresentedRing, var: str = "x0") -> RingMap:
    """H(t): substitute the A1 coordinate ``var`` by t and land in U."""
    target = U.ring
    value = target.const(t)
    moved = {v: (value if v == var else target.gen(v)) for v in H.target.vars}
    images = {v: substitute(img, moved, target) for v, img in H.images.items()}
    m = RingMap(H.source, U, images, f"{H.label}({t})")
    verify_ring_map(m)
    return m


@dataclass(eq=False)
class Lift:
    """m x id : V x_A1 X_n -> X_{n+1}."""

    level: int
    source: QuasiAffine
    map: RingMap
    fiber: FiberProduct | None
    verified: bool
    exclusion_safe: bool


def lift_to_level(ctx: TowerContext, n: int, m: RingMap, piece: QuasiAffine, covering: RingMap) -> Lift:
    """Lift a map m: piece -> X1 with psi1 o m = covering to piece x_A1 X_n -> X_{n+1}.

    Raises:
        CompatibilityFailure: psi1 o m differs from the covering map.
    """
    if not maps_equal(compose(ctx.psi[1], m), covering):
        raise CompatibilityFailure(f"psi1 o {m.label} != {covering.label}")
    if n == 0:
        verified = m.verified or verify_ring_map(m)
        return Lift(0, piece, m, None, verified, verified and morphism_avoids_excluded(m, piece, ctx.X[1]))
    if n + 1 > ctx.n:
        raise ValueError(f"tower built to level {ctx.n}, cannot lift to {n + 1}")

    source, fp = fiber_product_quasi(piece, ctx.X[n], ctx.A1.ring, covering, ctx.to_base(n), label=f"{piece.label}xX{n}")
    P = fp.ring
    images = {v: fp.left.apply(img) for v, img in m.images.items()}
    for k in range(2, n + 2):
        images[f"x{k}"] = P.gen(fp.rename[f"x{k - 1}"])
        images[f"y{k}"] = P.gen(fp.rename[f"y{k - 1}"])
    lifted = RingMap(ctx.X[n + 1].ring, P, images, f"{m.label}^{n}")
    verified = verify_ring_map(lifted)
    safe = verified and morphism_avoids_excluded(lifted, source, ctx.X[n + 1])
    return Lift(n, source, lifted, fp, verified, safe)


def lift_point(lift: Lift, p: RatPoint, q: RatPoint) -> RatPoint:
    """The point (p, q) of V x_A1 X_n, or p itself at level 0."""
    if lift.fiber is None:
        return p
    return RatPoint(lift.fiber.ring.vars, p.coords + q.coords)


# --- Modified gluing maps ---
def build_modified(ctx: TowerContext, a: FieldElem, variant: Literal["plain", "tilde"] = "plain") -> tuple[QuasiAffine, RingMap]:
    """h1^a = rho1(a) on V1, or the same formula on V1~ which keeps (0, -lambda).

    Raises:
        ZeroParameter: a is zero.
        IllDefinedMap: the map fails verification or meets the removed origin.
    """
    if is_zero(a):
        raise ZeroParameter("the modified gluing needs a nonzero parameter")
    piece = ctx.cover.V1 if variant == "plain" else tilde_piece(ctx)
    ring = piece.ring.ring
    images = {"x0": ring.const(a), "x1": ring.gen("x1"), "y1": ring.gen("y1") * a}
    h = RingMap(ctx.X[1].ring, piece.ring, images, f"h1^{a}" if variant == "plain" else f"h1~^{a}")
    if not verify_ring_map(h) or not morphism_avoids_excluded(h, piece, ctx.X[1]):
        raise IllDefinedMap(h.describe())
    return piece, h


def rho_line(ctx: TowerContext, i: int) -> RingMap:
    """rho1 restricted to A1 x {(lambda_i, 0)}."""
    A1 = ctx.A1.ring
    root = ctx.spec.roots[i]
    section = RingMap(ctx.A1xE.ring, A1, _images(A1, {"x0": "x0", "x1": root, "y1": 0}), f"s{i + 1}")
    return compose(ctx.rho1, section, f"rho1|line{i + 1}")


# --- Fibers of phi_n ---
class FiberKind(StrEnum):
    ELLIPTIC_E = "EllipticE"
    NONREDUCED_PUNCTURED_LINE = "NonreducedPuncturedLine"
    UNCLASSIFIED = "Unclassified"


@dataclass(eq=False)
class FiberDescription:
    kind: FiberKind
    fiber: QuasiAffine
    scale: FieldElem
    witness: RingMap | None = None


def fiber_of_phi(ctx: TowerContext, n: int, Q: RatPoint) -> FiberDescription:
    """Classify phi_n^{-1}(Q) for Q on X_{n-1}.

    With a = x_{n-1}(Q) nonzero the fiber is E via y_n -> a*y1; with a = 0 it
    is Spec K[x_n, y_n]/<y_n^2> minus the origin.

    Raises:
        PointNotOnVariety: Q is not a point of X_{n-1}.
    """
    if not point_on(ctx.X[n - 1], Q):
        raise PointNotOnVariety(f"{Q.describe()} is not on X{n - 1}")
    spec = ctx.spec
    a = Q[f"x{n - 1}"]
    xn, yn = f"x{n}", f"y{n}"
    ring = PolyRing.of((xn, yn), spec, MonomialOrder.block([yn]))

    plug = {v: ring.const(Q[v]) for v in Q.varset}
    plug.update({xn: ring.gen(xn), yn: ring.gen(yn)})
    top = ctx.X[n]
    fiber_ring = PresentedRing(ring, Ideal(ring, [substitute(g, plug, ring) for g in top.ring.ideal.generators]), f"fiber{n}")
    removed = []
    for e in top.excluded:
        ideal = Ideal(ring, [substitute(g, plug, ring) for g in e.generators])
        if not is_unit_ideal(ideal):
            removed.append(ideal)
    fiber = QuasiAffine(fiber_ring, tuple(removed), f"phi{n}^-1{Q.describe()}")

    if not is_zero(a):
        E = ctx.E.ring
        to_fiber = RingMap(E, fiber_ring, {"x1": ring.gen(xn), "y1": ring.gen(yn) * (spec.one / a)}, "E->fiber")
        to_curve = RingMap(fiber_ring, E, {xn: E.gen("x1"), yn: E.gen("y1") * a}, "fiber->E")
        kind = FiberKind.ELLIPTIC_E if check_iso(to_curve, to_fiber) and not fiber.excluded else FiberKind.UNCLASSIFIED
        return FiberDescription(kind, fiber, a, to_curve)

    nilpotent = ideal_equal(fiber_ring.ideal, Ideal(ring, [ring.gen(yn) ** 2]))
    punctured = QuasiAffine(fiber_ring, (point_ideal(ring, {xn: spec.zero, yn: spec.zero}),), "punctured")
    kind = FiberKind.NONREDUCED_PUNCTURED_LINE if nilpotent and locus_equal(fiber, punctured) else FiberKind.UNCLASSIFIED
    return FiberDescription(kind, fiber, a)


# --- Which gluing map reaches a point of X1 ---
@dataclass(eq=False)
class CoverWitness:
    kind: str
    parameter: FieldElem
    piece: QuasiAffine
    map: RingMap
    preimage: RatPoint


def cover_witness(ctx: TowerContext, Q: RatPoint) -> CoverWitness:
    """Find a gluing map from the cover whose image contains Q.

    Points with x0 = 0 come from h2; otherwise Q = rho1(a, P) for a = x0(Q) and
    P on E, and P decides between h1^a, h1~^a and the line through (lambda_i, 0).
    """
    if not point_on(ctx.X[1], Q):
        raise PointNotOnVariety(f"{Q.describe()} is not on X1")
    spec = ctx.spec
    a, x1, y1 = Q["x0"], Q["x1"], Q["y1"]
    cover = ctx.cover
    if is_zero(a):
        pre = RatPoint(cover.V2.ring.vars, (x1,))
        return CoverWitness("h2", a, cover.V2, cover.h2, pre)
    P = (x1, y1 / a)
    E_vars = ctx.E.ring.vars
    if P == (spec.zero, -spec.lam):
        piece, h = build_modified(ctx, a, "tilde")
        return CoverWitness("h1~^a", a, piece, h, RatPoint(E_vars, P))
    for i, root in enumerate(spec.roots):
        if P == (root, spec.zero):
            return CoverWitness(f"rho1|line{i + 1}", a, ctx.A1, rho_line(ctx, i), RatPoint(ctx.A1.ring.vars, (a,)))
    piece, h = build_modified(ctx, a, "plain")
    return CoverWitness("h1^a", a, piece, h, RatPoint(E_vars, P))


def sample_points(ctx: TowerContext, parameters: Sequence[FieldElem]) -> list[RatPoint]:
    """K-points of X1: rho1 images of the named points of E, plus h2 images."""
    spec = ctx.spec
    named = [(spec.zero, spec.lam), (spec.zero, -spec.lam), *((r, spec.zero) for r in spec.roots)]
    vars1 = ctx.X[1].ring.vars
    points = [ctx.alpha[1], ctx.beta[1]]
    for a in parameters:
        for x1, y1 in named:
            points.append(RatPoint(vars1, (a, x1, a * y1)))
    for x1 in (spec.one, spec.elem(2), *spec.roots):
        points.append(RatPoint(vars1, (spec.zero, x1, spec.zero)))
    unique = []
    for p in points:
        if p not in unique:
            unique.append(p)
    return unique
