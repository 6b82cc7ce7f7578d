import pytest

from towercert.errors import CompatibilityFailure, PointNotOnVariety, ZeroParameter
from towercert.schemes import RatPoint, RingMap, check_iso, compose, evaluate_morphism, fiber_product_quasi, maps_equal, point_on
from towercert.tower import (
    FAULTS,
    FiberKind,
    build_modified,
    build_tower,
    check_nisnevich,
    cover_witness,
    endpoint,
    fiber_of_phi,
    lift_point,
    lift_to_level,
    presentation_matches,
    rho_line,
    sample_points,
    tilde_piece,
    tower_names,
    w_matches_description,
)


def x1_point(ctx, x0, x1, y1):
    return RatPoint(ctx.X[1].ring.vars, (x0, x1, y1))


# --- Construction ---
def test_tower_names():
    assert tower_names(2) == ("x0", "x1", "y1", "x2", "y2")


def test_alpha_and_beta_coordinates(spec, ctx):
    one, zero, lam = spec.one, spec.zero, spec.lam
    assert ctx.alpha[1].coords == (one, zero, lam)
    assert ctx.beta[1].coords == (zero, one, zero)
    assert ctx.alpha[2].coords == (one, zero, lam, one, zero)
    assert ctx.beta[2].coords == (zero, one, zero, zero, lam)
    for n in range(ctx.n + 1):
        assert point_on(ctx.X[n], ctx.alpha[n])
        assert point_on(ctx.X[n], ctx.beta[n])


def test_psi_swaps_alpha_and_beta(ctx):
    for n in range(1, ctx.n + 1):
        assert evaluate_morphism(ctx.psi[n], ctx.alpha[n]) == ctx.beta[n - 1]
        assert evaluate_morphism(ctx.psi[n], ctx.beta[n]) == ctx.alpha[n - 1]
        assert evaluate_morphism(ctx.phi[n], ctx.alpha[n]) == ctx.alpha[n - 1]


def test_origin_is_removed(spec, ctx):
    origin = x1_point(ctx, spec.zero, spec.zero, spec.zero)
    assert point_on(ctx.Y[1], origin)
    assert not point_on(ctx.X[1], origin)


def test_build_tower_rejects_bad_input(spec):
    with pytest.raises(ValueError):
        build_tower(spec, 0)
    with pytest.raises(ValueError):
        build_tower(spec, 1, ["no-such-fault"])
    assert "keep-origin" in FAULTS


@pytest.mark.parametrize("level", [1, 2, 3])
def test_presentation_matches_closed_form(ctx, level):
    report = presentation_matches(ctx, level)
    assert report.ok, report.witness


def test_points_agree_across_both_presentations_of_level_two(spec, ctx):
    closed = ctx.Y[2].ring
    pulled, fp = fiber_product_quasi(ctx.X[1], ctx.X[1], ctx.Y[0].ring, ctx.psi[1], ctx.phi[1], label="P2")
    P = fp.ring
    # the second copy of X1 sits one level up
    up = {"x0": "x1", "x1": "x2", "y1": "y2"}
    back = RingMap(P, closed, {**{v: closed.gen(v) for v in ("x0", "x1", "y1")}, **{fp.rename[v]: closed.gen(w) for v, w in up.items()}}, "P->Y2")
    forward = RingMap(closed, P, {**{v: P.gen(v) for v in ("x0", "x1", "y1")}, "x2": P.gen(fp.rename["x1"]), "y2": P.gen(fp.rename["y1"])}, "Y2->P")
    assert check_iso(forward, back)

    roots = spec.roots
    candidates = [ctx.alpha[2], ctx.beta[2]]
    candidates += [RatPoint(closed.vars, (spec.elem(x0), r, spec.zero, s, spec.zero)) for x0 in (0, 1, 2) for r in roots for s in roots]
    candidates += [RatPoint(closed.vars, (spec.zero, spec.zero, spec.zero, spec.elem(x2), spec.zero)) for x2 in (0, 1, 5)]
    candidates += [RatPoint(closed.vars, tuple(spec.elem(c) for c in coords)) for coords in [(1, 1, 1, 1, 1), (2, 0, 1, 3, 0), (0, 1, 0, 2, 1)]]
    verdicts = []
    for q in candidates:
        image = evaluate_morphism(back, q)
        assert evaluate_morphism(forward, image) == q
        verdicts.append(point_on(ctx.X[2], q))
        assert point_on(pulled, image) == verdicts[-1]
    assert any(verdicts)
    assert not all(verdicts)


# --- Cover ---
def test_nisnevich_cover(ctx):
    report = check_nisnevich(ctx)
    assert report.ok, report.witness
    assert check_nisnevich(ctx, tilde_piece(ctx)).ok
    assert w_matches_description(ctx)


def test_retained_ramification_breaks_etaleness(spec):
    broken = build_tower(spec, 1, ["retain-ramification"])
    report = check_nisnevich(broken)
    assert not report.etale
    assert report.open_inclusion and report.fiber_over_zero
    assert "ramification" in report.witness


def test_extra_exclusion_empties_the_fiber_over_zero(spec):
    broken = build_tower(spec, 1, ["exclude-plus-lambda"])
    report = check_nisnevich(broken)
    assert not report.fiber_over_zero
    assert report.etale


def test_homotopy_endpoints(ctx):
    cover = ctx.cover
    W = cover.W.ring
    assert maps_equal(endpoint(cover.H, 1, W), cover.h1)
    assert maps_equal(endpoint(cover.H, 0, W), compose(cover.h2, cover.to_V2))


# --- Lifts ---
def test_lift_requires_compatible_covering(ctx):
    cover = ctx.cover
    wrong = RingMap(ctx.A1.ring, cover.V1.ring, {"x0": cover.V1.ring.gen("y1")}, "wrong")
    with pytest.raises(CompatibilityFailure):
        lift_to_level(ctx, 1, cover.h1, cover.V1, wrong)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_lifts_are_well_defined(ctx, level):
    cover = ctx.cover
    lift = lift_to_level(ctx, level, cover.h1, cover.V1, cover.p1)
    assert lift.verified
    assert lift.exclusion_safe
    lift2 = lift_to_level(ctx, level, cover.h2, cover.V2, cover.p2)
    assert lift2.verified and lift2.exclusion_safe


def test_lifted_h1_sends_the_glued_point_to_alpha(spec, ctx):
    cover = ctx.cover
    lift = lift_to_level(ctx, 1, cover.h1, cover.V1, cover.p1)
    p = RatPoint(cover.V1.ring.vars, (spec.zero, spec.lam))
    q = ctx.beta[1]
    image = evaluate_morphism(lift.map, lift_point(lift, p, q))
    assert image == ctx.alpha[2]


def test_lift_beyond_the_tower(ctx):
    cover = ctx.cover
    with pytest.raises(ValueError):
        lift_to_level(ctx, ctx.n, cover.h1, cover.V1, cover.p1)


# --- Modified homotopies ---
def test_modified_gluing(spec, ctx):
    piece, h = build_modified(ctx, spec.elem(2))
    assert piece is ctx.cover.V1
    assert maps_equal(h, endpoint(ctx.cover.H, 2, piece.ring))
    tilde, h_tilde = build_modified(ctx, spec.elem(-1), "tilde")
    assert tilde.label == "V1~"
    assert h_tilde.verified


def test_modified_gluing_needs_nonzero_parameter(spec, ctx):
    with pytest.raises(ZeroParameter):
        build_modified(ctx, spec.zero)


def test_corrupt_rho_breaks_agreement_with_the_homotopy(spec):
    broken = build_tower(spec, 1, ["corrupt-rho"])
    _, h = build_modified(broken, spec.elem(2))
    assert h.verified
    assert not maps_equal(h, endpoint(broken.cover.H, 2, broken.cover.V1.ring))


@pytest.mark.parametrize("i", [0, 1, 2])
def test_rho_line_stays_on_the_ramification_line(spec, ctx, i):
    line = rho_line(ctx, i)
    root = spec.roots[i]
    assert line.images["x1"].is_constant
    assert line.images["x1"].constant_value() == root
    assert line.images["y1"].is_zero
    assert line.images["x0"] == ctx.A1.ring.gen("x0")
    for t in (spec.zero, spec.one, spec.elem(-2), spec.elem("1/3"), spec.lam, spec.one + spec.lam):
        q = evaluate_morphism(line, RatPoint(ctx.A1.ring.vars, (t,)))
        assert point_on(ctx.X[1], q)
        assert (q["x0"], q["x1"], q["y1"]) == (t, root, spec.zero)


# --- Fibers ---
def test_fibers_of_phi(ctx):
    assert fiber_of_phi(ctx, 1, ctx.alpha[0]).kind is FiberKind.ELLIPTIC_E
    assert fiber_of_phi(ctx, 1, ctx.beta[0]).kind is FiberKind.NONREDUCED_PUNCTURED_LINE
    assert fiber_of_phi(ctx, 2, ctx.alpha[1]).kind is FiberKind.NONREDUCED_PUNCTURED_LINE
    assert fiber_of_phi(ctx, 2, ctx.beta[1]).kind is FiberKind.ELLIPTIC_E
    assert fiber_of_phi(ctx, 3, ctx.alpha[2]).kind is FiberKind.ELLIPTIC_E


def test_fiber_over_a_removed_point(spec, ctx):
    with pytest.raises(PointNotOnVariety):
        fiber_of_phi(ctx, 2, x1_point(ctx, spec.zero, spec.zero, spec.zero))


def test_keep_origin_leaves_an_unclassified_fiber(spec):
    broken = build_tower(spec, 1, ["keep-origin"])
    assert fiber_of_phi(broken, 1, broken.beta[0]).kind is FiberKind.UNCLASSIFIED


# --- Cover witnesses ---
@pytest.mark.parametrize(
    "coords, kind",
    [
        ((2, 0, (0, 2)), "h1^a"),
        ((2, 0, (0, -2)), "h1~^a"),
        ((2, 1, (0, 0)), "rho1|line1"),
        ((-1, 3, (0, 0)), "rho1|line3"),
        ((0, 5, (0, 0)), "h2"),
    ],
)
def test_cover_witness_kinds(spec, ctx, coords, kind):
    x0, x1, (a, b) = coords
    Q = x1_point(ctx, spec.elem(x0), spec.elem(x1), spec.elem(a, b))
    assert cover_witness(ctx, Q).kind == kind


def test_cover_witness_reaches_every_sampled_point(spec, ctx):
    for Q in sample_points(ctx, [spec.elem(2), spec.elem(-1), spec.elem("1/2")]):
        witness = cover_witness(ctx, Q)
        assert point_on(witness.piece, witness.preimage)
        assert evaluate_morphism(witness.map, witness.preimage).coords == Q.coords


def test_cover_witness_rejects_points_off_x1(spec, ctx):
    with pytest.raises(PointNotOnVariety):
        cover_witness(ctx, x1_point(ctx, spec.one, spec.one, spec.one))
