"""Check runners C1..C14.

Each runner takes the tower context and the config and returns a result dict
with ``status`` (pass, fail, skipped or budget), ``witness`` (text naming what
broke, None on pass), ``details`` and ``timings``. A false mathematical claim
is a ``fail`` result, never an exception. A certificate left inconclusive by
the step budget is ``budget``, not ``fail``.
"""

import logging
from typing import Any

from towercert.errors import TowerCertError
from towercert.exactfield import format_elem, parse_rational
from towercert.groebner import Ideal, buchberger, is_unit_ideal
from towercert.polyring import build_f, format_poly, is_squarefree, partial_derivative
from towercert.rigidity import (
    CertStatus,
    certify_E,
    certify_Gm,
    certify_nonreduced_line,
    constant_maps,
    elliptic_slice,
    search_small_solutions,
)
from towercert.schemes import (
    QuasiAffine,
    RatPoint,
    RingMap,
    compose,
    evaluate_morphism,
    fiber_product,
    fiber_product_quasi,
    glue_points,
    localize,
    localized_iso,
    locus_equal,
    maps_equal,
    morphism_avoids_excluded,
    point_on,
    verify_ring_map,
)
from towercert.tower import (
    FiberKind,
    TowerContext,
    build_modified,
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
    w_matches_description,
)
from towercert.verifier.config import VerifierConfig


logger = logging.getLogger(__name__)


# --- Result helpers ---
def _result(failures: list[str], details: dict[str, Any] | None = None, timings: dict[str, float] | None = None) -> dict[str, Any]:
    return {
        "status": "fail" if failures else "pass",
        "witness": "; ".join(failures) if failures else None,
        "details": details or {},
        "timings": timings or {},
    }


def _skipped(reason: str) -> dict[str, Any]:
    return {"status": "skipped", "witness": reason, "details": {}, "timings": {}}


def _budget(witness: str, details: dict[str, Any], timings: dict[str, float]) -> dict[str, Any]:
    return {"status": "budget", "witness": witness, "details": details, "timings": timings}


def _params(ctx: TowerContext, config: VerifierConfig):
    return [ctx.spec.elem(parse_rational(p)) for p in config.modified_parameters]


# --- C1..C7: the tower itself ---
def check_smoothness(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """E is smooth: <g, dg/dx1, dg/dy1> is the unit ideal and f is squarefree."""
    E = ctx.E.ring
    g = E.ideal.generators[0]
    jacobian = Ideal(E.ring, [g, partial_derivative(g, "x1"), partial_derivative(g, "y1")])
    failures = []
    if not is_unit_ideal(jacobian):
        failures.append(f"singular points: {jacobian.describe()} has basis {[format_poly(p) for p in buchberger(jacobian)]}")
    f = build_f(ctx.spec, "x")
    if not is_squarefree(f, "x"):
        failures.append(f"f = {format_poly(f)} has a repeated root")
    return _result(failures, {"jacobian": jacobian.describe(), "f": format_poly(f)})


def check_presentation(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    failures = []
    details = {}
    for n in range(1, ctx.n + 1):
        report = presentation_matches(ctx, n)
        details[f"Y{n}"] = {
            "iso": report.iso,
            "fold_iso": report.fold_iso,
            "projections": report.projections,
            "exclusions": report.exclusions,
        }
        if config.verbose:
            details[f"Y{n}"]["presentation"] = ctx.X[n].describe()
        if not report.ok:
            failures.append(report.witness)
    return _result(failures, details)


def check_ring_maps(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    maps = [*(m for i in range(1, ctx.n + 1) for m in (ctx.phi[i], ctx.psi[i])), ctx.rho1]
    failures = [m.describe() for m in maps if not verify_ring_map(m)]
    return _result(failures, {"verified": [m.label for m in maps if m.verified]})


def check_square(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """phi_{n-1} o psi_n = psi_{n-1} o phi_n as maps Y_n -> Y_{n-2}."""
    if ctx.n < 2:
        return _skipped("needs n >= 2")
    failures = []
    for n in range(2, ctx.n + 1):
        left = compose(ctx.phi[n - 1], ctx.psi[n])
        right = compose(ctx.psi[n - 1], ctx.phi[n])
        if not maps_equal(left, right):
            failures.append(f"square at level {n}: {left.describe()} vs {right.describe()}")
    return _result(failures, {"levels": list(range(2, ctx.n + 1))})


def check_points(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    failures = []
    for i in range(ctx.n + 1):
        for name, p in (("alpha", ctx.alpha[i]), ("beta", ctx.beta[i])):
            if not point_on(ctx.X[i], p):
                failures.append(f"{name}{i} = {p.describe()} not on X{i}")

    a1_vars = ctx.A1.ring.vars
    zero, one = RatPoint(a1_vars, (ctx.spec.zero,)), RatPoint(a1_vars, (ctx.spec.one,))
    expected = [
        ("psi1(alpha1)", ctx.psi[1], ctx.alpha[1], zero),
        ("phi1(beta1)", ctx.phi[1], ctx.beta[1], zero),
        ("psi1(beta1)", ctx.psi[1], ctx.beta[1], one),
        ("phi1(alpha1)", ctx.phi[1], ctx.alpha[1], one),
    ]
    for name, m, p, want in expected:
        got = evaluate_morphism(m, p)
        if got != want:
            failures.append(f"{name} = {got.describe()}, expected {want.describe()}")

    if ctx.n >= 2 and not failures:
        X1 = ctx.X[1].ring
        fp = fiber_product(X1, X1, ctx.A1.ring, ctx.psi[1], ctx.phi[1], label="X1xX1")
        glued = glue_points(fp, ctx.alpha[1], ctx.beta[1])
        # drop the second factor's x0, which is glued to the first factor's x1
        collapsed = glued.coords[:3] + glued.coords[4:]
        if not point_on(QuasiAffine(fp.ring), glued) or collapsed != ctx.alpha[2].coords:
            failures.append(f"gluing alpha1 with beta1 gives {glued.describe()}, not alpha2 = {ctx.alpha[2].describe()}")
    return _result(failures, {"alpha": [p.describe() for p in ctx.alpha], "beta": [p.describe() for p in ctx.beta]})


def check_psi_swaps(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """psi_n(alpha_n) = beta_{n-1} and psi_n(beta_n) = alpha_{n-1}."""
    failures = []
    for n in range(1, ctx.n + 1):
        for src, dst, name in ((ctx.alpha[n], ctx.beta[n - 1], "alpha"), (ctx.beta[n], ctx.alpha[n - 1], "beta")):
            got = evaluate_morphism(ctx.psi[n], src)
            if got != dst:
                failures.append(f"psi{n}({name}{n}) = {got.describe()}, expected {dst.describe()}")
    return _result(failures, {"levels": list(range(1, ctx.n + 1))})


def check_rho_iso(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """rho1 is an isomorphism away from x0 = 0 and sends (0, 0, lambda) to the removed origin."""
    failures = []
    rho = ctx.rho1
    spec = ctx.spec
    if not verify_ring_map(rho):
        failures.append(f"rho1 is not a ring map: {rho.describe()}")
    else:
        Y1 = ctx.Y[1].ring
        local = localize(Y1, Y1.gen("x0"), "u")
        target = ctx.A1xE.ring
        inverse = RingMap(
            target,
            local,
            {"x0": local.gen("x0"), "x1": local.gen("x1"), "y1": local.gen("u") * local.gen("y1")},
            "rho1^-1",
        )
        if not localized_iso(rho, Y1.gen("x0"), inverse):
            failures.append(f"{rho.describe()} is not invertible after inverting x0")

    source = RatPoint(ctx.A1xE.ring.vars, (spec.zero, spec.zero, spec.lam))
    origin = RatPoint(ctx.X[1].ring.vars, (spec.zero, spec.zero, spec.zero))
    image = evaluate_morphism(rho, source)
    if image != origin:
        failures.append(f"rho1{source.describe()} = {image.describe()}, expected the origin")
    if point_on(ctx.X[1], origin):
        failures.append("the origin (0, 0, 0) is not removed from X1")
    return _result(failures, {"rho1": rho.describe()})


# --- C8..C11: the cover and the homotopy ---
def check_nisnevich_cover(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    report = check_nisnevich(ctx)
    failures = [report.witness] if not report.ok else []
    if not w_matches_description(ctx):
        failures.append(f"V1 x_A1 V2 is not {ctx.cover.W.describe()}")
    details = {
        "open_inclusion": report.open_inclusion,
        "etale": report.etale,
        "fiber_over_zero": report.fiber_over_zero,
    }
    if config.verbose:
        details["V1"] = ctx.cover.V1.describe()
        details["V2"] = ctx.cover.V2.describe()
        details["W"] = ctx.cover.W.describe()
    return _result(failures, details)


def check_gluing_maps(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """psi1 o h_i = p_i, and h_i misses the removed origin of X1."""
    cover = ctx.cover
    failures = []
    for h, p, piece in ((cover.h1, cover.p1, cover.V1), (cover.h2, cover.p2, cover.V2)):
        if not verify_ring_map(h):
            failures.append(f"{h.describe()} is not a ring map")
            continue
        if not maps_equal(compose(ctx.psi[1], h), p):
            failures.append(f"psi1 o {h.label} != {p.label}")
        if not morphism_avoids_excluded(h, piece, ctx.X[1]):
            failures.append(f"{h.label} meets the removed origin of X1")
    return _result(failures, {"h1": cover.h1.describe(), "h2": cover.h2.describe()})


def _homotopy_covering(ctx: TowerContext) -> RingMap:
    A1xW = ctx.cover.A1xW.ring
    return RingMap(ctx.A1.ring, A1xW, {"x0": A1xW.gen("x1")}, "pH", verified=True)


def check_endpoints(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """H(1) = h1|W and H(0) = h2 o p1|W, at level 1 and after lifting."""
    cover = ctx.cover
    failures = []
    H = cover.H
    if not verify_ring_map(H):
        failures.append(f"{H.describe()} is not a ring map")
    elif not morphism_avoids_excluded(H, cover.A1xW, ctx.X[1]):
        failures.append("H meets the removed origin of X1")

    W = cover.W.ring
    if not maps_equal(endpoint(H, 1, W), cover.h1):
        failures.append(f"H(1) = {endpoint(H, 1, W).describe()} differs from h1")
    if not maps_equal(endpoint(H, 0, W), compose(cover.h2, cover.to_V2)):
        failures.append(f"H(0) = {endpoint(H, 0, W).describe()} differs from h2 o p1")

    pH = _homotopy_covering(ctx)
    for n in range(1, ctx.n):
        lift_h1 = lift_to_level(ctx, n, cover.h1, cover.V1, cover.p1)
        lift_h2 = lift_to_level(ctx, n, cover.h2, cover.V2, cover.p2)
        lift_H = lift_to_level(ctx, n, H, cover.A1xW, pH)
        for lift in (lift_h1, lift_h2, lift_H):
            if not (lift.verified and lift.exclusion_safe):
                failures.append(f"{lift.map.label} is not a well-defined map into X{n + 1}")
        U = lift_h1.source.ring
        to_W = RingMap(lift_h2.source.ring, U, {v: U.gen(v) for v in lift_h2.source.ring.vars}, "pr")
        if not maps_equal(endpoint(lift_H.map, 1, U), lift_h1.map):
            failures.append(f"H^{n}(1) differs from h1^{n}")
        if not maps_equal(endpoint(lift_H.map, 0, U), compose(lift_h2.map, to_W)):
            failures.append(f"H^{n}(0) differs from pr o h2^{n}")
    return _result(failures, {"H": H.describe(), "lifted_levels": list(range(1, ctx.n))})


def check_endpoint_images(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    """h1(0, lambda) = alpha1, h2(1) = beta1, and the same after lifting."""
    cover = ctx.cover
    spec = ctx.spec
    failures = []
    P = RatPoint(cover.V1.ring.vars, (spec.zero, spec.lam))
    Q = RatPoint(cover.V2.ring.vars, (spec.one,))
    cases = [("h1", cover.h1, cover.V1, P, ctx.alpha[1]), ("h2", cover.h2, cover.V2, Q, ctx.beta[1])]
    for name, h, piece, point, want in cases:
        if not point_on(piece, point):
            failures.append(f"{point.describe()} is not on {piece.label}")
        elif evaluate_morphism(h, point) != want:
            failures.append(f"{name}{point.describe()} != {want.describe()}")

    for n in range(1, ctx.n):
        lifted = [
            ("h1", lift_to_level(ctx, n, cover.h1, cover.V1, cover.p1), P, ctx.beta[n], ctx.alpha[n + 1]),
            ("h2", lift_to_level(ctx, n, cover.h2, cover.V2, cover.p2), Q, ctx.alpha[n], ctx.beta[n + 1]),
        ]
        for name, lift, p, q, want in lifted:
            point = lift_point(lift, p, q)
            if not point_on(lift.source, point):
                failures.append(f"{point.describe()} is not on {lift.source.label}")
            elif evaluate_morphism(lift.map, point) != want:
                failures.append(f"{name}^{n}{point.describe()} != {want.describe()}")
    return _result(failures, {"levels": list(range(0, ctx.n))})


# --- C12, C13: rigidity ---
def check_fibers(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    failures = []
    details = {}
    for n in range(1, ctx.n + 1):
        for name, Q in ((f"alpha{n - 1}", ctx.alpha[n - 1]), (f"beta{n - 1}", ctx.beta[n - 1])):
            fiber = fiber_of_phi(ctx, n, Q)
            scale = Q[f"x{n - 1}"]
            want = FiberKind.NONREDUCED_PUNCTURED_LINE if scale == ctx.spec.zero else FiberKind.ELLIPTIC_E
            details[f"phi{n}^-1({name})"] = str(fiber.kind)
            if fiber.kind != want:
                failures.append(f"phi{n}^-1({name}) is {fiber.kind}, expected {want}: {fiber.fiber.describe()}")
    return _result(failures, details)


def check_rigidity(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    spec = ctx.spec
    certs = [
        certify_E(spec, config.degree_bound),
        certify_Gm(spec, config.degree_bound),
        certify_nonreduced_line(spec, config.degree_bound),
    ]
    details = {
        "shadow": f"bounded-degree certificate up to {config.degree_bound}",
        "certificates": {str(c.target): str(c.status) for c in certs},
        "evidence": [e.summary() for c in certs for e in c.evidence],
    }
    timings = {f"{e.target}:{e.degree}": round(e.elapsed_ms, 3) for c in certs for e in c.evidence}

    failures = [c.describe() for c in certs if c.status == CertStatus.FOUND_MAP]
    inconclusive = [c.describe() for c in certs if c.status == CertStatus.INCONCLUSIVE]
    if inconclusive and not failures:
        # budget spent; the cross-checks cannot finish either
        return _budget("; ".join(inconclusive), details, timings)

    if certs[0].certified:
        for evidence in certs[0].evidence:
            if evidence.vacuous:
                continue
            found = search_small_solutions(elliptic_slice(spec, evidence.degree))
            if found:
                failures.append(f"degree {evidence.degree} certified but {found[0]} solves it")

    constants = constant_maps(spec)
    if constants.ideal_is_unit or (spec.roots[0], spec.zero) not in constants.found:
        failures.append("constant maps to E are not detected")

    details["constant_points"] = len(constants.found)
    return _result(failures, details, timings)


# --- C14: the modified homotopies ---
def check_modified_homotopies(ctx: TowerContext, config: VerifierConfig) -> dict[str, Any]:
    cover = ctx.cover
    spec = ctx.spec
    failures = []
    params = _params(ctx, config)
    P = RatPoint(cover.V1.ring.vars, (spec.zero, spec.lam))

    for a in params:
        try:
            piece, h = build_modified(ctx, a, "plain")
            build_modified(ctx, a, "tilde")
        except TowerCertError as e:
            failures.append(f"a = {a}: {e}")
            continue
        H_a = endpoint(cover.H, a, cover.W.ring)
        if not maps_equal(H_a, h):
            failures.append(f"H({a}) = {H_a.describe()} differs from {h.describe()}")
        for n in range(1, ctx.n):
            lift = lift_to_level(ctx, n, h, piece, cover.p1)
            point = lift_point(lift, P, ctx.beta[n])
            if not (lift.verified and lift.exclusion_safe):
                failures.append(f"{lift.map.label} is not a well-defined map into X{n + 1}")
            elif not point_on(lift.source, point) or not point_on(ctx.X[n + 1], evaluate_morphism(lift.map, point)):
                failures.append(f"{lift.map.label} is not defined at {point.describe()}")

    tilde = tilde_piece(ctx)
    tilde_report = check_nisnevich(ctx, tilde)
    if not tilde_report.ok:
        failures.append(f"tilde cover: {tilde_report.witness}")
    p1_tilde = RingMap(ctx.A1.ring, tilde.ring, {"x0": tilde.ring.gen("x1")}, "p1~")
    W_tilde, _ = fiber_product_quasi(tilde, cover.V2, ctx.A1.ring, p1_tilde, cover.p2, label="V1~xV2")
    if not locus_equal(W_tilde, cover.W_product):
        failures.append("V1~ x_A1 V2 differs from W")

    A1_vars = ctx.A1.ring.vars
    for i, root in enumerate(spec.roots):
        line = rho_line(ctx, i)
        if not verify_ring_map(line) or not morphism_avoids_excluded(line, ctx.A1, ctx.X[1]):
            failures.append(f"{line.label} is not a path in X1")
            continue
        x1, y1 = line.images["x1"], line.images["y1"]
        if not (x1.is_constant and x1.constant_value() == root and y1.is_zero):
            failures.append(f"{line.label} leaves the line x1 = {format_elem(root)}, y1 = 0: {line.describe()}")
            continue
        end = evaluate_morphism(line, RatPoint(A1_vars, (spec.zero,)))
        pre = RatPoint(cover.V2.ring.vars, (root,))
        if not point_on(cover.V2, pre) or evaluate_morphism(cover.h2, pre) != end:
            failures.append(f"{line.label}(0) = {end.describe()} is not in the image of h2")

    witnesses = {}
    for Q in sample_points(ctx, params):
        try:
            w = cover_witness(ctx, Q)
        except TowerCertError as e:
            failures.append(f"no gluing map reaches {Q.describe()}: {e}")
            continue
        if not point_on(w.piece, w.preimage) or evaluate_morphism(w.map, w.preimage) != Q:
            failures.append(f"{w.kind} does not reach {Q.describe()} from {w.preimage.describe()}")
        witnesses[Q.describe()] = w.kind
    return _result(failures, {"parameters": [str(a) for a in params], "cover_witnesses": witnesses})
