import random

import pytest

from towercert.errors import ArityMismatch, MissingImage, PolySyntaxError, RingMismatch, UnknownVariable
from towercert.polyring import (
    GREVLEX,
    LEX,
    MonomialOrder,
    PolyRing,
    VarSet,
    build_f,
    evaluate,
    format_poly,
    is_squarefree,
    move,
    parse_poly,
    partial_derivative,
    poly_arith,
    substitute,
)


@pytest.mark.parametrize(
    "text",
    [
        "x^2 - 2*x*y + 1/2",
        "(1 + 2*L)*x",
        "y^3 - L*x*y",
        "x - 1",
        "0",
    ],
)
def test_format_is_canonical(xy, text):
    assert format_poly(parse_poly(text, xy)) == text


def test_parser_normalizes_input(xy):
    p = parse_poly("2*(x + y)^2 - y*y*2 - 4 * x*y", xy)
    assert format_poly(p) == "2*x^2"
    assert parse_poly("x**3", xy) == parse_poly("x^3", xy)
    assert parse_poly("--x", xy) == xy.gen("x")
    assert parse_poly("L^2", xy) == xy.const(-6)


def test_syntax_error_reports_position(xy):
    with pytest.raises(PolySyntaxError) as info:
        parse_poly("x + * y", xy)
    assert info.value.position == 4
    assert "position 4" in str(info.value)
    with pytest.raises(PolySyntaxError):
        parse_poly("x^y", xy)
    with pytest.raises(PolySyntaxError):
        parse_poly("1/0", xy)
    with pytest.raises(PolySyntaxError):
        parse_poly("", xy)
    with pytest.raises(PolySyntaxError):
        parse_poly("(x + y", xy)


def test_unknown_variable(xy):
    with pytest.raises(UnknownVariable):
        parse_poly("x + z", xy)
    with pytest.raises(UnknownVariable):
        xy.gen("z")


def test_lambda_in_a_rational_ring_is_rejected(spec):
    ring = PolyRing.of(("t",), spec, rational=True)
    with pytest.raises(PolySyntaxError):
        parse_poly("L*t", ring)


def test_varset_validation():
    with pytest.raises(ValueError):
        VarSet(("x", "x"))
    with pytest.raises(ValueError):
        VarSet(("L",))
    with pytest.raises(ValueError):
        VarSet(("1x",))
    assert VarSet(("x",)).extend("y").names == ("x", "y")


def test_build_f(spec):
    f = build_f(spec)
    assert format_poly(f) == "x^3 - 6*x^2 + 11*x - 6"
    assert is_squarefree(f, "x")
    assert not is_squarefree(f * (f.ring.gen("x") - 1), "x")


def test_evaluate_f_at_zero_gives_lambda_squared(spec):
    f = build_f(spec)
    assert evaluate(f, [spec.zero]) == spec.lam * spec.lam
    assert evaluate(f, [spec.elem(2)]) == spec.zero
    with pytest.raises(ArityMismatch):
        evaluate(f, [spec.zero, spec.zero])


def test_substitute_and_missing_image(spec, xy):
    t_ring = PolyRing.of(("t",), spec)
    t = t_ring.gen("t")
    p = parse_poly("x^2 - y", xy)
    assert substitute(p, {"x": t, "y": t**2}) == t_ring.zero
    with pytest.raises(MissingImage):
        substitute(p, {"x": t})
    other = PolyRing.of(("s",), spec)
    with pytest.raises(RingMismatch):
        substitute(p, {"x": t, "y": other.gen("s")})


def test_ring_mismatch_on_arithmetic(spec, xy):
    other = PolyRing.of(("x", "y", "z"), spec)
    with pytest.raises(RingMismatch):
        xy.gen("x") + other.gen("x")
    with pytest.raises(RingMismatch):
        poly_arith(xy.gen("x"), other.gen("x"), "mul")


def test_block_order_puts_leading_variables_first(spec):
    ring = PolyRing.of(("x0", "x1", "y1"), spec, MonomialOrder.block(["y1"]))
    p = parse_poly("y1^2 - x0^2*x1^3", ring)
    assert p.terms()[0][0] == (0, 0, 2)
    assert format_poly(p) == "y1^2 - x0^2*x1^3"


def test_lex_order(spec, xy):
    lex_ring = xy.with_order(LEX)
    p = parse_poly("y^5 + x", lex_ring)
    assert p.terms()[0][0] == (1, 0)


def test_extend_and_move(spec, xy):
    big = xy.extend("u")
    assert big.names == ("x", "y", "u")
    assert big.fresh_name("u") == "u1"
    p = parse_poly("x*y - 1", xy)
    assert format_poly(move(p, big)) == "x*y - 1"


def test_partial_derivative_and_degree(xy):
    p = parse_poly("x^3*y + 2*y^2", xy)
    assert format_poly(partial_derivative(p, "y")) == "x^3 + 4*y"
    assert p.total_degree() == 4
    assert p.variables() == {"x", "y"}
    assert xy.const(5).constant_value() == xy.field.elem(5)


# --- Properties ---
def random_poly(rng, ring, terms=4, degree=3):
    spec = ring.field
    return ring.from_terms(
        {tuple(rng.randint(0, degree) for _ in range(ring.ngens)): spec.elem(rng.randint(-5, 5), rng.randint(-2, 2)) for _ in range(terms)}
    )


def test_substitute_is_a_ring_homomorphism(spec, xy):
    rng = random.Random(3)
    st = PolyRing.of(("s", "t"), spec)
    for _ in range(30):
        images = {"x": random_poly(rng, st, 3, 2), "y": random_poly(rng, st, 3, 2)}
        p, q = random_poly(rng, xy), random_poly(rng, xy)
        assert substitute(p + q, images) == substitute(p, images) + substitute(q, images)
        assert substitute(p * q, images) == substitute(p, images) * substitute(q, images)
        assert substitute(xy.one, images) == st.one


def test_evaluate_commutes_with_substitute(spec, xy):
    rng = random.Random(5)
    st = PolyRing.of(("s", "t"), spec)
    for _ in range(30):
        images = {"x": random_poly(rng, st, 3, 2), "y": random_poly(rng, st, 3, 2)}
        p = random_poly(rng, xy)
        point = [spec.elem(rng.randint(-3, 3), rng.randint(-1, 1)) for _ in range(2)]
        inner = [evaluate(images["x"], point), evaluate(images["y"], point)]
        assert evaluate(substitute(p, images), point) == evaluate(p, inner)


@pytest.mark.parametrize("order", [GREVLEX, LEX, MonomialOrder.block(["y"])])
def test_monomial_orders_are_admissible(order):
    varset = VarSet(("x", "y", "z"))
    key = order.key(varset)
    rng = random.Random(17)
    one = (0, 0, 0)
    monomials = {tuple(rng.randint(0, 4) for _ in range(3)) for _ in range(60)}
    for a in monomials:
        # 1 is the least monomial and divisibility implies order
        assert a == one or key(one) < key(a)
        for b in monomials:
            if a != b:
                assert key(a) != key(b)
            if all(i <= j for i, j in zip(a, b, strict=True)):
                assert key(a) <= key(b)
            c = tuple(rng.randint(0, 2) for _ in range(3))
            ac = tuple(i + k for i, k in zip(a, c, strict=True))
            bc = tuple(j + k for j, k in zip(b, c, strict=True))
            assert (key(a) < key(b)) == (key(ac) < key(bc))
