import random

import pytest

from towercert.errors import DegenerateParameters, DivisionByZero, MixedFieldSpecs
from towercert.exactfield import (
    FieldSpec,
    Rational,
    conjugate,
    field_arith,
    format_elem,
    invert,
    is_zero,
    make_field,
    norm,
    parse_rational,
)


def test_lambda_squares_to_discriminant(spec):
    assert spec.disc == -6
    assert not spec.is_square
    assert spec.lam * spec.lam == spec.elem(-6)


def test_square_discriminant_collapses(square_spec):
    assert square_spec.disc == 1
    assert square_spec.is_square
    assert square_spec.lam == square_spec.elem(1)
    assert square_spec.lam.b == 0


def test_inverse_and_norm(spec):
    x = spec.elem(1, 1)
    assert norm(x) == 7
    assert x * invert(x) == spec.one
    assert invert(x) == spec.elem("1/7", "-1/7")


def test_division_by_zero_is_a_zero_division_error(spec):
    with pytest.raises(DivisionByZero):
        invert(spec.zero)
    with pytest.raises(ZeroDivisionError):
        spec.one / spec.zero


@pytest.mark.parametrize("lambdas", [(0, 1, 2), (1, 1, 2), (3, "1/2", 3)])
def test_degenerate_parameters(lambdas):
    with pytest.raises(DegenerateParameters):
        make_field(*lambdas)


def test_unchecked_allows_repeated_roots():
    spec = FieldSpec.unchecked(1, 1, 3)
    assert spec.lambdas == (1, 1, 3)
    assert spec.disc == -3


def test_mixed_specs_rejected(spec, square_spec):
    with pytest.raises(MixedFieldSpecs):
        spec.one + square_spec.one
    with pytest.raises(MixedFieldSpecs):
        field_arith(spec.one, square_spec.one, "add")


def test_field_arith_ops(spec):
    x, y = spec.elem(2, 1), spec.elem(1, -1)
    assert field_arith(x, y, "add") == spec.elem(3, 0)
    assert field_arith(x, y, "sub") == spec.elem(1, 2)
    # (2 + L)(1 - L) = 2 - 2L + L - L^2 = 2 + 6 - L
    assert field_arith(x, y, "mul") == spec.elem(8, -1)
    assert field_arith(field_arith(x, y, "div"), y, "mul") == x
    with pytest.raises(ValueError):
        field_arith(x, y, "pow")


def test_conjugate_multiplies_to_norm(spec):
    x = spec.elem("1/2", 3)
    assert x * conjugate(x) == spec.elem(norm(x))


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (0, 1, "L"),
        (0, -1, "-L"),
        (1, -2, "1 - 2*L"),
        (0, "3/2", "3/2*L"),
        (2, 1, "2 + L"),
        ("-5/3", 0, "-5/3"),
        (0, 0, "0"),
    ],
)
def test_format_elem(spec, a, b, expected):
    assert format_elem(spec.elem(a, b)) == expected
    assert str(spec.elem(a, b)) == expected


def test_parse_rational():
    assert parse_rational("-7/2") == Rational(-7, 2)
    assert parse_rational(" 3 ") == 3
    for bad in ("1.5", "1e3", "", "x"):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_is_zero_and_powers(spec):
    assert is_zero(spec.zero)
    assert not is_zero(spec.lam)
    assert spec.lam ** 2 == spec.elem(-6)
    assert spec.lam ** -2 == spec.elem("-1/6")


def test_domain_round_trip(spec, square_spec):
    for s in (spec, square_spec):
        x = s.elem("2/3", -5)
        assert s.from_domain(s.to_domain(x)) == x


# --- Properties ---
def random_elem(rng, spec):
    return spec.elem(f"{rng.randint(-9, 9)}/{rng.randint(1, 4)}", f"{rng.randint(-9, 9)}/{rng.randint(1, 4)}")


@pytest.mark.parametrize("field", ["spec", "square_spec"])
def test_field_axioms_on_random_elements(field, request):
    s = request.getfixturevalue(field)
    rng = random.Random(7)
    for _ in range(100):
        x, y, z = (random_elem(rng, s) for _ in range(3))
        assert x + y == y + x
        assert x * y == y * x
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        assert x + (-x) == s.zero
        assert x * s.one == x
        if not is_zero(x):
            assert x * invert(x) == s.one
            assert (y / x) * x == y


def test_norm_is_multiplicative(spec):
    rng = random.Random(11)
    for _ in range(100):
        x, y = random_elem(rng, spec), random_elem(rng, spec)
        assert norm(x * y) == norm(x) * norm(y)
        assert conjugate(x * y) == conjugate(x) * conjugate(y)
        assert conjugate(conjugate(x)) == x
        # the norm vanishes only at zero when disc is not a square
        assert (norm(x) == 0) == is_zero(x)
