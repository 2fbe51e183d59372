import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twomembranes import ExpressionError, parse_expression


def ev(text, x=0.0, y=None):
    return parse_expression(text)(x, y)


def test_literals_and_coordinates():
    assert ev("3") == 3.0
    assert ev("2.5e-1") == 0.25
    assert ev("x", x=0.7) == 0.7
    assert ev("y", x=0.0, y=0.3) == 0.3


def test_precedence():
    assert ev("1 + 2 * 3") == 7.0
    assert ev("(1 + 2) * 3") == 9.0
    assert ev("6 / 3 / 2") == 1.0
    assert ev("2 ^ 3 ^ 2") == 512.0  # right associative
    assert ev("-2 ^ 2") == -4.0      # power binds tighter than unary minus
    assert ev("1 - 2 - 3") == -4.0


def test_functions():
    assert ev("abs(0 - 3)") == 3.0
    assert ev("sin(0)") == 0.0
    assert ev("min(2, 5)") == 2.0
    assert ev("max(2, 5)") == 5.0
    assert ev("sin(x)", x=1.0) == pytest.approx(math.sin(1.0), abs=1e-15)
    assert ev("0.2*min(x, 1-x)", x=0.3) == pytest.approx(0.06, abs=1e-15)


def test_paper_expressions():
    assert ev("x*(1-x)", x=0.5) == 0.25
    assert ev("-5*x*(1-x)+1", x=0.5) == -0.25
    assert ev("0.1 - abs(x - 0.5)", x=0.5) == pytest.approx(0.1, abs=1e-15)


def test_vectorized_over_arrays():
    xs = np.linspace(0.0, 1.0, 11)
    expr = parse_expression("x*(1-x)")
    np.testing.assert_array_equal(expr(xs), xs * (1 - xs))
    # constants broadcast against array inputs
    const = parse_expression("2")
    assert np.asarray(const(xs)).shape in ((), (11,)) or np.isscalar(const(xs))


def test_variables_attribute():
    assert parse_expression("3 + 4").variables == set()
    assert parse_expression("x * 2").variables == {"x"}
    assert parse_expression("x + y").variables == {"x", "y"}


@pytest.mark.parametrize("bad", [
    "x + * 2",
    "min(x)",       # needs two arguments
    "abs(x, y)",    # needs one
    "(x + 1",
    "x + 1)",
    "2 **",
    "unknownfn(x)",
    "",
    "x 3",          # trailing garbage
])
def test_rejects_malformed(bad):
    with pytest.raises(ExpressionError):
        parse_expression(bad)


def test_error_carries_position():
    with pytest.raises(ExpressionError) as err:
        parse_expression("x + * 2")
    assert err.value.position == 4


@given(st.floats(min_value=-100, max_value=100, allow_nan=False),
       st.floats(min_value=-100, max_value=100, allow_nan=False))
def test_arithmetic_matches_python(a, b):
    assert ev(f"({a!r}) + ({b!r})") == a + b
    assert ev(f"({a!r}) * ({b!r})") == a * b
    assert ev(f"min({a!r}, {b!r})") == min(a, b)
    assert ev(f"max({a!r}, {b!r})") == max(a, b)
