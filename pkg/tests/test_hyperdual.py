import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubeforms import hyperdual as hd

XS = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def second_derivative(f, x):
    _, d1, d2 = hd.jet(f, np.asarray(x))
    return float(d1), float(d2)


@pytest.mark.parametrize(
    "f, df, d2f",
    [
        (hd.sin, math.cos, lambda x: -math.sin(x)),
        (hd.cosh, math.sinh, math.cosh),
        (hd.exp, math.exp, math.exp),
        (hd.arctan, lambda x: 1 / (1 + x * x), lambda x: -2 * x / (1 + x * x) ** 2),
        (hd.tanh, lambda x: 1 - math.tanh(x) ** 2, lambda x: -2 * math.tanh(x) * (1 - math.tanh(x) ** 2)),
    ],
)
@given(x=XS)
def test_elementary_functions_have_exact_first_and_second_derivatives(f, df, d2f, x):
    d1, d2 = second_derivative(f, x)
    assert d1 == pytest.approx(df(x), rel=1e-13, abs=1e-13)
    assert d2 == pytest.approx(d2f(x), rel=1e-12, abs=1e-12)


@given(x=st.floats(min_value=0.1, max_value=5.0))
def test_log_sqrt_and_reciprocal(x):
    assert second_derivative(hd.log, x) == pytest.approx((1 / x, -1 / x**2), rel=1e-13)
    assert second_derivative(hd.sqrt, x) == pytest.approx((0.5 / math.sqrt(x), -0.25 * x**-1.5), rel=1e-13)
    assert second_derivative(hd.recip, x) == pytest.approx((-1 / x**2, 2 / x**3), rel=1e-13)


@settings(max_examples=50)
@given(x=XS, y=XS)
def test_product_and_quotient_rules_compose(x, y):
    # f(x) = sin(x) * exp(y x) / (2 + cos x)
    def f(t):
        return hd.mul(hd.mul(hd.sin(t), hd.exp(hd.mul(y, t))), hd.recip(hd.add(2.0, hd.cos(t))))

    h = 1e-4
    g = lambda t: math.sin(t) * math.exp(y * t) / (2 + math.cos(t))
    d1, d2 = second_derivative(f, x)
    assert d1 == pytest.approx((g(x + h) - g(x - h)) / (2 * h), rel=1e-6, abs=1e-6)
    assert d2 == pytest.approx((g(x + h) - 2 * g(x) + g(x - h)) / h**2, rel=1e-4, abs=1e-4)


def test_nested_tags_give_third_derivatives():
    inner_jet = lambda t: hd.jet(hd.sin, t)[2]  # -sin
    _, d3, d4 = hd.jet(inner_jet, np.asarray(0.7))
    assert float(d3) == pytest.approx(-math.cos(0.7), rel=1e-14)
    assert float(d4) == pytest.approx(math.sin(0.7), rel=1e-14)


def test_arrays_broadcast_through_the_algebra():
    x = np.linspace(0, 1, 5)
    v, d1, d2 = hd.jet(lambda t: hd.mul(t, hd.mul(t, t)), x)
    np.testing.assert_allclose(v, x**3)
    np.testing.assert_allclose(d1, 3 * x**2)
    np.testing.assert_allclose(d2, 6 * x)


def test_scale_broadcasts_constant_vectors_over_a_grid():
    vec = np.array([1.0, 2.0, 3.0, 4.0])
    s = np.ones((3, 5))
    out = hd.scale(s, vec)
    assert np.shape(out) == (4, 3, 5)
    np.testing.assert_allclose(out[:, 2, 4], vec)
