import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussym import taylor as tl
from boussym.timefuncs import (
    Exponential,
    Polynomial,
    Sinusoid,
    default_time_functions,
    h_function,
    time_function,
)

finite = st.floats(-2.0, 2.0, allow_nan=False)


@pytest.mark.parametrize("triple", default_time_functions())
def test_default_family_derivatives(triple):
    for fn in triple:
        assert fn.check_derivatives(np.linspace(-2, 2, 9)) < 1e-6


@given(st.lists(finite, min_size=1, max_size=5), finite)
def test_polynomial_derivatives_fd(coefs, t):
    p = Polynomial(tuple(coefs))
    assert p.check_derivatives([t]) < 1e-6


@given(finite, st.floats(0.1, 3.0), finite, finite)
def test_sinusoid_and_exponential_fd(amp, rate, phase, t):
    assert Sinusoid(amp, rate, phase).check_derivatives([t]) < 1e-6
    assert Exponential(amp, rate - 1.5).check_derivatives([t]) < 1e-6


def test_closed_under_differentiation():
    s = Sinusoid(2.0, 3.0, 0.5)
    assert s.derivative(4)(0.3) == pytest.approx(81 * s(0.3))
    assert Polynomial((1.0, 2.0)).derivative(3)(5.0) == 0.0
    assert Exponential(2.0, -0.5).derivative(2)(1.0) == pytest.approx(0.25 * 2.0 * math.exp(-0.5))


def test_taylor_argument_composes():
    fn = Exponential(1.3, 0.7)
    T, X, Z = tl.variables((0.4, 0.0, 0.0), 3)
    series = fn(T * 2.0)
    assert series.derivative_value((3, 0, 0)) == pytest.approx(8 * 0.7**3 * 1.3 * math.exp(0.56), rel=1e-12)


def test_round_trip_and_errors():
    for triple in default_time_functions():
        for fn in triple:
            assert time_function(fn.to_dict()) == fn
    with pytest.raises(ValueError):
        Polynomial((1, 2, 3, 4, 5, 6))
    with pytest.raises(ValueError):
        time_function({"kind": "cosh"})


def test_h_functions():
    assert h_function("one")(2.0, 3.0) == 1.0
    assert h_function("s")(2.0, 3.0) == 3.0
    assert h_function("v_s")(2.0, 3.0) == 6.0
    assert h_function("sin_s")(0.0, 0.5) == pytest.approx(math.sin(0.5))
    with pytest.raises(ValueError):
        h_function("tanh")
