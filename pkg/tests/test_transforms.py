import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussym import model
from boussym.errors import CatalogMismatchError
from boussym.model import GridSpec, PhysicalParams
from boussym.reduced import ReducedConstants, integrate_phi
from boussym.solution import RotatingSolutionF0
from boussym.timefuncs import default_time_functions, h_function
from boussym.transforms import FLOW_NAMES, act_on_point, finite_transform, make_flow

P = PhysicalParams(1.3, 2.1, 9.8)
P0 = PhysicalParams(0.0, 1.5, 9.8)
A, B, C = default_time_functions()[1]
CLOSED = [n for n in FLOW_NAMES if n != "flowH"]
GRID = GridSpec(x0=-0.6, z0=-0.5, hx=0.1, hz=0.1, nx=9, nz=9, t0=2.0, dt=0.05, nt=9)

coord = st.floats(-2.0, 2.0, allow_nan=False)
eps_s = st.floats(-0.8, 0.8, allow_nan=False)


def _flow(name, params=P):
    return make_flow(name, params, a=A, b=B, c=C, h=h_function("sin_s"))


def _close(p, q, tol=1e-12):
    return all(abs(a - b) <= tol * (1 + abs(a)) for a, b in zip(p, q))


@pytest.mark.parametrize("name", CLOSED)
@given(pt=st.tuples(coord, coord, coord, coord, coord, coord), e1=eps_s, e2=eps_s)
def test_composition_and_inverse(name, pt, e1, e2):
    flow = _flow(name)
    twice = act_on_point(flow, e2, act_on_point(flow, e1, pt))
    once = act_on_point(flow, e1 + e2, pt)
    assert _close(twice, once)
    assert _close(act_on_point(flow, -e1, act_on_point(flow, e1, pt)), pt)


@given(pt=st.tuples(coord, coord, coord, coord, coord, coord), e1=eps_s, e2=eps_s)
def test_flowh_composition(pt, e1, e2):
    flow = _flow("flowH", P0)
    twice = act_on_point(flow, e2, act_on_point(flow, e1, pt))
    assert _close(twice, act_on_point(flow, e1 + e2, pt), tol=1e-9)
    assert _close(act_on_point(flow, -e1, act_on_point(flow, e1, pt)), pt, tol=1e-9)


def test_rotation_full_turn():
    flow = _flow("rotation")
    pt = (0.1, 0.7, -0.3, 1.1, -0.4, 0.9)
    assert _close(act_on_point(flow, 2 * math.pi, pt), pt)


def test_branch_mismatch():
    with pytest.raises(CatalogMismatchError):
        _flow("rotation", P0)
    with pytest.raises(CatalogMismatchError):
        _flow("flowH", P)
    with pytest.raises(ValueError):
        make_flow("shiftPsi", P)
    with pytest.raises(ValueError):
        finite_transform("dilation7", float("inf"), None, P)


@pytest.fixture(scope="module")
def sol_rot():
    from boussym.solution import solve_invariant

    return solve_invariant(P, 0.4, 0.6, 12.0, K=0.9)


@pytest.fixture(scope="module")
def sol_f0():
    c = ReducedConstants.from_initial(P0, 0.4, 0.2, K=1.5)
    return RotatingSolutionF0(P0, integrate_phi(c, 0.4, 0.2, 12.0))


@pytest.mark.parametrize("name", CLOSED)
def test_images_are_solutions(name, sol_rot):
    img = finite_transform(name, 0.3, sol_rot, P, a=A, b=B, c=C)
    rng = np.random.default_rng(1)
    for t, x, z in zip(rng.uniform(3, 8, 10), rng.uniform(-1, 1, 10), rng.uniform(-1, 1, 10)):
        assert max(model.pde_residual_relative(P, img.jet(t, x, z))) < 1e-10


@pytest.mark.parametrize("name", ["flowH", "dilation7", "dilation8", "shiftV", "shiftRho", "shiftPsi", "genTransX", "genTransZ", "timeShift"])
def test_f0_images_are_solutions(name, sol_f0):
    img = finite_transform(name, 0.3, sol_f0, P0, a=A, b=B, c=C, h=h_function("sin_s"))
    assert max(model.pde_residual_relative(P0, img.jet(5.0, 0.3, -0.2))) < 1e-10


def test_f0_family_is_exact(sol_f0):
    rng = np.random.default_rng(2)
    for t, x, z in zip(rng.uniform(1, 11, 20), rng.uniform(-2, 2, 20), rng.uniform(-2, 2, 20)):
        assert max(model.pde_residual_relative(P0, sol_f0.jet(t, x, z))) < 1e-12


@pytest.mark.parametrize("name", ["dilation7", "genTransX", "rotation"])
def test_fd_order_preserved(name, sol_rot):
    base = model.observed_order(P, sol_rot, GRID)
    img = model.observed_order(P, finite_transform(name, 0.3, sol_rot, P, a=A, b=B, c=C), GRID)
    for o in img["per_equation"]:
        assert abs(o - 2.0) <= 0.2
    assert abs(img["overall"] - base["overall"]) <= 0.2
