import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussym import reduced as rd
from boussym.errors import IntegrationError, RegimeError
from boussym.model import PhysicalParams

P = PhysicalParams(1.0, 2.0, 9.8)


def _constants(phi0, dphi0, K):
    return rd.ReducedConstants.from_initial(P, phi0, dphi0, K=K)


def test_first_integral_examples():
    assert rd.first_integral(1.0, 0.0, 0.7) == pytest.approx(0.49)
    assert rd.first_integral(1.0, 1.0, 0.0) == 2.0
    cs = rd.amplitude_bound(0.0, 1.0)
    assert rd.first_integral(0.0, cs, 0.0) == pytest.approx(1.0, rel=1e-15)


def test_amplitude_bound_examples():
    assert rd.amplitude_bound(5.0, 0.0) == 0.0
    cs = rd.amplitude_bound(3.0, 2.0)
    assert 4.0 - cs**4 - 3.0 * cs**2 == pytest.approx(0.0, abs=1e-14)
    # the published expression is the turning point for first-integral value B^2/4
    assert rd.amplitude_bound_published(0.0, 2.0) == 1.0
    assert rd.amplitude_bound_published(3.0, 2.0) ** 2 == pytest.approx((-3 + math.sqrt(13)) / 2, rel=1e-14)
    assert rd.amplitude_bound_published(3.0, 2.0) == pytest.approx(rd.amplitude_bound(3.0, 1.0), rel=1e-14)
    with pytest.raises(RegimeError):
        rd.amplitude_bound(-1.0, 1.0)


@given(st.floats(0.0, 20.0), st.floats(1e-3, 10.0))
def test_bound_is_turning_point(K, B):
    cs = rd.amplitude_bound(K, B)
    assert rd.first_integral(K, cs, 0.0) == pytest.approx(B * B, rel=1e-12)


def test_constants_derivation():
    c = rd.ReducedConstants.from_initial(P, 0.5, 0.0, A=0.0)
    assert c.K == pytest.approx(2.5) and c.B2 == pytest.approx(0.0625 + 2.5 * 0.25)
    with pytest.raises(ValueError):
        rd.ReducedConstants.from_initial(P, 0.5, 0.0, A=0.0, K=1.0)
    with pytest.raises(RegimeError):
        rd.ReducedConstants.from_initial(P, 0.5, 0.0, K=-1.0)
    loose = rd.ReducedConstants.from_initial(P, 0.5, 0.0, K=-1.0, exploratory=True)
    assert math.isnan(loose.C_star)


def test_equilibrium_trajectory():
    traj = rd.integrate_phi(_constants(0.0, 0.0, 1.0), 0.0, 0.0, 10.0)
    assert np.all(traj.phi == 0.0) and np.all(traj.dphi == 0.0)


def test_quartic_bound_over_100_periods():
    cs = rd.amplitude_bound(0.0, 1.0)
    T = rd.period(0.0, 1.0)[0]
    traj = rd.integrate_phi(_constants(cs, 0.0, 0.0), cs, 0.0, 100 * T)
    assert traj.max_abs_phi() <= cs * (1 + 1e-9)
    assert traj.drift <= 1e-8


def test_against_symplectic_oracle():
    c = _constants(0.3, 0.8, 1.3)
    T = rd.period(c.K, c.B)[0]
    traj = rd.integrate_phi(c, 0.3, 0.8, 10 * T)
    phi_o, dphi_o = rd.integrate_oracle(c.K, 0.3, 0.8, traj.dt, len(traj.t) - 1)
    assert np.abs(traj.phi - phi_o).max() <= 1e-6
    assert np.abs(traj.dphi - dphi_o).max() <= 1e-6


def test_period_examples():
    T, err = rd.period(4.0, 1e-4)
    assert T == pytest.approx(math.pi, rel=0.01)
    assert err < 1e-12
    scaled = [rd.period(0.0, B)[0] * math.sqrt(B) for B in (0.5, 1.0, 2.0)]
    assert max(scaled) - min(scaled) <= 1e-10 * scaled[0]
    with pytest.raises(RegimeError):
        rd.period(1.0, 0.0)


def test_elliptic_oracle_examples():
    cs = rd.amplitude_bound(0.0, 1.3)
    assert rd.elliptic_oracle(0.0, cs)[1] == 0.5
    omega, m = rd.elliptic_oracle(2.0, 1e-6)
    assert omega == pytest.approx(math.sqrt(2.0), rel=1e-10) and m < 1e-12
    cs = rd.amplitude_bound(3.0, 2.0)
    assert rd.elliptic_period(3.0, cs) == pytest.approx(rd.period(3.0, 2.0)[0], rel=1e-8)


def test_elliptic_solution_matches_integration():
    K, B = 0.8, 1.1
    cs = rd.amplitude_bound(K, B)
    T = rd.period(K, B)[0]
    traj = rd.integrate_phi(_constants(cs, 0.0, K), cs, 0.0, 10 * T)
    phi, dphi = rd.elliptic_solution(K, cs, traj.t)
    assert np.abs(phi - traj.phi).max() <= 1e-6
    assert np.abs(dphi - traj.dphi).max() <= 1e-6


def test_zero_crossings_and_oscillation():
    K, B = 1.0, 1.0
    c = _constants(0.0, 1.0, K)
    T = rd.period(K, B)[0]
    traj = rd.integrate_phi(c, 0.0, 1.0, 20 * T)
    assert rd.zero_crossing_period(traj) == pytest.approx(T, rel=1e-5)
    roots = rd.zero_crossings(traj)
    assert len(roots) >= 2 * 19
    # consecutive maxima agree with C*
    peaks = traj.phi[1:-1][(traj.phi[1:-1] > traj.phi[:-2]) & (traj.phi[1:-1] >= traj.phi[2:])]
    assert np.abs(peaks - c.C_star).max() <= 1e-6


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.0, 3.0))
def test_time_reversal(phi0, dphi0, K):
    # phi(-t) solves the ODE from (phi0, -dphi0); RK4 mirrors this step by step
    fwd = rd.integrate_phi(_constants(phi0, -dphi0, K), phi0, -dphi0, 3.0, steps_per_period=500)
    phi, dphi = rd._kernels.rk4_duffing([phi0], [dphi0], K, -fwd.dt, len(fwd.t) - 1)
    assert np.allclose(fwd.phi, phi[0], rtol=1e-12, atol=1e-12)
    assert np.allclose(fwd.dphi, -dphi[0], rtol=1e-12, atol=1e-12)


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.0, 3.0))
def test_R_V_consistency(phi0, dphi0, K):
    c = _constants(phi0, dphi0, K)
    traj = rd.integrate_phi(c, phi0, dphi0, 2.0, steps_per_period=400)
    assert np.abs(traj.V - 2.0 * traj.phi**2 - c.A).max() <= 1e-10 * max(1.0, abs(c.A))
    assert np.array_equal(traj.R, 2.0 * traj.dphi)


def test_state_outside_span_and_taylor():
    c = _constants(0.2, 0.1, 1.0)
    traj = rd.integrate_phi(c, 0.2, 0.1, 2.0)
    with pytest.raises(ValueError):
        traj.state(2.5)
    from boussym import taylor as tl

    T, *_ = tl.variables((1.0, 0.0, 0.0), 3)
    p, dp = traj.state(T)
    assert p.diff(0).value == pytest.approx(dp.value, rel=1e-14)


def test_integration_failure_reported():
    c = _constants(0.9, 0.4, 0.5)
    with pytest.raises(IntegrationError):
        rd.integrate_phi(c, 0.9, 0.4, 50.0, drift_tol=1e-30, max_refinements=1)
    with pytest.raises(ValueError):
        rd.integrate_phi(c, 0.1, 0.4, 5.0)
