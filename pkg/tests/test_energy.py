import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussym import energy as en
from boussym.model import FieldSolution, PhysicalParams
from boussym.reduced import period
from boussym.solution import InvariantSolution, solve_invariant


class Zero(FieldSolution):
    def __init__(self, params):
        self.params = params

    def fields(self, t, x, z):
        return 0.0 * x, 0.0 * x, 0.0 * x


class Mixed(InvariantSolution):
    """phi from one trajectory and phi' from another."""

    def __init__(self, spec, other):
        super().__init__(spec)
        self.other = other

    def phi(self, t):
        return self.spec.trajectory.state(t)[0], self.other.spec.trajectory.state(t)[1]


def test_zero_fields(params):
    assert en.energy_density(params, Zero(params), 1.0, 0.3, 0.4) == 0.0
    total, err = en.total_energy_disk(params, Zero(params), 1.0, 0.0)
    assert total == 0.0 and err == 0.0


def test_density_at_unit_x(params, solution):
    t = 2.7
    phi, dphi = solution.phi(t)
    K, f, N, g = solution.constants.K, params.f, params.N, params.g
    v = (2 * phi * phi + K - f * f) / f
    rho = 2 * dphi / g
    expect = v * v + (g / N) ** 2 * rho * rho + 4 * phi * phi
    assert float(en.energy_density(params, solution, t, 1.0, 0.0)) == pytest.approx(expect, rel=1e-13)


def test_closed_form_f_equals_N():
    p = PhysicalParams(1.5, 1.5, 9.8)
    K = 2.0
    a = en.energy_density_closedform(p, K, 0.3, 0.7, 0.4, -0.9)
    b = en.energy_density_closedform(p, K, -0.8, 0.1, 0.4, -0.9)
    assert a == b == pytest.approx((1.5 - K / 1.5) ** 2 * 0.16 + (1.5 - K / 1.5) ** 2 * 0.81)


def test_equilibrium_discrepancy_vanishes(params, equilibrium):
    x, z = np.linspace(-1, 1, 7), np.linspace(1, -0.5, 7)
    t = np.full(x.shape, 2.0)
    d = en.energy_density(params, equilibrium, t, x, z) - en.energy_density_closedform(
        params, equilibrium.constants.K, 0.0, 0.0, x, z
    )
    assert np.abs(d).max() <= 1e-13


def test_discrepancy_structure(params, solution):
    T = period(solution.constants.K, solution.constants.B)[0]
    times = 1.0 + T * np.arange(9) / 8
    rng = np.random.default_rng(4)
    audit = en.density_audit(params, solution, times, (rng.uniform(-1, 1, 30), rng.uniform(-1, 1, 30)))
    assert audit["D_time_spread_max_rel"] <= 1e-9
    assert audit["D_over_weight_spread"] <= 1e-9
    assert audit["D_over_weight_in_B2_units"] == pytest.approx(4.0, rel=1e-10)
    assert audit["xz_coefficient_max_rel_error"] <= 1e-12


def test_disk_totals_quarter_periods(params, solution):
    T = period(solution.constants.K, solution.constants.B)[0]
    totals = [en.total_energy_disk(params, solution, 1.0, 1.0 + s * T)[0] for s in (0, 0.25, 0.5, 1.0)]
    assert (max(totals) - min(totals)) / totals[0] <= 1e-6
    exact = en.disk_total_closed_form(params, solution.constants.K, solution.constants.B2, 1.0)
    assert totals[0] == pytest.approx(exact, rel=1e-12)


def test_totals_scale_as_R4(params, solution):
    a = en.total_energy_disk(params, solution, 0.5, 3.0)[0]
    b = en.total_energy_disk(params, solution, 1.0, 3.0)[0]
    assert b / a == pytest.approx(16.0, rel=1e-12)


def test_conservation_reports(params, solution, equilibrium):
    T = period(solution.constants.K, solution.constants.B)[0]
    rep = en.conservation_check(params, solution, 1.0, 1.0 + T * np.arange(65) / 64)
    assert rep.passed and rep.max_relative_variation <= 1e-6
    assert all(tot > 0 for tot in rep.totals)
    assert rep.as_dict()["passed"] is True
    eq = en.conservation_check(params, equilibrium, 1.0, np.linspace(0.5, 9.0, 9))
    assert eq.max_relative_variation <= 1e-14


def test_inconsistent_field_detected(params, solution):
    other = solve_invariant(params, 0.9, -0.3, 30.0, K=1.0)
    mixed = Mixed(solution.spec, other)
    T = period(solution.constants.K, solution.constants.B)[0]
    rep = en.conservation_check(params, mixed, 1.0, 1.0 + T * np.arange(65) / 64)
    assert rep.max_relative_variation >= 1e-2 and not rep.passed


def test_bad_radius(params, solution):
    with pytest.raises(ValueError):
        en.total_energy_disk(params, solution, 0.0, 1.0)


@given(st.floats(1.0, 29.0), st.floats(-3, 3), st.floats(-3, 3))
def test_density_nonnegative(t, x, z):
    sol = _sol()
    e = float(en.energy_density(sol.params, sol, t, x, z))
    assert e >= 0.0
    psi, v, rho = sol(t, x, z)
    gx, gz = sol.grad_psi(t, x, z)
    if e == 0.0:
        # tiny fields can underflow when squared, so compare the squares
        assert v * v == rho * rho == gx * gx == gz * gz == 0.0


_S = {}


def _sol():
    if "s" not in _S:
        _S["s"] = solve_invariant(PhysicalParams(1.0, 2.0, 9.8), 0.0, 1.0, 30.0, K=1.0)
    return _S["s"]


def test_quadratic_coefficients():
    def q(x, z):
        return 2.0 * x * x - 3.0 * z * z + 0.5 * x * z

    assert en.quadratic_coefficients(q) == {"xx": 2.0, "zz": -3.0, "xz": 0.5}
    assert math.isclose(en.discrepancy_weight(PhysicalParams(2.0, 4.0, 1.0), 4.0, 2.0), 2.0)
