"""Energy density ``E = v^2 + (g/N)^2 rho^2 + |grad psi|^2`` and its disk totals."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import QuadratureError
from .model import FieldSolution, PhysicalParams

ENERGY_TOL = 1e-6


def energy_density_direct(params: PhysicalParams, v, rho, grad_psi_sq):
    return v * v + (params.g / params.N) ** 2 * rho * rho + grad_psi_sq


def energy_density(params: PhysicalParams, sol: FieldSolution, t, x, z):
    _, v, rho = sol(t, x, z)
    gx, gz = sol.grad_psi(t, x, z)
    return energy_density_direct(params, v, rho, gx * gx + gz * gz)


def energy_density_closedform(params: PhysicalParams, K, phi, dphi, x, z):
    """The closed-form density for the invariant solution, term by term as published."""
    f, N = params.f, params.N
    if f == 0 or N == 0:
        raise ValueError("closed form needs f, N != 0")
    c = 4.0 * (1.0 / f**2 - 1.0 / N**2)
    return (
        c * (x * x - z * z) * (phi * phi + K) * phi * phi
        + (f - K / f) ** 2 * x * x
        + (N - K / N) ** 2 * z * z
        + c * x * z * (2.0 * phi * phi + K) * dphi
    )


def discrepancy_weight(params: PhysicalParams, x, z):
    """``x^2/N^2 + z^2/f^2``, the shape of the observed D = E_direct - E_closedform."""
    return x * x / params.N**2 + z * z / params.f**2


def quadratic_coefficients(fn, *args) -> dict:
    """Coefficients of a homogeneous quadratic ``q(x, z)`` from three evaluations."""
    qxx = fn(*args, 1.0, 0.0)
    qzz = fn(*args, 0.0, 1.0)
    qxz = 0.5 * (fn(*args, 1.0, 1.0) - fn(*args, 1.0, -1.0))
    return {"xx": float(qxx), "zz": float(qzz), "xz": float(qxz)}


def _polar_total(fn, R: float, nr: int, ntheta: int) -> float:
    xr, wr = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * R * (xr + 1.0)
    wr = 0.5 * R * wr
    theta = 2.0 * np.pi * np.arange(ntheta) / ntheta
    rr, th = np.meshgrid(r, theta, indexing="ij")
    vals = fn(rr * np.cos(th), rr * np.sin(th))
    angular = vals.sum(axis=1) * (2.0 * np.pi / ntheta)
    return float(np.dot(wr, angular * r))


def total_energy_disk(params: PhysicalParams, sol: FieldSolution, R: float, t: float, nr: int = 64, ntheta: int = 128, rtol: float = 1e-8):
    """Disk integral of E at time ``t`` and an error estimate by node doubling."""
    if R <= 0:
        raise ValueError("disk radius must be positive")

    def fn(x, z):
        return energy_density(params, sol, np.full(x.shape, float(t)), x, z)

    total = _polar_total(fn, R, nr, ntheta)
    err = abs(_polar_total(fn, R, 2 * nr, 2 * ntheta) - total)
    if not np.isfinite(total) or err > rtol * max(1.0, abs(total)):
        raise QuadratureError(f"disk quadrature did not converge (estimate {err:.3e})")
    return total, err


def disk_total_closed_form(params: PhysicalParams, K: float, B2: float, R: float) -> float:
    """Exact disk integral of E_direct for the invariant solution.

    ``E_direct = E_closedform + 4 B^2 (x^2/N^2 + z^2/f^2)``; over a disk the
    xz and x^2 - z^2 parts integrate to zero and ``int x^2 = int z^2 = pi R^4 / 4``.
    """
    f, N = params.f, params.N
    return 0.25 * math.pi * R**4 * ((f - K / f) ** 2 + (N - K / N) ** 2 + 4.0 * B2 * (1.0 / N**2 + 1.0 / f**2))


@dataclass
class EnergyReport:
    radius: float
    times: list
    totals: list
    quadrature_errors: list
    max_relative_variation: float
    tolerance: float
    closed_form_total: float | None = None
    closed_form_max_rel_error: float | None = None
    density_audit: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_relative_variation <= self.tolerance

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def conservation_check(params: PhysicalParams, sol: FieldSolution, R: float, times, tol: float = ENERGY_TOL) -> EnergyReport:
    totals, errs = [], []
    for t in times:
        tot, err = total_energy_disk(params, sol, R, float(t))
        totals.append(tot)
        errs.append(err)
    arr = np.array(totals)
    ref = abs(arr[0]) if arr[0] != 0 else 1.0
    variation = float((arr.max() - arr.min()) / ref)
    return EnergyReport(float(R), [float(t) for t in times], totals, errs, variation, tol)


def density_audit(params: PhysicalParams, sol, times, points) -> dict:
    """Compare E_direct with the published closed form on an invariant solution.

    Reports the largest spread of ``D = E_direct - E_closedform`` across
    ``times`` at each point, the ratio ``D / (x^2/N^2 + z^2/f^2)`` in units of
    ``B^2`` and the xz-coefficient mismatch.
    """
    K, B2 = sol.constants.K, sol.constants.B2
    x, z = (np.asarray(c, dtype=float) for c in points)
    D_rows, xz_err = [], 0.0
    for t in times:
        tt = np.full(x.shape, float(t))
        phi, dphi = sol.phi(tt)
        E_direct = energy_density(params, sol, tt, x, z)
        E_paper = energy_density_closedform(params, K, phi, dphi, x, z)
        D_rows.append(E_direct - E_paper)

        def direct_at(xx, zz, t=float(t)):
            return float(energy_density(params, sol, np.array(t), np.array(xx), np.array(zz)))

        p0, dp0 = (float(a) for a in sol.phi(np.array(float(t))))
        predicted_xz = 4.0 * (1.0 / params.f**2 - 1.0 / params.N**2) * (2.0 * p0 * p0 + K) * dp0
        measured_xz = quadratic_coefficients(direct_at)["xz"]
        xz_err = max(xz_err, abs(measured_xz - predicted_xz) / max(1.0, abs(predicted_xz)))
    D = np.array(D_rows)
    weight = discrepancy_weight(params, x, z)
    scale = np.maximum(1.0, np.abs(D).max(axis=0))
    ratio = D / weight
    return {
        "D_time_spread_max_rel": float(((D.max(axis=0) - D.min(axis=0)) / scale).max()),
        "D_over_weight_mean": float(ratio.mean()),
        "D_over_weight_spread": float(ratio.max() - ratio.min()),
        "D_over_weight_in_B2_units": float(ratio.mean() / B2) if B2 > 0 else None,
        "B2": B2,
        "xz_coefficient_max_rel_error": float(xz_err),
        "structure": "D = c (x^2/N^2 + z^2/f^2), c measured",
    }
