"""Solutions invariant under the dilation X7 and the rotation X9."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import taylor as tl
from .errors import SingularPointError
from .model import FieldSolution, PhysicalParams
from .reduced import ReducedConstants, ReducedTrajectory, integrate_phi
from .timefuncs import TimeFunction
from .transforms import finite_transform


def to_star(params: PhysicalParams, v, rho):
    """``(v*, u) = (f v, g rho)``."""
    return params.f * v, params.g * rho


def from_star(params: PhysicalParams, v_star, u):
    params.require_rotating()
    return v_star / params.f, u / params.g


def invariants_J(params: PhysicalParams, t, x, z, v, rho, psi):
    """Joint invariants ``(J1, J2, J3)`` of X7 and X9 (t is a further invariant)."""
    r2 = np.asarray(x * x + z * z, dtype=float)
    if np.any(r2 == 0):
        raise SingularPointError("invariants are singular at x = z = 0")
    vs, u = to_star(params, v, rho)
    al = params.alpha
    J1 = (x * u + z * vs + al * x * z) / r2
    J2 = (x * vs - z * u + 0.5 * al * (x * x - z * z)) / r2
    J3 = psi / r2
    return J1, J2, J3


@dataclass(frozen=True, eq=False)
class InvariantSolutionSpec:
    params: PhysicalParams
    constants: ReducedConstants
    trajectory: ReducedTrajectory

    def __post_init__(self):
        self.params.require_rotating()
        expected = self.constants.A + 0.5 * (self.params.f**2 + self.params.N**2)
        if not np.isclose(expected, self.constants.K, rtol=1e-12, atol=1e-14):
            raise ValueError("constants.K is inconsistent with params and A")


class InvariantSolution(FieldSolution):
    """Rotation- and dilation-invariant solution built from a reduced trajectory.

    ``form`` picks the A-form or the equivalent K-form of the field expressions.
    """

    def __init__(self, spec: InvariantSolutionSpec, form: str = "A"):
        if form not in ("A", "K"):
            raise ValueError("form must be 'A' or 'K'")
        self.spec = spec
        self.params = spec.params
        self.form = form

    @property
    def constants(self) -> ReducedConstants:
        return self.spec.constants

    def phi(self, t):
        return self.spec.trajectory.state(t)

    def fields(self, t, x, z):
        p = self.params
        f, g, N2 = p.f, p.g, p.N**2
        phi, dphi = self.phi(t)
        if self.form == "A":
            A = self.constants.A
            half = 0.5 * (N2 - f * f)
            v = ((2.0 * phi * phi + A + half) * x + 2.0 * dphi * z) / f
            rho = (2.0 * dphi * x - (2.0 * phi * phi + A - half) * z) / g
        else:
            K = self.constants.K
            v = ((2.0 * phi * phi + K - f * f) * x + 2.0 * dphi * z) / f
            rho = (2.0 * dphi * x - (2.0 * phi * phi + K - N2) * z) / g
        psi = (x * x + z * z) * phi
        return psi, v, rho

    def grad_psi(self, t, x, z):
        phi, _ = self.phi(np.asarray(t, dtype=float))
        return 2.0 * x * phi, 2.0 * z * phi


def build_solution(spec: InvariantSolutionSpec, form: str = "A") -> InvariantSolution:
    return InvariantSolution(spec, form)


def solve_invariant(params: PhysicalParams, phi0: float, dphi0: float, t_end: float, *, A=None, K=None, **kwargs) -> InvariantSolution:
    """Integrate the reduced ODE and wrap the result as a field solution."""
    params.require_rotating()
    constants = ReducedConstants.from_initial(params, phi0, dphi0, A=A, K=K)
    traj = integrate_phi(constants, phi0, dphi0, t_end, **kwargs)
    return build_solution(InvariantSolutionSpec(params, constants, traj))


class CandidateSolution(FieldSolution):
    """The general invariant form with arbitrary time functions R, V, phi.

    Only particular choices (``R = 2 phi'``, ``V = 2 phi^2 + A`` with phi
    solving the reduced ODE) are solutions; others serve as negative controls.
    """

    def __init__(self, params: PhysicalParams, R: TimeFunction, V, phi: TimeFunction):
        params.require_rotating()
        self.params = params
        self.R, self.V, self.phi = R, V, phi

    def fields(self, t, x, z):
        f, g, N2 = self.params.f, self.params.g, self.params.N**2
        R, V, phi = self.R(t), self.V(t), self.phi(t)
        half = 0.5 * (N2 - f * f)
        v = (R * z + V * x + half * x) / f
        rho = (R * x - V * z + half * z) / g
        return (x * x + z * z) * phi, v, rho


class ShiftedV:
    """``V(t) = 2 phi^2 + A + delta`` along a trajectory; a deliberately wrong V."""

    def __init__(self, traj: ReducedTrajectory, delta: float):
        self.traj, self.delta = traj, float(delta)

    def __call__(self, t):
        phi, _ = self.traj.state(t)
        return 2.0 * phi * phi + self.traj.constants.A + self.delta


class _TrajectoryFunction:
    def __init__(self, traj: ReducedTrajectory, which: int, scale: float = 1.0):
        self.traj, self.which, self.scale = traj, which, scale

    def __call__(self, t):
        return self.scale * self.traj.state(t)[self.which]


def candidate_from_trajectory(params: PhysicalParams, traj: ReducedTrajectory, v_shift: float = 0.0) -> CandidateSolution:
    """Candidate with ``R = 2 phi'`` and ``V = 2 phi^2 + A + v_shift``."""
    return CandidateSolution(params, _TrajectoryFunction(traj, 1, 2.0), ShiftedV(traj, v_shift), _TrajectoryFunction(traj, 0))


def reduction_residuals(solution: InvariantSolution, t: float, dt: float | None = None) -> tuple[float, float, float]:
    """``(2 phi' - R, V' - 2 R phi, R' + 2 V phi + (N^2 + f^2) phi)`` with V', R' by central differences."""
    traj = solution.spec.trajectory
    lo, hi = traj.span
    h = traj.dt if dt is None else float(dt)
    if not (lo + h <= t <= hi - h):
        raise ValueError(f"t={t} is not interior to [{lo}, {hi}] at step {h}")
    A = solution.constants.A
    p = solution.params

    def RV(s):
        phi, dphi = traj.state(s)
        return float(phi), float(dphi), 2.0 * float(dphi), 2.0 * float(phi) ** 2 + A

    phi, dphi, R, V = RV(t)
    _, _, Rp, Vp = RV(t + h)
    _, _, Rm, Vm = RV(t - h)
    dR = (Rp - Rm) / (2 * h)
    dV = (Vp - Vm) / (2 * h)
    e1 = 2.0 * dphi - R
    e2 = dV - 2.0 * R * phi
    e3 = dR + 2.0 * V * phi + (p.N**2 + p.f**2) * phi
    return e1, e2, e3


def _max_field_deviation(a: FieldSolution, b: FieldSolution, points) -> float:
    t, x, z = (np.asarray(c, dtype=float) for c in points)
    fa, fb = a(t, x, z), b(t, x, z)
    return float(max(np.abs(u - w).max() for u, w in zip(fa, fb)))


def rotation_invariance_check(solution: FieldSolution, eps: float, points) -> float:
    """Max deviation between the rotated solution and the original at ``points = (t, x, z)``."""
    rotated = finite_transform("rotation", eps, solution, solution.params)
    return _max_field_deviation(rotated, solution, points)


def dilation_invariance_check(solution: FieldSolution, eps: float, points) -> float:
    dilated = finite_transform("dilation7", eps, solution, solution.params)
    return _max_field_deviation(dilated, solution, points)


class RotatingSolutionF0(FieldSolution):
    """Exact rotationally symmetric solution of the f = 0 system.

    ``psi = r^2 phi(t)``, ``rho = (4 phi' x - (4 phi^2 - g p0) z) / g`` and
    ``v = w1 r^2 + w2 sin(r^2)`` with phi solving the reduced ODE for
    ``K = (N^2 - g p0) / 2``. Used to exercise the f = 0 flows.
    """

    def __init__(self, params: PhysicalParams, trajectory: ReducedTrajectory, w1: float = 0.3, w2: float = 0.2):
        params.require_f_zero()
        self.params = params
        self.trajectory = trajectory
        self.p0 = (params.N**2 - 2.0 * trajectory.constants.K) / params.g
        self.w1, self.w2 = float(w1), float(w2)

    def fields(self, t, x, z):
        g = self.params.g
        phi, dphi = self.trajectory.state(t)
        r2 = x * x + z * z
        psi = r2 * phi
        rho = (4.0 * dphi * x - (4.0 * phi * phi - g * self.p0) * z) / g
        v = self.w1 * r2 + self.w2 * tl.sin(r2)
        return psi, v, rho
