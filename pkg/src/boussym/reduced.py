"""The reduced oscillator ``phi'' + 2 phi^3 + K phi = 0``.

Covers the first integral ``H = phi'^2 + phi^4 + K phi^2 = B^2``, the amplitude
bound ``C*``, the oscillation period by quadrature and by an elliptic-function
oracle, and fixed-step integration with drift control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import _kernels
from . import taylor as tl
from .errors import IntegrationError, RegimeError
from .model import PhysicalParams


def first_integral(K, phi, dphi):
    return dphi * dphi + phi**4 + K * phi * phi


def amplitude_bound(K: float, B: float) -> float:
    """Turning point ``C* >= 0`` of ``phi'^2 = B^2 - phi^4 - K phi^2``.

    ``C*^2 = (-K + sqrt(K^2 + 4 B^2)) / 2``, the positive root of
    ``c^2 + K c = B^2``.
    """
    if K < 0:
        raise RegimeError(f"amplitude bound is derived for K >= 0, got K={K}")
    B2 = B * B
    if B2 == 0.0:
        return 0.0
    # rationalised form avoids cancellation when K >> B
    return math.sqrt(2.0 * B2 / (K + math.sqrt(K * K + 4.0 * B2)))


def amplitude_bound_published(K: float, B: float) -> float:
    """``sqrt((-K + sqrt(B^2 + K^2)) / 2)``; this is the turning point for first-integral value ``B^2 / 4``."""
    if K < 0:
        raise RegimeError(f"amplitude bound is derived for K >= 0, got K={K}")
    return math.sqrt(0.5 * (math.sqrt(B * B + K * K) - K))


def ode_derivatives(K, phi, dphi, order: int = 4) -> list:
    """``[phi, phi', ..., phi^(order)]`` implied by the ODE at state (phi, phi')."""
    d2 = -2.0 * phi**3 - K * phi
    d3 = -6.0 * phi * phi * dphi - K * dphi
    d4 = -12.0 * phi * dphi * dphi - 6.0 * phi * phi * d2 - K * d2
    return [phi, dphi, d2, d3, d4][: order + 1]


@dataclass(frozen=True)
class ReducedConstants:
    A: float
    K: float
    B2: float
    C_star: float  # NaN when K < 0

    @classmethod
    def from_initial(cls, params: PhysicalParams, phi0: float, dphi0: float, *, A=None, K=None, exploratory=False):
        """Constants from (A or K) and the initial state; B^2 is always derived."""
        if (A is None) == (K is None):
            raise ValueError("give exactly one of A or K")
        shift = 0.5 * (params.f**2 + params.N**2)
        if K is None:
            K = A + shift
        else:
            A = K - shift
        if K < 0 and not exploratory:
            raise RegimeError(f"K={K} < 0 lies outside the bounded regime; pass exploratory=True")
        B2 = float(first_integral(K, phi0, dphi0))
        cs = amplitude_bound(K, math.sqrt(B2)) if K >= 0 else float("nan")
        return cls(float(A), float(K), B2, cs)

    @property
    def B(self) -> float:
        return math.sqrt(self.B2)

    def as_dict(self) -> dict:
        return {"A": self.A, "K": self.K, "B2": self.B2, "C_star": self.C_star}


@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    t: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    constants: ReducedConstants
    dt: float
    drift: float
    refinements: int = 0
    _splines: tuple = field(default=None, repr=False)

    def __post_init__(self):
        d2 = ode_derivatives(self.constants.K, self.phi, self.dphi, 2)[2]
        splines = (CubicHermiteSpline(self.t, self.phi, self.dphi), CubicHermiteSpline(self.t, self.dphi, d2))
        object.__setattr__(self, "_splines", splines)

    @property
    def H(self) -> np.ndarray:
        return first_integral(self.constants.K, self.phi, self.dphi)

    @property
    def R(self) -> np.ndarray:
        return 2.0 * self.dphi

    @property
    def V(self) -> np.ndarray:
        return 2.0 * self.phi**2 + self.constants.A

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def state(self, t):
        """Interpolated ``(phi, phi')``; a Taylor ``t`` gives the ODE-consistent series of each."""
        if isinstance(t, tl.Taylor):
            p, dp = self.state(t.value)
            d = ode_derivatives(self.constants.K, float(p), float(dp), t.basis.degree + 1)
            return t.compose(d[:-1]), t.compose(d[1:])
        lo, hi = self.span
        tt = np.asarray(t, dtype=float)
        if np.any(tt < lo - 1e-12 * max(1.0, abs(lo))) or np.any(tt > hi + 1e-12 * max(1.0, abs(hi))):
            raise ValueError(f"t outside trajectory span [{lo}, {hi}]")
        return self._splines[0](tt), self._splines[1](tt)

    def max_abs_phi(self) -> float:
        return float(np.abs(self.phi).max())

    def rows(self, stride: int = 1):
        H, R, V = self.H, self.R, self.V
        for i in range(0, len(self.t), stride):
            yield (self.t[i], self.phi[i], self.dphi[i], H[i], R[i], V[i])


def _relative_drift(K, phi, dphi, H0) -> float:
    H = first_integral(K, phi, dphi)
    return float(np.abs(H - H0).max() / (1.0 + abs(H0)))


def period_scale(K: float, B2: float) -> float:
    """Crude period estimate ``2 pi / sqrt(K + 2B)`` used to pick the step."""
    w2 = abs(K + 2.0 * math.sqrt(B2))
    return 2.0 * math.pi / math.sqrt(w2) if w2 > 0 else 2.0 * math.pi


def integrate_phi(
    constants: ReducedConstants,
    phi0: float,
    dphi0: float,
    t_end: float,
    *,
    t0: float = 0.0,
    steps_per_period: int = 2000,
    drift_tol: float = 1e-8,
    max_refinements: int = 6,
) -> ReducedTrajectory:
    """RK4 with step ``T_est / steps_per_period``, doubled until the drift of H meets ``drift_tol``."""
    if not (np.isfinite(phi0) and np.isfinite(dphi0)):
        raise ValueError("initial data must be finite")
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    K = constants.K
    H0 = float(first_integral(K, phi0, dphi0))
    if not math.isclose(H0, constants.B2, rel_tol=1e-12, abs_tol=1e-300):
        raise ValueError("constants.B2 does not match the initial data")
    T_est = period_scale(K, H0)
    span = t_end - t0
    steps = steps_per_period
    for level in range(max_refinements + 1):
        n = max(1, math.ceil(span / T_est * steps))
        dt = span / n
        phi, dphi = _kernels.rk4_duffing([phi0], [dphi0], K, dt, n)
        phi, dphi = phi[0], dphi[0]
        drift = _relative_drift(K, phi, dphi, H0)
        if drift <= drift_tol:
            t = t0 + dt * np.arange(n + 1)
            return ReducedTrajectory(t, phi, dphi, constants, dt, drift, level)
        steps *= 2
    raise IntegrationError(f"drift {drift:.3e} above {drift_tol:.1e} after {max_refinements} refinements")


def integrate_oracle(K: float, phi0: float, dphi0: float, dt: float, nsteps: int, refine: int = 100):
    """8th-order symplectic reference at step ``dt / refine``, sampled every ``dt``."""
    phi, dphi = _kernels.yoshida8_duffing([phi0], [dphi0], K, dt / refine, nsteps * refine, refine)
    return phi[0], dphi[0]


# ---------------------------------------------------------------------------
# period

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _period_gl(K: float, cs: float, n: int) -> float:
    # phi = C* sin(theta) turns the quarter period into a smooth integral
    x, w = _gauss_legendre(n)
    theta = 0.25 * np.pi * (x + 1.0)
    integrand = 1.0 / np.sqrt(K + cs * cs * (1.0 + np.sin(theta) ** 2))
    return float(4.0 * 0.25 * np.pi * np.dot(w, integrand))


def period(K: float, B: float, nodes: int = 64) -> tuple[float, float]:
    """Period and an error estimate (difference against doubled nodes)."""
    if B <= 0:
        raise RegimeError("period undefined at the equilibrium B = 0")
    if K < 0:
        raise RegimeError(f"period quadrature assumes K >= 0, got K={K}")
    cs = amplitude_bound(K, B)
    T = _period_gl(K, cs, nodes)
    return T, abs(_period_gl(K, cs, 2 * nodes) - T)


def zero_crossings(traj: ReducedTrajectory) -> np.ndarray:
    """Roots of the interpolated phi, refined on each bracketing sample interval."""
    phi = traj.phi
    spline = traj._splines[0]
    idx = np.flatnonzero(np.sign(phi[:-1]) * np.sign(phi[1:]) < 0)
    roots = [brentq(spline, traj.t[i], traj.t[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps) for i in idx]
    exact = traj.t[:-1][phi[:-1] == 0.0]
    return np.sort(np.concatenate([np.array(roots), exact])) if len(exact) else np.array(roots)


def zero_crossing_period(traj: ReducedTrajectory) -> float:
    """Twice the least-squares spacing of consecutive zero crossings."""
    roots = zero_crossings(traj)
    if len(roots) < 3:
        raise ValueError("fewer than three zero crossings; integrate longer")
    k = np.arange(len(roots))
    slope = np.polyfit(k, roots, 1)[0]
    return float(2.0 * slope)


def elliptic_oracle(K: float, C_star: float) -> tuple[float, float]:
    """``(Omega, m)`` such that ``C* cn(Omega t | m)`` solves the ODE."""
    if K < 0 or C_star <= 0:
        raise RegimeError("elliptic oracle needs K >= 0 and C* > 0")
    omega2 = K + 2.0 * C_star**2
    return math.sqrt(omega2), C_star**2 / omega2


def elliptic_solution(K: float, C_star: float, t):
    """``(phi, phi')`` of the solution starting at ``(C*, 0)``."""
    omega, m = elliptic_oracle(K, C_star)
    sn, cn, dn, _ = special.ellipj(omega * np.asarray(t, dtype=float), m)
    return C_star * cn, -C_star * omega * sn * dn


def elliptic_period(K: float, C_star: float) -> float:
    omega, m = elliptic_oracle(K, C_star)
    return float(4.0 * special.ellipk(m) / omega)
