"""Hot numeric kernels.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature. The numpy path is selected when ``BOUSSYM_DISABLE_NUMBA`` is
set to a truthy value or numba cannot be imported; ``USE_NUMBA`` reports the
active choice.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BOUSSYM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED

# Yoshida (1990) 8th-order composition weights, solution A.
_YOSHIDA8_W = np.array(
    [
        0.104242620869991e1,
        0.182020630970714e1,
        0.157739928123617e0,
        0.244002732616735e1,
        -0.716989419708120e-2,
        -0.244699182370524e1,
        -0.161582374150097e1,
    ]
)
_w0 = 1.0 - 2.0 * _YOSHIDA8_W.sum()
YOSHIDA8_STAGES = np.concatenate([_YOSHIDA8_W, [_w0], _YOSHIDA8_W[::-1]])


# ---------------------------------------------------------------------------
# truncated Taylor product


def taylor_mul_numpy(a, b, ia, ib, ik, m):
    return np.bincount(ik, weights=a[ia] * b[ib], minlength=m)


def _taylor_mul_py(a, b, ia, ib, ik, m):
    out = np.zeros(m)
    for p in range(ia.shape[0]):
        out[ik[p]] += a[ia[p]] * b[ib[p]]
    return out


# ---------------------------------------------------------------------------
# Duffing oscillator phi'' = -2 phi^3 - K phi, batched over trajectories


def _duffing_acc(phi, K):
    return -2.0 * phi * phi * phi - K * phi


def rk4_duffing_numpy(phi0, dphi0, K, dt, nsteps, stride):
    nsamp = nsteps // stride + 1
    n = phi0.shape[0]
    phi_out = np.empty((n, nsamp))
    dphi_out = np.empty((n, nsamp))
    y = phi0.astype(float).copy()
    p = dphi0.astype(float).copy()
    phi_out[:, 0] = y
    dphi_out[:, 0] = p
    half = 0.5 * dt
    sixth = dt / 6.0
    j = 1
    for s in range(1, nsteps + 1):
        k1y = p
        k1p = _duffing_acc(y, K)
        k2y = p + half * k1p
        k2p = _duffing_acc(y + half * k1y, K)
        k3y = p + half * k2p
        k3p = _duffing_acc(y + half * k2y, K)
        k4y = p + dt * k3p
        k4p = _duffing_acc(y + dt * k3y, K)
        y = y + sixth * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        p = p + sixth * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        if s % stride == 0:
            phi_out[:, j] = y
            dphi_out[:, j] = p
            j += 1
    return phi_out, dphi_out


def _rk4_duffing_loop(phi0, dphi0, K, dt, nsteps, stride):
    nsamp = nsteps // stride + 1
    n = phi0.shape[0]
    phi_out = np.empty((n, nsamp))
    dphi_out = np.empty((n, nsamp))
    for i in range(n):
        y = phi0[i]
        p = dphi0[i]
        k = K[i]
        h = dt[i]
        phi_out[i, 0] = y
        dphi_out[i, 0] = p
        j = 1
        for s in range(1, nsteps + 1):
            k1y = p
            k1p = -2.0 * y * y * y - k * y
            ya = y + 0.5 * h * k1y
            k2y = p + 0.5 * h * k1p
            k2p = -2.0 * ya * ya * ya - k * ya
            yb = y + 0.5 * h * k2y
            k3y = p + 0.5 * h * k2p
            k3p = -2.0 * yb * yb * yb - k * yb
            yc = y + h * k3y
            k4y = p + h * k3p
            k4p = -2.0 * yc * yc * yc - k * yc
            y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            if s % stride == 0:
                phi_out[i, j] = y
                dphi_out[i, j] = p
                j += 1
    return phi_out, dphi_out


def yoshida8_duffing_numpy(phi0, dphi0, K, dt, nsteps, stride, weights):
    nsamp = nsteps // stride + 1
    n = phi0.shape[0]
    phi_out = np.empty((n, nsamp))
    dphi_out = np.empty((n, nsamp))
    y = phi0.astype(float).copy()
    p = dphi0.astype(float).copy()
    phi_out[:, 0] = y
    dphi_out[:, 0] = p
    j = 1
    for s in range(1, nsteps + 1):
        for w in weights:
            h = w * dt
            p = p + 0.5 * h * _duffing_acc(y, K)
            y = y + h * p
            p = p + 0.5 * h * _duffing_acc(y, K)
        if s % stride == 0:
            phi_out[:, j] = y
            dphi_out[:, j] = p
            j += 1
    return phi_out, dphi_out


def _yoshida8_duffing_loop(phi0, dphi0, K, dt, nsteps, stride, weights):
    nsamp = nsteps // stride + 1
    n = phi0.shape[0]
    phi_out = np.empty((n, nsamp))
    dphi_out = np.empty((n, nsamp))
    nw = weights.shape[0]
    for i in range(n):
        y = phi0[i]
        p = dphi0[i]
        k = K[i]
        phi_out[i, 0] = y
        dphi_out[i, 0] = p
        j = 1
        for s in range(1, nsteps + 1):
            for q in range(nw):
                h = weights[q] * dt[i]
                p += 0.5 * h * (-2.0 * y * y * y - k * y)
                y += h * p
                p += 0.5 * h * (-2.0 * y * y * y - k * y)
            if s % stride == 0:
                phi_out[i, j] = y
                dphi_out[i, j] = p
                j += 1
    return phi_out, dphi_out


if NUMBA_AVAILABLE:
    taylor_mul_numba = numba.njit(cache=True)(_taylor_mul_py)
    rk4_duffing_numba = numba.njit(cache=True)(_rk4_duffing_loop)
    yoshida8_duffing_numba = numba.njit(cache=True)(_yoshida8_duffing_loop)
else:  # pragma: no cover
    taylor_mul_numba = taylor_mul_numpy
    rk4_duffing_numba = rk4_duffing_numpy
    yoshida8_duffing_numba = yoshida8_duffing_numpy

if USE_NUMBA:
    taylor_mul = taylor_mul_numba
    _rk4 = rk4_duffing_numba
    _yoshida8 = yoshida8_duffing_numba
else:
    taylor_mul = taylor_mul_numpy
    _rk4 = rk4_duffing_numpy
    _yoshida8 = yoshida8_duffing_numpy


def _prep(phi0, dphi0, K, dt):
    phi0 = np.atleast_1d(np.asarray(phi0, dtype=float))
    n = phi0.shape[0]
    dphi0 = np.broadcast_to(np.asarray(dphi0, dtype=float), (n,)).copy()
    K = np.broadcast_to(np.asarray(K, dtype=float), (n,)).copy()
    dt = np.broadcast_to(np.asarray(dt, dtype=float), (n,)).copy()
    return phi0.copy(), dphi0, K, dt


def rk4_duffing(phi0, dphi0, K, dt, nsteps: int, stride: int = 1):
    """Classical RK4 for ``phi'' = -2 phi^3 - K phi``; arrays of shape (batch, samples)."""
    return _rk4(*_prep(phi0, dphi0, K, dt), int(nsteps), int(stride))


def yoshida8_duffing(phi0, dphi0, K, dt, nsteps: int, stride: int = 1):
    """8th-order symplectic composition of Stoermer-Verlet for the same ODE."""
    return _yoshida8(*_prep(phi0, dphi0, K, dt), int(nsteps), int(stride), YOSHIDA8_STAGES)
