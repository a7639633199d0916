"""Physical parameters, jets, gridded fields and the PDE residuals.

The system, for stream function ``psi``, transverse velocity ``v`` and density
perturbation ``rho`` on the vertical (x, z) plane::

    Lap(psi)_t - g rho_x - f v_z = psi_x Lap(psi)_z - psi_z Lap(psi)_x
    v_t + f psi_z               = psi_x v_z - psi_z v_x
    rho_t + (N^2/g) psi_x       = psi_x rho_z - psi_z rho_x
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import taylor as tl
from .errors import CatalogMismatchError, JetError, StencilError

FIELDS = ("psi", "v", "rho")
VARS = "txz"
JET_ORDER = 3
JET_BASIS = tl.basis(3, JET_ORDER)
MULTI_INDICES: list[tuple[int, int, int]] = list(JET_BASIS.monomials)


@dataclass(frozen=True)
class PhysicalParams:
    """Coriolis parameter ``f``, buoyancy frequency ``N`` and gravity ``g`` (SI units)."""

    f: float
    N: float
    g: float

    def __post_init__(self):
        if not (np.isfinite(self.f) and np.isfinite(self.N) and np.isfinite(self.g)):
            raise ValueError("parameters must be finite")
        if self.N <= 0:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.f < 0:
            raise ValueError(f"f must be non-negative, got {self.f}")

    @property
    def alpha(self) -> float:
        return self.f**2 - self.N**2

    @property
    def f_zero(self) -> bool:
        return self.f == 0.0

    def require_rotating(self) -> None:
        if self.f_zero:
            raise CatalogMismatchError("operation requires f != 0")

    def require_f_zero(self) -> None:
        if not self.f_zero:
            raise CatalogMismatchError("operation requires f = 0")


def multi_index(key) -> tuple[int, int, int]:
    """``'txx'`` -> ``(1, 2, 0)``; exponent tuples pass through unchanged."""
    if isinstance(key, str):
        if any(ch not in VARS for ch in key):
            raise KeyError(f"bad derivative key {key!r}")
        return (key.count("t"), key.count("x"), key.count("z"))
    key = tuple(int(k) for k in key)
    if len(key) != 3 or min(key) < 0:
        raise KeyError(f"bad multi-index {key!r}")
    return key


def index_name(exps: Sequence[int]) -> str:
    return "t" * exps[0] + "x" * exps[1] + "z" * exps[2]


@dataclass(frozen=True, eq=False)
class Jet:
    """Derivatives of (psi, v, rho) up to total order 3 at a base point.

    Each field is a length-20 array of partial derivatives ordered as
    :data:`MULTI_INDICES`. Missing entries are NaN until :meth:`check` is called.
    """

    base: tuple[float, float, float]
    psi: np.ndarray
    v: np.ndarray
    rho: np.ndarray

    @classmethod
    def zeros(cls, base=(0.0, 0.0, 0.0)) -> Jet:
        n = JET_BASIS.size
        return cls(tuple(float(b) for b in base), np.zeros(n), np.zeros(n), np.zeros(n))

    @classmethod
    def from_entries(cls, base, entries: dict) -> Jet:
        """Build from ``{(field, key): value}``; absent entries are left missing."""
        n = JET_BASIS.size
        arrs = {name: np.full(n, np.nan) for name in FIELDS}
        for (name, key), value in entries.items():
            arrs[name][JET_BASIS.index[multi_index(key)]] = float(value)
        return cls(tuple(float(b) for b in base), arrs["psi"], arrs["v"], arrs["rho"])

    @classmethod
    def from_taylor(cls, base, psi: tl.Taylor, v: tl.Taylor, rho: tl.Taylor) -> Jet:
        out = []
        for series in (psi, v, rho):
            if isinstance(series, tl.Taylor):
                if series.basis is not JET_BASIS:
                    raise JetError("jet Taylor series must use the 3-variable degree-3 basis")
                out.append(series.derivatives())
            else:
                arr = np.zeros(JET_BASIS.size)
                arr[0] = float(series)
                out.append(arr)
        return cls(tuple(float(b) for b in base), *out)

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def __getitem__(self, item) -> float:
        name, key = item
        return float(self.field(name)[JET_BASIS.index[multi_index(key)]])

    def check(self) -> Jet:
        for name in FIELDS:
            arr = self.field(name)
            if arr.shape != (JET_BASIS.size,):
                raise JetError(f"{name}: expected {JET_BASIS.size} entries, got {arr.shape}")
            bad = ~np.isfinite(arr)
            if bad.any():
                missing = [index_name(MULTI_INDICES[i]) or "0" for i in np.flatnonzero(bad)]
                raise JetError(f"{name}: missing or non-finite entries {missing}")
        return self

    def taylor(self, name: str) -> tl.Taylor:
        return tl.Taylor(JET_BASIS, self.field(name) / JET_BASIS.factorial)

    def replace(self, **arrays) -> Jet:
        parts = {name: arrays.get(name, self.field(name)).copy() for name in FIELDS}
        return Jet(self.base, parts["psi"], parts["v"], parts["rho"])


# ---------------------------------------------------------------------------
# residuals written against a derivative getter d(field, key) so they run on
# floats (jets), numpy arrays (grids) and Taylor series (consequences)

Getter = Callable[[str, str], object]


def residual_terms(params: PhysicalParams, d: Getter) -> tuple[list, list, list]:
    """Additive terms of each residual; the residual is the sum of its list."""
    f, g, N2 = params.f, params.g, params.N**2
    px, pz = d("psi", "x"), d("psi", "z")
    r1 = [
        d("psi", "txx"),
        d("psi", "tzz"),
        -g * d("rho", "x"),
        -f * d("v", "z"),
        -px * d("psi", "xxz"),
        -px * d("psi", "zzz"),
        pz * d("psi", "xxx"),
        pz * d("psi", "xzz"),
    ]
    r2 = [d("v", "t"), f * pz, -px * d("v", "z"), pz * d("v", "x")]
    r3 = [d("rho", "t"), (N2 / g) * px, -px * d("rho", "z"), pz * d("rho", "x")]
    return r1, r2, r3


def linearized_terms(params: PhysicalParams, d: Getter, dz: Getter) -> tuple[list, list, list]:
    """Terms of the directional derivative of each residual along jet increment ``dz``."""
    f, g, N2 = params.f, params.g, params.N**2
    px, pz = d("psi", "x"), d("psi", "z")
    qx, qz = dz("psi", "x"), dz("psi", "z")
    lap_z = d("psi", "xxz") + d("psi", "zzz")
    lap_x = d("psi", "xxx") + d("psi", "xzz")
    r1 = [
        dz("psi", "txx"),
        dz("psi", "tzz"),
        -g * dz("rho", "x"),
        -f * dz("v", "z"),
        -qx * lap_z,
        -px * dz("psi", "xxz"),
        -px * dz("psi", "zzz"),
        qz * lap_x,
        pz * dz("psi", "xxx"),
        pz * dz("psi", "xzz"),
    ]
    r2 = [
        dz("v", "t"),
        f * qz,
        -qx * d("v", "z"),
        -px * dz("v", "z"),
        qz * d("v", "x"),
        pz * dz("v", "x"),
    ]
    r3 = [
        dz("rho", "t"),
        (N2 / g) * qx,
        -qx * d("rho", "z"),
        -px * dz("rho", "z"),
        qz * d("rho", "x"),
        pz * dz("rho", "x"),
    ]
    return r1, r2, r3


def _jet_getter(jet: Jet) -> Getter:
    def d(name, key):
        return float(jet.field(name)[JET_BASIS.index[multi_index(key)]])

    return d


def relative(terms) -> float:
    """``|sum| / (1 + max |term|)``."""
    vals = np.array([float(t) for t in terms])
    return float(abs(vals.sum()) / (1.0 + np.abs(vals).max()))


def pde_residual_pointwise(params: PhysicalParams, jet: Jet) -> tuple[float, float, float]:
    jet.check()
    terms = residual_terms(params, _jet_getter(jet))
    return tuple(float(sum(ts)) for ts in terms)


def pde_residual_relative(params: PhysicalParams, jet: Jet) -> tuple[float, float, float]:
    jet.check()
    return tuple(relative(ts) for ts in residual_terms(params, _jet_getter(jet)))


def manifold_defect(params: PhysicalParams, jet: Jet) -> float:
    """Largest relative residual of the system and every consequence inside the jet.

    Eqs. for ``v`` and ``rho`` are first order, so their first and second total
    derivatives are checked as well; the ``psi`` equation is third order.
    """
    jet.check()
    series = {name: jet.taylor(name) for name in FIELDS}

    def d(name, key):
        s = series[name]
        for ch in key:
            s = s.diff(VARS.index(ch))
        return s

    r1, r2, r3 = residual_terms(params, d)
    worst = relative([t.value for t in r1])
    for terms in (r2, r3):
        coefs = np.array([t.derivatives() for t in terms])
        for i, e in enumerate(MULTI_INDICES):
            if sum(e) <= 2:
                worst = max(worst, relative(coefs[:, i]))
    return worst


# ---------------------------------------------------------------------------
# gridded fields


@dataclass(frozen=True)
class GridSpec:
    x0: float
    z0: float
    hx: float
    hz: float
    nx: int
    nz: int
    t0: float
    dt: float
    nt: int

    def __post_init__(self):
        if min(self.hx, self.hz, self.dt) <= 0:
            raise ValueError("grid steps must be positive")
        if min(self.nx, self.nz, self.nt) < 1:
            raise ValueError("grid sizes must be positive")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nt, self.nx, self.nz)

    def axes(self):
        t = self.t0 + self.dt * np.arange(self.nt)
        x = self.x0 + self.hx * np.arange(self.nx)
        z = self.z0 + self.hz * np.arange(self.nz)
        return t, x, z

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def refined(self) -> GridSpec:
        """Same physical box with every step halved."""
        return GridSpec(
            self.x0, self.z0, self.hx / 2, self.hz / 2, 2 * self.nx - 1, 2 * self.nz - 1,
            self.t0, self.dt / 2, 2 * self.nt - 1,
        )


@dataclass(frozen=True, eq=False)
class GridField:
    spec: GridSpec
    psi: np.ndarray
    v: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        for name in FIELDS:
            if getattr(self, name).shape != self.spec.shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {self.spec.shape}")

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def write(self, directory) -> list[Path]:
        """One CSV per time slice plus ``grid.json``; floats at 17 significant digits."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        t, x, z = self.spec.axes()
        X, Z = np.meshgrid(x, z, indexing="ij")
        written = []
        for k in range(self.spec.nt):
            cols = np.column_stack([X.ravel(), Z.ravel(), self.psi[k].ravel(), self.v[k].ravel(), self.rho[k].ravel()])
            lines = ["x,z,psi,v,rho"]
            lines += [",".join(format(val, ".17g") for val in row) for row in cols]
            path = directory / f"slice_{k:04d}.csv"
            atomic_write_text(path, "\n".join(lines) + "\n")
            written.append(path)
        meta = {"grid": asdict(self.spec), "slices": [p.name for p in written], "times": [format(v, ".17g") for v in t]}
        path = directory / "grid.json"
        atomic_write_text(path, json.dumps(meta, indent=2) + "\n")
        written.append(path)
        return written

    @classmethod
    def read(cls, directory) -> GridField:
        directory = Path(directory)
        meta = json.loads((directory / "grid.json").read_text())
        spec = GridSpec(**meta["grid"])
        arrs = {name: np.empty(spec.shape) for name in FIELDS}
        for k, name in enumerate(meta["slices"]):
            data = np.loadtxt(directory / name, delimiter=",", skiprows=1, ndmin=2)
            for j, fname in enumerate(FIELDS):
                arrs[fname][k] = data[:, 2 + j].reshape(spec.nx, spec.nz)
        return cls(spec, arrs["psi"], arrs["v"], arrs["rho"])


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# 2nd-order central stencils for derivatives of order 0..3: (offsets, weights)
_STENCILS = {
    0: (np.array([0]), np.array([1.0])),
    1: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 1, 2]), np.array([-0.5, 1.0, -1.0, 0.5])),
}
STENCIL_HALF_WIDTH = 2


def _fd(arr: np.ndarray, exps, steps, lo, hi) -> np.ndarray:
    """Derivative of ``arr`` with exponents ``exps`` on the box ``lo <= idx < hi``."""
    out = 0.0
    scale = 1.0
    for e, h in zip(exps, steps):
        scale *= h**e
    offs = [_STENCILS[e] for e in exps]
    for i0, w0 in zip(*offs[0]):
        for i1, w1 in zip(*offs[1]):
            for i2, w2 in zip(*offs[2]):
                out = out + (w0 * w1 * w2) * arr[
                    lo[0] + i0 : hi[0] + i0, lo[1] + i1 : hi[1] + i1, lo[2] + i2 : hi[2] + i2
                ]
    return out / scale


def fd_jet_from_grid(field: GridField, index: tuple[int, int, int]) -> Jet:
    """Central-difference estimates of every order <= 3 derivative at a grid node."""
    spec = field.spec
    idx = tuple(int(i) for i in index)
    for i, n, axis in zip(idx, spec.shape, VARS):
        if i < STENCIL_HALF_WIDTH or i > n - 1 - STENCIL_HALF_WIDTH:
            raise StencilError(f"index {i} on axis {axis} is within {STENCIL_HALF_WIDTH} of the boundary (n={n})")
    steps = (spec.dt, spec.hx, spec.hz)
    lo = idx
    hi = tuple(i + 1 for i in idx)
    arrs = {}
    for name in FIELDS:
        arr = field.field(name)
        arrs[name] = np.array([_fd(arr, e, steps, lo, hi)[0, 0, 0] for e in MULTI_INDICES])
    t, x, z = spec.axes()
    return Jet((t[idx[0]], x[idx[1]], z[idx[2]]), arrs["psi"], arrs["v"], arrs["rho"])


@dataclass(frozen=True)
class ResidualNorms:
    max_abs: tuple[float, float, float]
    rms_abs: tuple[float, float, float]
    max_rel: tuple[float, float, float]
    points: int

    @property
    def max_overall(self) -> float:
        return max(self.max_abs)

    def as_dict(self) -> dict:
        return asdict(self)


def residual_fields(params: PhysicalParams, field: GridField):
    """Residual arrays and relative residual arrays over the stencil interior."""
    spec = field.spec
    w = STENCIL_HALF_WIDTH
    if min(spec.shape) < 2 * w + 1:
        raise StencilError(f"grid {spec.shape} too small for width-{w} stencils")
    lo = (w, w, w)
    hi = tuple(n - w for n in spec.shape)
    steps = (spec.dt, spec.hx, spec.hz)
    cache = {}

    def d(name, key):
        k = (name, key)
        if k not in cache:
            cache[k] = _fd(field.field(name), multi_index(key), steps, lo, hi)
        return cache[k]

    out, rel = [], []
    for terms in residual_terms(params, d):
        stacked = np.array([np.broadcast_to(t, cache[("psi", "x")].shape) for t in terms])
        s = stacked.sum(axis=0)
        out.append(s)
        rel.append(np.abs(s) / (1.0 + np.abs(stacked).max(axis=0)))
    return out, rel


def residual_norms(params: PhysicalParams, field: GridField) -> ResidualNorms:
    return _norms(*residual_fields(params, field))


def _norms(res, rel) -> ResidualNorms:
    return ResidualNorms(
        max_abs=tuple(float(np.abs(r).max()) for r in res),
        rms_abs=tuple(float(np.sqrt(np.mean(r**2))) for r in res),
        max_rel=tuple(float(r.max()) for r in rel),
        points=int(res[0].size),
    )


def refinement_norms(params: PhysicalParams, coarse: GridField, fine: GridField) -> tuple[ResidualNorms, ResidualNorms]:
    """Residual norms of both grids restricted to the coarse interior nodes.

    ``fine`` must sample the same box at half the steps. Comparing on shared
    nodes keeps the observed order free of the shift in the stencil interior.
    """
    if fine.spec != coarse.spec.refined():
        raise ValueError("fine grid must be coarse.spec.refined()")
    res_c, rel_c = residual_fields(params, coarse)
    res_f, rel_f = residual_fields(params, fine)
    w = STENCIL_HALF_WIDTH
    # coarse interior node k sits at fine index 2(k + w), i.e. interior offset w + 2k
    sl = tuple(slice(w, w + 2 * n - 1, 2) for n in res_c[0].shape)
    return _norms(res_c, rel_c), _norms([r[sl] for r in res_f], [r[sl] for r in rel_f])


def convergence_order(coarse: ResidualNorms, fine: ResidualNorms, floor: float = 1e-13) -> dict:
    """Observed order log2(coarse/fine) per equation (None below ``floor``) and overall."""
    per = []
    for a, b in zip(coarse.max_abs, fine.max_abs):
        per.append(None if a < floor or b < floor else float(np.log2(a / b)))
    overall = None
    if coarse.max_overall >= floor and fine.max_overall >= floor:
        overall = float(np.log2(coarse.max_overall / fine.max_overall))
    return {"per_equation": per, "overall": overall}


def observed_order(params: PhysicalParams, solution, spec: GridSpec, floor: float = 1e-13) -> dict:
    """Sample ``solution`` on ``spec`` and its refinement and report the observed order."""
    nc, nf = refinement_norms(params, solution.sample(spec), solution.sample(spec.refined()))
    out = convergence_order(nc, nf, floor)
    out["coarse"] = nc.as_dict()
    out["fine"] = nf.as_dict()
    return out


# ---------------------------------------------------------------------------
# evaluatable solutions


class FieldSolution:
    """An evaluatable triple ``(psi, v, rho)(t, x, z)``.

    Subclasses implement :meth:`fields` using only arithmetic and the
    dispatching helpers in :mod:`boussym.taylor`, so the same code evaluates
    on numpy arrays and on Taylor series (which gives exact jets).
    """

    params: PhysicalParams

    def fields(self, t, x, z):
        raise NotImplementedError

    def __call__(self, t, x, z):
        t, x, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, z)))
        psi, v, rho = self.fields(t, x, z)
        return tuple(np.broadcast_to(np.asarray(a, dtype=float), t.shape).copy() for a in (psi, v, rho))

    def jet(self, t: float, x: float, z: float) -> Jet:
        T, X, Z = tl.variables((t, x, z), JET_ORDER)
        psi, v, rho = self.fields(T, X, Z)
        return Jet.from_taylor((t, x, z), *(tl.lift(a, JET_BASIS) for a in (psi, v, rho)))

    def grad_psi(self, t, x, z):
        """``(psi_x, psi_z)``; generic version evaluates a first-order jet per point."""
        t, x, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, z)))
        gx = np.empty(t.shape)
        gz = np.empty(t.shape)
        for i in np.ndindex(t.shape):
            T, X, Z = tl.variables((t[i], x[i], z[i]), 1)
            psi = tl.lift(self.fields(T, X, Z)[0], T.basis)
            gx[i], gz[i] = psi.c[2], psi.c[3]
        return gx, gz

    def sample(self, spec: GridSpec) -> GridField:
        T, X, Z = spec.mesh()
        psi, v, rho = self(T, X, Z)
        return GridField(spec, psi, v, rho)
