"""Lie point generators of the system and their numerical verification.

Generators are taken as data. Each one is a callable returning the six
coefficients ``(xi_t, xi_x, xi_z, eta_v, eta_rho, eta_psi)`` at a point
``(t, x, z, v, rho, psi)``. Coefficients are written with plain arithmetic
and :mod:`boussym.taylor` helpers, so evaluating them on Taylor series gives
exact partial derivatives (for brackets) and exact total derivatives along a
jet (for prolongation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import taylor as tl
from .errors import OffManifoldError
from .model import (
    FIELDS,
    JET_BASIS,
    MULTI_INDICES,
    VARS,
    Jet,
    PhysicalParams,
    linearized_terms,
    manifold_defect,
    multi_index,
    residual_terms,
)
from .timefuncs import TimeFunction

COEFFICIENT_NAMES = ("xi_t", "xi_x", "xi_z", "eta_v", "eta_rho", "eta_psi")
# position of each dependent variable's eta in the coefficient tuple
_ETA = {"v": 3, "rho": 4, "psi": 5}

DETERMINING_TOL = 1e-9
MANIFOLD_TOL = 1e-10


@dataclass(frozen=True)
class Generator:
    name: str
    coefficients: Callable = field(repr=False)
    description: str = ""

    def __call__(self, t, x, z, v, rho, psi):
        return self.coefficients(t, x, z, v, rho, psi)

    def evaluate(self, point) -> np.ndarray:
        return np.array([float(c) for c in self(*point)])

    def with_partials(self, point) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient values and the 6x6 matrix ``d coef_i / d arg_j`` at ``point``."""
        args = tl.variables(point, 1)
        coefs = [tl.lift(c, args[0].basis) for c in self(*args)]
        values = np.array([c.value for c in coefs])
        jac = np.array([c.gradient() for c in coefs])
        return values, jac


def _zero(*_):
    return 0.0


def catalog(params: PhysicalParams, a: TimeFunction, b: TimeFunction, c: TimeFunction) -> list[Generator]:
    """The nine generators admitted when f != 0."""
    params.require_rotating()
    f, g, N2, al = params.f, params.g, params.N**2, params.alpha
    db, dc = b.derivative(), c.derivative()
    return [
        Generator("X1", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 1.0, 0.0, 0.0), "d/dv"),
        Generator("X2", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 0.0, 1.0, 0.0), "d/drho"),
        Generator("X3", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 0.0, 0.0, a(t)), "a(t) d/dpsi"),
        Generator("X4", lambda t, x, z, v, r, p: (1.0, 0.0, 0.0, 0.0, 0.0, 0.0), "d/dt"),
        Generator(
            "X5",
            lambda t, x, z, v, r, p: (0.0, b(t), 0.0, -f * b(t), 0.0, db(t) * z),
            "b(t)[d/dx - f d/dv] + b'(t) z d/dpsi",
        ),
        Generator(
            "X6",
            lambda t, x, z, v, r, p: (0.0, 0.0, c(t), 0.0, (N2 / g) * c(t), -dc(t) * x),
            "c(t)[d/dz + (N^2/g) d/drho] - c'(t) x d/dpsi",
        ),
        Generator("X7", lambda t, x, z, v, r, p: (0.0, x, z, v, r, 2.0 * p), "dilation"),
        Generator(
            "X8",
            lambda t, x, z, v, r, p: (t, 2.0 * x, 2.0 * z, -2.0 * f * x, 2.0 * (N2 / g) * z, 3.0 * p),
            "time dilation",
        ),
        Generator(
            "X9",
            lambda t, x, z, v, r, p: (0.0, z, -x, -(g * r + al * z) / f, (f * v + al * x) / g, 0.0),
            "rotation",
        ),
    ]


def catalog_f0(params: PhysicalParams, a: TimeFunction, b: TimeFunction, c: TimeFunction, h) -> list[Generator]:
    """The eight generators admitted when f = 0; ``h(v, s)`` with ``s = g rho - N^2 z``."""
    params.require_f_zero()
    g, N2 = params.g, params.N**2
    db, dc = b.derivative(), c.derivative()
    return [
        Generator("X1", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, h(v, g * r - N2 * z), 0.0, 0.0), "h(v, g rho - N^2 z) d/dv"),
        Generator("X2", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 0.0, 1.0, 0.0), "d/drho"),
        Generator("X3", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 0.0, 0.0, a(t)), "a(t) d/dpsi"),
        Generator("X4", lambda t, x, z, v, r, p: (1.0, 0.0, 0.0, 0.0, 0.0, 0.0), "d/dt"),
        Generator("X5", lambda t, x, z, v, r, p: (0.0, b(t), 0.0, 0.0, 0.0, db(t) * z), "b(t) d/dx + b'(t) z d/dpsi"),
        Generator(
            "X6",
            lambda t, x, z, v, r, p: (0.0, 0.0, c(t), 0.0, (N2 / g) * c(t), -dc(t) * x),
            "c(t)[d/dz + (N^2/g) d/drho] - c'(t) x d/dpsi",
        ),
        Generator("X7", lambda t, x, z, v, r, p: (0.0, x, z, v, r, 2.0 * p), "dilation"),
        Generator(
            "X8",
            lambda t, x, z, v, r, p: (t, 2.0 * x, 2.0 * z, 0.0, 2.0 * (N2 / g) * z, 3.0 * p),
            "time dilation",
        ),
    ]


def x9_prime(params: PhysicalParams) -> Generator:
    """``f X9`` continued to f = 0: ``-(g rho - N^2 z) d/dv``."""
    g, N2 = params.g, params.N**2
    return Generator("X9'", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, -(g * r - N2 * z), 0.0, 0.0), "-(g rho - N^2 z) d/dv")


def mutated_catalog(params: PhysicalParams, a, b, c, h=None) -> list[Generator]:
    """One injected defect per catalog generator.

    Multi-term generators get a single sign flip. Generators whose only
    coefficient is a constant (or an arbitrary function) stay symmetries under
    any rescaling, so the constant is promoted to a base variable instead.
    """
    f, g, N2, al = params.f, params.g, params.N**2, params.alpha
    db, dc = b.derivative(), c.derivative()
    common = [
        Generator("X2", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 0.0, t, 0.0), "d/drho -> t d/drho"),
        Generator("X3", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, 0.0, 0.0, a(t) * x), "a(t) d/dpsi -> a(t) x d/dpsi"),
        Generator("X4", lambda t, x, z, v, r, p: (t, 0.0, 0.0, 0.0, 0.0, 0.0), "d/dt -> t d/dt"),
        Generator(
            "X6",
            lambda t, x, z, v, r, p: (0.0, 0.0, c(t), 0.0, (N2 / g) * c(t), dc(t) * x),
            "sign of c'(t) x d/dpsi flipped",
        ),
        Generator("X7", lambda t, x, z, v, r, p: (0.0, x, z, v, -r, 2.0 * p), "sign of rho d/drho flipped"),
    ]
    if params.f_zero:
        specific = [
            Generator("X1", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, t * h(v, g * r - N2 * z), 0.0, 0.0), "h -> t h"),
            Generator("X5", lambda t, x, z, v, r, p: (0.0, b(t), 0.0, 0.0, 0.0, -db(t) * z), "sign of b'(t) z d/dpsi flipped"),
            Generator(
                "X8",
                lambda t, x, z, v, r, p: (t, 2.0 * x, 2.0 * z, 0.0, -2.0 * (N2 / g) * z, 3.0 * p),
                "sign of (N^2/g) z d/drho flipped",
            ),
        ]
    else:
        specific = [
            Generator("X1", lambda t, x, z, v, r, p: (0.0, 0.0, 0.0, t, 0.0, 0.0), "d/dv -> t d/dv"),
            Generator("X5", lambda t, x, z, v, r, p: (0.0, b(t), 0.0, f * b(t), 0.0, db(t) * z), "sign of f d/dv flipped"),
            Generator(
                "X8",
                lambda t, x, z, v, r, p: (t, 2.0 * x, 2.0 * z, 2.0 * f * x, 2.0 * (N2 / g) * z, 3.0 * p),
                "sign of f x d/dv flipped",
            ),
            Generator(
                "X9",
                lambda t, x, z, v, r, p: (0.0, z, -x, -(g * r - al * z) / f, (f * v - al * x) / g, 0.0),
                "sign of alpha flipped",
            ),
        ]
    out = common + specific
    return sorted(out, key=lambda gen: int(gen.name[1:]))


# ---------------------------------------------------------------------------
# prolongation


@dataclass(frozen=True, eq=False)
class ProlongedCoefficients:
    """Prolonged coefficients zeta per field, ordered like :data:`MULTI_INDICES`."""

    psi: np.ndarray
    v: np.ndarray
    rho: np.ndarray

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def __getitem__(self, item) -> float:
        name, key = item
        return float(self.field(name)[JET_BASIS.index[multi_index(key)]])


def _shifted_index():
    # position of J + e_k in the jet for each J (or -1 beyond third order)
    table = np.full((JET_BASIS.size, 3), -1, dtype=np.int64)
    for i, e in enumerate(MULTI_INDICES):
        for k in range(3):
            up = list(e)
            up[k] += 1
            table[i, k] = JET_BASIS.index.get(tuple(up), -1)
    return table


_UP = _shifted_index()


def prolong(gen: Generator, jet: Jet) -> ProlongedCoefficients:
    """Third-order prolongation of ``gen`` at ``jet``.

    Uses ``zeta_J = D_J Q + sum_k xi^k u_{J,k}`` with characteristic
    ``Q = eta - sum_k xi^k u_k``. Total derivatives come from Taylor
    arithmetic along the jet; fourth-order jet entries cancel identically in
    this expression and are taken as zero.
    """
    jet.check()
    T, X, Z = tl.variables(jet.base, 3)
    series = {name: jet.taylor(name) for name in FIELDS}
    coefs = [tl.lift(cf, JET_BASIS) for cf in gen(T, X, Z, series["v"], series["rho"], series["psi"])]
    xi = coefs[:3]
    xi0 = np.array([c.value for c in xi])
    out = {}
    for name in FIELDS:
        u = series[name]
        Q = coefs[_ETA[name]]
        for k in range(3):
            if xi[k].c.any():
                Q = Q - xi[k] * u.diff(k)
        zeta = Q.derivatives()
        vals = jet.field(name)
        upper = np.where(_UP >= 0, vals[np.maximum(_UP, 0)], 0.0)
        zeta = zeta + upper @ xi0
        zeta[0] = coefs[_ETA[name]].value
        out[name] = zeta
    return ProlongedCoefficients(out["psi"], out["v"], out["rho"])


# ---------------------------------------------------------------------------
# jets on the solution manifold

# principal derivatives: every t-derivative of v and rho, and psi_txx
_PRINCIPAL_VR = [i for i, e in enumerate(MULTI_INDICES) if e[0] >= 1]
_PSI_TXX = JET_BASIS.index[(1, 2, 0)]


def _solve_consequences(params: PhysicalParams, base, psi, v, rho) -> Jet:
    f, g, N2 = params.f, params.g, params.N**2
    ix = JET_BASIS.index

    def at(arr, key):
        return arr[ix[multi_index(key)]]

    psi = psi.copy()
    psi[_PSI_TXX] = (
        -at(psi, "tzz")
        + g * at(rho, "x")
        + f * at(v, "z")
        + at(psi, "x") * (at(psi, "xxz") + at(psi, "zzz"))
        - at(psi, "z") * (at(psi, "xxx") + at(psi, "xzz"))
    )
    v = v.copy()
    rho = rho.copy()
    v[_PRINCIPAL_VR] = 0.0
    rho[_PRINCIPAL_VR] = 0.0
    P = tl.Taylor(JET_BASIS, psi / JET_BASIS.factorial)
    px, pz = P.diff(1), P.diff(2)
    # each pass fixes the t-derivatives one order higher in t
    for _ in range(JET_BASIS.degree):
        V = tl.Taylor(JET_BASIS, v / JET_BASIS.factorial)
        R = tl.Taylor(JET_BASIS, rho / JET_BASIS.factorial)
        Fv = (-f) * pz + px * V.diff(2) - pz * V.diff(1)
        Fr = (-N2 / g) * px + px * R.diff(2) - pz * R.diff(1)
        dv, dr = Fv.derivatives(), Fr.derivatives()
        for i, e in enumerate(MULTI_INDICES):
            j = _UP[i, 0]
            if j >= 0:
                v[j] = dv[i]
                rho[j] = dr[i]
    return Jet(tuple(float(b) for b in base), psi, v, rho)


def sample_manifold_jet(params: PhysicalParams, seed, scale: float = 1.0) -> Jet:
    """Random jet satisfying the system and all its consequences through order 3.

    Parametric entries (and the base point) are uniform on ``[-scale, scale]``
    from a PCG64 stream seeded with ``seed``; principal derivatives
    (``v_t``, ``rho_t``, ``psi_txx`` and the t-derivatives of ``v_t``, ``rho_t``)
    are then solved for.
    """
    if scale < 0:
        raise ValueError("scale must be non-negative")
    rng = np.random.default_rng(seed)
    base = rng.uniform(-scale, scale, 3)
    n = JET_BASIS.size
    psi, v, rho = (rng.uniform(-scale, scale, n) for _ in range(3))
    return _solve_consequences(params, base, psi, v, rho)


def manifold_jets(params: PhysicalParams, seed, count: int, scale: float = 1.0) -> list[Jet]:
    """``count`` independent jets from child streams of one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [sample_manifold_jet(params, np.random.default_rng(s), scale) for s in children]


# ---------------------------------------------------------------------------
# determining equations


def determining_terms(gen: Generator, params: PhysicalParams, jet: Jet) -> tuple[list, list, list]:
    """Additive terms of the prolonged generator applied to each residual.

    The residuals carry no explicit dependence on (t, x, z, v, rho, psi), so
    only prolonged coefficients of derivatives contribute.
    """
    zeta = prolong(gen, jet)
    ix = JET_BASIS.index

    def d(name, key):
        return float(jet.field(name)[ix[multi_index(key)]])

    def dz(name, key):
        return float(zeta.field(name)[ix[multi_index(key)]])

    return linearized_terms(params, d, dz)


def determining_residual(gen: Generator, params: PhysicalParams, jet: Jet, check_manifold: bool = True):
    """Relative determining residuals ``|sum| / (1 + max |term|)`` for the three equations."""
    if check_manifold:
        defect = manifold_defect(params, jet)
        if defect > MANIFOLD_TOL:
            raise OffManifoldError(f"jet is off the solution manifold (defect {defect:.3e})")
    out = []
    for terms in determining_terms(gen, params, jet):
        vals = np.array(terms, dtype=float)
        out.append(float(abs(vals.sum()) / (1.0 + np.abs(vals).max())))
    return tuple(out)


@dataclass
class MembershipReport:
    generator: str
    description: str
    jet_count: int
    max_residual: tuple[float, float, float]
    threshold: float

    @property
    def passed(self) -> bool:
        return max(self.max_residual) <= self.threshold

    def as_dict(self) -> dict:
        return {
            "generator": self.generator,
            "description": self.description,
            "jet_count": self.jet_count,
            "max_residual": list(self.max_residual),
            "threshold": self.threshold,
            "passed": self.passed,
        }


def verify_generators(generators, params: PhysicalParams, jets, threshold: float = DETERMINING_TOL) -> list[MembershipReport]:
    out = []
    for gen in generators:
        worst = np.zeros(3)
        for jet in jets:
            worst = np.maximum(worst, determining_residual(gen, params, jet, check_manifold=False))
        out.append(MembershipReport(gen.name, gen.description, len(jets), tuple(float(w) for w in worst), threshold))
    return out


# ---------------------------------------------------------------------------
# brackets


def lie_bracket(g1: Generator, g2: Generator, point) -> np.ndarray:
    """Coefficients of ``[g1, g2] = g1(g2) - g2(g1)`` at ``point``."""
    a, Ja = g1.with_partials(point)
    b, Jb = g2.with_partials(point)
    return Jb @ a - Ja @ b


def residual_consequence_terms(params: PhysicalParams, jet: Jet, key: str, equation: int) -> list:
    """Terms of ``D_key`` applied to residual ``equation`` (0, 1, 2) on ``jet``."""
    series = {name: jet.taylor(name) for name in FIELDS}

    def d(name, k):
        s = series[name]
        for ch in k:
            s = s.diff(VARS.index(ch))
        return s

    terms = residual_terms(params, d)[equation]
    e = multi_index(key)
    return [tl.lift(t, JET_BASIS).derivative_value(e) for t in terms]
