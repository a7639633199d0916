"""Finite one-parameter group actions obtained by solving the Lie equations.

Every flow splits into a base map on (t, x, z), which never depends on the
dependent variables here, and a fiber map on (v, rho, psi). A solution is
transformed by pulling each target point back through the inverse base map,
evaluating the original solution there and pushing the values forward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import taylor as tl
from .errors import CatalogMismatchError
from .model import FieldSolution, PhysicalParams
from .timefuncs import TimeFunction

FLOWH_STEPS = 1024


class Flow:
    name: str
    branch: str = "any"  # "rotating", "f_zero" or "any"
    closed_form = True

    def base(self, eps, t, x, z):
        return t, x, z

    def fiber(self, eps, t, x, z, v, rho, psi):
        return v, rho, psi

    def __call__(self, eps, t, x, z, v, rho, psi):
        return (*self.base(eps, t, x, z), *self.fiber(eps, t, x, z, v, rho, psi))


@dataclass(frozen=True)
class Rotation(Flow):
    params: PhysicalParams
    name = "rotation"
    branch = "rotating"

    def base(self, eps, t, x, z):
        c, s = math.cos(eps), math.sin(eps)
        return t, x * c + z * s, z * c - x * s

    def fiber(self, eps, t, x, z, v, rho, psi):
        f, g, al = self.params.f, self.params.g, self.params.alpha
        c, s = math.cos(eps), math.sin(eps)
        rho_new = rho * c + (f / g) * v * s + (al / g) * x * s
        v_new = v * c - (g / f) * rho * s - (al / f) * z * s
        return v_new, rho_new, psi


@dataclass(frozen=True)
class Dilation7(Flow):
    name = "dilation7"

    def base(self, eps, t, x, z):
        e = math.exp(eps)
        return t, e * x, e * z

    def fiber(self, eps, t, x, z, v, rho, psi):
        e = math.exp(eps)
        return e * v, e * rho, e * e * psi


@dataclass(frozen=True)
class Dilation8(Flow):
    params: PhysicalParams
    name = "dilation8"

    def base(self, eps, t, x, z):
        e = math.exp(eps)
        return e * t, e * e * x, e * e * z

    def fiber(self, eps, t, x, z, v, rho, psi):
        f, g, N2 = self.params.f, self.params.g, self.params.N**2
        q = math.expm1(2.0 * eps)
        return v - f * x * q, rho + (N2 / g) * z * q, math.exp(3.0 * eps) * psi


@dataclass(frozen=True)
class ShiftV(Flow):
    name = "shiftV"

    def fiber(self, eps, t, x, z, v, rho, psi):
        return v + eps, rho, psi


@dataclass(frozen=True)
class ShiftRho(Flow):
    name = "shiftRho"

    def fiber(self, eps, t, x, z, v, rho, psi):
        return v, rho + eps, psi


@dataclass(frozen=True)
class ShiftPsi(Flow):
    a: TimeFunction
    name = "shiftPsi"

    def fiber(self, eps, t, x, z, v, rho, psi):
        return v, rho, psi + eps * self.a(t)


@dataclass(frozen=True)
class GenTransX(Flow):
    params: PhysicalParams
    b: TimeFunction
    name = "genTransX"

    def base(self, eps, t, x, z):
        return t, x + eps * self.b(t), z

    def fiber(self, eps, t, x, z, v, rho, psi):
        bt = self.b(t)
        return v - eps * self.params.f * bt, rho, psi + eps * self.b.derivative()(t) * z


@dataclass(frozen=True)
class GenTransZ(Flow):
    params: PhysicalParams
    c: TimeFunction
    name = "genTransZ"

    def base(self, eps, t, x, z):
        return t, x, z + eps * self.c(t)

    def fiber(self, eps, t, x, z, v, rho, psi):
        N2, g = self.params.N**2, self.params.g
        return v, rho + eps * (N2 / g) * self.c(t), psi - eps * self.c.derivative()(t) * x


@dataclass(frozen=True)
class TimeShift(Flow):
    name = "timeShift"

    def base(self, eps, t, x, z):
        return t + eps, x, z


@dataclass(frozen=True)
class FlowH(Flow):
    """Flow of ``h(v, g rho - N^2 z) d/dv``; the second argument is invariant along it."""

    params: PhysicalParams
    h: Callable = field(repr=False)
    steps: int = FLOWH_STEPS
    name = "flowH"
    branch = "f_zero"
    closed_form = False

    def fiber(self, eps, t, x, z, v, rho, psi):
        s = self.params.g * rho - self.params.N**2 * z
        hh = eps / self.steps
        h = self.h
        for _ in range(self.steps):
            k1 = h(v, s)
            k2 = h(v + 0.5 * hh * k1, s)
            k3 = h(v + 0.5 * hh * k2, s)
            k4 = h(v + hh * k3, s)
            v = v + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return v, rho, psi


FLOW_NAMES = ("rotation", "dilation7", "dilation8", "shiftV", "shiftRho", "shiftPsi", "genTransX", "genTransZ", "timeShift", "flowH")


def make_flow(name: str, params: PhysicalParams, *, a=None, b=None, c=None, h=None) -> Flow:
    builders = {
        "rotation": lambda: Rotation(params),
        "dilation7": lambda: Dilation7(),
        "dilation8": lambda: Dilation8(params),
        "shiftV": lambda: ShiftV(),
        "shiftRho": lambda: ShiftRho(),
        "shiftPsi": lambda: ShiftPsi(_need(a, "a")),
        "genTransX": lambda: GenTransX(params, _need(b, "b")),
        "genTransZ": lambda: GenTransZ(params, _need(c, "c")),
        "timeShift": lambda: TimeShift(),
        "flowH": lambda: FlowH(params, _need(h, "h")),
    }
    if name not in builders:
        raise ValueError(f"unknown transform {name!r}; choose from {FLOW_NAMES}")
    flow = builders[name]()
    _check_branch(flow, params)
    return flow


def _need(value, label):
    if value is None:
        raise ValueError(f"transform needs the function {label}")
    return value


def _check_branch(flow: Flow, params: PhysicalParams) -> None:
    if flow.branch == "rotating" and params.f_zero:
        raise CatalogMismatchError(f"{flow.name} belongs to the f != 0 algebra")
    if flow.branch == "f_zero" and not params.f_zero:
        raise CatalogMismatchError(f"{flow.name} belongs to the f = 0 algebra")


class TransformedSolution(FieldSolution):
    def __init__(self, flow: Flow, eps: float, sol: FieldSolution):
        self.flow = flow
        self.eps = float(eps)
        self.source = sol
        self.params = sol.params

    def fields(self, t, x, z):
        t0, x0, z0 = self.flow.base(-self.eps, t, x, z)
        psi, v, rho = self.source.fields(t0, x0, z0)
        v1, rho1, psi1 = self.flow.fiber(self.eps, t0, x0, z0, v, rho, psi)
        return psi1, v1, rho1


def finite_transform(name: str, eps: float, sol: FieldSolution, params: PhysicalParams, **functions) -> FieldSolution:
    """Image of ``sol`` under the group element ``exp(eps X)`` of the named flow."""
    if not math.isfinite(eps):
        raise ValueError("eps must be finite")
    flow = make_flow(name, params, **functions)
    return TransformedSolution(flow, eps, sol)


def act_on_point(flow: Flow, eps: float, point):
    """Transform a single ``(t, x, z, v, rho, psi)`` point."""
    return tuple(float(c) if not isinstance(c, tl.Taylor) else c for c in flow(eps, *point))
