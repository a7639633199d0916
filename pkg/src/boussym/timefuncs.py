"""Closed-form time functions a(t), b(t), c(t) and two-argument functions h(v, s).

The time-function family (polynomials up to degree 4, ``A sin(w t + p)``,
``A exp(l t)``) is closed under differentiation, so exact derivatives of any
order are available and Taylor inputs are handled by composition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import taylor as tl


class TimeFunction:
    kind: str

    def derivative(self, k: int = 1) -> TimeFunction:
        raise NotImplementedError

    def _eval(self, t):
        raise NotImplementedError

    def __call__(self, t):
        if isinstance(t, tl.Taylor):
            t0 = t.value
            return t.compose([float(self.derivative(k)._eval(t0)) for k in range(t.basis.degree + 1)])
        return self._eval(t)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def check_derivatives(self, points, h: float = 1e-4, order: int = 3) -> float:
        """Worst relative mismatch between exact derivatives and central differences."""
        worst = 0.0
        for t in np.atleast_1d(points):
            for k in range(1, order + 1):
                lower = self.derivative(k - 1)
                fd = (lower._eval(t + h) - lower._eval(t - h)) / (2 * h)
                exact = self.derivative(k)._eval(t)
                worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
        return float(worst)


@dataclass(frozen=True)
class Polynomial(TimeFunction):
    coefs: tuple[float, ...]  # c0 + c1 t + ... ; degree <= 4
    kind = "poly"

    def __post_init__(self):
        if len(self.coefs) > 5:
            raise ValueError("polynomial degree is limited to 4")
        object.__setattr__(self, "coefs", tuple(float(c) for c in self.coefs))

    def derivative(self, k: int = 1) -> Polynomial:
        c = list(self.coefs)
        for _ in range(k):
            c = [i * c[i] for i in range(1, len(c))]
        return Polynomial(tuple(c) or (0.0,))

    def _eval(self, t):
        out = 0.0 * np.asarray(t, dtype=float)
        for c in reversed(self.coefs):
            out = out * t + c
        return out

    def to_dict(self):
        return {"kind": "poly", "coefs": list(self.coefs)}


@dataclass(frozen=True)
class Sinusoid(TimeFunction):
    amplitude: float
    omega: float
    phase: float = 0.0
    kind = "sin"

    def derivative(self, k: int = 1) -> Sinusoid:
        # d/dt A sin(w t + p) = A w sin(w t + p + pi/2)
        return Sinusoid(self.amplitude * self.omega**k, self.omega, self.phase + k * np.pi / 2)

    def _eval(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase)

    def to_dict(self):
        return {"kind": "sin", "amplitude": self.amplitude, "omega": self.omega, "phase": self.phase}


@dataclass(frozen=True)
class Exponential(TimeFunction):
    amplitude: float
    rate: float
    kind = "exp"

    def derivative(self, k: int = 1) -> Exponential:
        return Exponential(self.amplitude * self.rate**k, self.rate)

    def _eval(self, t):
        return self.amplitude * np.exp(self.rate * np.asarray(t, dtype=float))

    def to_dict(self):
        return {"kind": "exp", "amplitude": self.amplitude, "rate": self.rate}


def time_function(spec: dict) -> TimeFunction:
    kind = spec.get("kind")
    if kind == "poly":
        return Polynomial(tuple(spec["coefs"]))
    if kind == "sin":
        return Sinusoid(float(spec["amplitude"]), float(spec["omega"]), float(spec.get("phase", 0.0)))
    if kind == "exp":
        return Exponential(float(spec["amplitude"]), float(spec["rate"]))
    raise ValueError(f"unknown time function kind {kind!r}")


def default_time_functions() -> list[tuple[TimeFunction, TimeFunction, TimeFunction]]:
    """Three (a, b, c) choices spanning the family; every member is non-constant."""
    return [
        (Polynomial((0.3, 1.0, -0.5, 0.2, 0.05)), Sinusoid(1.2, 0.9, 0.3), Exponential(0.7, -0.6)),
        (Sinusoid(0.8, 1.7, -0.4), Exponential(1.1, 0.45), Polynomial((-0.2, 0.6, 0.9, -0.3))),
        (Exponential(0.5, 0.8), Polynomial((0.1, -1.3, 0.4, 0.0, 0.25)), Sinusoid(1.5, 0.6, 1.1)),
    ]


# ---------------------------------------------------------------------------
# h(v, s), the arbitrary function in the f = 0 algebra; s = g rho - N^2 z

H_FUNCTIONS = {
    "one": lambda v, s: 1.0,
    "s": lambda v, s: s,
    "neg_s": lambda v, s: -s,
    "sin_s": lambda v, s: tl.sin(s),
    "v_s": lambda v, s: v * s,
}


def h_function(name: str):
    try:
        return H_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown h function {name!r}; choose from {sorted(H_FUNCTIONS)}") from None

