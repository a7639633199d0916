"""Truncated multivariate Taylor arithmetic (forward-mode differentiation).

A :class:`Taylor` holds the coefficients of a polynomial in ``nvars``
increments truncated at total degree ``degree``. Evaluating a closed-form
expression on Taylor inputs yields its exact derivatives at the expansion
point up to that degree, which is how generator coefficients, their total
derivatives along a jet, and analytic solution jets are computed.

The helpers :func:`sin`, :func:`cos` and :func:`exp` dispatch on argument type
so the same expression works on floats, numpy arrays and Taylor objects.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial

import numpy as np

from . import _kernels


class TaylorBasis:
    """Monomial layout and product tables for a given (nvars, degree)."""

    def __init__(self, nvars: int, degree: int):
        self.nvars = nvars
        self.degree = degree
        monos = []
        for d in range(degree + 1):
            # graded, lexicographically descending inside each degree
            for e in itertools.product(range(d, -1, -1), repeat=nvars):
                if sum(e) == d:
                    monos.append(e)
        self.monomials: list[tuple[int, ...]] = monos
        self.index = {e: i for i, e in enumerate(monos)}
        self.size = len(monos)
        self.total_degree = np.array([sum(e) for e in monos])
        self.factorial = np.array([np.prod([factorial(k) for k in e]) for e in monos], dtype=float)

        ia, ib, ik = [], [], []
        for i, e in enumerate(monos):
            for j, f in enumerate(monos):
                s = tuple(a + b for a, b in zip(e, f))
                if sum(s) <= degree:
                    ia.append(i)
                    ib.append(j)
                    ik.append(self.index[s])
        self._ia = np.array(ia, dtype=np.int64)
        self._ib = np.array(ib, dtype=np.int64)
        self._ik = np.array(ik, dtype=np.int64)

        self._dsrc, self._ddst, self._dfac = [], [], []
        for j in range(nvars):
            src, dst, fac = [], [], []
            for i, e in enumerate(monos):
                if e[j] > 0:
                    lower = list(e)
                    lower[j] -= 1
                    src.append(i)
                    dst.append(self.index[tuple(lower)])
                    fac.append(float(e[j]))
            self._dsrc.append(np.array(src, dtype=np.int64))
            self._ddst.append(np.array(dst, dtype=np.int64))
            self._dfac.append(np.array(fac))

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _kernels.taylor_mul(a, b, self._ia, self._ib, self._ik, self.size)


@lru_cache(maxsize=None)
def basis(nvars: int, degree: int) -> TaylorBasis:
    return TaylorBasis(nvars, degree)


class Taylor:
    __slots__ = ("basis", "c")
    __array_ufunc__ = None  # make numpy scalars defer to our reflected operators

    def __init__(self, tb: TaylorBasis, coefficients):
        self.basis = tb
        self.c = np.asarray(coefficients, dtype=float)

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, tb: TaylorBasis, value: float) -> Taylor:
        c = np.zeros(tb.size)
        c[0] = value
        return cls(tb, c)

    @classmethod
    def variable(cls, tb: TaylorBasis, j: int, value: float) -> Taylor:
        c = np.zeros(tb.size)
        c[0] = value
        if tb.degree >= 1:
            e = [0] * tb.nvars
            e[j] = 1
            c[tb.index[tuple(e)]] = 1.0
        return cls(tb, c)

    @property
    def value(self) -> float:
        return float(self.c[0])

    def coefficient(self, exponents) -> float:
        return float(self.c[self.basis.index[tuple(exponents)]])

    def derivative_value(self, exponents) -> float:
        """Partial derivative at the expansion point for the given exponent tuple."""
        i = self.basis.index[tuple(exponents)]
        return float(self.c[i] * self.basis.factorial[i])

    def derivatives(self) -> np.ndarray:
        """All partial derivatives at the expansion point, in monomial order."""
        return self.c * self.basis.factorial

    def gradient(self) -> np.ndarray:
        tb = self.basis
        out = np.zeros(tb.nvars)
        for j in range(tb.nvars):
            e = [0] * tb.nvars
            e[j] = 1
            out[j] = self.c[tb.index[tuple(e)]]
        return out

    def diff(self, j: int) -> Taylor:
        """Partial derivative in variable ``j``; the top-degree part becomes zero."""
        tb = self.basis
        out = np.zeros(tb.size)
        out[tb._ddst[j]] = self.c[tb._dsrc[j]] * tb._dfac[j]
        return Taylor(tb, out)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Taylor):
            if other.basis is not self.basis:
                raise ValueError("Taylor objects on different bases")
            return other.c
        out = np.zeros(self.basis.size)
        out[0] = float(other)
        return out

    def __add__(self, other):
        return Taylor(self.basis, self.c + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Taylor(self.basis, self.c - self._coerce(other))

    def __rsub__(self, other):
        return Taylor(self.basis, self._coerce(other) - self.c)

    def __neg__(self):
        return Taylor(self.basis, -self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Taylor):
            return Taylor(self.basis, self.basis.mul(self.c, self._coerce(other)))
        return Taylor(self.basis, self.c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Taylor):
            return self * other.reciprocal()
        return Taylor(self.basis, self.c / float(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Taylor.constant(self.basis, 1.0)
        for _ in range(n):
            out = out * self
        return out

    # composition --------------------------------------------------------
    def compose(self, derivs) -> Taylor:
        """Return ``F(self)`` given ``derivs[k] = F^(k)(self.value)``."""
        tb = self.basis
        delta = Taylor(tb, self.c.copy())
        delta.c[0] = 0.0
        out = np.zeros(tb.size)
        out[0] = derivs[0]
        power = Taylor.constant(tb, 1.0)
        for k in range(1, tb.degree + 1):
            power = power * delta
            out += derivs[k] / factorial(k) * power.c
        return Taylor(tb, out)

    def reciprocal(self) -> Taylor:
        a = self.value
        if a == 0.0:
            raise ZeroDivisionError("reciprocal of a Taylor series with zero constant term")
        d = [(-1) ** k * factorial(k) / a ** (k + 1) for k in range(self.basis.degree + 1)]
        return self.compose(d)

    def sin(self) -> Taylor:
        a = self.value
        cyc = (np.sin(a), np.cos(a), -np.sin(a), -np.cos(a))
        return self.compose([cyc[k % 4] for k in range(self.basis.degree + 1)])

    def cos(self) -> Taylor:
        a = self.value
        cyc = (np.cos(a), -np.sin(a), -np.cos(a), np.sin(a))
        return self.compose([cyc[k % 4] for k in range(self.basis.degree + 1)])

    def exp(self) -> Taylor:
        e = np.exp(self.value)
        return self.compose([e] * (self.basis.degree + 1))

    def __repr__(self):
        return f"Taylor(nvars={self.basis.nvars}, degree={self.basis.degree}, c={self.c!r})"


def sin(x):
    return x.sin() if isinstance(x, Taylor) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Taylor) else np.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Taylor) else np.exp(x)


def variables(point, degree: int) -> list[Taylor]:
    """Independent Taylor variables expanded at ``point``."""
    tb = basis(len(point), degree)
    return [Taylor.variable(tb, j, float(v)) for j, v in enumerate(point)]


def lift(value, tb: TaylorBasis):
    """Promote a scalar to a constant Taylor on ``tb``; Taylor inputs pass through."""
    return value if isinstance(value, Taylor) else Taylor.constant(tb, float(value))
