"""Truncated Taylor jets in (x, y, t), batched over many base points.

A :class:`Jet` stores normalized Taylor coefficients

    c[i, j, k] = d^i_x d^j_y d^k_t f(x0, y0, t0) / (i! j! k!)

for ``i <= order_x``, ``j <= order_y``, ``k <= order_t``.  The trailing axes of
the coefficient array run over a batch of base points, so one jet describes a
field at every node of a grid at once.  The arithmetic is the truncated Cauchy
product; elementary functions are composed through their univariate series in
the nilpotent part ``f - f(x0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import NamedTuple

import numpy as np

from .errors import OutOfShape, ShapeMismatch, SingularPoint

EPS_SING = 1e-10

_AXES = {"x": 0, "y": 1, "t": 2}


@dataclass(frozen=True)
class JetShape:
    order_x: int
    order_y: int
    order_t: int

    def __post_init__(self):
        if min(self.orders) < 0:
            raise ValueError(f"negative jet order in {self.orders}")

    @property
    def orders(self) -> tuple[int, int, int]:
        return (self.order_x, self.order_y, self.order_t)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.order_x + 1, self.order_y + 1, self.order_t + 1)

    @property
    def degree(self) -> int:
        """Nilpotency bound: any product of more than this many
        zero-valued jets vanishes after truncation."""
        return sum(self.orders)

    def lowered(self, axis: int, n: int = 1) -> "JetShape":
        o = list(self.orders)
        o[axis] -= n
        return JetShape(*o)

    def meet(self, other: "JetShape") -> "JetShape":
        return JetShape(*(min(a, b) for a, b in zip(self.orders, other.orders)))


class Point(NamedTuple):
    """Base point(s); each coordinate is an array of the batch shape."""

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray

    @classmethod
    def make(cls, x, y, t) -> "Point":
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        return cls(x.copy(), y.copy(), t.copy())

    @property
    def batch_shape(self) -> tuple:
        return self.x.shape

    def same(self, other: "Point") -> bool:
        if self is other:
            return True
        return all(a is b or np.array_equal(a, b) for a, b in zip(self, other))


@lru_cache(maxsize=None)
def _product_table(dims: tuple[int, int, int]):
    """Index pairs (p, q) -> r of the truncated product, sorted by r."""
    grid = np.indices(dims).reshape(3, -1).T
    flat = {tuple(m): n for n, m in enumerate(grid)}
    pp, qq, rr = [], [], []
    for p, mp in enumerate(grid):
        for q, mq in enumerate(grid):
            ms = tuple(mp + mq)
            r = flat.get(ms)
            if r is not None:
                pp.append(p)
                qq.append(q)
                rr.append(r)
    order = np.argsort(rr, kind="stable")
    rr = np.asarray(rr)[order]
    starts = np.flatnonzero(np.r_[True, rr[1:] != rr[:-1]])
    return np.asarray(pp)[order], np.asarray(qq)[order], rr[starts], starts


class Jet:
    """Batched truncated Taylor expansion of a scalar field."""

    __slots__ = ("shape", "point", "coeffs")
    __array_ufunc__ = None

    def __init__(self, shape: JetShape, point: Point, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != shape.dims + point.batch_shape:
            raise ValueError(
                f"coefficient array {coeffs.shape} does not fit "
                f"{shape.dims} + {point.batch_shape}"
            )
        self.shape = shape
        self.point = point
        self.coeffs = coeffs

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, point: Point, shape: JetShape) -> "Jet":
        c = np.zeros(shape.dims + point.batch_shape)
        c[0, 0, 0] = value
        return cls(shape, point, c)

    @classmethod
    def from_time_derivs(cls, derivs, point: Point, shape: JetShape) -> "Jet":
        """Lift a function of t alone from its derivative list [f, f', ...]."""
        if len(derivs) < shape.order_t + 1:
            raise OutOfShape(f"need {shape.order_t + 1} t-derivatives, got {len(derivs)}")
        c = np.zeros(shape.dims + point.batch_shape)
        for k in range(shape.order_t + 1):
            c[0, 0, k] = np.asarray(derivs[k]) / factorial(k)
        return cls(shape, point, c)

    def zeros_like(self) -> "Jet":
        return Jet(self.shape, self.point, np.zeros_like(self.coeffs))

    # inspection ---------------------------------------------------------

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0, 0, 0]

    def partial(self, i: int = 0, j: int = 0, k: int = 0) -> np.ndarray:
        """Mixed partial derivative d^i_x d^j_y d^k_t at the base point(s)."""
        ox, oy, ot = self.shape.orders
        if not (0 <= i <= ox and 0 <= j <= oy and 0 <= k <= ot):
            raise OutOfShape(f"partial ({i},{j},{k}) outside jet shape {self.shape.orders}")
        return self.coeffs[i, j, k] * (factorial(i) * factorial(j) * factorial(k))

    def __repr__(self):
        return f"Jet(shape={self.shape.orders}, batch={self.point.batch_shape})"

    # reshaping ----------------------------------------------------------

    def truncate(self, shape: JetShape) -> "Jet":
        if shape == self.shape:
            return self
        if any(a > b for a, b in zip(shape.orders, self.shape.orders)):
            raise OutOfShape(f"cannot extend jet {self.shape.orders} to {shape.orders}")
        ox, oy, ot = shape.dims
        return Jet(shape, self.point, self.coeffs[:ox, :oy, :ot])

    def deriv(self, var: str, n: int = 1) -> "Jet":
        """Jet of d^n f / d var^n; the order in ``var`` drops by n."""
        axis = _AXES[var]
        order = self.shape.orders[axis]
        if n > order:
            raise OutOfShape(f"cannot take {n} {var}-derivatives of order-{order} jet")
        if n == 0:
            return self
        m = np.arange(order - n + 1)
        weight = np.array([factorial(i + n) // factorial(i) for i in m], dtype=float)
        sl = [slice(None)] * self.coeffs.ndim
        sl[axis] = slice(n, None)
        wshape = [1] * self.coeffs.ndim
        wshape[axis] = -1
        c = self.coeffs[tuple(sl)] * weight.reshape(wshape)
        return Jet(self.shape.lowered(axis, n), self.point, c)

    # arithmetic ---------------------------------------------------------

    def _check(self, other: "Jet"):
        if self.shape != other.shape:
            raise ShapeMismatch(f"jet shapes differ: {self.shape.orders} vs {other.shape.orders}")
        if not self.point.same(other.point):
            raise ShapeMismatch("jets expanded at different base points")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.shape, self.point, self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0, 0, 0] = c[0, 0, 0] + other
        return Jet(self.shape, self.point, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.shape, self.point, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return mul(self, other)
        return Jet(self.shape, self.point, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return mul(self, recip(other))
        return Jet(self.shape, self.point, self.coeffs / other)

    def __rtruediv__(self, other):
        return recip(self) * other

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(1.0, self.point, self.shape)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out


def jet_variable(which: str, point: Point, shape: JetShape) -> Jet:
    axis = _AXES[which]
    if shape.orders[axis] < 1:
        raise OutOfShape(f"jet of {which} needs order_{which} >= 1")
    c = np.zeros(shape.dims + point.batch_shape)
    c[0, 0, 0] = point[axis]
    idx = [0, 0, 0]
    idx[axis] = 1
    c[tuple(idx)] = 1.0
    return Jet(shape, point, c)


def affine(coef_x: float, coef_y: float, coef_t: float, point: Point, shape: JetShape,
           offset: float = 0.0) -> Jet:
    """Jet of offset + coef_x*x + coef_y*y + coef_t*t; orders may be zero."""
    c = np.zeros(shape.dims + point.batch_shape)
    c[0, 0, 0] = offset + coef_x * point.x + coef_y * point.y + coef_t * point.t
    if shape.order_x >= 1:
        c[1, 0, 0] = coef_x
    if shape.order_y >= 1:
        c[0, 1, 0] = coef_y
    if shape.order_t >= 1:
        c[0, 0, 1] = coef_t
    return Jet(shape, point, c)


def mul(a: Jet, b: Jet) -> Jet:
    a._check(b)
    dims = a.shape.dims
    n = dims[0] * dims[1] * dims[2]
    batch = a.point.batch_shape
    A = a.coeffs.reshape(n, -1)
    B = b.coeffs.reshape(n, -1)
    p, q, r, starts = _product_table(dims)
    out = np.zeros_like(A)
    out[r] = np.add.reduceat(A[p] * B[q], starts, axis=0)
    return Jet(a.shape, a.point, out.reshape(dims + batch))


def _split(a: Jet):
    """Value array and nilpotent part a - value."""
    v = a.value.copy()
    c = a.coeffs.copy()
    c[0, 0, 0] = 0.0
    return v, Jet(a.shape, a.point, c)


def _series(a: Jet, head: np.ndarray, terms) -> Jet:
    """sum_m terms[m] * n^m with n the nilpotent part of a, terms[0] == head."""
    _, n = _split(a)
    out = Jet.constant(head, a.point, a.shape)
    power = None
    for m in range(1, a.shape.degree + 1):
        power = n if power is None else power * n
        out = out + power * terms(m)
    return out


def exp(a: Jet) -> Jet:
    ev = np.exp(a.value)
    return _series(a, ev, lambda m: ev / factorial(m))


def sin(a: Jet) -> Jet:
    s, c = np.sin(a.value), np.cos(a.value)
    # d^m sin = sin(v + m*pi/2)
    cyc = (s, c, -s, -c)
    return _series(a, s, lambda m: cyc[m % 4] / factorial(m))


def cos(a: Jet) -> Jet:
    s, c = np.sin(a.value), np.cos(a.value)
    cyc = (c, -s, -c, s)
    return _series(a, c, lambda m: cyc[m % 4] / factorial(m))


def _guard(v: np.ndarray, what: str, mask_singular: bool):
    bad = ~(np.abs(v) >= EPS_SING)
    if bad.any():
        if not mask_singular:
            raise SingularPoint(f"{what} of a value below {EPS_SING:g} "
                                f"at {int(bad.sum())} point(s)", mask=bad)
        v = np.where(bad, np.nan, v)
    return v


def log(a: Jet, mask_singular: bool = False) -> Jet:
    """Natural log of |a|; the derivatives are those of log a.

    With ``mask_singular`` the near-zero points turn into NaN coefficients
    instead of raising :class:`SingularPoint`.
    """
    v = _guard(a.value, "log", mask_singular)
    inv = 1.0 / v
    return _series(a, np.log(np.abs(v)),
                   lambda m: (-1.0) ** (m + 1) * inv ** m / m)


def recip(a: Jet, mask_singular: bool = False) -> Jet:
    v = _guard(a.value, "reciprocal", mask_singular)
    inv = 1.0 / v
    return _series(a, inv, lambda m: (-1.0) ** m * inv ** (m + 1))


def det(m: list[list[Jet]]) -> Jet:
    """Determinant by cofactor expansion along the first row (n <= 5)."""
    n = len(m)
    if n == 0 or any(len(row) != n for row in m):
        raise ValueError("determinant needs a non-empty square matrix")
    if n > 5:
        raise ValueError("cofactor determinant limited to n <= 5")
    first = m[0][0]
    for row in m:
        for e in row:
            first._check(e)
    return _cofactor(m, tuple(range(n)))


def _cofactor(m, cols: tuple) -> Jet:
    row = len(m) - len(cols)
    if len(cols) == 1:
        return m[row][cols[0]]
    total = None
    for pos, c in enumerate(cols):
        minor = _cofactor(m, cols[:pos] + cols[pos + 1:])
        term = m[row][c] * minor
        if total is None:
            total = term
        elif pos % 2:
            total = total - term
        else:
            total = total + term
    return total
