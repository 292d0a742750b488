"""Seed eigenfunctions over the trivial background and the Lax operators.

Over u = v = H(t) the Lax pair reduces to

    psi_y = psi_xxx,   psi_t = psi_xxx + 3/2 psi_xx + psi_y,

which the three-term ansatz

    psi = c1 e^{xi1} + c2 e^{xi2} sin(xi3) + c3 e^{xi2} cos(xi3)

solves exactly for every real wavenumber k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple
import warnings

import numpy as np

from . import jet as J
from .coeffs import Coefficients, eval_profile
from .jet import Jet, JetShape, Point


@dataclass(frozen=True)
class SeedSpec:
    k: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if self.c1 == 0 and self.c2 == 0 and self.c3 == 0:
            raise ValueError("seed coefficients (c1, c2, c3) must not all vanish")
        if self.k == 0:
            warnings.warn("seed with k = 0 is constant in x; its transformation is trivial",
                          stacklevel=3)

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    def to_dict(self) -> dict:
        return {"k": self.k, "c": list(self.c)}

    @classmethod
    def from_dict(cls, d: dict) -> "SeedSpec":
        c = d["c"]
        return cls(float(d["k"]), float(c[0]), float(c[1]), float(c[2]))


class PhaseSet(NamedTuple):
    """Affine phases as (x, y, t) coefficient triples."""

    xi1: tuple[float, float, float]
    xi2: tuple[float, float, float]
    xi3: tuple[float, float, float]


def phases(k: float) -> PhaseSet:
    k2, k3 = k * k, k ** 3
    return PhaseSet(
        xi1=(k, k3, 2 * k3 + 1.5 * k2),
        xi2=(k, -2 * k3, -4 * k3),
        xi3=(k, 2 * k3, 4 * k3 + 3 * k2),
    )


def eval_seed(s: SeedSpec, point: Point, shape: JetShape) -> Jet:
    ph = phases(s.k)
    out = J.exp(J.affine(*ph.xi1, point, shape)) * s.c1
    if s.c2 != 0 or s.c3 != 0:
        e2 = J.exp(J.affine(*ph.xi2, point, shape))
        arg = J.affine(*ph.xi3, point, shape)
        if s.c2 != 0:
            out = out + e2 * J.sin(arg) * s.c2
        if s.c3 != 0:
            out = out + e2 * J.cos(arg) * s.c3
    return out


def seed_scalar(s: SeedSpec, x, y, t):
    """Plain numpy evaluation of the ansatz (finite-difference oracle input)."""
    ph = phases(s.k)
    lin = lambda c: c[0] * x + c[1] * y + c[2] * t
    e2 = np.exp(lin(ph.xi2))
    return (s.c1 * np.exp(lin(ph.xi1)) + s.c2 * e2 * np.sin(lin(ph.xi3))
            + s.c3 * e2 * np.cos(lin(ph.xi3)))


def trivial_background(coeffs: Coefficients, point: Point, shape: JetShape):
    """Jets of u = v = H(t)."""
    h = Jet.from_time_derivs(eval_profile(coeffs.h, point.t, 3), point, shape)
    return h, h


def time_jets(coeffs: Coefficients, point: Point, shape: JetShape):
    """Jets of Lambda(t) and H(t) at the given shape."""
    coeffs.check_lambda(point.t)
    lam = Jet.from_time_derivs(eval_profile(coeffs.lam, point.t, 3), point, shape)
    h = Jet.from_time_derivs(eval_profile(coeffs.h, point.t, 3), point, shape)
    return lam, h


def _potential_factors(u: Jet, v: Jet, coeffs: Coefficients, shape: JetShape):
    lam, h = time_jets(coeffs, u.point, shape)
    inv_lam = J.recip(lam)
    a = (u.truncate(shape) - h) * inv_lam
    b = (v.truncate(shape) - h) * inv_lam
    return a, b


def _lax_shape(psi: Jet, u: Jet, v: Jet, extra_y: int) -> JetShape:
    ox, oy, ot = psi.shape.orders
    s = JetShape(ox - 3, oy - extra_y, ot)
    return s.meet(u.shape).meet(v.shape)


def apply_L(u: Jet, v: Jet, coeffs: Coefficients, psi: Jet, terms: bool = False):
    """L psi = psi_xxx + (u - H)/Lambda psi_x + (v - H)/Lambda psi.

    With ``terms`` also returns the three summands separately.
    """
    shape = _lax_shape(psi, u, v, 0)
    a, b = _potential_factors(u, v, coeffs, shape)
    parts = (psi.deriv("x", 3).truncate(shape),
             a * psi.deriv("x").truncate(shape),
             b * psi.truncate(shape))
    out = parts[0] + parts[1] + parts[2]
    return (out, parts) if terms else out


def apply_M(u: Jet, v: Jet, coeffs: Coefficients, psi: Jet, terms: bool = False):
    """M psi = psi_xxx + 3/2 psi_xx + (u - H)/Lambda psi_x + psi_y
    + (u + v - 2H)/Lambda psi."""
    shape = _lax_shape(psi, u, v, 1)
    a, b = _potential_factors(u, v, coeffs, shape)
    parts = (psi.deriv("x", 3).truncate(shape),
             1.5 * psi.deriv("x", 2).truncate(shape),
             a * psi.deriv("x").truncate(shape),
             psi.deriv("y").truncate(shape),
             (a + b) * psi.truncate(shape))
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return (out, parts) if terms else out


@dataclass
class LaxReport:
    max_res_y: float
    rms_res_y: float
    max_res_t: float
    rms_res_t: float
    masked_count: int
    total: int

    @property
    def worst(self) -> float:
        return max(self.max_res_y, self.max_res_t)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _stats(r: np.ndarray):
    if r.size == 0:
        return 0.0, 0.0
    return float(np.max(r)), float(np.sqrt(np.mean(r ** 2)))


def lax_residual(u: Jet, v: Jet, coeffs: Coefficients, psi: Jet, k_scale: float,
                 term_scale: bool = False) -> LaxReport:
    """Normalized residuals of L psi - psi_y and psi_t - M psi, pointwise
    scale max(1, |psi| (1 + |k|)^3).

    With ``term_scale`` the scale also covers the largest summand of each
    equation, so roundoff near poles of the potentials, where the terms
    grow far beyond psi, is not mistaken for a failure.  Points where any
    input is non-finite count as masked.
    """
    lpsi, lparts = apply_L(u, v, coeffs, psi, terms=True)
    mpsi, mparts = apply_M(u, v, coeffs, psi, terms=True)
    psi_y = psi.partial(0, 1, 0)
    psi_t = psi.partial(0, 0, 1)
    base = np.maximum(1.0, np.abs(psi.value) * (1 + abs(k_scale)) ** 3)
    sy = st = base
    if term_scale:
        with np.errstate(invalid="ignore"):
            sy = np.maximum.reduce([base, np.abs(psi_y)] + [np.abs(q.value) for q in lparts])
            st = np.maximum.reduce([base, np.abs(psi_t)] + [np.abs(q.value) for q in mparts])
    ry = np.abs(lpsi.value - psi_y) / sy
    rt = np.abs(psi_t - mpsi.value) / st
    ok = np.isfinite(ry) & np.isfinite(rt) & np.isfinite(u.value) & np.isfinite(v.value)
    my, sy_ = _stats(ry[ok])
    mt, st_ = _stats(rt[ok])
    return LaxReport(my, sy_, mt, st_, int((~ok).sum()), int(ok.size))
