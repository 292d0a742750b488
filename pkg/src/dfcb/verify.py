"""Residuals of candidate (u, v) against the DFCB system

    u_t - 2u_y + 3/2 u_xx - 3v_x - S u = T
    v_t - 2v_y - u_y + u_xxx + P u u_x - 3/2 v_xx + R u_x - S v = T

from exact jet derivatives or from central finite differences.  Each
pointwise residual is divided by max(1, largest |term|) of its equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coeffs import Coefficients, coeff_P, coeff_R, coeff_S, coeff_T
from .darboux import BLOWUP, TransformedSolution, sample_values
from .errors import InsufficientLevels
from .grid import GridSpec
from .jet import Jet, Point


@dataclass
class ResidualReport:
    max_res_u: float
    rms_res_u: float
    max_res_v: float
    rms_res_v: float
    masked_count: int
    total: int
    scale_rule: str = "max(1, largest |term|) per equation"
    grid: GridSpec | None = None

    @property
    def worst(self) -> float:
        return max(self.max_res_u, self.max_res_v)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "grid"}
        d["grid"] = self.grid.to_dict() if self.grid is not None else None
        return d


def _terms(d: dict, c: Coefficients, t: np.ndarray):
    """Signed summands of both equations (right-hand T moved left)."""
    S, T, P, R = coeff_S(c, t), coeff_T(c, t), coeff_P(c, t), coeff_R(c, t)
    tu = [d["u_t"], -2 * d["u_y"], 1.5 * d["u_xx"], -3 * d["v_x"], -S * d["u"], -T]
    tv = [d["v_t"], -2 * d["v_y"], -d["u_y"], d["u_xxx"], P * d["u"] * d["u_x"],
          -1.5 * d["v_xx"], R * d["u_x"], -S * d["v"], -T * np.ones_like(d["v"])]
    return tu, tv


def residual_arrays(d: dict, c: Coefficients, t: np.ndarray, mask=None):
    """Pointwise normalized residuals (res_u, res_v, mask) from a dict of
    derivative arrays keyed u, u_x, u_xx, u_xxx, u_y, u_t, v, v_x, v_xx,
    v_y, v_t."""
    tu, tv = _terms(d, c, t)
    out = []
    bad = np.zeros(np.shape(d["u"]), dtype=bool) if mask is None else mask.copy()
    for terms in (tu, tv):
        stack = np.array(np.broadcast_arrays(*terms))
        with np.errstate(invalid="ignore", over="ignore"):
            big = np.max(np.abs(stack), axis=0)
            bad |= ~np.isfinite(big) | (big > BLOWUP)
            res = np.abs(stack.sum(axis=0)) / np.maximum(1.0, big)
        out.append(res)
    return out[0], out[1], bad


def _report(res_u, res_v, bad, grid=None) -> ResidualReport:
    ok = ~bad
    ru, rv = res_u[ok], res_v[ok]

    def stats(r):
        return (float(r.max()), float(np.sqrt(np.mean(r ** 2)))) if r.size else (0.0, 0.0)

    mu, su = stats(ru)
    mv, sv = stats(rv)
    return ResidualReport(mu, su, mv, sv, int(bad.sum()), int(bad.size), grid=grid)


def jet_derivs(u: Jet, v: Jet) -> dict:
    return {
        "u": u.value, "u_x": u.partial(1), "u_xx": u.partial(2), "u_xxx": u.partial(3),
        "u_y": u.partial(0, 1), "u_t": u.partial(0, 0, 1),
        "v": v.value, "v_x": v.partial(1), "v_xx": v.partial(2),
        "v_y": v.partial(0, 1), "v_t": v.partial(0, 0, 1),
    }


def pde_residual_jet(u: Jet, v: Jet, coeffs: Coefficients, mask=None,
                     grid: GridSpec | None = None) -> ResidualReport:
    """Residual report from jets (u: x<=3, y<=1, t<=1; v: x<=2, y<=1, t<=1)."""
    res_u, res_v, bad = residual_arrays(jet_derivs(u, v), coeffs, u.point.t, mask)
    return _report(res_u, res_v, bad, grid)


def solution_residual_jet(ts: TransformedSolution, grid: GridSpec,
                          corrupt: dict | None = None) -> ResidualReport:
    """Jet residual of a Darboux solution over a grid.

    ``corrupt`` maps "u"/"v" to a constant added to that field.
    """
    ts.coeffs.check_range(grid.t0, grid.t1)
    pots = ts.potentials(grid.points(), order=(3, 1, 1))
    u, v = pots.u, pots.v
    if corrupt:
        u = u + corrupt.get("u", 0.0)
        v = v + corrupt.get("v", 0.0)
    return pde_residual_jet(u, v, coeffs=ts.coeffs, mask=pots.mask, grid=grid)


# --------------------------------------------------------------------------
# finite differences

Evaluator = Callable[[Point], tuple]


def darboux_evaluator(ts: TransformedSolution, corrupt: dict | None = None) -> Evaluator:
    def f(p: Point):
        u, v, mask = sample_values(ts, p)
        if corrupt:
            u = u + corrupt.get("u", 0.0)
            v = v + corrupt.get("v", 0.0)
        return u, v, mask
    return f


_OFFSETS = [(i, 0, 0) for i in (-2, -1, 1, 2)] + [(0, j, 0) for j in (-1, 1)] \
    + [(0, 0, k) for k in (-1, 1)] + [(0, 0, 0)]


def fd_derivs(f: Evaluator, point: Point, steps) -> tuple[dict, np.ndarray]:
    """Second-order central differences of u, v at ``point``.

    u_xxx uses the 5-point antisymmetric stencil.  Returns the derivative
    dict and a mask of points whose stencil touched a singular node.
    """
    hx, hy, ht = steps
    xs = np.stack([point.x + i * hx for i, _, _ in _OFFSETS])
    ys = np.stack([point.y + j * hy for _, j, _ in _OFFSETS])
    tt = np.stack([point.t + k * ht for _, _, k in _OFFSETS])
    u, v, mask = f(Point.make(xs, ys, tt))
    at = {off: (u[m], v[m]) for m, off in enumerate(_OFFSETS)}
    bad = np.any(mask, axis=0)

    def U(i=0, j=0, k=0):
        return at[(i, j, k)][0]

    def V(i=0, j=0, k=0):
        return at[(i, j, k)][1]

    d = {
        "u": U(), "v": V(),
        "u_x": (U(1) - U(-1)) / (2 * hx),
        "u_xx": (U(1) - 2 * U() + U(-1)) / hx ** 2,
        "u_xxx": (U(2) - 2 * U(1) + 2 * U(-1) - U(-2)) / (2 * hx ** 3),
        "u_y": (U(0, 1) - U(0, -1)) / (2 * hy),
        "u_t": (U(0, 0, 1) - U(0, 0, -1)) / (2 * ht),
        "v_x": (V(1) - V(-1)) / (2 * hx),
        "v_xx": (V(1) - 2 * V() + V(-1)) / hx ** 2,
        "v_y": (V(0, 1) - V(0, -1)) / (2 * hy),
        "v_t": (V(0, 0, 1) - V(0, 0, -1)) / (2 * ht),
    }
    return d, bad


def pde_residual_fd(f: Evaluator, coeffs: Coefficients, point: Point, steps,
                    grid: GridSpec | None = None) -> ResidualReport:
    d, bad = fd_derivs(f, point, steps)
    res_u, res_v, bad = residual_arrays(d, coeffs, point.t, bad)
    return _report(res_u, res_v, bad, grid)


@dataclass
class ConvergenceReport:
    steps: list
    norms: list
    order: float
    degenerate: bool = False
    reports: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"steps": self.steps, "norms": self.norms, "order": self.order,
                "degenerate": self.degenerate}


def convergence_order(f: Evaluator, coeffs: Coefficients, point: Point,
                      ladder=(0.1, 0.05, 0.025), floor: float = 1e-14) -> ConvergenceReport:
    """Log-log slope of the max normalized FD residual against h.

    Every ladder level uses hx = hy = ht = h.  If any level's norm is below
    ``floor`` there is nothing to fit; the order is reported as inf and
    ``degenerate`` is set.
    """
    ladder = [float(h) for h in ladder]
    if len(ladder) < 3:
        raise InsufficientLevels(f"need at least 3 step levels, got {len(ladder)}")
    for a, b in zip(ladder, ladder[1:]):
        if not np.isclose(a / b, 2.0, rtol=1e-9):
            raise InsufficientLevels(f"steps must halve level to level ({a} -> {b})")
    levels = []
    common = np.zeros(point.batch_shape, dtype=bool)
    for h in ladder:
        d, bad = fd_derivs(f, point, (h, h, h))
        res_u, res_v, bad = residual_arrays(d, coeffs, point.t, bad)
        levels.append((res_u, res_v))
        common |= bad
    # one node set for every level, so the fit compares like with like
    reports = [_report(ru, rv, common) for ru, rv in levels]
    norms = [r.worst for r in reports]
    if common.all():
        return ConvergenceReport(ladder, norms, float("nan"), True, reports)
    if min(norms) < floor:
        return ConvergenceReport(ladder, norms, float("inf"), True, reports)
    slope = np.polyfit(np.log(ladder), np.log(norms), 1)[0]
    return ConvergenceReport(ladder, norms, float(slope), False, reports)
