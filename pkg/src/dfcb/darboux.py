"""One-fold and N-fold Darboux transformations over jets.

Routes to the N-fold potentials:

* ``wronskian-nested``: nested Wronskians W_r = W(psi_1..psi_r),
      u[N] = u + 3 Lam d_x^2 log W_N
      v[N] = v + N u_x + 3 Lam sum_r (q_r' q_r'' + d_x^3 log W_r),  q_r = log(W_r / W_{r-1})
* ``wronskian-direct``: the same u[N]; the sum in v[N] telescopes to
      d_x (B_N / W_N - (d_x log W_N)^2 / 2)
  with B_N the Wronskian whose last row is replaced by the (N+1)-th
  x-derivatives.  Only W_N is divided by, so near zeros of W_r (r < N),
  where the nested sum cancels poles against each other, no digits are lost.
* ``iterated-onefold``: N successive one-fold steps, each consuming the
  transformed image of the next seed, psi[1] = psi_x - (log psi_1)_x psi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jet as J
from .coeffs import Coefficients
from .errors import OutOfShape, SingularPoint
from .grid import GridSpec
from .jet import Jet, JetShape, Point
from .seeds import SeedSpec, eval_seed, time_jets, trivial_background

MODES = ("wronskian-direct", "wronskian-nested", "iterated-onefold")
MAX_FOLD = 4


def wronskian_of(psis: list[Jet]) -> Jet:
    """W(psi_1..psi_n); row i holds the i-th x-derivatives.

    The result has x-order reduced by n - 1.
    """
    n = len(psis)
    shape = psis[0].shape.lowered(0, n - 1)
    m = [[p.deriv("x", i).truncate(shape) for p in psis] for i in range(n)]
    return J.det(m)


def _det_values(m, absolute: bool = False):
    """Determinant of a matrix of arrays, or with ``absolute`` the permanent
    of the entrywise magnitudes (the size of the largest possible sum)."""
    n = len(m)
    if n == 1:
        return np.abs(m[0][0]) if absolute else m[0][0]
    total = 0.0
    for c in range(n):
        sub = _det_values([row[:c] + row[c + 1:] for row in m[1:]], absolute)
        if absolute:
            total = total + np.abs(m[0][c]) * sub
        else:
            total = total + (-1) ** c * m[0][c] * sub
    return total


def conditioning(psis: list[Jet]) -> np.ndarray:
    """Per point, min over r of |W_r| / perm(|entries of W_r|).

    Near 1 the determinants carry no cancellation; near 0 some nested
    Wronskian is close to a zero, where routes that divide by it lose digits.
    """
    out = None
    for r in range(1, len(psis) + 1):
        m = [[p.partial(i) for p in psis[:r]] for i in range(r)]
        with np.errstate(all="ignore"):
            ratio = np.abs(_det_values(m)) / _det_values(m, absolute=True)
        out = ratio if out is None else np.minimum(out, ratio)
    return out


# "regular" for route comparisons: every nested W_r is well conditioned
# and no log-derivative is far above its pole-free size r |k|
REGULAR_COND = 0.1
REGULAR_KAPPA = 3.0


def pole_proximity(psis: list[Jet], k_scale: float) -> np.ndarray:
    """max over r of |d_x log W_r| / (r k_scale); about 1 away from poles."""
    out = None
    for r in range(1, len(psis) + 1):
        w = _det_values([[p.partial(i) for p in psis[:r]] for i in range(r)])
        # d_x det = sum over rows of det with that row differentiated
        wx = sum(_det_values([[p.partial(i + (i == j)) for p in psis[:r]] for i in range(r)])
                 for j in range(r))
        with np.errstate(all="ignore"):
            ratio = np.abs(wx / w) / (r * max(k_scale, 1e-300))
        out = ratio if out is None else np.maximum(out, ratio)
    return out


def wronskian(seeds: list[SeedSpec], point: Point, shape: JetShape) -> Jet:
    return wronskian_of([eval_seed(s, point, shape) for s in seeds])


def _log_derivs(w: Jet, shape: JetShape, mask_singular: bool):
    """d_x, d_x^2, d_x^3 of log w, truncated to ``shape``."""
    lw = J.log(w, mask_singular=mask_singular)
    return [lw.deriv("x", n).truncate(shape) for n in (1, 2, 3)]


def onefold_potentials(u: Jet, v: Jet, seed: Jet, coeffs: Coefficients,
                       mask_singular: bool = False):
    """u[1] = u + 3 Lam (log psi_1)_xx,
    v[1] = v + u_x + 3 Lam ((log psi_1)_x (log psi_1)_xx + (log psi_1)_xxx).

    ``seed`` is the jet of psi_1; u[1] carries x-order one above v[1].
    """
    ox = min(seed.shape.order_x - 2, u.shape.order_x)
    if ox < 1:
        raise OutOfShape("one-fold potentials need seed x-order >= 3")
    us = JetShape(ox, *seed.shape.orders[1:]).meet(u.shape)
    vs = us.lowered(0).meet(v.shape)
    lam_u, _ = time_jets(coeffs, seed.point, us)
    lam_v = lam_u.truncate(vs)
    lw = J.log(seed, mask_singular=mask_singular)
    d1, d2, d3 = (lw.deriv("x", n) for n in (1, 2, 3))
    u1 = u.truncate(us) + 3.0 * lam_u * d2.truncate(us)
    v1 = (v.truncate(vs) + u.deriv("x").truncate(vs)
          + 3.0 * lam_v * (d1.truncate(vs) * d2.truncate(vs) + d3.truncate(vs)))
    return u1, v1


def onefold_eigenfunction(seed: Jet, psi: Jet, mask_singular: bool = False) -> Jet:
    """psi[1] = psi_x - (seed_x / seed) psi; x-order drops by one."""
    shape = seed.shape.meet(psi.shape).lowered(0)
    b = seed.deriv("x").truncate(shape) * J.recip(seed.truncate(shape), mask_singular)
    return psi.deriv("x").truncate(shape) - b * psi.truncate(shape)


@dataclass
class Potentials:
    """Jets of u[N], v[N] plus the singular-point bookkeeping.

    ``degenerate`` holds, per point, the smallest r with a degenerate W_r
    (0 where regular); ``mask`` is ``degenerate > 0``.
    """

    u: Jet
    v: Jet
    degenerate: np.ndarray
    wronskian_values: list = field(default_factory=list)

    @property
    def mask(self) -> np.ndarray:
        return self.degenerate > 0


def _mark(degenerate: np.ndarray, values: np.ndarray, r: int):
    bad = ~(np.abs(values) >= J.EPS_SING)
    degenerate[bad & (degenerate == 0)] = r


@dataclass(frozen=True)
class TransformedSolution:
    """u[N], v[N] built from ``seeds`` over the trivial background u = v = H.

    ``order`` is the derivative budget (x, y, t) of u[N]; v[N] carries one
    x-order less.  The default (3, 1, 1) is what residual checks need.
    """

    coeffs: Coefficients
    seeds: tuple = ()
    mode: str = "wronskian-direct"
    order: tuple = (3, 1, 1)

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if len(self.seeds) > MAX_FOLD:
            raise ValueError(f"at most {MAX_FOLD} seeds supported, got {len(self.seeds)}")
        ks = [s.k for s in self.seeds]
        if len(set(ks)) != len(ks):
            raise ValueError(f"seed wavenumbers must be distinct, got {ks}")
        if self.order[0] < 1:
            raise ValueError("u[N] needs x-order >= 1 so that v[N] is defined")

    @property
    def fold(self) -> int:
        return len(self.seeds)

    @property
    def k_scale(self) -> float:
        return max((abs(s.k) for s in self.seeds), default=0.0)

    def with_mode(self, mode: str) -> "TransformedSolution":
        return TransformedSolution(self.coeffs, self.seeds, mode, self.order)

    def psi_shape(self, order=None) -> JetShape:
        ox, oy, ot = self._order(order)
        # the closed form differentiates N + 1 times inside B_N, then once more
        return JetShape(ox + self.fold + 2, oy, ot)

    def _order(self, order):
        if order is None:
            return tuple(self.order)
        if any(a > b for a, b in zip(order, self.order)):
            raise OutOfShape(f"requested order {tuple(order)} exceeds budget {self.order}")
        return tuple(order)

    def seed_jets(self, point: Point, order=None) -> list[Jet]:
        shape = self.psi_shape(order)
        return [eval_seed(s, point, shape) for s in self.seeds]

    def potentials(self, point: Point, order=None, strict: bool = False) -> Potentials:
        order = self._order(order)
        ushape = JetShape(*order)
        vshape = ushape.lowered(0)
        u0, v0 = trivial_background(self.coeffs, point, ushape)
        deg = np.zeros(point.batch_shape, dtype=int)
        if self.fold == 0:
            return Potentials(u0, v0.truncate(vshape), deg)
        psis = self.seed_jets(point, order)
        if self.mode == "wronskian-direct":
            pots = self._closed(psis, u0, v0, ushape, vshape, deg)
        elif self.mode == "wronskian-nested":
            pots = self._direct(psis, u0, v0, ushape, vshape, deg)
        else:
            pots = self._iterated(psis, u0, v0, ushape, vshape, deg)
        if strict and pots.mask.any():
            r = int(pots.degenerate[pots.mask].min())
            raise SingularPoint(f"W_{r} degenerates at {int(pots.mask.sum())} point(s)",
                                mask=pots.mask, label=f"W_{r}")
        return pots

    def _direct(self, psis, u0, v0, ushape, vshape, deg):
        n = self.fold
        lam, _ = time_jets(self.coeffs, u0.point, ushape)
        lam_v = lam.truncate(vshape)
        acc = None
        prev = None
        wvals = []
        for r in range(1, n + 1):
            w = wronskian_of(psis[:r])
            wvals.append(w.value)
            _mark(deg, w.value, r)
            d1, d2, d3 = _log_derivs(w, vshape, mask_singular=True)
            if r == n:
                lw2 = J.log(w, mask_singular=True).deriv("x", 2).truncate(ushape)
            q1, q2 = (d1, d2) if prev is None else (d1 - prev[0], d2 - prev[1])
            term = q1 * q2 + d3
            acc = term if acc is None else acc + term
            prev = (d1, d2)
        u = u0 + 3.0 * lam * lw2
        v = v0.truncate(vshape) + n * u0.deriv("x").truncate(vshape) + 3.0 * lam_v * acc
        return Potentials(u, v, deg, wvals)

    def _closed(self, psis, u0, v0, ushape, vshape, deg):
        n = self.fold
        lam, _ = time_jets(self.coeffs, u0.point, ushape)
        wvals = []
        for r in range(1, n):
            w = _det_values([[p.partial(i) for p in psis[:r]] for i in range(r)])
            wvals.append(w)
            _mark(deg, w, r)
        w = wronskian_of(psis)
        wvals.append(w.value)
        _mark(deg, w.value, n)
        gshape = psis[0].shape.lowered(0, n + 1)
        rows = list(range(n - 1)) + [n + 1]
        b = J.det([[p.deriv("x", r).truncate(gshape) for p in psis] for r in rows])
        lw = J.log(w, mask_singular=True)
        h = lw.deriv("x").truncate(gshape)
        g = b * J.recip(w.truncate(gshape), mask_singular=True) - 0.5 * h * h
        u = u0 + 3.0 * lam * lw.deriv("x", 2).truncate(ushape)
        v = (v0.truncate(vshape) + n * u0.deriv("x").truncate(vshape)
             + 3.0 * lam.truncate(vshape) * g.deriv("x").truncate(vshape))
        return Potentials(u, v, deg, wvals)

    def _iterated(self, psis, u0, v0, ushape, vshape, deg):
        u, v = u0, v0
        phis = psis
        wvals = []
        for step in range(self.fold):
            head, rest = phis[0], phis[1:]
            wvals.append(head.value)
            _mark(deg, head.value, step + 1)
            u, v = onefold_potentials(u, v, head, self.coeffs, mask_singular=True)
            phis = [onefold_eigenfunction(head, p, mask_singular=True) for p in rest]
        return Potentials(u.truncate(ushape), v.truncate(vshape), deg, wvals)

    def eigenfunction(self, psi: Jet) -> Jet:
        """Image psi[N] of an eigenfunction jet under the N-fold transformation.

        The seeds are expanded at the shape of ``psi``; the result loses N
        x-orders.  Direct mode uses W(psi_1..psi_N, psi) / W(psi_1..psi_N).
        """
        shape = psi.shape
        psis = [eval_seed(s, psi.point, shape) for s in self.seeds]
        if not psis:
            return psi
        if self.mode == "wronskian-direct":
            top = wronskian_of(psis + [psi])
            bottom = wronskian_of(psis).truncate(top.shape)
            return top * J.recip(bottom, mask_singular=True)
        phi = psi
        for step in range(self.fold):
            head, rest = psis[0], psis[1:]
            phi = onefold_eigenfunction(head, phi, mask_singular=True)
            psis = [onefold_eigenfunction(head, p, mask_singular=True) for p in rest]
        return phi


def regular_points(ts: "TransformedSolution", point: Point) -> np.ndarray:
    """Points where both N-fold routes are expected to keep ~1e-10 accuracy."""
    psis = ts.seed_jets(point, (1, 0, 0))
    with np.errstate(all="ignore"):
        ok = (conditioning(psis) >= REGULAR_COND) & (pole_proximity(psis, ts.k_scale) <= REGULAR_KAPPA)
    return ok


def mode_discrepancy(ts: "TransformedSolution", point: Point):
    """Pointwise |direct - iterated| over max(1, |u|, |v|, |u_x|), for u and v.

    Returns (error, regular) arrays; ``regular`` excludes singular nodes.
    """
    a = ts.with_mode("wronskian-direct").potentials(point, (1, 0, 0))
    b = ts.with_mode("iterated-onefold").potentials(point, (1, 0, 0))
    with np.errstate(all="ignore"):
        scale = np.maximum.reduce([np.ones(point.batch_shape), np.abs(a.u.value),
                                   np.abs(a.v.value), np.abs(a.u.partial(1))])
        err = np.maximum(np.abs(a.u.value - b.u.value), np.abs(a.v.value - b.v.value)) / scale
    ok = regular_points(ts, point) & ~(a.mask | b.mask) & np.isfinite(err)
    return err, ok


def nfold_potentials(ts: TransformedSolution, point: Point, order=None,
                     strict: bool = True) -> tuple[Jet, Jet]:
    """(u[N], v[N]) jets at ``point``; raises SingularPoint naming the first
    degenerate W_r unless ``strict`` is False (then singular points are NaN)."""
    p = ts.potentials(point, order, strict=strict)
    return p.u, p.v


@dataclass
class FieldSample:
    grid: GridSpec
    u: np.ndarray
    v: np.ndarray
    mask: np.ndarray
    t: np.ndarray

    @property
    def masked_count(self) -> int:
        return int(self.mask.sum())

    @property
    def valid_count(self) -> int:
        return int(self.mask.size - self.mask.sum())

    def masked_locations(self, limit: int | None = None) -> list:
        p = self.grid.points()
        idx = np.argwhere(self.mask)
        if limit is not None:
            idx = idx[:limit]
        return [(float(p.x[tuple(i)]), float(p.y[tuple(i)]), float(p.t[tuple(i)])) for i in idx]


# values above this are treated as pole blow-up
BLOWUP = 1e12


def sample_values(ts: TransformedSolution, point: Point):
    """Pointwise (u, v, mask) arrays at arbitrary points, no derivatives kept."""
    pots = ts.potentials(point, order=(1, 0, 0))
    u, v = pots.u.value, pots.v.value
    mask = pots.mask | ~np.isfinite(u) | ~np.isfinite(v)
    mask |= (np.abs(np.nan_to_num(u)) > BLOWUP) | (np.abs(np.nan_to_num(v)) > BLOWUP)
    u = np.where(mask, np.nan, u)
    v = np.where(mask, np.nan, v)
    return u, v, mask


def sample_solution(ts: TransformedSolution, grid: GridSpec) -> FieldSample:
    ts.coeffs.check_range(grid.t0, grid.t1)
    point = grid.points()
    u, v, mask = sample_values(ts, point)
    return FieldSample(grid, u, v, mask, point.t)
