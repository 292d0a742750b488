"""Closed-form one-fold and two-fold solution displays, transcribed as printed.

These are kept literal (no sign or term corrections) and serve as an
independent comparison against the Wronskian pipeline.  Known oddities of
the printed forms, reproduced on purpose:

* Theta_1 carries ``c1 c2 e^{d1} cos(xi3)`` where the log-derivative of the
  seed produces ``sin(xi3)``;
* Theta_4 has ``2 p3`` in its second factor, unlike the Wronskian factor
  used in Theta_3;
* Theta_6 uses ``xi3`` inside the p-bracket instead of ``delta3``;
* Gamma contains the product ``Theta_4 Theta_4^2`` in its third term.

Conventions for the reduction c2 = c3 = p2 = p3 = 0: Theta_3 is set to its
exact value 0, and whenever a numerator is exactly zero the correction term
is zero even if its denominator vanishes too (v[2], whose denominator
carries Theta_3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as J
from .coeffs import Coefficients
from .errors import SingularPoint
from .jet import Jet, JetShape, Point
from .seeds import SeedSpec, time_jets


@dataclass(frozen=True)
class ExplicitOnefold:
    seed: SeedSpec
    coeffs: Coefficients


@dataclass(frozen=True)
class ExplicitTwofold:
    seed1: SeedSpec
    seed2: SeedSpec
    coeffs: Coefficients


def _phase_parts(k: float, point: Point, shape: JetShape):
    """e^{d1}, e^{d2}, sin and cos of the third phase."""
    k2, k3 = k * k, k ** 3
    ed1 = J.exp(J.affine(0.0, k3, 2 * k3 + 1.5 * k2, point, shape))
    ed2 = J.exp(J.affine(0.0, -2 * k3, -4 * k3, point, shape))
    arg = J.affine(k, 2 * k3, 4 * k3 + 3 * k2, point, shape)
    return ed1, ed2, J.sin(arg), J.cos(arg), arg


def _onefold_thetas(s: SeedSpec, point: Point, shape: JetShape) -> dict:
    k1 = s.k
    c1, c2, c3 = s.c
    ed1, ed2, sn, cs, arg = _phase_parts(k1, point, shape)
    e11 = ed1 * ed1
    e22 = ed2 * ed2
    e12 = ed1 * ed2
    sin2, cos2 = J.sin(2.0 * arg), J.cos(2.0 * arg)
    theta = c1 * ed1 + c2 * ed2 * sn + c3 * ed2 * cs
    theta1 = k1 ** 2 * ed2 * ((c2 ** 2 + c3 ** 2) * ed2 + c1 * c3 * ed1 * cs + c1 * c2 * ed1 * cs)
    bracket = (3 * c1 * c2 ** 2 * e12 + 3 * c1 * c3 ** 2 * e12
               + 2 * (c1 ** 2 * (c2 + c3) * e11
                      + (c3 ** 3 - c2 ** 3 + c2 ** 2 * c3 - c2 * c3 ** 2) * e22) * cs
               - (c1 * c2 ** 2 - c1 * c3 ** 2) * e12 * cos2
               + 2 * (c1 ** 2 * c2 - c1 ** 2 * c3) * e11 * sn
               + 2 * c2 ** 3 * e22 * sn
               + 2 * c2 ** 2 * c3 * e22 * sn
               + 2 * c2 * c3 ** 2 * e22 * sn
               + 2 * c3 ** 3 * e22 * sn
               + 2 * c1 * c2 * c3 * e12 * sin2)
    theta2 = k1 ** 3 * ed2 * bracket
    return {"Theta": theta, "Theta1": theta1, "Theta2": theta2}


def _all_zero(j: Jet) -> np.ndarray:
    flat = j.coeffs.reshape(-1, *j.point.batch_shape)
    return np.all(flat == 0.0, axis=0)


def _ratio(num: Jet, den: Jet, label: str, strict: bool):
    """num/den with the zero-numerator convention; returns (jet, mask)."""
    zero = _all_zero(num)
    small = ~(np.abs(den.value) >= J.EPS_SING) & ~zero
    if strict and small.any():
        raise SingularPoint(f"{label} denominator vanishes at {int(small.sum())} point(s)",
                            mask=small, label=label)
    # placeholder denominator 1 where the result is overwritten below
    dc = den.coeffs.copy()
    dc[..., small | zero] = 0.0
    dc[0, 0, 0][small | zero] = 1.0
    out = num * J.recip(Jet(den.shape, den.point, dc))
    c = out.coeffs
    c[..., zero] = 0.0
    c[..., small] = np.nan
    return out, small


def explicit_onefold(e: ExplicitOnefold, point: Point, shape: JetShape, strict: bool = False):
    """Jets of u[1] = H - 3 Lam Theta1/Theta^2, v[1] = H - 3 Lam Theta2 / (2 Theta^3).

    Returns (u, v, mask, thetas).
    """
    th = _onefold_thetas(e.seed, point, shape)
    lam, h = time_jets(e.coeffs, point, shape)
    theta = th["Theta"]
    ru, mu = _ratio(th["Theta1"], theta * theta, "Theta^2", strict)
    rv, mv = _ratio(th["Theta2"], 2.0 * theta * theta * theta, "2 Theta^3", strict)
    u = h - 3.0 * lam * ru
    v = h - 3.0 * lam * rv
    return u, v, mu | mv, th


def eval_explicit_onefold(e: ExplicitOnefold, point: Point):
    """Scalar values (u, v) at the point(s); raises SingularPoint at poles."""
    u, v, _, _ = explicit_onefold(e, point, JetShape(0, 0, 0), strict=True)
    return u.value, v.value


def _twofold_thetas(s1: SeedSpec, s2: SeedSpec, point: Point, shape: JetShape) -> dict:
    k1, k2 = s1.k, s2.k
    c1, c2, c3 = s1.c
    p1, p2, p3 = s2.c
    ed1, ed2, sx, cx, _ = _phase_parts(k1, point, shape)
    er1, er2, sd, cd, _ = _phase_parts(k2, point, shape)
    E1, F1 = c1 * ed1, p1 * er1

    A0 = E1 + c3 * ed2 * cx + c2 * ed2 * sx
    A1 = E1 + (c2 + c3) * ed2 * cx + (c2 - c3) * ed2 * sx
    A2 = E1 + 2 * c2 * ed2 * cx - 2 * c3 * ed2 * sx
    A3 = E1 + 2 * (c2 - c3) * ed2 * cx - 2 * (c2 + c3) * ed2 * sx
    B0 = F1 + p2 * er2 * sd + p3 * er2 * cd
    B1 = F1 + p2 * er2 * (cd + sd) + p3 * er2 * (cd - sd)
    B2 = F1 + 2 * p2 * er2 * cd - 2 * p3 * er2 * sd
    B3 = F1 + 2 * p2 * er2 * (cd - sd) - 2 * p3 * er2 * (cd + sd)
    B4 = F1 + p2 * er2 * (cd + sd) + 2 * p3 * er2 * (cd - sd)
    B6 = F1 + (p2 + p3) * er2 * cx + (p2 - p3) * er2 * sx

    sq = k1 ** 2 * A2 * B0 - k2 ** 2 * A0 * B2
    lin = -k1 * A1 * B0 + k2 * A0 * B1
    cub = (-k1 ** 3 * A3 * B0 - k1 ** 2 * k2 * A2 * B1
           + k1 * k2 ** 2 * A1 * B2 + k2 ** 3 * A0 * B3)
    theta3 = -(sq * sq) + lin * cub
    if c2 == c3 == p2 == p3 == 0:
        # lin * cub == (k2^2 - k1^2)^2 E1^2 F1^2 == sq * sq identically here;
        # floating-point evaluation would leave roundoff in place of zero
        theta3 = theta3.zeros_like()
    f4 = k1 * A1 * B0 - k2 * A0 * B4
    theta4 = f4 * f4
    theta5 = -k1 ** 2 * A2 * B0 + k2 ** 2 * A0 * B2
    theta6 = -k1 * A1 * B0 + k2 * A0 * B6
    theta7 = E1 + (c2 + c3) * ed2 * cx + (c2 - c3) * ed2 * sx
    return {"Theta3": theta3, "Theta4": theta4, "Theta5": theta5,
            "Theta6": theta6, "Theta7": theta7}


def explicit_twofold(e: ExplicitTwofold, point: Point, shape: JetShape, strict: bool = False):
    """Jets of u[2] = H + 3 Lam Theta3/Theta4 and
    v[2] = H + 3 Lam Gamma / (Theta^3 Theta3 Theta4^2 Theta6).

    Returns (u, v, mask, thetas); the thetas dict holds values of every
    printed symbol, including Theta_{3,x} and Theta_{4,x}.
    """
    wide = JetShape(shape.order_x + 1, shape.order_y, shape.order_t)
    th = _twofold_thetas(e.seed1, e.seed2, point, wide)
    th.update(_onefold_thetas(e.seed1, point, wide))
    th3x = th["Theta3"].deriv("x")
    th4x = th["Theta4"].deriv("x")
    t = {k: v.truncate(shape) for k, v in th.items()}
    T, T1, T2 = t["Theta"], t["Theta1"], t["Theta2"]
    T3, T4, T5, T6, T7 = (t[f"Theta{i}"] for i in range(3, 8))
    gamma = (T * T3 * T3 * T4 * T5
             - T * T * T3 * T3 * T4 * T6 * T7
             + T * T1 * T3 * T4 * (T4 * T4) * T5
             - T1 * T3 * T4 * T4 * T6 * T7
             - T * T * T * T2 * T4 * T4 * T6
             + T * T * T * T3 * T4 * T6 * th3x
             - T * T * T * T3 * T3 * T6 * th4x)
    lam, h = time_jets(e.coeffs, point, shape)
    ru, mu = _ratio(T3, T4, "Theta4", strict)
    rv, mv = _ratio(gamma, T * T * T * T3 * T4 * T4 * T6, "Theta^3 Theta3 Theta4^2 Theta6", strict)
    u = h + 3.0 * lam * ru
    v = h + 3.0 * lam * rv
    t["Theta3_x"], t["Theta4_x"], t["Gamma"] = th3x, th4x, gamma
    return u, v, mu | mv, t


def eval_explicit_twofold(e: ExplicitTwofold, point: Point):
    u, v, _, _ = explicit_twofold(e, point, JetShape(0, 0, 0), strict=True)
    return u.value, v.value


@dataclass
class DiscrepancyReport:
    fold: int
    max_rel_u: float
    rms_rel_u: float
    max_rel_v: float
    rms_rel_v: float
    compared: int
    masked: int
    explicit_residual: dict
    darboux_residual: dict
    theta_magnitudes: dict
    classification: str
    tolerance: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def table(self) -> str:
        rows = [
            ("fold", f"{self.fold}"),
            ("compared points", f"{self.compared}"),
            ("masked points", f"{self.masked}"),
            ("max rel discrepancy u", f"{self.max_rel_u:.3e}"),
            ("rms rel discrepancy u", f"{self.rms_rel_u:.3e}"),
            ("max rel discrepancy v", f"{self.max_rel_v:.3e}"),
            ("rms rel discrepancy v", f"{self.rms_rel_v:.3e}"),
            ("explicit PDE residual (max u, v)",
             f"{self.explicit_residual['max_res_u']:.3e}, {self.explicit_residual['max_res_v']:.3e}"),
            ("darboux PDE residual (max u, v)",
             f"{self.darboux_residual['max_res_u']:.3e}, {self.darboux_residual['max_res_v']:.3e}"),
        ]
        rows += [(f"max |{k}|", f"{v:.3e}") for k, v in self.theta_magnitudes.items()]
        rows.append(("classification", self.classification))
        w = max(len(r[0]) for r in rows)
        return "\n".join(f"{a:<{w}}  {b}" for a, b in rows) + "\n"


def classify(discrepancy: float, explicit_res: float, darboux_res: float, tol: float) -> str:
    if not darboux_res <= tol:
        return "darboux pipeline fails PDE residual"
    if discrepancy <= tol:
        return "agree"
    if not explicit_res <= tol:
        return "suspected transcription/typo in paper display"
    return "disagree, both satisfy PDE"


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.abs(b))


def discrepancy_report(seeds, coeffs: Coefficients, grid, tolerance: float = 1e-8) -> DiscrepancyReport:
    """Compare the printed one-fold (one seed) or two-fold (two seeds)
    displays with the Wronskian construction over ``grid``."""
    from .darboux import TransformedSolution
    from .verify import jet_derivs, residual_arrays, _report

    seeds = list(seeds)
    coeffs.check_range(grid.t0, grid.t1)
    point = grid.points()
    shape = JetShape(3, 1, 1)
    if len(seeds) == 1:
        eu, ev, emask, thetas = explicit_onefold(ExplicitOnefold(seeds[0], coeffs), point, shape)
    elif len(seeds) == 2:
        eu, ev, emask, thetas = explicit_twofold(ExplicitTwofold(seeds[0], seeds[1], coeffs),
                                                 point, shape)
    else:
        raise ValueError("explicit displays exist for one-fold and two-fold only")
    ts = TransformedSolution(coeffs, tuple(seeds))
    pots = ts.potentials(point, order=(3, 1, 1))
    ev2 = ev.truncate(pots.v.shape)
    t = point.t
    with np.errstate(all="ignore"):
        e_res = residual_arrays(jet_derivs(eu, ev2), coeffs, t, emask)
        d_res = residual_arrays(jet_derivs(pots.u, pots.v), coeffs, t, pots.mask)
        ru = _rel(eu.value, pots.u.value)
        rv = _rel(ev.value, pots.v.value)
    # an explicit-side blow-up is a finding, not a reason to skip the point
    bad = d_res[2] | emask
    ok = ~bad
    e_rep = _report(*e_res[:2], e_res[2] | d_res[2], grid).to_dict()
    d_rep = _report(*d_res, grid).to_dict()

    def stats(r):
        r = r[ok]
        r = np.where(np.isfinite(r), r, np.inf)
        return (float(r.max()), float(np.sqrt(np.mean(r ** 2)))) if r.size else (0.0, 0.0)

    mu, su = stats(ru)
    mv, sv = stats(rv)
    mags = {}
    for k, j in thetas.items():
        vals = np.abs(j.value[ok]) if ok.any() else np.zeros(0)
        mags[k] = float(vals.max()) if vals.size else 0.0
    cls = classify(max(mu, mv), max(e_rep["max_res_u"], e_rep["max_res_v"]),
                   max(d_rep["max_res_u"], d_rep["max_res_v"]), tolerance)
    return DiscrepancyReport(len(seeds), mu, su, mv, sv, int(ok.sum()), int(bad.sum()),
                             e_rep, d_rep, mags, cls, tolerance)
