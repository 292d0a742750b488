"""Time profiles Lambda(t), H(t) and the derived DFCB coefficients.

    P = 1/Lambda,  R = -H/Lambda,  S = Lambda'/Lambda,  T = H' - S H
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateLambda

LAMBDA_MIN = 1e-8

PROFILE_PARAMS = {
    "constant": ("c",),
    "linear": ("a", "b"),
    "exponential": ("a", "b"),
    "sinusoidal-offset": ("a", "omega", "phi", "d"),
}


@dataclass(frozen=True)
class TimeProfile:
    """One member of the closed-form profile catalog.

    constant: c;  linear: a*t + b;  exponential: a*exp(b*t);
    sinusoidal-offset: a*sin(omega*t + phi) + d.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PROFILE_PARAMS:
            raise ConfigError("kind", f"unknown profile kind {self.kind!r}")
        expected = set(PROFILE_PARAMS[self.kind])
        if set(self.params) != expected:
            raise ConfigError("params", f"{self.kind} profile needs exactly "
                              f"{sorted(expected)}, got {sorted(self.params)}")
        object.__setattr__(self, "params", {k: float(self.params[k])
                                            for k in PROFILE_PARAMS[self.kind]})

    @classmethod
    def constant(cls, c):
        return cls("constant", {"c": c})

    @classmethod
    def linear(cls, a, b):
        return cls("linear", {"a": a, "b": b})

    @classmethod
    def exponential(cls, a, b):
        return cls("exponential", {"a": a, "b": b})

    @classmethod
    def sinusoidal(cls, a, omega=1.0, phi=0.0, d=0.0):
        return cls("sinusoidal-offset", {"a": a, "omega": omega, "phi": phi, "d": d})

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "TimeProfile":
        return cls(d["kind"], dict(d.get("params", {})))

    def __hash__(self):
        return hash((self.kind, tuple(self.params.items())))

    def __call__(self, t):
        return eval_profile(self, t, 0)[0]


def eval_profile(p: TimeProfile, t, order: int = 0) -> list:
    """[p(t), p'(t), ..., p^(order)(t)] from the closed form."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be in 0..3")
    t = np.asarray(t, dtype=float)
    q = p.params
    if p.kind == "constant":
        out = [np.full_like(t, q["c"])] + [np.zeros_like(t)] * 3
    elif p.kind == "linear":
        out = [q["a"] * t + q["b"], np.full_like(t, q["a"]), np.zeros_like(t), np.zeros_like(t)]
    elif p.kind == "exponential":
        e = q["a"] * np.exp(q["b"] * t)
        out = [e * q["b"] ** n for n in range(4)]
    else:
        a, w, phi = q["a"], q["omega"], q["phi"]
        arg = w * t + phi
        s, c = np.sin(arg), np.cos(arg)
        out = [a * s + q["d"], a * w * c, -a * w ** 2 * s, -a * w ** 3 * c]
    out = out[: order + 1]
    if t.ndim == 0:
        out = [float(v) for v in out]
    return out


@dataclass(frozen=True)
class Coefficients:
    lam: TimeProfile
    h: TimeProfile

    def check_lambda(self, t):
        lam = np.asarray(eval_profile(self.lam, t, 0)[0])
        bad = np.abs(lam) < LAMBDA_MIN
        if np.any(bad):
            raise DegenerateLambda(f"|Lambda(t)| < {LAMBDA_MIN:g} at t = "
                                   f"{np.asarray(t)[bad].ravel()[:5] if np.ndim(t) else t}")

    def check_range(self, t0: float, t1: float, samples: int = 2001):
        """Reject Lambda profiles that come near zero anywhere on [t0, t1]."""
        ts = np.linspace(t0, t1, samples)
        self.check_lambda(ts)
        lam = eval_profile(self.lam, ts, 0)[0]
        if np.any(np.sign(lam) != np.sign(lam[0])):
            raise DegenerateLambda(f"Lambda changes sign on [{t0}, {t1}]")


def coeff_S(c: Coefficients, t):
    c.check_lambda(t)
    lam, dlam = eval_profile(c.lam, t, 1)
    return dlam / lam


def coeff_T(c: Coefficients, t):
    h, dh = eval_profile(c.h, t, 1)
    return dh - coeff_S(c, t) * h


def coeff_P(c: Coefficients, t):
    c.check_lambda(t)
    return 1.0 / eval_profile(c.lam, t, 0)[0]


def coeff_R(c: Coefficients, t):
    c.check_lambda(t)
    return -eval_profile(c.h, t, 0)[0] / eval_profile(c.lam, t, 0)[0]
