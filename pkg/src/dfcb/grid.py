"""Uniform sample grids over (x, y, t)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .jet import Point


@dataclass(frozen=True)
class GridSpec:
    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int
    t0: float
    t1: float
    nt: int

    def __post_init__(self):
        for ax in "xyt":
            lo, hi, n = getattr(self, f"{ax}0"), getattr(self, f"{ax}1"), getattr(self, f"n{ax}")
            if not hi > lo:
                raise ConfigError(f"grid.{ax}1", f"must exceed {ax}0 ({lo} >= {hi})")
            if int(n) != n or n < 1:
                raise ConfigError(f"grid.n{ax}", f"count must be a positive integer, got {n}")

    def axis(self, ax: str) -> np.ndarray:
        lo, hi, n = getattr(self, f"{ax}0"), getattr(self, f"{ax}1"), getattr(self, f"n{ax}")
        if n == 1:
            return np.array([float(lo)])
        return np.linspace(lo, hi, n)

    @property
    def size(self) -> int:
        return self.nx * self.ny * self.nt

    def points(self) -> Point:
        """Nodes with batch shape (nt, ny, nx): C-order ravel runs x fastest."""
        t, y, x = np.meshgrid(self.axis("t"), self.axis("y"), self.axis("x"), indexing="ij")
        return Point.make(x, y, t)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        try:
            return cls(**{k: (int(d[k]) if k.startswith("n") else float(d[k]))
                          for k in ("x0", "x1", "nx", "y0", "y1", "ny", "t0", "t1", "nt")})
        except KeyError as e:
            raise ConfigError(f"grid.{e.args[0]}", "missing") from None

    @classmethod
    def cube(cls, lo: float, hi: float, n: int) -> "GridSpec":
        return cls(lo, hi, n, lo, hi, n, lo, hi, n)
