"""Exact solutions of the damped-forced (2+1)-dimensional coupled Burgers
system by N-fold Darboux transformation, checked by substitution."""

from .coeffs import Coefficients, TimeProfile
from .darboux import TransformedSolution, sample_solution
from .grid import GridSpec
from .jet import Jet, JetShape, Point
from .seeds import SeedSpec

__all__ = ["Coefficients", "TimeProfile", "TransformedSolution", "sample_solution",
           "GridSpec", "Jet", "JetShape", "Point", "SeedSpec"]
