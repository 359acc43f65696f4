"""Quasi-steady Stokes flow of a 2D droplet driven by surface tension."""

from .curve import Boundary, ClosedCurve, CurveError

__all__ = ["Boundary", "ClosedCurve", "CurveError"]
__version__ = "0.1.0"
