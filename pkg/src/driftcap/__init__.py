"""Validated numerics for drift orbits in the generalized standard map.

The pipeline runs manifold charts (cone conditions or the parameterization
method), a verified transversal homoclinic orbit, and interval
certification of the strip hypotheses that give drift in the action.
"""

from .interval import IMat, IVec, Interval, IntervalError

__version__ = "0.1.0"

__all__ = ["IMat", "IVec", "Interval", "IntervalError", "__version__"]
