"""Weighted last-step min-max online regression (WEMM).

Primal and kernel learners, second-order baselines, batch comparators and
numeric certificates for the regret identities and bounds.
"""
from ._backend import COMPILED
from .errors import WemmError

__version__ = "0.1.0"
__all__ = ["COMPILED", "WemmError", "__version__"]
