"""Eta and Froyshov invariants of hyperbolic rational homology spheres."""

from .errors import HyperEtaError

__version__ = "0.1.0"
__all__ = ["HyperEtaError", "__version__"]
