"""Numerical laboratory for the sibling-swap dyadic shift, martingale
transforms along memory random walks, and the Hilbert transform on the
torus: exact shift algebra, Monte-Carlo convergence of stopped martingales,
the projection constant 8G/pi^2, kernel averaging nullity, and two-sided
operator-norm experiments."""

__version__ = "0.1.0"

from ._kernels import backend_name

__all__ = ["__version__", "backend_name"]
