"""Exact coefficient calculus and numerical checks for weighted (Carleman-type)
estimates of ``alpha d_t + d_x^n``, with a Caputo toolkit for a 1/3-order
diffusion application."""

from . import combinatorics, conjugation, fracapp, ibp, numverify, reports, stencils

__version__ = "0.1.0"

__all__ = ["combinatorics", "conjugation", "fracapp", "ibp", "numverify", "reports", "stencils", "__version__"]
