"""Machine verification of Lie symmetry, equivalence and invariant claims for
the generalized barotropic vorticity equation and its parameterization schemes."""

__version__ = "0.1.0"
