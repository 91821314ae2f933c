"""Exact-arithmetic toolkit for a boundary-extended Temperley-Lieb loop model.

Subpackages by topic:

* ``laurent`` -- big-rational and sixth-root-of-unity scalars, multivariate
  Laurent polynomials, rational scalars, divided differences;
* ``linkpatterns`` -- right-extended link patterns and the one-boundary
  Temperley-Lieb action;
* ``operators`` -- R- and K-matrices, scattering matrices, exact identity
  verifiers (unitarity, Yang-Baxter, reflection, commutation);
* ``qkz`` -- construction of the minimal-degree Laurent-polynomial solution
  of the boundary difference system, with structural checks and recurrences;
* ``sumrules`` -- component sums at the stochastic point, symplectic
  characters, product/determinant evaluations, refined density;
* ``groundstate`` -- the stochastic Hamiltonian and its exact
  Perron-Frobenius eigenvector over polynomials in the boundary weight;
* ``fpl`` -- enumeration of doubly-symmetric fully-packed-loop
  configurations, the alternating-sign-matrix bijection, and conjecture
  verification against the exact ground state;
* ``cli`` -- the ``loopmodel`` command-line front end.
"""

from .errors import (
    AlgebraError,
    BijectionError,
    ConstructionError,
    LoopModelError,
    PatternError,
    PoleError,
    VerificationError,
)
from .laurent import (
    EPS,
    OMEGA,
    Cyclotomic6,
    LaurentRing,
    MultiLaurent,
    RatScalar,
    divided_difference,
    site_divided_difference,
    site_tilde_difference,
    tilde_difference,
)

__all__ = [
    "AlgebraError",
    "BijectionError",
    "ConstructionError",
    "Cyclotomic6",
    "EPS",
    "LaurentRing",
    "LoopModelError",
    "MultiLaurent",
    "OMEGA",
    "PatternError",
    "PoleError",
    "RatScalar",
    "VerificationError",
    "divided_difference",
    "site_divided_difference",
    "site_tilde_difference",
    "tilde_difference",
]

__version__ = "0.1.0"
