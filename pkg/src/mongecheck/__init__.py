"""Numerical verification harness for the Monge equation lam*lam_x = lam_t.

The package has four parts: Carlson-form elliptic integrals with an
independent quadrature oracle (:mod:`mongecheck.elliptic`), candidate
solution fields, implicit solvers and residual operators for the equation
itself (:mod:`mongecheck.core`), quantitative audits of a family of
asserted closed-form identities (:mod:`mongecheck.audits`), and a
deterministic command-line front end (:mod:`mongecheck.cli`).
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError

__all__ = ["ConvergenceError", "DomainError", "__version__"]
