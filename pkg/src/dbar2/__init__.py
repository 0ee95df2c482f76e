"""Numerical Henkin-type solution operators for the dbar equation on
explicit convex domains in C^2, with the estimates behind them exposed as
testable predicates and probes."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    CPoint2, DomainSpec,
    ball, bidisc, omega1, omega2, example1, example2,
    rho, grad_rho, membership, boundary_charts,
    phi, psi_bump, build_chi, chi,
    hessian_min_eigenvalue, choose_patch_constant,
)
