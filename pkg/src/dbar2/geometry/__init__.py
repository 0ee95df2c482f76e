from .profiles import (
    phi, phi_d1, phi_d2, phi_d3,
    phi_convex_threshold, phi_lemma_threshold, phi_slope_root,
    psi_bump, psi_bump_d1, psi_bump_d2,
    ChiSpec, build_chi, chi, chi_d1, chi_d2,
)
from .domains import (
    CPoint2, DomainSpec,
    ball, bidisc, omega1, omega2, example1, example2,
    rho, grad_rho, membership, bounding_box, interior_anchor,
    dist_to_boundary, flat_ladder, domain_info,
)
from .patch import hessian_min_eigenvalue, choose_patch_constant
from .charts import BoundaryChart, boundary_charts, disc_chart

__all__ = [name for name in dir() if not name.startswith("_")]
