"""Typed error signals shared across the package.

Each exception carries a stable ``code`` string so callers (and the CLI)
can map failures to exit codes without string-matching messages.
"""


class Dbar2Error(Exception):
    code = "error"


class UnsupportedSmoothOperation(Dbar2Error):
    """Raised when a smooth-only operation is applied to a non-smooth domain."""

    code = "unsupported-smooth-operation"


class SingularityHit(Dbar2Error):
    """Kernel evaluated too close to its singular set (|zeta - z| or |F| underflow)."""

    code = "singularity-hit"


class OutOfNeighborhood(Dbar2Error):
    """Lower-bound predicate queried outside its calibrated validity region."""

    code = "out-of-neighborhood"


class AuditFailure(Dbar2Error):
    """A sampling audit (patch constant, convexity) could not be satisfied."""

    code = "audit-failure"


class StencilOutsideDomain(Dbar2Error):
    """A finite-difference stencil point left the domain."""

    code = "stencil-outside-domain"


class ConfigError(Dbar2Error):
    """Invalid configuration file or CLI flag combination."""

    code = "config-error"
