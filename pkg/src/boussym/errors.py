"""Exception types shared across the package."""


class BoussymError(Exception):
    pass


class JetError(BoussymError, ValueError):
    """A jet is missing entries or contains non-finite values."""


class StencilError(BoussymError, IndexError):
    """A finite-difference stencil would leave the grid."""


class CatalogMismatchError(BoussymError, ValueError):
    """Generator family requested for the wrong branch (f = 0 vs f != 0)."""


class OffManifoldError(BoussymError, ValueError):
    """A jet does not satisfy the system and its consequences."""


class RegimeError(BoussymError, ValueError):
    """Parameters fall outside the analysed regime (e.g. K < 0, B = 0)."""


class SingularPointError(BoussymError, ValueError):
    """Evaluation at a point where a formula is singular."""


class IntegrationError(BoussymError, RuntimeError):
    """An integrator could not reach the requested accuracy."""


class QuadratureError(BoussymError, RuntimeError):
    pass
