"""Exception types shared across the package."""


class WarpGeoError(Exception):
    """Base class for all package-specific errors."""


class ExtremeAtPole(WarpGeoError):
    """Extreme warp evaluated on a pole fiber with clamping disabled."""


class ExtremeUnrectifiable(WarpGeoError):
    """Pole fibers of the extreme metric have no finite length."""


class QuadratureNoConvergence(WarpGeoError):
    """Adaptive quadrature could not reach the requested tolerance."""


class NoThreshold(WarpGeoError):
    """Envelope-threshold validation failed (should never happen)."""


class DeltaTooLarge(WarpGeoError):
    """Circle separation outside the validity domain of a closed-form bound."""


class MonotonicityViolation(WarpGeoError):
    """A quantity that must be nondecreasing decreased beyond tolerance."""


class SingularNode(WarpGeoError):
    """Unrestricted extreme-warp grid touches a pole without clamping."""


class Unreachable(WarpGeoError):
    """No path between the requested grid nodes."""


class OutsideTube(WarpGeoError):
    """Query point lies inside the excluded tube of a restricted grid."""


class ExponentCondition(WarpGeoError):
    """Covering-exponent condition 1 + 1/(m-1) < p not satisfied."""


class ConfigError(WarpGeoError):
    """Invalid experiment configuration."""
