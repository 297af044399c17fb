"""Exception types raised across the package."""


class BeeRouteError(Exception):
    """Base class for all package errors."""


class InvalidConfig(BeeRouteError, ValueError):
    pass


class CoincidentPoints(BeeRouteError, ValueError):
    """Raised when a quadrant is requested for a point lying on the origin."""


class UnknownNode(BeeRouteError, KeyError):
    pass


class SaturatedLink(BeeRouteError, ZeroDivisionError):
    """Traffic intensity is undefined on a link with no available bandwidth."""


class NoFeasibleLink(BeeRouteError):
    """No candidate link clears the bandwidth threshold."""


class NoViableCandidate(BeeRouteError):
    """Every candidate has zero fitness, so no selection law exists."""


class DeadEnd(BeeRouteError):
    """A path cannot be extended any further."""
