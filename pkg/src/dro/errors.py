"""Exception types raised across the package."""


class DroError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(DroError):
    """Vector or matrix shapes do not agree."""


class EmptyIntersection(DroError):
    """A data scenario has empty intersection with the support polytope."""


class BadCardinality(DroError):
    """Requested selection size is outside [1, n]."""


class TooLarge(DroError):
    """Exhaustive enumeration would exceed the configured limit."""


class MeanOutOfRange(DroError):
    """Requested mean is incompatible with the given standard deviation."""


class OverlappingDecisions(DroError):
    """Historical decisions overlap, so the grouped closed form does not apply."""


class DegenerateDenominator(DroError):
    """The nominal optimum is zero, so the relative loss is undefined."""


class EmptyInput(DroError):
    """An aggregate was requested over an empty collection."""


class UnboundedDecisionVariable(DroError):
    """An integer decision variable lacks a finite upper bound."""
