"""Semantic exception hierarchy shared by all modules."""


class BlochDiffError(Exception):
    """Base class for every error raised by this library."""


class DiskDomainError(BlochDiffError, ValueError):
    """A point violates the open-disk domain contract |z| <= 1 - margin."""


class DegenerateInputError(BlochDiffError, ValueError):
    """Inputs collapse a denominator (e.g. a ratio at coincident points)."""


class TruncationInsufficient(BlochDiffError):
    """A series truncation order cannot certify the requested tail bound."""


class QuadratureNonConvergence(BlochDiffError):
    """Adaptive quadrature hit its subdivision cap before the tolerance."""


class SelfMapValidationError(BlochDiffError, ValueError):
    """A symbol required to map the disk into itself fails the sampled check."""


class HypothesisUnmet(BlochDiffError):
    """A criterion was invoked outside its hypotheses, e.g. an unbounded
    single operator where boundedness of both is required."""


class ConfigError(BlochDiffError, ValueError):
    """An experiment configuration failed to parse or validate."""
