"""Exception types shared across the package."""


class RglabError(Exception):
    """Base class for all package errors."""


class FactorizationFailure(RglabError):
    """Covariance matrix violates the PSD tolerance."""


class SingularCovariance(RglabError):
    """Covariance determinant too small for a stable density."""


class SingularBlock(RglabError):
    """Conditioning block of a joint covariance is not invertible."""


class DimensionMismatch(RglabError):
    """Array shapes inconsistent with the declared dimensions."""


class DomainError(RglabError):
    """Point lies outside the validity region of a truncated model."""


class DegenerateAtPoint(RglabError):
    """Field variance vanishes at the evaluation point."""


class NonOrthonormalFraming(RglabError):
    """Normal frame fails the orthonormality tolerance."""


class ContainmentViolation(RglabError):
    """Subspace containment makes the requested angle undefined."""


class ZeroPolynomial(RglabError):
    """All coefficients below tolerance; counting is meaningless."""


class DegenerateSystem(RglabError):
    """Resultant vanishes identically; the system has a common component."""


class ExcessiveResampling(RglabError):
    """Too many uncertified Monte Carlo instances."""


class NonFiniteValue(RglabError):
    """Grid evaluation produced nan or inf."""


class TieUnresolved(RglabError):
    """Height ties persist after direction retries."""


class CenterOverlap(RglabError):
    """Sharp-family centers closer than the disjointness radius."""


class ConcavityViolation(RglabError):
    """Reach-equation bridge fails the numeric concavity check."""


class NonTransversalInstance(RglabError):
    """Zero set too close to grid values for a trustworthy count."""


class UnknownExperiment(RglabError):
    """CLI experiment name not registered."""


class InvalidParams(RglabError):
    """CLI parameters fail validation."""
