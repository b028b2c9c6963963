"""Exception hierarchy shared by every finsler_lab module."""


class FinslerError(Exception):
    """Base class for all library errors."""


class UnsupportedConfigurationError(FinslerError):
    """Requested jet order, dimension or quadrature mode is not supported."""


class OrderExceededError(FinslerError):
    """A partial derivative was requested beyond the order carried by a jet."""


class DomainError(FinslerError, ValueError):
    """An elementary function was evaluated outside its smooth domain."""


class OutOfDomainError(FinslerError, ValueError):
    """A base point lies outside the admissible domain of a metric."""


class InvalidParameterError(FinslerError, ValueError):
    """Catalog parameters violate the family's defining inequality."""


class PositivityViolationError(FinslerError, ValueError):
    """The one-form is too long: its alpha-norm reached 1."""


class DegenerateMetricError(FinslerError):
    """The fundamental tensor is singular or badly conditioned."""


class DegenerateFlagError(FinslerError, ValueError):
    """The transverse edge of a flag is parallel to the flagpole."""


class NotApplicableError(FinslerError):
    """The requested identity needs data the metric does not carry."""


class SingularCaseError(FinslerError):
    """mu + 4 c^2 vanishes, so the B-family formulas do not apply."""


class StiffnessError(FinslerError):
    """The adaptive integrator's step size underflowed."""
