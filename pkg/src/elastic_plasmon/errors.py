"""Exception types shared across the package."""


class ElastoPlasmonError(ValueError):
    """Base class for argument and numerical errors raised by this package."""


class DegenerateMaterialError(ElastoPlasmonError):
    """Lamé pair makes a closed form divide by zero (mu = 0 or lambda + 2 mu = 0)."""


class SingularityError(ElastoPlasmonError):
    """Kernel evaluated at its singular point."""


class SingularSystemError(ElastoPlasmonError):
    """Modal system has a vanishing denominator (exact resonance with no loss)."""


class PoleError(ElastoPlasmonError):
    """Critical-value formula evaluated at its own pole."""


class DegreeError(ElastoPlasmonError):
    """Degree outside the admissible range of a branch or mode family."""


class ResolutionError(ElastoPlasmonError):
    """Quadrature grid too coarse for the requested truncation degree."""


class DomainError(ElastoPlasmonError):
    """Evaluation point outside the region where the representation holds."""


class AccuracyError(ElastoPlasmonError):
    """Oracle evaluation requested where its accuracy cannot be guaranteed."""
