"""Exception hierarchy shared by all envlab modules."""


class EnvlabError(Exception):
    """Base class for every error raised by envlab."""


class ValidationError(EnvlabError, ValueError):
    """Invalid input detected before any numerics run."""


class EmptySetError(ValidationError):
    pass


class AlignmentError(ValidationError):
    pass


class DomainMismatch(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class InvalidExponent(ValidationError):
    pass


class InvalidProfile(ValidationError):
    pass


class InvalidWitness(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class NotAMinimizer(ValidationError):
    pass


class WitnessOutOfDomain(ValidationError):
    pass


class NumericalError(EnvlabError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input."""


class ConvergenceError(NumericalError):
    pass
