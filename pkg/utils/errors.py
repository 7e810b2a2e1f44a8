class ConditionalBayesError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ConditionalBayesError, ValueError):
    pass


class DegenerateProbability(DomainError):
    pass


class LevelOutOfRange(DomainError):
    pass


class NonBinaryOutcome(DomainError):
    pass


class FactorizationFailure(ConditionalBayesError):
    """Raised when a precision matrix is not numerically positive definite."""


class RootNotBracketed(ConditionalBayesError):
    pass


class InsufficientDraws(ConditionalBayesError):
    pass


class DegenerateDraws(InsufficientDraws):
    """All retained draws are identical, so no interval of positive width exists."""


class EmptyInput(ConditionalBayesError):
    pass


class FitError(ConditionalBayesError):
    pass


class Nonconvergence(FitError):
    pass


class Separation(FitError):
    pass


class EmptySelection(FitError):
    pass


class ConfigError(ConditionalBayesError):
    pass


class ParseError(ConditionalBayesError):
    def __init__(self, message: str, row: int = None, column: str = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ReportIoError(ConditionalBayesError):
    pass


class ConstantColumnWarning(UserWarning):
    pass
