"""Exception hierarchy shared by every rxunpack module."""


class RxError(Exception):
    """Base class for all library errors."""


class InvalidStateError(RxError, ValueError):
    pass


class FiringError(RxError):
    """A reaction fired although one of its reactants was exhausted."""


class DomainError(RxError, ValueError):
    pass


class AssumptionError(RxError, ValueError):
    """A derivation was asked to violate one of its modelling assumptions."""


class ExpansionError(RxError):
    """Unpacking a compound rate law failed."""


class RateLawTypeError(ExpansionError, TypeError):
    pass


class NamingError(ExpansionError):
    pass


class UnsupportedOrderError(ExpansionError):
    pass


class CompositionError(RxError):
    pass


class NumericalError(RxError, ArithmeticError):
    pass


class StiffnessError(NumericalError):
    pass


class InsufficientDataError(RxError, ValueError):
    pass


class UnfittableError(RxError, ValueError):
    pass


class SaturationRangeError(RxError, ValueError):
    pass


class GridError(RxError, ValueError):
    pass


class ModelSyntaxError(RxError, ValueError):
    """Parse failure in a ``.rxn`` document; carries the 1-based position."""

    def __init__(self, message, line, column=1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
