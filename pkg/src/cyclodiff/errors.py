"""Exception types shared across the package."""


class PadicError(Exception):
    """Base class for all arithmetic errors raised by this package."""


class DivisionByZeroPadic(PadicError):
    """Division or inversion of an element that is zero at working precision."""


class InsufficientPrecision(PadicError):
    """An operation needed more known digits than the operand carries."""


class ValuationOfZero(PadicError):
    """The valuation of an (indistinguishable-from-)zero element was requested."""


class DomainError(PadicError):
    """Input is outside the mathematical domain of the operation."""
