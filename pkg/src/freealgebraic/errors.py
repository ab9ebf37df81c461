"""Exception hierarchy shared by all modules."""


class FreeAlgebraicError(Exception):
    """Base class; ``module`` names the subsystem that raised it."""

    module = "freealgebraic"


# series
class IndeterminateValuation(FreeAlgebraicError):
    module = "series"


class DivisionByZero(FreeAlgebraicError, ZeroDivisionError):
    module = "series"


class CompositionDomain(FreeAlgebraicError):
    module = "series"


class SingularMatrix(FreeAlgebraicError):
    module = "series"


# laws
class InsufficientOrder(FreeAlgebraicError):
    module = "laws"


class NotAState(FreeAlgebraicError):
    module = "laws"


class UnknownPreset(FreeAlgebraicError):
    module = "laws"


# ncpoly
class ParseError(FreeAlgebraicError):
    module = "ncpoly"

    def __init__(self, message, position=None, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = message
        if position is not None:
            detail += f" at position {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class DimensionMismatch(FreeAlgebraicError, ValueError):
    module = "ncpoly"


# realize
class NotAffine(FreeAlgebraicError):
    module = "realize"


# fock
class DepthOverflow(FreeAlgebraicError):
    module = "fock"


# sde
class SingularA0(FreeAlgebraicError):
    module = "sde"


class NonContractive(FreeAlgebraicError):
    module = "sde"


class NotSummable(FreeAlgebraicError):
    module = "sde"


# algcert
class InsufficientPrecision(FreeAlgebraicError):
    module = "algcert"


class ZeroPolynomial(FreeAlgebraicError):
    module = "algcert"


class NotMonic(FreeAlgebraicError):
    module = "algcert"


class NotFound(FreeAlgebraicError):
    module = "algcert"

    def __init__(self, message, trace=()):
        self.trace = list(trace)
        super().__init__(message)


class IllConditioned(FreeAlgebraicError):
    module = "algcert"


class NotFoundWithin(NotFound):
    """No shift up to the search limit gave a nonsingular annihilator."""
