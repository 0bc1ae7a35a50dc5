"""Exception hierarchy shared by all hullcert modules."""


class HullCertError(Exception):
    """Base class for every error raised by hullcert."""


class DimensionError(HullCertError, ValueError):
    """Shape mismatch, non-square input, or malformed matrix data."""


class InvalidIndexSet(HullCertError, ValueError):
    pass


class ComplexityError(HullCertError):
    """Requested enumeration exceeds the configured dimension cap."""


class SingularMatrix(HullCertError, ArithmeticError):
    pass


class IndeterminateError(HullCertError):
    """A decision fell inside the tolerance Zero band."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotNMatrix(HullCertError):
    pass


class NoValidPartition(HullCertError):
    pass


class NotAlmostP(HullCertError):
    pass


class DiagonalPreconditionViolated(HullCertError):
    pass


class PreconditionError(HullCertError):
    pass


class NotCertified(PreconditionError):
    pass


class UnisignedInput(PreconditionError):
    pass


class NotMember(PreconditionError):
    pass


class OracleDisagreement(HullCertError):
    """A certified hull produced a sample failing the class predicate."""
