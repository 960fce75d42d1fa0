"""Exception hierarchy shared by all modules."""


class LyapcertError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LyapcertError):
    """An operand lies outside the mathematical domain of an operation."""


class UsageError(LyapcertError):
    """The caller violated a documented precondition."""


class VerificationError(LyapcertError):
    """A rigorous certification step could not be completed.

    The computation is sound but unproven; callers typically retry with
    more generous discretization parameters.
    """


class ClusterError(VerificationError):
    """Eigenvalue enclosures overlap so index matching fails."""


class HomotopyStalled(VerificationError):
    """The homotopy step policy found no admissible next step."""


class ApproxFailure(LyapcertError):
    """A purely floating-point approximation stage failed to converge."""


class PositivityFailed(VerificationError):
    """A validated eigenpair exists but could not be identified as dominant."""


class BracketFailure(LyapcertError):
    """No certified interior minimum was found on the scanned grid."""


class OracleFailure(LyapcertError):
    """A non-rigorous cross-check could not produce an estimate."""
