"""Exception hierarchy shared across the simulator."""


class LFQSDCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LFQSDCError, ValueError):
    """An input lies outside the region where a formula is defined."""


class InsufficientCheckBits(LFQSDCError):
    """No sifted check bits were available to estimate the forward error rate."""


class CodewordTooLong(LFQSDCError, ValueError):
    """The codeword does not fit on the surviving message carriers."""


class AbortedSession(LFQSDCError):
    """A secure rate was requested from a session that aborted at the check step."""


class InfeasibleDistribution(LFQSDCError, ValueError):
    """Variable-side and check-side edge counts cannot be balanced."""


class EmptyHistory(LFQSDCError, ValueError):
    """Channel prediction was asked for with no history."""


class EmptyRecords(LFQSDCError, ValueError):
    """Error-rate estimation was asked for with no records."""


class DegenerateIntensities(LFQSDCError, ValueError):
    """Decoy intensities make the yield bound's denominator vanish."""


class SeedLengthMismatch(LFQSDCError, ValueError):
    """A Toeplitz seed does not have in_len + out_len - 1 bits."""


class NoConvergence(LFQSDCError):
    """An iterative search exhausted its evaluation budget."""


class Diverged(LFQSDCError):
    """A closed control loop blew up relative to the open-loop disturbance."""


class ParseError(LFQSDCError, ValueError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MonotonicityError(ParseError):
    """A reference series has loss values that are not strictly increasing."""


class WeakTurbulenceWarning(UserWarning):
    """A scintillation index above 1 lies outside the weak-turbulence regime."""
