"""Exception hierarchy.

Every error raised by this package derives from :class:`LogPeriodicError`,
so callers can catch one base class at API boundaries (the CLI maps these
onto exit codes).
"""


class LogPeriodicError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(LogPeriodicError):
    """Malformed input: bad CSV header, unparseable date, non-positive price."""


class EmptyInputError(LogPeriodicError):
    """No usable rows were found in the input."""


class DuplicateTimestampError(LogPeriodicError):
    """Two usable rows share the same timestamp."""


class InsufficientDataError(LogPeriodicError):
    """Fewer data points than the operation requires."""


class DomainError(LogPeriodicError):
    """A value lies outside the mathematical domain of an operation."""


class PhaseDomainError(DomainError):
    """A time falls on the wrong side of the critical time for the phase."""


class SingularityGuardError(DomainError):
    """A time lies closer to the critical time than the singularity guard."""


class DegenerateDesignError(LogPeriodicError):
    """The linear regressor matrix is rank deficient."""


class NoFitError(LogPeriodicError):
    """Every cell of the scan grid was degenerate; no fit exists."""
