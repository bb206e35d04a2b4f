"""Exception types shared across the package."""


class DppCftpError(Exception):
    """Base class for all package errors."""


class ParameterError(DppCftpError, ValueError):
    """Invalid or inconsistent model parameters."""


class TruncationError(DppCftpError):
    """Coverage target unreachable within the allowed truncation order."""


class SpectrumError(DppCftpError):
    """A retained eigenvalue is >= 1, so the J-series does not exist."""


class DomainError(DppCftpError, ValueError):
    """A point lies outside the simulation window."""


class DegeneratePointError(DppCftpError):
    """Adding a point would make the configuration's Gram matrix singular."""


class ReplayError(DppCftpError):
    """An event stream is internally inconsistent during replay."""


class SandwichViolationError(DppCftpError):
    """The L <= U <= D ordering broke during coupling (internal bug)."""


class NonCoalescenceError(DppCftpError):
    """The coupling did not coalesce within the configured maximum depth."""

    def __init__(self, max_depth, gap):
        super().__init__(
            f"no coalescence up to depth {max_depth}; sandwich gap |U\\L| = {gap}"
        )
        self.max_depth = max_depth
        self.gap = gap


class InsufficientDataError(DppCftpError):
    """Not enough samples to form the requested estimate."""


class DiscretizationError(DppCftpError):
    """Grid discretization produced an eigenvalue outside [0, 1]."""


class BatchError(DppCftpError):
    """One or more replications of a batch failed.

    Successful reports are preserved on the exception so callers can
    inspect partial results.
    """

    def __init__(self, failures, reports):
        seeds = [seed for seed, _ in failures]
        super().__init__(f"{len(failures)} replication(s) failed (seeds {seeds})")
        self.failures = failures
        self.reports = reports
