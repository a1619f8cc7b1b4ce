"""Exception hierarchy shared by the simulator, solver and CLI."""


class SpotmixError(Exception):
    """Base error; `exit_code` is what the CLI exits with."""
    exit_code = 1


class ConfigError(SpotmixError, ValueError):
    """Experiment configuration failed validation."""
    exit_code = 2


class TraceFormatError(SpotmixError, ValueError):
    """A trace or workload file does not match its schema."""
    exit_code = 2


class TraceValidationError(SpotmixError):
    """A trace parsed but holds impossible values (negative capacity, no zones).

    Not a ValueError, so pydantic validators re-raise it unchanged.
    """
    exit_code = 2


class ZoneLookupError(SpotmixError, LookupError):
    """Unknown zone id or tick outside the trace horizon."""
    exit_code = 2


class DomainError(SpotmixError, ValueError):
    """Arguments outside the domain where a formula is defined."""
    exit_code = 2


class InfeasibleError(SpotmixError):
    """No schedule satisfies the availability constraint."""
    exit_code = 3


class SolverBudgetError(SpotmixError):
    """Instance is larger than the exact solvers can handle; shrink it."""
    exit_code = 4
