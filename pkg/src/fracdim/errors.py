"""Exception types shared across the package, mapped to CLI exit codes."""


class InvalidConfig(ValueError):
    """Malformed or out-of-contract input/configuration (CLI exit code 2)."""


class PreconditionFailed(ValueError):
    """A named theorem hypothesis required by the computation does not hold
    for the given system (CLI exit code 3)."""


class DiagnosticsFailed(RuntimeError):
    """An empirical estimator's internal diagnostics rejected the run
    (CLI exit code 4)."""
