"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition (grid mismatch,
    inadmissible exponents, non-finite samples, ...)."""


class ConfigurationError(ValueError):
    """A run configuration is invalid or unstable (bad parameter range,
    CFL violation at construction time, malformed manifest)."""


class SolverAbort(RuntimeError):
    """A time integration was stopped mid-run: NaN/Inf in the state or the
    vacuum guard tripped.  Carries the diagnostic message and the time."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t={t:.6g})")
        self.t = t
