"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument or violated precondition."""


class ConfigError(ParameterError):
    """Invalid scenario/sweep configuration; the message lists the offending fields."""


class CapacityError(ParameterError):
    """Problem size exceeds a configured capacity limit."""


class NumericalError(RuntimeError):
    """Propagator failure, with diagnostic context attached."""

    def __init__(self, message: str, **diagnostics):
        if diagnostics:
            detail = ", ".join(f"{k}={v}" for k, v in sorted(diagnostics.items()))
            message = f"{message} ({detail})"
        super().__init__(message)
        self.diagnostics = diagnostics
