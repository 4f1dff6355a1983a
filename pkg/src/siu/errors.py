"""Exception types shared across the package.

Each carries the process exit code the CLI maps it to.
"""


class SIUError(Exception):
    exit_code = 1


class ConfigError(SIUError):
    """Malformed or out-of-range configuration."""

    exit_code = 2


class ValidationError(ConfigError):
    """Step-size parameters violate the selection constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InvariantViolation(SIUError):
    exit_code = 3


class DivergenceError(SIUError):
    """NaN or overflow in a recursion or in the estimator state."""

    exit_code = 4


class InconclusiveError(SIUError):
    """A finite-horizon check did not have enough samples to decide."""
