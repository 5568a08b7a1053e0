"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class NoPositiveSteadyState(ValueError):
    """The positive steady state does not exist for the given parameters."""


class ConfigError(ValueError):
    """Invalid solver or run configuration."""


class IntegrationError(RuntimeError):
    """The integrator produced non-finite, exploding or negative states."""
