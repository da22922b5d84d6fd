"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A model parameter, policy or schedule violates its domain."""


class DegenerateChainError(ValueError):
    """Stationary solve requested for a chain that is not irreducible."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""
