"""Exception types shared across the package."""


class FramelessAlohaError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(FramelessAlohaError, ValueError):
    """An argument is outside its valid range or structurally invalid."""


class ConfigError(FramelessAlohaError, ValueError):
    """A config file, override, or manifest could not be parsed."""
