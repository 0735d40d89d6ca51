"""Exception types raised across the package."""


class NeuroevoError(Exception):
    """Base class for all package errors."""


class ShapeError(NeuroevoError, ValueError):
    """A genome or sample does not match the expected dimensions."""


class InputError(NeuroevoError, ValueError):
    """An argument is outside its valid domain."""


class ConfigError(NeuroevoError, ValueError):
    """A configuration value is invalid or inconsistent."""


class StateError(NeuroevoError, RuntimeError):
    """An operation was called on an object in the wrong state."""


class UsageError(NeuroevoError, RuntimeError):
    """An environment was driven past its terminal state."""
