"""Exception types shared across the pipeline; the CLI maps them to exit codes."""


class ConfigError(Exception):
    """Bad or missing configuration (exit code 2)."""


class DataError(ValueError):
    """Input data violates a precondition (exit code 3)."""
