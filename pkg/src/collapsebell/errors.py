"""Shared exception types."""


class ConfigError(Exception):
    """Malformed or schema-violating scenario configuration."""


class ModelError(Exception):
    """A collapse model cannot produce a usable prediction (e.g. infinite collapse time)."""
