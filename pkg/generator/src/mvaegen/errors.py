"""Exception hierarchy for the embedding generator."""


class MvaegenError(Exception):
    """Base class for all generator errors."""


class ConfigError(MvaegenError):
    """Invalid configuration or arguments."""


class FormatError(MvaegenError):
    """A file does not follow its declared format."""


class CorruptionError(MvaegenError):
    """A file is structurally damaged (truncated, trailing bytes)."""


class DivergenceError(MvaegenError):
    """Training produced a non-finite loss; carries the epoch trace."""
