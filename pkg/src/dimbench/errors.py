"""Exception hierarchy used across the benchmark suite."""


class DimbenchError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(DimbenchError):
    """A file is not in the expected format (bad magic, malformed CSV)."""


class CorruptionError(DimbenchError):
    """A file in the right format is truncated or internally inconsistent."""


class VersionError(DimbenchError):
    """A file uses a format revision or dtype this build does not support."""


class ParseError(FormatError):
    """Text input (CSV) could not be parsed; message carries row/column."""


class ConfigError(DimbenchError):
    """An experiment configuration is invalid."""


class CellError(DimbenchError):
    """A single benchmark cell failed; carries the cell coordinates."""

    def __init__(self, message: str, *, dim: int, method: str, seed_index: int):
        super().__init__(message)
        self.dim = dim
        self.method = method
        self.seed_index = seed_index
