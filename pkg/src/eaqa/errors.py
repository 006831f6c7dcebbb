"""Exception hierarchy shared across the toolkit.

Exit-code mapping in the CLI relies on these three branches:
config problems (2), data problems (3), network problems (4).
"""


class EaqaError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EaqaError):
    """Invalid run configuration (bad profile name, missing file, bad policy)."""


class DataError(EaqaError):
    """Malformed or inconsistent data (parse failures, invariant violations)."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)


class PolicyError(DataError):
    """A QA dataset violates the train/test mixing policy."""


class AugmentError(DataError):
    """An augmentation precondition does not hold for the given argument."""


class ScoringError(DataError):
    """Predictions reference unknown documents/events or lack required fields."""


class NetworkError(EaqaError):
    """Base class for completion-endpoint failures."""

    def __init__(self, message: str, *, status: int | None = None):
        self.status = status
        super().__init__(message)


class AuthError(NetworkError):
    """Credential missing or rejected by the endpoint."""


class RateLimitError(NetworkError):
    """Retry budget exhausted on HTTP 429."""


class TransientError(NetworkError):
    """Retry budget exhausted on timeouts or 5xx responses."""
