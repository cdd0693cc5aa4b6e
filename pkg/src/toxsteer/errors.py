"""Exception hierarchy shared across the package."""


class ToxsteerError(Exception):
    """Base class for all package errors."""


class ContractViolation(ToxsteerError, ValueError):
    """An operation was called with arguments that break its contract
    (length mismatch, non-finite values, out-of-range parameters)."""


class InputError(ToxsteerError, ValueError):
    """Bad user-supplied input: malformed files, empty corpora, mismatched ids."""


class TransportError(ToxsteerError, RuntimeError):
    """A remote scorer or backend could not be reached or answered garbage.

    Carries the endpoint so the failure is attributable.
    """

    def __init__(self, message: str, endpoint: str | None = None):
        if endpoint:
            message = f"{message} (endpoint: {endpoint})"
        super().__init__(message)
        self.endpoint = endpoint


class GenerationError(ToxsteerError, RuntimeError):
    """A failure inside the decode loop, annotated with where it happened."""

    def __init__(self, message: str, step: int | None = None,
                 interpretation: int | None = None):
        parts = [message]
        if interpretation is not None:
            parts.append(f"interpretation {interpretation}")
        if step is not None:
            parts.append(f"step {step}")
        super().__init__(" | ".join(parts))
        self.step = step
        self.interpretation = interpretation
