"""Exception hierarchy. Every error carries a stable machine-readable code."""


class OccubeError(Exception):
    """Base class for all engine errors.

    ``code`` is a stable, kebab-case identifier (e.g. ``"unknown-event-id"``)
    suitable for programmatic handling; the message is human diagnostics.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ModelError(OccubeError):
    """Lookup or contract failure in the event-log model."""


class FormatError(OccubeError):
    """Import/export failure: malformed input, schema gaps, version skew."""


class CubeError(OccubeError):
    """Cube structure/view precondition violation."""


class BenchError(OccubeError):
    """Benchmark harness misuse (bad sweep parameters, too few points)."""
