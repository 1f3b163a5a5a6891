"""Exception hierarchy shared by all asdkit modules."""


class AsdError(Exception):
    """Base class for every error raised by this package."""


class ParseError(AsdError):
    """Malformed input text. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(AsdError):
    """Structurally invalid value (self-loop, duplicate edge, bad range)."""


class PreconditionError(AsdError):
    """A documented precondition failed; the message names the inequality."""


class InfeasibleError(AsdError):
    """The instance provably has no solution of the requested kind."""


class UnsupportedInstanceError(AsdError):
    """Instance outside both the algorithmic regime and the fallback cap."""


class RandomizedFailureError(AsdError):
    """A retry-until-valid loop exhausted its budget."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class StageError(AsdError):
    """Failure inside a named stage of the decomposition pipeline."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
