"""Exception types shared across the engine."""

from __future__ import annotations


class ModalBenchError(Exception):
    """Base class for all engine errors."""


class ParseError(ModalBenchError):
    """Input could not be parsed at all (malformed JSON, bad framing)."""

    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ModalBenchError):
    """A parsed value violates a schema invariant.

    Carries the offending item id and field so callers can point at the
    exact record that needs fixing.
    """

    def __init__(self, item_id: str, field: str, message: str = ""):
        self.item_id = item_id
        self.field = field
        detail = f" ({message})" if message else ""
        super().__init__(f"sample {item_id!r}, field {field!r}{detail}")


class SchemaError(ModalBenchError):
    """A trace field violates the trace schema."""

    def __init__(self, field: str, message: str = "", *, line: int | None = None):
        self.field = field
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        detail = f": {message}" if message else ""
        super().__init__(f"{prefix}field {field!r}{detail}")


class InvalidSize(ModalBenchError):
    """Image dimensions are zero or negative."""


class DegenerateRow(ModalBenchError):
    """An attention row sums to zero and cannot be normalized."""

    def __init__(self, token_index: int):
        self.token_index = token_index
        super().__init__(f"attention row for output token {token_index} sums to 0")


class EmptySpans(ModalBenchError):
    """All modality spans are empty or carry zero attention mass."""


class EmptyBatch(ModalBenchError):
    """A batch operation received no records."""


class OracleFailure(ModalBenchError):
    """The entailment backend was unreachable or returned garbage."""


class EmptyClustering(ModalBenchError):
    """Entropy requested for a clustering with no clusters."""


class EmptyInput(ModalBenchError):
    """A metric received an empty outcome list."""


class EmptyGroup(ModalBenchError):
    """A group in a partitioned metric computation is empty."""


class LengthMismatch(ModalBenchError):
    """Paired sequences have different lengths."""


class DegenerateVariance(ModalBenchError):
    """Correlation requested for a constant series."""


class JudgeUnavailable(ModalBenchError):
    """The judge endpoint could not be reached."""


class MalformedJudgeReply(ModalBenchError):
    """The judge kept replying without a usable 0..10 score."""


class AdapterError(ModalBenchError):
    """A generation request to the model adapter failed.

    Keeps the (sample, config) context so an interrupted run can be
    resumed from its persisted traces.
    """

    def __init__(self, message: str, *, sample_id: str = "", config_id: str = ""):
        self.sample_id = sample_id
        self.config_id = config_id
        context = ""
        if sample_id or config_id:
            context = f" [sample={sample_id!r} config={config_id!r}]"
        super().__init__(f"{message}{context}")
