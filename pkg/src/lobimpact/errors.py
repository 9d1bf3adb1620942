"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class LobImpactError(Exception):
    """Base class for all package errors."""


class BookError(LobImpactError):
    pass


class CancelUnknownOrder(BookError):
    def __init__(self, order_id: int, seq: int | None = None) -> None:
        where = f" at seq {seq}" if seq is not None else ""
        super().__init__(f"cancel of unknown or dead order {order_id}{where}")
        self.order_id = order_id
        self.seq = seq


class DuplicateOrderId(BookError):
    def __init__(self, order_id: int, seq: int | None = None) -> None:
        where = f" at seq {seq}" if seq is not None else ""
        super().__init__(f"order id {order_id} is already resting{where}")
        self.order_id = order_id
        self.seq = seq


class InvalidOrder(BookError):
    pass


class CrossedBookCorruption(BookError):
    """Internal invariant breach. Reaching this is a bug in the engine."""


class EmptySide(BookError):
    pass


class EmptyType(LobImpactError):
    pass


class TooFewPoints(LobImpactError):
    pass


class ZeroMeanReturn(LobImpactError):
    pass


class DegenerateDenominator(LobImpactError):
    pass


class DegenerateBins(LobImpactError):
    pass


class EmptyDay(LobImpactError):
    pass


class TooFewTailPoints(LobImpactError):
    pass


class ParseError(LobImpactError):
    def __init__(self, line: int, column: str, reason: str) -> None:
        super().__init__(f"line {line}, column {column!r}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


class NonMonotoneSeq(ParseError):
    pass


class ConfigError(LobImpactError):
    pass


class StageError(LobImpactError):
    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
