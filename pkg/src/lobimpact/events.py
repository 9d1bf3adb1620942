"""Order events, executions and their columnar container."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, NamedTuple

import numpy as np

TICK = 0.01  # RMB per tick
BUY_LOT = 100


class Side(IntEnum):
    BUY = 1
    SELL = -1

    @property
    def code(self) -> str:
        return "B" if self is Side.BUY else "S"

    @classmethod
    def from_code(cls, code: str) -> Side:
        return cls.BUY if code == "B" else cls.SELL


class Kind(IntEnum):
    SUBMIT = 0
    CANCEL = 1

    @property
    def code(self) -> str:
        return "S" if self is Kind.SUBMIT else "C"


class FillStatus(IntEnum):
    CANCELED = -1
    RESTING = 0
    FILLED = 1
    PARTIALLY_FILLED = 2


class Execution(NamedTuple):
    taker_order_id: int
    maker_order_id: int
    price: int
    size: int


@dataclass(frozen=True, slots=True)
class OrderEvent:
    seq: int
    ts_ns: int
    kind: Kind
    order_id: int
    side: Side
    price: int = 0
    size: int = 0
    stock: str = ""

    @classmethod
    def submit(cls, seq: int, order_id: int, side: Side, price: int, size: int,
               ts_ns: int | None = None, stock: str = "") -> OrderEvent:
        return cls(seq, seq if ts_ns is None else ts_ns, Kind.SUBMIT, order_id,
                   Side(side), price, size, stock)

    @classmethod
    def cancel(cls, seq: int, order_id: int, side: Side, ts_ns: int | None = None,
               stock: str = "") -> OrderEvent:
        return cls(seq, seq if ts_ns is None else ts_ns, Kind.CANCEL, order_id,
                   Side(side), 0, 0, stock)


_COLUMNS = ("seq", "ts_ns", "kind", "order_id", "side", "price", "size")


@dataclass
class EventArrays:
    """Columnar event stream for one stock. All columns are int64.

    ``kind`` uses :class:`Kind` values, ``side`` uses :class:`Side` values and
    ``price``/``size`` are zero on cancel rows.
    """

    stock: str
    seq: np.ndarray
    ts_ns: np.ndarray
    kind: np.ndarray
    order_id: np.ndarray
    side: np.ndarray
    price: np.ndarray
    size: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.seq)
        for name in _COLUMNS:
            col = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            if len(col) != n:
                raise ValueError(f"column {name} has length {len(col)}, expected {n}")
            setattr(self, name, col)

    def __len__(self) -> int:
        return len(self.seq)

    def __iter__(self) -> Iterator[OrderEvent]:
        cols = [getattr(self, c).tolist() for c in _COLUMNS]
        for seq, ts, kind, oid, side, price, size in zip(*cols):
            yield OrderEvent(seq, ts, Kind(kind), oid, Side(side), price, size, self.stock)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventArrays):
            return NotImplemented
        return self.stock == other.stock and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in _COLUMNS
        )

    @classmethod
    def empty(cls, stock: str = "") -> EventArrays:
        z = np.zeros(0, dtype=np.int64)
        return cls(stock, z, z, z, z, z, z, z)

    @classmethod
    def from_events(cls, events: list[OrderEvent], stock: str | None = None) -> EventArrays:
        if not events:
            return cls.empty(stock or "")
        cols = {c: np.fromiter((int(getattr(e, c)) for e in events), np.int64, len(events))
                for c in _COLUMNS}
        return cls(stock if stock is not None else events[0].stock, **cols)

    def slice(self, stop: int) -> EventArrays:
        return EventArrays(self.stock, *(getattr(self, c)[:stop] for c in _COLUMNS),
                           meta=dict(self.meta))
