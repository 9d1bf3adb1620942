"""Aggregate trades from engine output, classify them and compute returns.

A trade is the whole sweep of one incoming order, however many resting
orders it hits. Returns are percentage changes of the mid-quote from just
before to just after the sweep, computed from exact half-tick mids.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from .errors import EmptyType
from .events import EventArrays, Execution, FillStatus, Kind, OrderEvent, Side
from .orderbook import replay


class TradeType(str, Enum):
    PB = "PB"
    PS = "PS"
    FB = "FB"
    FS = "FS"


TRADE_TYPES = tuple(t.value for t in TradeType)
MIXED_TYPES = ("AllBuy", "AllSell")


@dataclass(frozen=True, slots=True)
class Trade:
    stock: str
    seq: int
    omega: int
    r: float
    direction: Side
    aggressiveness: FillStatus
    pre_mid: int
    post_mid: int

    @property
    def type(self) -> str:
        partial = self.aggressiveness is FillStatus.PARTIALLY_FILLED
        buy = self.direction is Side.BUY
        return ("P" if partial else "F") + ("B" if buy else "S")


@dataclass(frozen=True)
class StockMeta:
    """Per-stock capitalization (million shares), turnover (%) and trade count."""

    code: str
    C_tot: float
    C: float
    z: float = 0.0
    N: float = 0.0

    def __post_init__(self) -> None:
        if not (0 < self.C <= self.C_tot):
            raise ValueError(f"{self.code}: need 0 < C <= C_tot, got C={self.C} C_tot={self.C_tot}")


def percentage_return(pre_mid: int, post_mid: int) -> float:
    return (post_mid - pre_mid) / pre_mid


def build_trade(ev: OrderEvent, executions: list[Execution], status: FillStatus,
                pre_mid: int | None, post_mid: int | None) -> Trade | None:
    """One :class:`Trade` from a marketable order, or None if a mid is undefined.

    ``pre_mid``/``post_mid`` are half-tick mids around the event (see
    :func:`lobimpact.orderbook.mid_price`).
    """
    if status not in (FillStatus.FILLED, FillStatus.PARTIALLY_FILLED) or not executions:
        return None
    if pre_mid is None or post_mid is None:
        return None
    omega = sum(e.size for e in executions)
    return Trade(ev.stock, ev.seq, omega, percentage_return(pre_mid, post_mid),
                 Side(ev.side), FillStatus(status), pre_mid, post_mid)


@dataclass
class SkipReport:
    stock: str
    events: int
    marketable: int
    trades: int
    skipped_one_sided: int

    def as_dict(self) -> dict:
        return {"stock": self.stock, "events": self.events, "marketable": self.marketable,
                "trades": self.trades, "skipped_one_sided": self.skipped_one_sided}


TRADE_COLUMNS = ["stock", "seq", "ts_ns", "omega", "direction", "aggressiveness",
                 "type", "pre_mid", "post_mid", "r"]


def reconstruct_trades(events: EventArrays, backend: str | None = None
                       ) -> tuple[pd.DataFrame, SkipReport]:
    """Replay ``events`` and return one row per trade plus the skip counts.

    Trades where the book is one-sided before or after the sweep have no
    defined return and are only counted.
    """
    rr = replay(events, backend)
    marketable = (rr.status == FillStatus.FILLED) | (rr.status == FillStatus.PARTIALLY_FILLED)
    two_sided = (rr.pre_bid > 0) & (rr.pre_ask > 0) & (rr.post_bid > 0) & (rr.post_ask > 0)
    keep = marketable & two_sided
    pre_mid = (rr.pre_bid + rr.pre_ask)[keep]
    post_mid = (rr.post_bid + rr.post_ask)[keep]
    side = events.side[keep]
    partial = rr.status[keep] == FillStatus.PARTIALLY_FILLED
    df = pd.DataFrame({
        "stock": events.stock,
        "seq": events.seq[keep],
        "ts_ns": events.ts_ns[keep],
        "omega": rr.executed[keep],
        "direction": np.where(side == 1, "B", "S"),
        "aggressiveness": np.where(partial, "P", "F"),
        "pre_mid": pre_mid,
        "post_mid": post_mid,
        "r": (post_mid - pre_mid) / pre_mid,
    })
    df.insert(6, "type", df["aggressiveness"] + df["direction"])
    report = SkipReport(events.stock, len(events), int(marketable.sum()), len(df),
                        int((marketable & ~two_sided).sum()))
    return df, report


def empty_trades() -> pd.DataFrame:
    return pd.DataFrame({c: pd.Series(dtype=t) for c, t in zip(
        TRADE_COLUMNS, ["object", "int64", "int64", "int64", "object", "object", "object",
                        "int64", "int64", "float64"])})


def trade_type_mask(trades: pd.DataFrame, kind: str) -> pd.Series:
    if kind == "AllBuy":
        return trades["direction"] == "B"
    if kind == "AllSell":
        return trades["direction"] == "S"
    return trades["type"] == kind


@dataclass
class TypeStats:
    """Per (stock, type) counts and means; ``mean_r`` keeps its sign."""

    table: pd.DataFrame
    empty_cells: list[tuple[str, str]]

    def normalizers(self, stock: str, kind: str) -> tuple[float, float]:
        row = self.table.loc[(stock, kind)]
        return float(row["mean_r"]), float(row["mean_omega"])


def classify_counts(trades: pd.DataFrame, stocks: list[str] | None = None) -> TypeStats:
    """Counts and arithmetic means of r and omega per stock and trade type.

    Also covers the mixed AllBuy/AllSell populations. Cells with no trades are
    listed in ``empty_cells`` rather than raising.
    """
    if len(trades) == 0 and not stocks:
        raise EmptyType("no trades to classify")
    stocks = sorted(set(trades["stock"])) if stocks is None else list(stocks)
    rows, empty = [], []
    for stock in stocks:
        sub = trades[trades["stock"] == stock]
        for kind in TRADE_TYPES + MIXED_TYPES:
            cell = sub[trade_type_mask(sub, kind)]
            if len(cell) == 0:
                empty.append((stock, kind))
                continue
            rows.append({"stock": stock, "type": kind, "count": len(cell),
                         "mean_r": float(cell["r"].mean()),
                         "mean_abs_r": float(cell["r"].abs().mean()),
                         "mean_omega": float(cell["omega"].mean())})
    table = pd.DataFrame(rows, columns=["stock", "type", "count", "mean_r", "mean_abs_r",
                                        "mean_omega"]).set_index(["stock", "type"])
    return TypeStats(table, empty)


def zero_shift_fraction(trades: pd.DataFrame, kind: str) -> float:
    """Fraction of filled trades of ``kind`` that left the mid unchanged."""
    if kind not in ("FB", "FS"):
        raise ValueError("zero-shift fraction is defined for FB and FS trades")
    cell = trades[trades["type"] == kind]
    if len(cell) == 0:
        raise EmptyType(f"no {kind} trades")
    return float((cell["post_mid"] == cell["pre_mid"]).mean())


def invariant_violations(trades: pd.DataFrame) -> dict[str, int]:
    """Counts of trades breaking the sign and aggressiveness invariants."""
    buy = trades["direction"] == "B"
    r = trades["r"]
    shift = trades["post_mid"] - trades["pre_mid"]
    partial = trades["aggressiveness"] == "P"
    return {
        "nonpositive_size": int((trades["omega"] <= 0).sum()),
        "buy_negative_return": int((buy & (r < 0)).sum()),
        "sell_positive_return": int((~buy & (r > 0)).sum()),
        "partial_below_half_tick": int((partial & (shift.abs() < 1)).sum()),
    }
