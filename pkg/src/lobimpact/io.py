"""Flat-file formats: event CSV, trades CSV and stock metadata CSV."""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from .errors import NonMonotoneSeq, ParseError
from .events import BUY_LOT, EventArrays, Kind, Side
from .trades import TRADE_COLUMNS, StockMeta, empty_trades

EVENT_HEADER = ("seq", "ts_ns", "stock", "kind", "order_id", "side", "price_ticks", "size")
META_HEADER = ("code", "C_tot", "C", "z", "N")

_KIND = {"S": int(Kind.SUBMIT), "C": int(Kind.CANCEL)}
_SIDE = {"B": int(Side.BUY), "S": int(Side.SELL)}


def _int(text: str, line: int, column: str, minimum: int | None = None) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(line, column, f"not an integer: {text!r}") from None
    if minimum is not None and value < minimum:
        raise ParseError(line, column, f"must be >= {minimum}, got {value}")
    return value


class _Columns:
    def __init__(self) -> None:
        self.seq: list[int] = []
        self.ts: list[int] = []
        self.kind: list[int] = []
        self.oid: list[int] = []
        self.side: list[int] = []
        self.price: list[int] = []
        self.size: list[int] = []

    def arrays(self, stock: str) -> EventArrays:
        return EventArrays(stock, self.seq, self.ts, self.kind, self.oid, self.side,
                           self.price, self.size)


def ingest_events(path: str | os.PathLike, lot_rule: str | None = "BuyLots100"
                  ) -> dict[str, EventArrays]:
    """Parse an event CSV into one validated stream per stock.

    Any malformed row aborts the whole read with a :class:`ParseError` naming
    the 1-based file line and column; nothing is dropped silently.
    """
    out: dict[str, _Columns] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != EVENT_HEADER:
            raise ParseError(1, "header", f"expected {','.join(EVENT_HEADER)}")
        for row in reader:
            line = reader.line_num
            if len(row) != len(EVENT_HEADER):
                raise ParseError(line, "row", f"expected {len(EVENT_HEADER)} fields, got {len(row)}")
            seq_s, ts_s, stock, kind_s, oid_s, side_s, price_s, size_s = row
            seq = _int(seq_s, line, "seq")
            ts = _int(ts_s, line, "ts_ns", 0)
            if not stock:
                raise ParseError(line, "stock", "empty stock code")
            if kind_s not in _KIND:
                raise ParseError(line, "kind", f"expected S or C, got {kind_s!r}")
            oid = _int(oid_s, line, "order_id")
            if side_s not in _SIDE:
                raise ParseError(line, "side", f"expected B or S, got {side_s!r}")
            kind, side = _KIND[kind_s], _SIDE[side_s]
            if kind == Kind.SUBMIT:
                price = _int(price_s, line, "price_ticks", 1)
                size = _int(size_s, line, "size", 1)
                if lot_rule == "BuyLots100" and side == Side.BUY and size % BUY_LOT:
                    raise ParseError(line, "size",
                                     f"buy size {size} is not a multiple of {BUY_LOT} (lot rule)")
            else:
                if price_s or size_s:
                    raise ParseError(line, "price_ticks" if price_s else "size",
                                     "cancel rows carry no price or size")
                price = size = 0
            cols = out.get(stock)
            if cols is None:
                cols = out[stock] = _Columns()
            if cols.seq and seq <= cols.seq[-1]:
                raise NonMonotoneSeq(line, "seq",
                                     f"seq {seq} after {cols.seq[-1]} for stock {stock}")
            cols.seq.append(seq)
            cols.ts.append(ts)
            cols.kind.append(kind)
            cols.oid.append(oid)
            cols.side.append(side)
            cols.price.append(price)
            cols.size.append(size)
    return {stock: out[stock].arrays(stock) for stock in sorted(out)}


def write_events(path: str | os.PathLike, streams: Iterable[EventArrays]) -> None:
    """Write streams in the given order, each in its own seq order."""
    side_code = {v: k for k, v in _SIDE.items()}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_HEADER)
        for ev in streams:
            cols = zip(ev.seq.tolist(), ev.ts_ns.tolist(), ev.kind.tolist(),
                       ev.order_id.tolist(), ev.side.tolist(), ev.price.tolist(),
                       ev.size.tolist())
            for seq, ts, kind, oid, side, price, size in cols:
                if kind == Kind.SUBMIT:
                    w.writerow((seq, ts, ev.stock, "S", oid, side_code[side], price, size))
                else:
                    w.writerow((seq, ts, ev.stock, "C", oid, side_code[side], "", ""))


def write_trades(path: str | os.PathLike, trades: pd.DataFrame) -> None:
    trades[TRADE_COLUMNS].to_csv(path, index=False, lineterminator="\n")


def read_trades(path: str | os.PathLike) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"stock": str, "direction": str, "aggressiveness": str,
                                  "type": str}, keep_default_na=False,
                     float_precision="round_trip")
    if list(df.columns) != TRADE_COLUMNS:
        raise ParseError(1, "header", f"expected {','.join(TRADE_COLUMNS)}")
    if len(df) == 0:
        return empty_trades()
    return df.astype({"seq": np.int64, "ts_ns": np.int64, "omega": np.int64,
                      "pre_mid": np.int64, "post_mid": np.int64, "r": float})


def read_meta(path: str | os.PathLike) -> dict[str, StockMeta]:
    out: dict[str, StockMeta] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != META_HEADER:
            raise ParseError(1, "header", f"expected {','.join(META_HEADER)}")
        for row in reader:
            line = reader.line_num
            if len(row) != len(META_HEADER):
                raise ParseError(line, "row", f"expected {len(META_HEADER)} fields")
            code = row[0]
            vals = []
            for name, text in zip(META_HEADER[1:], row[1:]):
                try:
                    vals.append(float(text))
                except ValueError:
                    raise ParseError(line, name, f"not a number: {text!r}") from None
            try:
                out[code] = StockMeta(code, *vals)
            except ValueError as exc:
                raise ParseError(line, "C", str(exc)) from None
    return out


def write_meta(path: str | os.PathLike, metas: Iterable[StockMeta]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(META_HEADER)
        for m in metas:
            w.writerow((m.code, repr(m.C_tot), repr(m.C), repr(m.z), repr(m.N)))


def ensure_dir(path: str | os.PathLike) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
