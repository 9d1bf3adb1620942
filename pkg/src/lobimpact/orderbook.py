"""Matching engine front end, mid-quotes and mid-shift identities.

Two interchangeable engines exist: a compiled C++ core (``_cengine``) and a
pure-Python twin (``_pyengine``). The compiled one is used when it imports;
set ``LOBIMPACT_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from . import _pyengine
from .errors import EmptySide, LobImpactError
from .events import EventArrays, FillStatus, Kind, OrderEvent, Side

try:
    from . import _cengine
except ImportError:  # extension not built
    _cengine = None

_BACKENDS: dict[str, ModuleType | None] = {"python": _pyengine, "compiled": _cengine}


def available_backends() -> list[str]:
    return [name for name, mod in _BACKENDS.items() if mod is not None]


def get_backend(name: str | None = None) -> ModuleType:
    """Resolve an engine module by name ("auto", "compiled" or "python")."""
    name = (name or os.environ.get("LOBIMPACT_BACKEND") or "auto").lower()
    if name == "auto":
        return _cengine if _cengine is not None else _pyengine
    if name not in _BACKENDS:
        raise LobImpactError(f"unknown backend {name!r}")
    mod = _BACKENDS[name]
    if mod is None:
        raise LobImpactError(f"backend {name!r} is not available in this build")
    return mod


_DEFAULT = get_backend()
OrderBook = _DEFAULT.OrderBook
BACKEND = _DEFAULT.BACKEND
PyOrderBook = _pyengine.OrderBook


def new_book(backend: str | None = None):
    return get_backend(backend).OrderBook()


def apply_event(book, ev: OrderEvent):
    """Apply one event in place; returns ``(executions, fill_status)``."""
    return book.apply(ev)


def mid_price(book) -> int:
    """Mid-quote in half-ticks, i.e. ``best_bid + best_ask`` in ticks."""
    bid, ask = book.best_bid(), book.best_ask()
    if bid is None or ask is None:
        raise EmptySide("mid-price needs both sides of the book")
    return bid + ask


def _try_mid(book) -> int | None:
    bid, ask = book.best_bid(), book.best_ask()
    return None if bid is None or ask is None else bid + ask


@dataclass(frozen=True)
class SweepForecast:
    """What a marketable order must do to the quotes, read off the pre-trade book.

    ``far_price`` is a_n for buys (b_n for sells): the best opposite price left
    after the sweep, or None when the sweep empties the opposite side.
    ``shift`` is the mid change in half-ticks, None when a post mid is undefined.
    """

    status: FillStatus
    near_price: int
    far_price: int | None
    shift: int | None


def forecast_sweep(pre_book, side: int, price: int, size: int) -> SweepForecast | None:
    """Predict status and mid shift of an incoming order from depth alone.

    Returns None when the order is not marketable or the pre-trade book is
    one-sided. The depth walk is independent of the matching code.
    """
    side = Side(side)
    own_best = pre_book.best_bid() if side is Side.BUY else pre_book.best_ask()
    near = pre_book.best_ask() if side is Side.BUY else pre_book.best_bid()
    if near is None or own_best is None:
        return None
    if (price < near) if side is Side.BUY else (price > near):
        return None

    n = 16
    while True:
        levels = pre_book.levels(-side, n)
        status, far, done = _walk(levels, side, price, size)
        if done or len(levels) < n:
            break
        n *= 2

    if side is Side.BUY:
        a1, b1 = near, own_best
        if far is None:
            shift = None
        elif status is FillStatus.FILLED:
            shift = far - a1
        else:
            shift = (far - a1) + (price - b1)
    else:
        b1, a1 = near, own_best
        if far is None:
            shift = None
        elif status is FillStatus.FILLED:
            shift = -(b1 - far)
        else:
            shift = -(a1 - price) - (b1 - far)
    return SweepForecast(status, near, far, shift)


def _walk(levels, side, price, size):
    cum = 0
    for i, (px, total) in enumerate(levels):
        if (px > price) if side is Side.BUY else (px < price):
            return FillStatus.PARTIALLY_FILLED, px, True
        if cum + total > size:
            return FillStatus.FILLED, px, True
        if cum + total == size:
            if i + 1 < len(levels):
                return FillStatus.FILLED, levels[i + 1][0], True
            return FillStatus.FILLED, None, False
        cum += total
    return FillStatus.PARTIALLY_FILLED, None, False


def mid_shift_identity_check(pre_book, ev: OrderEvent, post_book, status: FillStatus) -> bool:
    """True iff the observed mid change matches the filled/partial identities.

    Filled buy: shift = a_n - a_1. Partially filled buy: shift = a_n - a_1 +
    (limit - b_1). Sells mirror with the sign flipped. All in half-ticks.
    """
    if ev.kind != Kind.SUBMIT or status not in (FillStatus.FILLED, FillStatus.PARTIALLY_FILLED):
        return False
    fc = forecast_sweep(pre_book, ev.side, ev.price, ev.size)
    if fc is None or fc.status != status:
        return False
    pre, post = _try_mid(pre_book), _try_mid(post_book)
    observed = None if pre is None or post is None else post - pre
    return observed == fc.shift


@dataclass
class ReplayResult:
    """Per-event outcome of replaying a stream; quotes in ticks, 0 = empty side."""

    events: EventArrays
    status: np.ndarray
    executed: np.ndarray
    pre_bid: np.ndarray
    pre_ask: np.ndarray
    post_bid: np.ndarray
    post_ask: np.ndarray
    backend: str


def replay(events: EventArrays, backend: str | None = None) -> ReplayResult:
    mod = get_backend(backend)
    cols = mod.replay(events.seq, events.kind, events.order_id, events.side,
                      events.price, events.size)
    return ReplayResult(events, *cols, backend=mod.BACKEND)
