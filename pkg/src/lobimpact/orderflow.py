"""Synthetic order flow with planted statistical structure.

The flow is stylized: it exists to exercise the estimators against known
truth, not to mimic any particular exchange. Randomness comes from a
counter-based Philox stream so every run is replayable from its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigError
from .events import BUY_LOT, EventArrays, OrderEvent
from .orderbook import new_book

DAY_NS = 86_400 * 10**9
SESSION_OPEN_NS = (9 * 3600 + 30 * 60) * 10**9
SESSION_NS = 4 * 3600 * 10**9

_CHUNK = 1 << 15


@dataclass(frozen=True)
class FlowConfig:
    seed: int = 0
    n_events: int = 10_000
    p_cancel: float = 0.3
    p_buy: float = 0.5
    size_tail: float = 1.5
    size_min: int = 100
    placement_width: float = 3.0
    marketable_fraction: float = 0.3
    initial_mid: int = 1000
    lot_rule: str | None = "BuyLots100"
    events_per_day: int = 20_000
    stock: str = "000000"

    def __post_init__(self) -> None:
        for name in ("p_cancel", "p_buy", "marketable_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}={v} is not a probability")
        if not self.size_tail > 1.0:
            raise ConfigError(f"size_tail={self.size_tail} must exceed 1")
        if self.size_min < 1:
            raise ConfigError("size_min must be >= 1")
        if self.placement_width < 1.0:
            raise ConfigError("placement_width must be >= 1 tick")
        if self.initial_mid < 2:
            raise ConfigError("initial_mid must be >= 2 ticks")
        if self.n_events < 0 or self.events_per_day < 1:
            raise ConfigError("n_events must be >= 0 and events_per_day >= 1")
        if self.lot_rule not in (None, "BuyLots100"):
            raise ConfigError(f"unknown lot_rule {self.lot_rule!r}")


def pareto_sizes(u: np.ndarray, tail: float, x_min: float) -> np.ndarray:
    """Inverse-CDF Pareto draw from uniforms in (0, 1]."""
    return x_min * u ** (-1.0 / tail)


def _timestamps(n: int, per_day: int) -> np.ndarray:
    k = np.arange(n, dtype=np.int64)
    day, slot = np.divmod(k, per_day)
    step = SESSION_NS // per_day
    return day * DAY_NS + SESSION_OPEN_NS + slot * step


def generate_arrays(config: FlowConfig, backend: str | None = None) -> EventArrays:
    """Generate ``config.n_events`` events that are valid against the evolving book."""
    n = config.n_events
    rng = np.random.Generator(np.random.Philox(config.seed))
    book = new_book(backend)
    lots = config.lot_rule == "BuyLots100"
    geo = 1.0 / config.placement_width
    log_q = math.log1p(-geo) if geo < 1.0 else None

    kind_c, oid_c, side_c, price_c, size_c = [], [], [], [], []
    live: list[int] = []
    where: dict[int, int] = {}
    side_of: dict[int, int] = {}
    next_id = 1
    last_mid = 2 * config.initial_mid  # half-ticks

    def drop(oid: int) -> None:
        i = where.pop(oid)
        del side_of[oid]
        last = live.pop()
        if last != oid:
            live[i] = last
            where[last] = i

    done = 0
    while done < n:
        m = min(_CHUNK, n - done)
        u = 1.0 - rng.random((m, 6))
        raw = np.ceil(pareto_sizes(u[:, 3], config.size_tail, config.size_min))
        raw = np.minimum(raw, 2**53).astype(np.int64).tolist()
        for (u_kind, u_side, u_mkt, _, u_place, u_pick), sz in zip(u.tolist(), raw):
            if live and u_kind <= config.p_cancel:
                oid = live[min(int(u_pick * len(live)), len(live) - 1)]
                side = side_of[oid]
                book.cancel(oid)
                drop(oid)
                kind_c.append(1), oid_c.append(oid), side_c.append(side)
                price_c.append(0), size_c.append(0)
            else:
                side = 1 if u_side <= config.p_buy else -1
                bid, ask = book.best_bid(), book.best_ask()
                if bid is not None and ask is not None:
                    last_mid = bid + ask
                g = 1 if log_q is None else 1 + int(math.log(u_place) / log_q)
                if side == 1:
                    if ask is not None and u_mkt <= config.marketable_fraction:
                        price = ask + g - 1
                    elif bid is not None:
                        price = bid + 2 - g
                        if ask is not None:
                            price = min(price, ask - 1)
                    elif ask is not None:
                        price = ask - g
                    else:
                        price = last_mid // 2 - g + 1
                    if lots:
                        sz = -(-sz // BUY_LOT) * BUY_LOT
                else:
                    if bid is not None and u_mkt <= config.marketable_fraction:
                        price = bid - g + 1
                    elif ask is not None:
                        price = ask - 2 + g
                        if bid is not None:
                            price = max(price, bid + 1)
                    elif bid is not None:
                        price = bid + g
                    else:
                        price = (last_mid + 1) // 2 + g - 1
                price = max(price, 1)
                oid = next_id
                next_id += 1
                execs, _ = book.submit(oid, side, price, sz)
                for ex in execs:
                    if book.remaining(ex.maker_order_id) is None:
                        drop(ex.maker_order_id)
                if book.remaining(oid) is not None:
                    where[oid] = len(live)
                    live.append(oid)
                    side_of[oid] = side
                kind_c.append(0), oid_c.append(oid), side_c.append(side)
                price_c.append(price), size_c.append(sz)
        done += m

    seq = np.arange(1, n + 1, dtype=np.int64)
    return EventArrays(config.stock, seq, _timestamps(n, config.events_per_day),
                       np.array(kind_c, dtype=np.int64), np.array(oid_c, dtype=np.int64),
                       np.array(side_c, dtype=np.int64), np.array(price_c, dtype=np.int64),
                       np.array(size_c, dtype=np.int64))


def generate(config: FlowConfig, backend: str | None = None) -> Iterator[OrderEvent]:
    """Stream of :class:`OrderEvent` for ``config``."""
    yield from generate_arrays(config, backend)


def generate_planted_impact(n: int, alpha: float, prefactor: float = 1.0,
                            tail_exponent: float = 1.5, seed: int = 0,
                            noise: float = 0.0, size_min: float = 1.0
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``(omega, r)`` with ``r = prefactor * omega**alpha * exp(noise * Z)``.

    ``omega`` is Pareto with tail ``tail_exponent`` above ``size_min``, so the
    returns carry a Pareto tail of exponent ``tail_exponent / alpha``.
    """
    if not alpha > 0 or not tail_exponent > 1:
        raise ConfigError("need alpha > 0 and tail_exponent > 1")
    rng = np.random.Generator(np.random.Philox(seed))
    omega = pareto_sizes(1.0 - rng.random(n), tail_exponent, size_min)
    r = prefactor * omega**alpha
    if noise:
        r = r * np.exp(noise * rng.standard_normal(n))
    return omega, r


def planted_return_exponent(alpha: float, tail_exponent: float) -> float:
    return tail_exponent / alpha
