"""Pure-Python price-time priority book. Same surface as the compiled core."""

from __future__ import annotations

from bisect import bisect_left, insort
from collections import OrderedDict

import numpy as np

from .errors import CancelUnknownOrder, CrossedBookCorruption, DuplicateOrderId, InvalidOrder
from .events import Execution, FillStatus, Kind, OrderEvent

BACKEND = "python"


class _Level:
    __slots__ = ("total", "queue")

    def __init__(self) -> None:
        self.total = 0
        self.queue: OrderedDict[int, int] = OrderedDict()


class OrderBook:
    """Single-instrument book; prices in ticks, sizes in shares.

    Each side keeps a sorted list of keys whose last element is the best
    level: bid keys are prices, ask keys are negated prices.
    """

    backend = BACKEND
    __slots__ = ("_levels", "_keys", "_index")

    def __init__(self) -> None:
        self._levels: dict[int, dict[int, _Level]] = {1: {}, -1: {}}
        self._keys: dict[int, list[int]] = {1: [], -1: []}
        self._index: dict[int, tuple[int, int]] = {}

    def __len__(self) -> int:
        return len(self._index)

    def submit(self, order_id: int, side: int, price: int, size: int
               ) -> tuple[list[Execution], FillStatus]:
        side = int(side)
        if size <= 0 or price < 1 or side not in (1, -1):
            raise InvalidOrder(f"order {order_id}: side={side} price={price} size={size}")
        if order_id in self._index:
            raise DuplicateOrderId(order_id)
        execs: list[Execution] = []
        left = size
        opp = -side
        opp_levels = self._levels[opp]
        opp_keys = self._keys[opp]
        index = self._index
        while left and opp_keys:
            px = opp_keys[-1] * opp
            if (px > price) if side == 1 else (px < price):
                break
            lvl = opp_levels[px]
            queue = lvl.queue
            while left and queue:
                maker = next(iter(queue))
                rem = queue[maker]
                fill = rem if rem < left else left
                execs.append(Execution(order_id, maker, px, fill))
                left -= fill
                lvl.total -= fill
                if fill == rem:
                    queue.popitem(last=False)
                    del index[maker]
                else:
                    queue[maker] = rem - fill
            if not queue:
                del opp_levels[px]
                opp_keys.pop()
        if left:
            self._rest(order_id, side, price, left)
        if left == size:
            return execs, FillStatus.RESTING
        return execs, FillStatus.FILLED if left == 0 else FillStatus.PARTIALLY_FILLED

    def _rest(self, order_id: int, side: int, price: int, size: int) -> None:
        levels = self._levels[side]
        lvl = levels.get(price)
        if lvl is None:
            lvl = levels[price] = _Level()
            insort(self._keys[side], price * side)
        lvl.queue[order_id] = size
        lvl.total += size
        self._index[order_id] = (side, price)

    def cancel(self, order_id: int) -> int:
        loc = self._index.pop(order_id, None)
        if loc is None:
            raise CancelUnknownOrder(order_id)
        side, price = loc
        levels = self._levels[side]
        lvl = levels[price]
        rem = lvl.queue.pop(order_id)
        lvl.total -= rem
        if not lvl.queue:
            del levels[price]
            keys = self._keys[side]
            del keys[bisect_left(keys, price * side)]
        return rem

    def apply(self, ev: OrderEvent) -> tuple[list[Execution], FillStatus]:
        if ev.kind == Kind.CANCEL:
            self.cancel(ev.order_id)
            return [], FillStatus.CANCELED
        return self.submit(ev.order_id, ev.side, ev.price, ev.size)

    def best_bid(self) -> int | None:
        keys = self._keys[1]
        return keys[-1] if keys else None

    def best_ask(self) -> int | None:
        keys = self._keys[-1]
        return -keys[-1] if keys else None

    def levels(self, side: int, n: int | None = None) -> list[tuple[int, int]]:
        side = int(side)
        keys = self._keys[side]
        picked = keys[::-1] if n is None else keys[:-n - 1:-1] if n > 0 else []
        levels = self._levels[side]
        return [(k * side, levels[k * side].total) for k in picked]

    def queue(self, side: int, price: int) -> list[tuple[int, int]]:
        lvl = self._levels[int(side)].get(price)
        return [] if lvl is None else list(lvl.queue.items())

    def remaining(self, order_id: int) -> int | None:
        loc = self._index.get(order_id)
        if loc is None:
            return None
        return self._levels[loc[0]][loc[1]].queue[order_id]

    def resting_volume(self) -> int:
        return sum(l.total for s in (1, -1) for l in self._levels[s].values())

    def audit(self) -> None:
        bid, ask = self.best_bid(), self.best_ask()
        if bid is not None and ask is not None and bid >= ask:
            raise CrossedBookCorruption(f"crossed book: bid {bid} >= ask {ask}")
        seen = 0
        for side in (1, -1):
            keys = self._keys[side]
            if keys != sorted(keys) or len(keys) != len(self._levels[side]):
                raise CrossedBookCorruption(f"side {side}: level keys out of order")
            for price, lvl in self._levels[side].items():
                if not lvl.queue or lvl.total != sum(lvl.queue.values()):
                    raise CrossedBookCorruption(f"side {side} level {price}: bad total")
                for oid, rem in lvl.queue.items():
                    if rem <= 0 or self._index.get(oid) != (side, price):
                        raise CrossedBookCorruption(f"order {oid}: index mismatch")
                    seen += 1
        if seen != len(self._index):
            raise CrossedBookCorruption("index holds orders missing from the book")

    def copy(self) -> OrderBook:
        new = OrderBook()
        for side in (1, -1):
            new._keys[side] = list(self._keys[side])
            for price, lvl in self._levels[side].items():
                dup = _Level()
                dup.total = lvl.total
                dup.queue = OrderedDict(lvl.queue)
                new._levels[side][price] = dup
        new._index = dict(self._index)
        return new


def replay(seq, kind, order_id, side, price, size):
    """Run an event stream through a fresh book.

    Returns int64 arrays ``(status, executed, pre_bid, pre_ask, post_bid,
    post_ask)``; an empty side is reported as 0.
    """
    n = len(seq)
    out = np.zeros((6, n), dtype=np.int64)
    book = OrderBook()
    bid_keys, ask_keys = book._keys[1], book._keys[-1]
    rows = zip(seq.tolist(), kind.tolist(), order_id.tolist(), side.tolist(),
               price.tolist(), size.tolist())
    status_col, exec_col = [], []
    pre_b, pre_a, post_b, post_a = [], [], [], []
    for s, k, oid, sd, px, sz in rows:
        pre_b.append(bid_keys[-1] if bid_keys else 0)
        pre_a.append(-ask_keys[-1] if ask_keys else 0)
        if k == 1:
            try:
                book.cancel(oid)
            except CancelUnknownOrder:
                raise CancelUnknownOrder(oid, seq=s) from None
            status_col.append(-1)
            exec_col.append(0)
        else:
            try:
                execs, st = book.submit(oid, sd, px, sz)
            except DuplicateOrderId:
                raise DuplicateOrderId(oid, seq=s) from None
            status_col.append(int(st))
            exec_col.append(sum(e.size for e in execs))
        post_b.append(bid_keys[-1] if bid_keys else 0)
        post_a.append(-ask_keys[-1] if ask_keys else 0)
    for row, col in enumerate((status_col, exec_col, pre_b, pre_a, post_b, post_a)):
        out[row] = col
    return tuple(out)
