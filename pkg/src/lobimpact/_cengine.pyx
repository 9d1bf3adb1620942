# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled price-time priority book wrapping ``lob_core.hpp``."""

from libc.stdint cimport int64_t
from libcpp.vector cimport vector

import numpy as np

from .errors import CancelUnknownOrder, CrossedBookCorruption, DuplicateOrderId, InvalidOrder
from .events import Execution, FillStatus, Kind

BACKEND = "compiled"


cdef extern from "lob_core.hpp" namespace "lob":
    cdef struct Exec:
        int64_t maker
        int64_t price
        int64_t size

    cdef cppclass Book:
        Book() except +
        Book(const Book&) except +
        vector[Exec] execs
        int submit(int64_t oid, int side, int64_t price, int64_t size,
                   int* status, int64_t* executed) except +
        int cancel(int64_t oid, int64_t* canceled)
        int64_t best_bid()
        int64_t best_ask()
        int64_t n_orders()
        int64_t remaining(int64_t oid)
        void levels(int side, int64_t n, vector[int64_t]& prices,
                    vector[int64_t]& totals) except +
        void queue(int side, int64_t price, vector[int64_t]& oids,
                   vector[int64_t]& rems) except +
        int64_t resting_volume()
        int audit()

    cdef int E_OK, E_DUPLICATE, E_UNKNOWN, E_BAD_ORDER


_STATUS = {-1: FillStatus.CANCELED, 0: FillStatus.RESTING,
           1: FillStatus.FILLED, 2: FillStatus.PARTIALLY_FILLED}
_AUDIT = {1: "crossed book", 2: "empty price level", 3: "level total mismatch",
          4: "order index mismatch"}


cdef class OrderBook:
    """Single-instrument book; prices in ticks, sizes in shares."""

    cdef Book book

    backend = BACKEND

    def __len__(self):
        return self.book.n_orders()

    def submit(self, int64_t order_id, int side, int64_t price, int64_t size):
        cdef int status = 0
        cdef int64_t executed = 0
        cdef int rc = self.book.submit(order_id, side, price, size, &status, &executed)
        if rc == E_DUPLICATE:
            raise DuplicateOrderId(order_id)
        if rc != E_OK:
            raise InvalidOrder(f"order {order_id}: side={side} price={price} size={size}")
        cdef list execs = []
        cdef size_t i
        for i in range(self.book.execs.size()):
            execs.append(Execution(order_id, self.book.execs[i].maker,
                                   self.book.execs[i].price, self.book.execs[i].size))
        return execs, _STATUS[status]

    def cancel(self, int64_t order_id):
        cdef int64_t canceled = 0
        if self.book.cancel(order_id, &canceled) != E_OK:
            raise CancelUnknownOrder(order_id)
        return canceled

    def apply(self, ev):
        if ev.kind == Kind.CANCEL:
            self.cancel(ev.order_id)
            return [], FillStatus.CANCELED
        return self.submit(ev.order_id, ev.side, ev.price, ev.size)

    def best_bid(self):
        cdef int64_t p = self.book.best_bid()
        return p if p else None

    def best_ask(self):
        cdef int64_t p = self.book.best_ask()
        return p if p else None

    def levels(self, int side, n=None):
        cdef vector[int64_t] prices, totals
        self.book.levels(side, -1 if n is None else n, prices, totals)
        return [(prices[i], totals[i]) for i in range(prices.size())]

    def queue(self, int side, int64_t price):
        cdef vector[int64_t] oids, rems
        self.book.queue(side, price, oids, rems)
        return [(oids[i], rems[i]) for i in range(oids.size())]

    def remaining(self, int64_t order_id):
        cdef int64_t r = self.book.remaining(order_id)
        return None if r < 0 else r

    def resting_volume(self):
        return self.book.resting_volume()

    def audit(self):
        cdef int code = self.book.audit()
        if code:
            raise CrossedBookCorruption(_AUDIT.get(code, f"audit code {code}"))

    def copy(self):
        cdef OrderBook new = OrderBook.__new__(OrderBook)
        new.book = self.book
        return new


def replay(const int64_t[::1] seq, const int64_t[::1] kind, const int64_t[::1] order_id,
           const int64_t[::1] side, const int64_t[::1] price, const int64_t[::1] size):
    """Run an event stream through a fresh book.

    Returns int64 arrays ``(status, executed, pre_bid, pre_ask, post_bid,
    post_ask)``; an empty side is reported as 0.
    """
    cdef Py_ssize_t n = seq.shape[0], i
    out = np.zeros((6, n), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Book book
    cdef int status = 0, rc
    cdef int64_t executed = 0
    for i in range(n):
        o[2, i] = book.best_bid()
        o[3, i] = book.best_ask()
        if kind[i] == 1:
            if book.cancel(order_id[i], &executed) != E_OK:
                raise CancelUnknownOrder(order_id[i], seq=seq[i])
            o[0, i] = -1
        else:
            rc = book.submit(order_id[i], <int>side[i], price[i], size[i], &status, &executed)
            if rc == E_DUPLICATE:
                raise DuplicateOrderId(order_id[i], seq=seq[i])
            if rc != E_OK:
                raise InvalidOrder(f"seq {seq[i]}: malformed submit")
            o[0, i] = status
            o[1, i] = executed
        o[4, i] = book.best_bid()
        o[5, i] = book.best_ask()
    return tuple(out)
