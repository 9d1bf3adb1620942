"""Replay throughput of the compiled and pure-Python matching engines.

    python3 benchmarks/bench_engine.py [--events N] [--repeat K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lobimpact.orderbook import available_backends, replay
from lobimpact.orderflow import FlowConfig, generate_arrays


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    events = generate_arrays(FlowConfig(seed=1, n_events=args.events))
    results = {}
    for name in available_backends():
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            res = replay(events, backend=name)
            times.append(time.perf_counter() - t0)
        results[name] = (min(times), res)
        print(f"{name:9s} best of {args.repeat}: {min(times):8.4f}s "
              f"({args.events / min(times):,.0f} events/s)")

    if len(results) == 2:
        (tc, rc), (tp, rp) = results["compiled"], results["python"]
        same = all(np.array_equal(getattr(rc, f), getattr(rp, f))
                   for f in ("status", "executed", "pre_bid", "pre_ask", "post_bid", "post_ask"))
        print(f"speedup {tp / tc:.1f}x, identical outputs: {same}")


if __name__ == "__main__":
    main()
