"""Acceptance criteria. Each test prints one PASS/FAIL line with its measurements.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest; the
lines are also repeated in the pytest terminal summary.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from lobimpact.collapse import CollapseData, search_exponents
from lobimpact.events import FillStatus, Kind, OrderEvent
from lobimpact.impact import (anomaly_condition, bin_equal_count, bin_mixture, fit_power_law,
                              max_curve_gap, normalize_curve)
from lobimpact.orderbook import mid_shift_identity_check, new_book
from lobimpact.orderflow import FlowConfig, generate_arrays, generate_planted_impact
from lobimpact.pipeline import load_config, run_pipeline
from lobimpact.reference import STOCK_META
from lobimpact.tails import fit_tail, impact_return_ccdf, loglog_slope, relation_test
from lobimpact.trades import invariant_violations, reconstruct_trades

RESULTS: list[str] = []


def report(number: int, ok: bool, text: str) -> None:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {text}"
    RESULTS.append(line)
    print(line)


# ------------------------------------------------------------------ 1 and 2

N_ENGINE = 1_000_000
AUDIT_EVERY = 100_000


@pytest.fixture(scope="module")
def engine_run():
    t0 = time.perf_counter()
    ev = generate_arrays(FlowConfig(seed=2024, n_events=N_ENGINE))
    book = new_book()
    kind, oid, side = ev.kind.tolist(), ev.order_id.tolist(), ev.side.tolist()
    price, size = ev.price.tolist(), ev.size.tolist()
    submitted: dict[int, int] = {}
    done: dict[int, int] = {}  # executed + canceled per order
    total_sub = total_exec = total_cancel = 0
    checked = failed = one_sided = 0
    crossed = conservation_breaks = audits = order_breaks = 0

    for i in range(len(kind)):
        if kind[i] == Kind.CANCEL:
            c = book.cancel(oid[i])
            total_cancel += c
            done[oid[i]] += c
        else:
            s, p = side[i], price[i]
            bid, ask = book.best_bid(), book.best_ask()
            marketable = (ask is not None and p >= ask) if s == 1 else \
                (bid is not None and p <= bid)
            pre = book.copy() if marketable else None
            execs, status = book.submit(oid[i], s, p, size[i])
            submitted[oid[i]] = size[i]
            done[oid[i]] = 0
            total_sub += size[i]
            for e in execs:
                total_exec += 2 * e.size
                done[e.taker_order_id] += e.size
                done[e.maker_order_id] += e.size
            if marketable:
                if bid is None or ask is None:
                    one_sided += 1
                else:
                    checked += 1
                    evt = OrderEvent.submit(i + 1, oid[i], s, p, size[i])
                    if not mid_shift_identity_check(pre, evt, book, status):
                        failed += 1
        b, a = book.best_bid(), book.best_ask()
        if b is not None and a is not None and b >= a:
            crossed += 1
        if total_sub - total_exec - total_cancel != book.resting_volume():
            conservation_breaks += 1
        if (i + 1) % AUDIT_EVERY == 0 or i + 1 == len(kind):
            book.audit()
            audits += 1
            for o, sz in submitted.items():
                rem = book.remaining(o) or 0
                if sz - done[o] != rem:
                    order_breaks += 1
    return dict(seconds=time.perf_counter() - t0, checked=checked, failed=failed,
                one_sided=one_sided, crossed=crossed, conservation_breaks=conservation_breaks,
                order_breaks=order_breaks, audits=audits, events=len(kind))


def test_acceptance_1_mid_shift_identities(engine_run):
    r = engine_run
    ok = r["failed"] == 0 and r["checked"] > 0 and r["seconds"] < 30
    report(1, ok, f"{r['checked']} marketable orders on two-sided books, {r['failed']} identity "
                  f"failures, {r['one_sided']} skipped (one-sided pre-book), "
                  f"{r['events']} events in {r['seconds']:.1f}s (< 30s)")
    assert ok


def test_acceptance_2_conservation_no_cross(engine_run):
    r = engine_run
    ok = r["crossed"] == 0 and r["conservation_breaks"] == 0 and r["order_breaks"] == 0
    report(2, ok, f"crossed after {r['crossed']} events, aggregate conservation broken after "
                  f"{r['conservation_breaks']}, per-order mismatches {r['order_breaks']} "
                  f"over {r['audits']} full audits")
    assert ok


# ------------------------------------------------------------------ 3

def test_acceptance_3_planted_impact():
    t0 = time.perf_counter()
    lo_hi = (15.9, 141.0)
    omega, r = generate_planted_impact(100_000, 0.66, 1.0, 2.30, seed=3, noise=0.05,
                                       size_min=15.9)
    alpha = fit_power_law(bin_equal_count(omega, r, 50), lo_hi).exponent
    a_w = fit_tail(omega, lo_hi).exponent
    a_r = fit_tail(r, lo_hi).exponent
    test, _ = relation_test(omega, r, lo_hi, lo_hi, n_bins=50, impact_range=lo_hi)
    secs = time.perf_counter() - t0
    ok = (abs(alpha - 0.66) <= 0.02 and abs(a_w - 2.30) <= 0.08
          and abs(a_r - 2.30 / 0.66) <= 0.12 and abs(test.D) <= 0.05 and secs < 60)
    report(3, ok, f"alpha={alpha:.4f} (0.66+-0.02), alpha_w={a_w:.3f} (2.30+-0.08), "
                  f"alpha_r={a_r:.3f} ({2.30 / 0.66:.3f}+-0.12), D={test.D:+.4f} (|D|<=0.05), "
                  f"{secs:.1f}s")
    assert ok


# ------------------------------------------------------------------ 4

def test_acceptance_4_change_of_variables():
    worst = 0.0
    for tail, alpha in ((1.5, 2 / 3), (2.3, 0.66), (2.36, 0.69)):
        fn = lambda y, a=alpha, t=tail: impact_return_ccdf(y, a, t, 1.0, 1.0)  # noqa: E731
        worst = max(worst, abs(loglog_slope(fn, 2.0, 50.0) - tail / alpha))
    ok = worst <= 1e-12
    report(4, ok, f"max |alpha_r - alpha_w/alpha| over 3 pairs = {worst:.2e} (<= 1e-12)")
    assert ok


# ------------------------------------------------------------------ 5

CAPS = np.geomspace(100, 1400, 10)


def _collapse_data(seed, delta, gamma, n=5000, noise=0.05):
    rng = np.random.default_rng(seed)
    parts = []
    for i, c in enumerate(CAPS):
        x = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n))
        u = x / c**delta
        y = c**-gamma * 2 * u**2 / (1 + u**2) * np.exp(noise * rng.standard_normal(n))
        parts.append(CollapseData(y, x, np.full(n, c), np.full(n, str(i))))
    return CollapseData.concat(parts)


def test_acceptance_5_collapse_recovery():
    hit = search_exponents(_collapse_data(11, 0.3, 0.4), 100)
    null = search_exponents(_collapse_data(12, 0.0, 0.0), 100)
    ok = (abs(hit.delta - 0.3) <= 0.02 and abs(hit.gamma - 0.4) <= 0.02 and hit.R >= 0.9
          and abs(null.delta) <= 0.02 and abs(null.gamma) <= 0.02 and null.R <= 0.05)
    report(5, ok, f"planted (0.3,0.4) -> ({hit.delta:.3f},{hit.gamma:.3f}) R={hit.R:.3f}; "
                  f"C-free -> ({null.delta:.3f},{null.gamma:.3f}) R={null.R:.4f}")
    assert ok


# ------------------------------------------------------------------ 6

def _stock_curves(rng, s_w, s_r, n, bins):
    omega = s_w * (1.0 - rng.random(n)) ** (-1 / 2.3)
    r = s_r * (omega / s_w) ** 0.6 * np.exp(0.3 * rng.standard_normal(n))
    raw = bin_equal_count(omega, r, bins)
    norm = bin_equal_count(*normalize_curve(omega, r, r.mean(), omega.mean()), bins)
    return raw, norm


def test_acceptance_6_normalization_collapse():
    n, bins = 20_000, 20
    caps = np.array(sorted(m.C for m in STOCK_META.values()))
    picks = caps[np.linspace(0, len(caps) - 1, 10).round().astype(int)]
    scale = picks / picks.min()  # spans the capitalization spread, ~13x
    rng = np.random.default_rng(6)
    perm = rng.permutation(10)
    raw, norm = zip(*(_stock_curves(rng, scale[i], scale[perm[i]] ** -1, n, bins)
                      for i in range(10)))
    floor = np.mean([max_curve_gap([_stock_curves(np.random.default_rng(100 + 10 * k + j),
                                                  1.0, 1.0, n, bins)[1] for j in range(10)])
                     for k in range(3)])
    g_norm, g_raw = max_curve_gap(list(norm)), max_curve_gap(list(raw))
    ok = g_norm <= 5 * floor and g_raw >= 10 * floor
    report(6, ok, f"noise floor {floor:.4f} dec, normalized gap {g_norm:.4f} "
                  f"({g_norm / floor:.2f}x <= 5x), unnormalized gap {g_raw:.3f} "
                  f"({g_raw / floor:.1f}x >= 10x)")
    assert ok


# ------------------------------------------------------------------ 7

def _mixture(x_of_omega, seed, n=200_000):
    rng = np.random.default_rng(seed)
    omega = 100.0 * rng.integers(1, 41, n)
    filled = rng.random(n) < x_of_omega(omega)
    r_p = 2e-3
    r = np.where(filled, 1e-4 * np.sqrt(omega / 100.0), r_p)
    return bin_mixture(omega, r, filled, 20)


def _dip_check(tab, small):
    direct = tab["r_P"] * (1 - tab["x"]) + tab["r_F"] * tab["x"]
    exact = np.allclose(direct, tab["mean_r"], rtol=1e-12)
    cond = [anomaly_condition(tab["r_P"][i], tab["r_F"][i], tab["r_P"][i + 1], tab["r_F"][i + 1],
                              tab["x"][i], tab["x"][i + 1]) for i in range(small - 1)]
    falling = [tab["mean_r"][i] > tab["mean_r"][i + 1] for i in range(small - 1)]
    return exact, cond, falling


def test_acceptance_7_anomalous_dip():
    small = 10  # bins covering omega <= 2000 shares
    rising = _mixture(lambda w: np.clip(0.04 * w / 100.0, 0, 0.9), 7)
    flat = _mixture(lambda w: np.clip(0.9 - 0.6 * np.log10(w / 100.0), 0.05, 1), 8)
    ex1, cond1, fall1 = _dip_check(rising, small)
    ex2, cond2, fall2 = _dip_check(flat, small)
    ok = (ex1 and ex2 and all(cond1) and all(fall1) and cond1 == fall1
          and not any(cond2) and not any(fall2))
    report(7, ok, f"dip mixture: condition holds {sum(cond1)}/{small - 1} bin pairs, curve falls "
                  f"{sum(fall1)}/{small - 1}; violating mixture: condition {sum(cond2)}, falls "
                  f"{sum(fall2)}; mixture identity exact: {ex1 and ex2}")
    assert ok


# ------------------------------------------------------------------ 8

def test_acceptance_8_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        cfg = load_config(None, synthetic=True, stocks=3, events=10_000, seed=8,
                          out=str(tmp_path / name))
        assert run_pipeline(cfg).exit_code == 0
        outs.append({p.relative_to(tmp_path / name).as_posix(): p.read_bytes()
                     for p in sorted((tmp_path / name).rglob("*.json"))})
    ok = outs[0] == outs[1] and len(outs[0]) >= 5
    report(8, ok, f"{len(outs[0])} JSON files compared byte for byte, identical: {ok}")
    assert ok


# ------------------------------------------------------------------ 9

def test_acceptance_9_trade_invariants():
    total = {"nonpositive_size": 0, "buy_negative_return": 0, "sell_positive_return": 0,
             "partial_below_half_tick": 0}
    n_trades, seed = 0, 0
    while n_trades < 1_000_000:
        ev = generate_arrays(FlowConfig(seed=900 + seed, n_events=1_000_000,
                                        stock=f"{seed:06d}"))
        df, _ = reconstruct_trades(ev)
        for k, v in invariant_violations(df).items():
            total[k] += v
        n_trades += len(df)
        seed += 1
    ok = sum(total.values()) == 0
    report(9, ok, f"{n_trades} trades from {seed} streams, violations {total}")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
