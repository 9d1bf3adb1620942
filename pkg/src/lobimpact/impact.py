"""Price impact curves: equal-count binning, average normalization, power-law fits.

Curves are built on |r| so that buyer- and seller-initiated trades are fitted
the same way; the sign stays on the trade records.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from .errors import DegenerateDenominator, TooFewPoints, ZeroMeanReturn
from .trades import MIXED_TYPES, TRADE_TYPES, TypeStats, trade_type_mask

DEFAULT_BINS = 20
MIN_FIT_BINS = 5
# mixed buy/sell curves are fitted only above the 100-share lot size
MIXED_FIT_RANGE = (float(np.nextafter(100.0, np.inf)), np.inf)


@dataclass
class ImpactCurve:
    stock: str
    type: str
    mean_omega: np.ndarray
    mean_r: np.ndarray
    count: np.ndarray
    normalized: bool = False

    def __len__(self) -> int:
        return len(self.mean_omega)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"bin_mean_omega": self.mean_omega, "bin_mean_r": self.mean_r,
                             "count": self.count})


@dataclass(frozen=True)
class PowerLawFit:
    prefactor: float
    exponent: float
    stderr: float
    fit_range: tuple[float, float]
    n_bins_used: int

    def as_dict(self) -> dict:
        lo, hi = self.fit_range
        return {"A": self.prefactor, "alpha": self.exponent, "stderr_alpha": self.stderr,
                "fit_range": [lo, None if np.isinf(hi) else hi], "n_bins_used": self.n_bins_used}


def equal_count_edges(n: int, n_bins: int) -> np.ndarray:
    """Start offsets of ``n_bins`` contiguous runs of size floor(n/k) or ceil(n/k)."""
    base, extra = divmod(n, n_bins)
    sizes = np.full(n_bins, base, dtype=np.int64)
    sizes[:extra] += 1
    return np.concatenate(([0], np.cumsum(sizes)[:-1]))


def bin_equal_count(omega, r, n_bins: int = DEFAULT_BINS, *, stock: str = "",
                    kind: str = "", normalized: bool = False) -> ImpactCurve:
    """Sort by size (stable) and average both coordinates over equal-count bins."""
    omega = np.asarray(omega, dtype=float)
    r = np.asarray(r, dtype=float)
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if len(omega) < n_bins:
        raise TooFewPoints(f"{len(omega)} points for {n_bins} bins")
    order = np.argsort(omega, kind="stable")
    starts = equal_count_edges(len(omega), n_bins)
    counts = np.diff(np.append(starts, len(omega)))
    mean_omega = np.add.reduceat(omega[order], starts) / counts
    mean_r = np.add.reduceat(r[order], starts) / counts
    return ImpactCurve(stock, kind, mean_omega, mean_r, counts, normalized)


def normalize_curve(omega, r, mean_r: float, mean_omega: float
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Scale sizes and returns by their stock/type averages."""
    if mean_r == 0:
        raise ZeroMeanReturn("average return is zero; cell cannot be normalized")
    if not mean_omega > 0:
        raise ValueError("average trade size must be positive")
    return np.asarray(omega, dtype=float) / mean_omega, np.asarray(r, dtype=float) / mean_r


def fit_power_law(curve: ImpactCurve, fit_range: tuple[float, float] | None = None,
                  min_bins: int = MIN_FIT_BINS) -> PowerLawFit:
    """OLS of log mean_r on log mean_omega over the bins inside ``fit_range``.

    Bins with a non-positive mean return carry no log and are dropped.
    """
    lo, hi = fit_range if fit_range is not None else (-np.inf, np.inf)
    x, y = curve.mean_omega, curve.mean_r
    use = (x >= lo) & (x <= hi) & (y > 0) & (x > 0)
    if use.sum() < min_bins:
        raise TooFewPoints(f"{int(use.sum())} usable bins, need {min_bins}")
    return _loglog_ols(x[use], y[use], (lo, hi))


def fit_power_law_pairs(omega, r, fit_range: tuple[float, float] | None = None) -> PowerLawFit:
    """Same regression on the raw pairs instead of bin means."""
    omega = np.asarray(omega, dtype=float)
    r = np.asarray(r, dtype=float)
    lo, hi = fit_range if fit_range is not None else (-np.inf, np.inf)
    use = (omega >= lo) & (omega <= hi) & (r > 0) & (omega > 0)
    if use.sum() < MIN_FIT_BINS:
        raise TooFewPoints(f"{int(use.sum())} usable pairs")
    return _loglog_ols(omega[use], r[use], (lo, hi))


def _loglog_ols(x, y, fit_range) -> PowerLawFit:
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise TooFewPoints("all fit points share one size")
    res = stats.linregress(lx, ly)
    return PowerLawFit(float(np.exp(res.intercept)), float(res.slope), float(res.stderr),
                       (float(fit_range[0]), float(fit_range[1])), len(x))


def mixture_return(r_partial, r_filled, x):
    """Mean return of a group whose filled-trade share is ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("filled fraction must lie in [0, 1]")
    out = np.asarray(r_partial) * (1 - x) + np.asarray(r_filled) * x
    return float(out) if out.ndim == 0 else out


def anomaly_condition(r_p1: float, r_f1: float, r_p2: float, r_f2: float,
                      x1: float, x2: float) -> bool:
    """Whether group 2's filled share is high enough for r_1 > r_2.

    With equal partial-trade returns in both groups, r_1 > r_2 exactly when
    x2 * (r_p2 - r_f2) > x1 * (r_p1 - r_f1), i.e.
    x2 > x1 * (r_p1 - r_f1) / (r_p2 - r_f2).
    """
    g1, g2 = r_p1 - r_f1, r_p2 - r_f2
    if g1 == 0 or g2 == 0:
        raise DegenerateDenominator("partial and filled returns coincide in a group")
    return bool(x2 > x1 * g1 / g2)


def bin_mixture(omega, r, filled, n_bins: int = DEFAULT_BINS) -> pd.DataFrame:
    """Per-bin decomposition of a pooled buy (or sell) sample.

    Columns: mean_omega, mean_r, count, x (filled share), r_F, r_P. r_F or r_P
    is NaN when a bin holds no trade of that kind.
    """
    omega = np.asarray(omega, dtype=float)
    r = np.asarray(r, dtype=float)
    filled = np.asarray(filled, dtype=bool)
    if len(omega) < n_bins:
        raise TooFewPoints(f"{len(omega)} points for {n_bins} bins")
    order = np.argsort(omega, kind="stable")
    starts = equal_count_edges(len(omega), n_bins)
    o, rr, f = omega[order], r[order], filled[order]
    counts = np.diff(np.append(starts, len(o)))
    n_f = np.add.reduceat(f.astype(np.int64), starts)
    s_f = np.add.reduceat(np.where(f, rr, 0.0), starts)
    s_p = np.add.reduceat(np.where(f, 0.0, rr), starts)
    with np.errstate(invalid="ignore", divide="ignore"):
        r_f = np.where(n_f > 0, s_f / n_f, np.nan)
        r_p = np.where(counts - n_f > 0, s_p / (counts - n_f), np.nan)
    return pd.DataFrame({
        "mean_omega": np.add.reduceat(o, starts) / counts,
        "mean_r": np.add.reduceat(rr, starts) / counts,
        "count": counts,
        "x": n_f / counts,
        "r_F": r_f,
        "r_P": r_p,
    })


def max_curve_gap(curves: list[ImpactCurve]) -> float:
    """Largest vertical spread between curves, in decades of mean return.

    Curves are compared bin by bin, so they must share the bin count.
    """
    if len({len(c) for c in curves}) != 1:
        raise ValueError("curves must have the same number of bins")
    logs = np.log10(np.vstack([c.mean_r for c in curves]))
    return float(np.max(logs.max(axis=0) - logs.min(axis=0)))


@dataclass
class CurveSet:
    curves: dict[tuple[str, str, bool], ImpactCurve] = field(default_factory=dict)
    excluded: list[dict] = field(default_factory=list)

    def get(self, stock: str, kind: str, normalized: bool) -> ImpactCurve:
        return self.curves[(stock, kind, normalized)]


def build_all_curves(trades: pd.DataFrame, type_stats: TypeStats,
                     n_bins: int = DEFAULT_BINS) -> CurveSet:
    """Per-stock raw and normalized curves plus market aggregates.

    For each of PB/PS/FB/FS the aggregate ("ALL") pools the normalized pairs of
    every stock before re-binning. AllBuy/AllSell pool filled and partially
    filled trades in raw shares and |r|, keeping the 100-share lot boundary
    sharp across stocks.
    """
    out = CurveSet()
    stocks = sorted(set(trades["stock"]))
    pooled: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {k: [] for k in TRADE_TYPES}
    for stock in stocks:
        sub = trades[trades["stock"] == stock]
        for kind in TRADE_TYPES + MIXED_TYPES:
            cell = sub[trade_type_mask(sub, kind)]
            omega = cell["omega"].to_numpy(dtype=float)
            r = cell["r"].abs().to_numpy()
            try:
                out.curves[(stock, kind, False)] = bin_equal_count(
                    omega, r, n_bins, stock=stock, kind=kind)
            except TooFewPoints as exc:
                out.excluded.append({"stock": stock, "type": kind, "reason": str(exc)})
                continue
            if kind in MIXED_TYPES:
                continue
            try:
                mean_r = abs(type_stats.normalizers(stock, kind)[0])
                mean_omega = type_stats.normalizers(stock, kind)[1]
                xo, xr = normalize_curve(omega, r, mean_r, mean_omega)
            except ZeroMeanReturn as exc:
                out.excluded.append({"stock": stock, "type": kind, "reason": str(exc)})
                continue
            out.curves[(stock, kind, True)] = bin_equal_count(
                xo, xr, n_bins, stock=stock, kind=kind, normalized=True)
            pooled[kind].append((xo, xr))

    for kind, parts in pooled.items():
        if not parts:
            continue
        xo = np.concatenate([p[0] for p in parts])
        xr = np.concatenate([p[1] for p in parts])
        try:
            out.curves[("ALL", kind, True)] = bin_equal_count(
                xo, xr, n_bins, stock="ALL", kind=kind, normalized=True)
        except TooFewPoints as exc:
            out.excluded.append({"stock": "ALL", "type": kind, "reason": str(exc)})

    for kind in MIXED_TYPES:
        cell = trades[trade_type_mask(trades, kind)]
        if len(cell) == 0:
            continue
        try:
            out.curves[("ALL", kind, False)] = bin_equal_count(
                cell["omega"].to_numpy(dtype=float), cell["r"].abs().to_numpy(), n_bins,
                stock="ALL", kind=kind)
        except TooFewPoints as exc:
            out.excluded.append({"stock": "ALL", "type": kind, "reason": str(exc)})
    return out
