"""Power-law tail exponents and the impact/size/return exponent relation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import TooFewTailPoints
from .impact import DEFAULT_BINS, bin_equal_count, fit_power_law

DEFAULT_RANGE = (15.9, 141.0)
MIN_TAIL = 50


@dataclass(frozen=True)
class TailFit:
    exponent: float
    stderr: float
    scaling_range: tuple[float, float]
    n_tail: int
    method: str
    note: str = ""

    def as_dict(self) -> dict:
        lo, hi = self.scaling_range
        return {"exponent": self.exponent, "stderr": self.stderr,
                "scaling_range": [lo, None if np.isinf(hi) else hi], "n_tail": self.n_tail,
                "method": self.method, "note": self.note}


@dataclass(frozen=True)
class RelationTest:
    alpha_omega: float
    alpha_r: float
    ratio: float
    alpha: float
    D: float

    @classmethod
    def from_exponents(cls, alpha_omega: float, alpha_r: float, alpha: float) -> RelationTest:
        ratio = alpha_omega / alpha_r
        return cls(alpha_omega, alpha_r, ratio, alpha, (ratio - alpha) / alpha)

    def as_dict(self) -> dict:
        return {"alpha_omega": self.alpha_omega, "alpha_r": self.alpha_r, "ratio": self.ratio,
                "alpha": self.alpha, "D": self.D}


def ccdf(sample) -> tuple[np.ndarray, np.ndarray]:
    """Empirical Pr(X > x) at the sorted unique sample values."""
    x = np.sort(np.asarray(sample, dtype=float))
    if len(x) == 0:
        raise ValueError("empty sample")
    uniq, counts = np.unique(x, return_counts=True)
    at_or_below = np.cumsum(counts)
    return uniq, (len(x) - at_or_below) / len(x)


def fit_tail(sample, scaling_range: tuple[float, float] = DEFAULT_RANGE,
             method: str = "ccdf", min_points: int = MIN_TAIL) -> TailFit:
    """Tail exponent of a positive sample.

    ``ccdf``: least squares of log CCDF on log x inside the range.
    ``hill``: maximum likelihood on the exceedances over the lower bound; the
    upper bound is ignored.
    """
    x = np.asarray(sample, dtype=float)
    x = x[x > 0]
    lo, hi = map(float, scaling_range)
    if not lo < hi:
        raise ValueError("scaling range needs lo < hi")
    if method == "ccdf":
        n_tail = int(((x >= lo) & (x <= hi)).sum())
        if n_tail < min_points:
            raise TooFewTailPoints(f"{n_tail} points in [{lo}, {hi}], need {min_points}")
        xs, p = ccdf(x)
        use = (xs >= lo) & (xs <= hi) & (p > 0)
        if use.sum() < 2:
            raise TooFewTailPoints("fewer than two CCDF points in range")
        res = stats.linregress(np.log(xs[use]), np.log(p[use]))
        return TailFit(float(-res.slope), float(res.stderr), (lo, hi), n_tail, "ccdf")
    if method == "hill":
        tail = x[x >= lo]
        k = len(tail)
        if k < min_points:
            raise TooFewTailPoints(f"{k} points above {lo}, need {min_points}")
        s = np.log(tail / lo).sum()
        if s == 0:
            raise TooFewTailPoints("all exceedances sit at the threshold")
        a = k / s
        return TailFit(float(a), float(a / np.sqrt(k)), (lo, hi), k, "hill",
                       note="upper bound of the range ignored")
    raise ValueError(f"unknown method {method!r}")


def ks_distance(tail: np.ndarray, x_min: float, exponent: float) -> float:
    """Kolmogorov-Smirnov distance between a sorted tail and Pareto(exponent, x_min)."""
    k = len(tail)
    model = 1.0 - (tail / x_min) ** (-exponent)
    i = np.arange(k)
    return float(max(np.max(np.abs((i + 1) / k - model)), np.max(np.abs(i / k - model))))


def select_range(sample, min_tail: int = MIN_TAIL, max_candidates: int = 200
                 ) -> tuple[float, float]:
    """Lower cutoff minimizing the KS distance of the Hill fit above it.

    The upper end is the sample maximum. Candidates are unique values leaving
    at least ``min_tail`` points, thinned to at most ``max_candidates``.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    x = x[x > 0]
    if len(x) < min_tail:
        raise TooFewTailPoints(f"{len(x)} positive points, need {min_tail}")
    cands = np.unique(x[: len(x) - min_tail + 1])
    if len(cands) > max_candidates:
        cands = cands[np.linspace(0, len(cands) - 1, max_candidates).round().astype(int)]
    best = None
    for lo in cands:
        tail = x[np.searchsorted(x, lo):]
        s = np.log(tail / lo).sum()
        if len(tail) < min_tail or s == 0:
            continue
        d = ks_distance(tail, lo, len(tail) / s)
        if best is None or d < best[0]:
            best = (d, float(lo))
    if best is None:
        raise TooFewTailPoints("no admissible lower cutoff")
    return best[1], float(x[-1])


def relation_test(omega, r, size_range: tuple[float, float] = DEFAULT_RANGE,
                  return_range: tuple[float, float] = DEFAULT_RANGE, *,
                  n_bins: int = DEFAULT_BINS, impact_range: tuple[float, float] | None = None,
                  method: str = "ccdf") -> tuple[RelationTest, dict]:
    """Fit impact exponent and both tails on one sample of (omega, |r|) pairs.

    Zero returns take part in the impact curve but not in the return tail.
    """
    omega = np.asarray(omega, dtype=float)
    r = np.abs(np.asarray(r, dtype=float))
    impact = fit_power_law(bin_equal_count(omega, r, n_bins), impact_range)
    size_fit = fit_tail(omega, size_range, method)
    ret_fit = fit_tail(r[r > 0], return_range, method)
    test = RelationTest.from_exponents(size_fit.exponent, ret_fit.exponent, impact.exponent)
    return test, {"impact": impact.as_dict(), "size_tail": size_fit.as_dict(),
                  "return_tail": ret_fit.as_dict()}


def pareto_ccdf(x, tail: float, x_min: float = 1.0):
    x = np.asarray(x, dtype=float)
    return np.where(x <= x_min, 1.0, (x / x_min) ** (-tail))


def impact_return_ccdf(y, alpha: float, tail: float, prefactor: float = 1.0,
                       x_min: float = 1.0):
    """Exact Pr(r > y) for r = prefactor * omega**alpha with Pareto omega."""
    return pareto_ccdf((np.asarray(y, dtype=float) / prefactor) ** (1.0 / alpha), tail, x_min)


def loglog_slope(fn, y1: float, y2: float) -> float:
    """Tail exponent of an analytic CCDF between two points of its tail."""
    return -float((np.log(fn(y2)) - np.log(fn(y1))) / (np.log(y2) - np.log(y1)))
