"""Capitalization-scaling collapse: y(x, C) = C**-gamma * f(x / C**delta).

The objective for a candidate (delta, gamma) sorts the points by
x / C**delta, cuts them into bins and averages, over bins, the squared
coefficients of variation of y * C**gamma and of x / C**delta. The search
minimizes it on a dense grid and scores the result with
R = 1 - eps(best) / eps(0, 0).

Capitalization is constant within a stock, so per-bin moments of y * C**gamma
are linear in per-(bin, stock) sums of y and y**2. One sort per delta then
serves every gamma on the grid through a single matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DegenerateBins, EmptyDay, ZeroMeanReturn
from .impact import equal_count_edges
from .orderflow import DAY_NS
from .trades import StockMeta, trade_type_mask

DEFAULT_BINS = 50
GRID_UNIT = 1e-3  # every searched exponent is an integer multiple of this
TIE_RTOL = 1e-12


@dataclass
class CollapseData:
    """Points for a collapse test. ``C`` is float capitalization in million shares."""

    y: np.ndarray
    x: np.ndarray
    C: np.ndarray
    stock: np.ndarray

    def __post_init__(self) -> None:
        self.y = np.asarray(self.y, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        self.stock = np.asarray(self.stock)
        if not (len(self.y) == len(self.x) == len(self.C) == len(self.stock)):
            raise ValueError("y, x, C and stock must have equal length")
        if np.any(self.C <= 0) or np.any(self.x <= 0):
            raise ValueError("collapse points need C > 0 and x > 0")

    def __len__(self) -> int:
        return len(self.y)

    @classmethod
    def concat(cls, parts: list[CollapseData]) -> CollapseData:
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("y", "x", "C", "stock")))


@dataclass
class CollapseResult:
    delta: float
    gamma: float
    R: float
    eps_min: float
    eps_00: float
    n_bins: int
    excluded_bins: int
    binning: str
    grid_deltas: np.ndarray = field(repr=False)
    grid_gammas: np.ndarray = field(repr=False)
    surface: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {"delta": self.delta, "gamma": self.gamma, "R": self.R,
                "eps_min": self.eps_min, "eps_00": self.eps_00, "n_bins": self.n_bins,
                "excluded_bins": self.excluded_bins, "binning": self.binning}

    def surface_frame(self) -> pd.DataFrame:
        d, g = np.meshgrid(self.grid_deltas, self.grid_gammas, indexing="ij")
        return pd.DataFrame({"delta": d.ravel(), "gamma": g.ravel(),
                             "epsilon": self.surface.ravel()})


class EpsilonSurface:
    """Vectorized evaluator of the mean two-dimensional variance."""

    def __init__(self, data: CollapseData, n_bins: int = DEFAULT_BINS,
                 binning: str = "equal_count") -> None:
        if n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if binning not in ("equal_count", "equal_width"):
            raise ValueError(f"unknown binning {binning!r}")
        if len(data) < n_bins:
            raise DegenerateBins(f"{len(data)} points for {n_bins} bins")
        self.n_bins = n_bins
        self.binning = binning
        caps, self._group = np.unique(data.C, return_inverse=True)
        self._log_caps = np.log(caps)
        self._log_c = self._log_caps[self._group]
        self._log_x = np.log(data.x)
        self._y = data.y
        starts = equal_count_edges(len(data), n_bins)
        self._bin_of_pos = np.repeat(np.arange(n_bins), np.diff(np.append(starts, len(data))))

    def _bins_for(self, delta: float):
        log_u = self._log_x - delta * self._log_c
        if self.binning == "equal_count":
            order = np.argsort(log_u, kind="stable")
            return self._bin_of_pos, order, log_u[order]
        lo, hi = log_u.min(), log_u.max()
        width = (hi - lo) / self.n_bins or 1.0
        b = np.minimum(((log_u - lo) / width).astype(np.int64), self.n_bins - 1)
        order = np.arange(len(log_u))
        return b, order, log_u

    def row(self, delta: float, gammas) -> tuple[np.ndarray, np.ndarray]:
        """Mean epsilon and excluded-bin count at ``delta`` for every gamma."""
        gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        nb, k = self.n_bins, len(self._log_caps)
        b, order, log_u = self._bins_for(delta)
        u = np.exp(log_u)
        g = self._group[order]
        y = self._y[order]
        cnt = np.bincount(b, minlength=nb).astype(float)
        su = np.bincount(b, u, minlength=nb)
        suu = np.bincount(b, u * u, minlength=nb)
        idx = b * k + g
        s1 = np.bincount(idx, y, minlength=nb * k).reshape(nb, k)
        s2 = np.bincount(idx, y * y, minlength=nb * k).reshape(nb, k)

        with np.errstate(invalid="ignore", divide="ignore"):
            mu_u = su / cnt
            cv2_u = np.maximum(suu / cnt - mu_u**2, 0.0) / mu_u**2
            w = np.exp(np.outer(self._log_caps, gammas))
            m1 = (s1 @ w) / cnt[:, None]
            m2 = (s2 @ (w * w)) / cnt[:, None]
            cv2_y = np.maximum(m2 - m1**2, 0.0) / m1**2
        ok = (cnt > 0)[:, None] & (m1 != 0) & (mu_u != 0)[:, None]
        total = np.where(ok, cv2_y + cv2_u[:, None], 0.0).sum(axis=0)
        n_ok = ok.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            eps = np.where(n_ok > 0, total / n_ok, np.nan)
        return eps, nb - n_ok

    def __call__(self, delta: float, gamma: float) -> float:
        eps, _ = self.row(delta, [gamma])
        if np.isnan(eps[0]):
            raise DegenerateBins("every bin has a zero mean")
        return float(eps[0])


def epsilon(data: CollapseData, delta: float, gamma: float, n_bins: int = DEFAULT_BINS,
            binning: str = "equal_count") -> float:
    return EpsilonSurface(data, n_bins, binning)(delta, gamma)


def _pick(eps: np.ndarray, d_idx: np.ndarray, g_idx: np.ndarray) -> int:
    """Index of the minimum; near-ties go to the smallest norm, then lexicographic."""
    finite = np.isfinite(eps)
    if not finite.any():
        raise DegenerateBins("every bin has a zero mean at every grid point")
    best = eps[finite].min()
    tied = np.flatnonzero(finite & (eps <= best + TIE_RTOL * abs(best)))
    keys = [(int(d_idx[i]) ** 2 + int(g_idx[i]) ** 2, int(d_idx[i]), int(g_idx[i]), i)
            for i in tied]
    return min(keys)[3]


def _grid(surface: EpsilonSurface, d_idx: np.ndarray, g_idx: np.ndarray):
    eps = np.empty((len(d_idx), len(g_idx)))
    excl = np.empty((len(d_idx), len(g_idx)), dtype=np.int64)
    gammas = np.round(g_idx * GRID_UNIT, 3)
    for i, di in enumerate(d_idx):
        eps[i], excl[i] = surface.row(round(di * GRID_UNIT, 3), gammas)
    return eps, excl


def search_exponents(data: CollapseData, n_bins: int = DEFAULT_BINS, *,
                     coarse_step: float = 0.01, fine_step: float = 0.001,
                     bound: float = 1.0, binning: str = "equal_count") -> CollapseResult:
    """Grid search over (delta, gamma) in [-bound, bound]**2, then local refinement."""
    surface = EpsilonSurface(data, n_bins, binning)
    cs = int(round(coarse_step / GRID_UNIT))
    fs = int(round(fine_step / GRID_UNIT))
    lim = int(round(bound / GRID_UNIT))
    if cs < 1 or fs < 1 or lim % cs:
        raise ValueError("steps and bound must be multiples of 0.001 and align")

    coarse = np.arange(-lim, lim + 1, cs)
    eps_c, excl_c = _grid(surface, coarse, coarse)
    dd, gg = np.meshgrid(coarse, coarse, indexing="ij")
    i = _pick(eps_c.ravel(), dd.ravel(), gg.ravel())
    d0, g0 = int(dd.ravel()[i]), int(gg.ravel()[i])

    fd = np.arange(max(-lim, d0 - cs), min(lim, d0 + cs) + 1, fs)
    fg = np.arange(max(-lim, g0 - cs), min(lim, g0 + cs) + 1, fs)
    eps_f, excl_f = _grid(surface, fd, fg)
    fdd, fgg = np.meshgrid(fd, fg, indexing="ij")

    all_eps = np.concatenate([eps_c.ravel(), eps_f.ravel()])
    all_d = np.concatenate([dd.ravel(), fdd.ravel()])
    all_g = np.concatenate([gg.ravel(), fgg.ravel()])
    all_x = np.concatenate([excl_c.ravel(), excl_f.ravel()])
    j = _pick(all_eps, all_d, all_g)

    zero = np.flatnonzero((dd.ravel() == 0) & (gg.ravel() == 0))
    eps_00 = float(eps_c.ravel()[zero[0]]) if len(zero) else surface(0.0, 0.0)
    eps_min = float(all_eps[j])
    R = 1.0 - eps_min / eps_00 if eps_00 > 0 else 0.0
    return CollapseResult(delta=round(all_d[j] * GRID_UNIT, 3) + 0.0,
                          gamma=round(all_g[j] * GRID_UNIT, 3) + 0.0, R=R,
                          eps_min=eps_min, eps_00=eps_00, n_bins=n_bins,
                          excluded_bins=int(all_x[j]), binning=binning,
                          grid_deltas=np.round(coarse * GRID_UNIT, 3),
                          grid_gammas=np.round(coarse * GRID_UNIT, 3),
                          surface=eps_c)


def lc_normalize(omega, day) -> np.ndarray:
    """Daily-normalized trade sizes rescaled by the mean daily trade count.

    x = omega / (volume of its day) * (total trades / number of days), so the
    mean of x over all trades is exactly 1.
    """
    omega = np.asarray(omega, dtype=float)
    day = np.asarray(day)
    if len(omega) == 0:
        raise EmptyDay("no trades")
    days, inv = np.unique(day, return_inverse=True)
    volume = np.bincount(inv, omega)
    if np.any(volume <= 0):
        raise EmptyDay("a day has zero traded volume")
    return omega / volume[inv] * (len(omega) / len(days))


def _cells(trades: pd.DataFrame, kind: str):
    cell = trades[trade_type_mask(trades, kind)]
    for stock in sorted(set(cell["stock"])):
        yield stock, cell[cell["stock"] == stock]


def lfm_points(trades: pd.DataFrame, metas: dict[str, StockMeta], kind: str) -> CollapseData:
    """Unnormalized |r| against omega / <omega> per stock."""
    parts = []
    for stock, sub in _cells(trades, kind):
        omega = sub["omega"].to_numpy(dtype=float)
        parts.append(CollapseData(sub["r"].abs().to_numpy(), omega / omega.mean(),
                                  np.full(len(sub), metas[stock].C), np.full(len(sub), stock)))
    return CollapseData.concat(parts)


def lc_points(trades: pd.DataFrame, metas: dict[str, StockMeta], kind: str) -> CollapseData:
    """Unnormalized |r| against the daily-normalized size per stock."""
    parts = []
    for stock, sub in _cells(trades, kind):
        x = lc_normalize(sub["omega"].to_numpy(dtype=float),
                         sub["ts_ns"].to_numpy() // DAY_NS)
        parts.append(CollapseData(sub["r"].abs().to_numpy(), x,
                                  np.full(len(sub), metas[stock].C), np.full(len(sub), stock)))
    return CollapseData.concat(parts)


def double_points(trades: pd.DataFrame, metas: dict[str, StockMeta], kind: str) -> CollapseData:
    """|r| / <|r|> against omega / <omega> per stock."""
    parts = []
    for stock, sub in _cells(trades, kind):
        r = sub["r"].abs().to_numpy()
        if r.mean() == 0:
            raise ZeroMeanReturn(f"{stock} {kind}: average return is zero")
        omega = sub["omega"].to_numpy(dtype=float)
        parts.append(CollapseData(r / r.mean(), omega / omega.mean(),
                                  np.full(len(sub), metas[stock].C), np.full(len(sub), stock)))
    return CollapseData.concat(parts)


def compare_normalizations(lfm: CollapseData, lc: CollapseData, double: CollapseData,
                           n_bins: int = DEFAULT_BINS, *, search: dict | None = None,
                           keep_surfaces: bool = False) -> dict:
    """Collapse quality of capitalization scaling vs. plain average normalization.

    R for the average normalization is measured against the unscaled raw
    baseline eps_lfm(0, 0), since it has no exponents of its own to fit.
    ``search`` is passed to :func:`search_exponents`.
    """
    search = search or {}
    res_a = search_exponents(lfm, n_bins, **search)
    res_b = search_exponents(lc, n_bins, **search)
    eps_c = epsilon(double, 0.0, 0.0, n_bins, search.get("binning", "equal_count"))
    R_c = 1.0 - eps_c / res_a.eps_00 if res_a.eps_00 > 0 else 0.0
    out = {"lfm": res_a.as_dict(), "lc": res_b.as_dict(),
           "double": {"delta": 0.0, "gamma": 0.0, "eps": eps_c, "baseline_eps_00": res_a.eps_00,
                      "R": R_c},
           "R": {"lfm": res_a.R, "lc": res_b.R, "double": R_c}}
    if keep_surfaces:
        out["surfaces"] = {"lfm": res_a.surface_frame(), "lc": res_b.surface_frame()}
    return out
