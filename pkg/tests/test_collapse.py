import numpy as np
import pandas as pd
import pytest

from lobimpact.collapse import (CollapseData, EpsilonSurface, compare_normalizations,
                                double_points, epsilon, lc_normalize, lc_points, lfm_points,
                                search_exponents)
from lobimpact.errors import DegenerateBins, EmptyDay
from lobimpact.trades import StockMeta
from oracles import epsilon_direct

CAPS = np.geomspace(100, 1400, 10)


def planted(seed, delta=0.3, gamma=0.4, noise=0.05, n=5000, caps=CAPS):
    rng = np.random.default_rng(seed)
    parts = []
    for i, c in enumerate(caps):
        x = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n))
        u = x / c**delta
        y = c**-gamma * 2 * u**2 / (1 + u**2) * np.exp(noise * rng.standard_normal(n))
        parts.append(CollapseData(y, x, np.full(n, c), np.full(n, str(i))))
    return CollapseData.concat(parts)


def test_zero_spread_gives_zero():
    x = np.repeat([1.0, 2.0, 3.0, 4.0], 10)
    d = CollapseData(x**0.5, x, np.full(40, 50.0), np.zeros(40))
    assert epsilon(d, 0.0, 0.0, 4) == 0.0


def test_single_cap_is_flat():
    rng = np.random.default_rng(0)
    d = CollapseData(rng.random(500) + 0.1, rng.random(500) + 0.1, np.full(500, 300.0),
                     np.zeros(500))
    base = epsilon(d, 0.0, 0.0, 10)
    for dl, gm in ((0.5, -0.3), (-1.0, 1.0), (0.2, 0.7)):
        assert epsilon(d, dl, gm, 10) == pytest.approx(base, rel=1e-10)
    res = search_exponents(d, 10, coarse_step=0.1, bound=0.5)
    assert (res.delta, res.gamma, res.R) == (0.0, 0.0, 0.0)


def test_planted_point_beats_origin():
    d = planted(1, n=300)
    assert epsilon(d, 0.3, 0.4) < epsilon(d, 0.0, 0.0)


@pytest.mark.parametrize("binning", ["equal_count"])
def test_matches_direct_oracle(binning):
    rng = np.random.default_rng(2)
    n = 240
    d = CollapseData(rng.random(n) + 0.01, rng.pareto(2, n) + 0.5,
                     rng.choice([10.0, 50.0, 400.0], n), np.zeros(n))
    surf = EpsilonSurface(d, 12, binning)
    for dl, gm in ((0.0, 0.0), (0.3, 0.4), (-0.7, 0.25), (1.0, -1.0)):
        want = epsilon_direct(d.y.tolist(), d.x.tolist(), d.C.tolist(), dl, gm, 12)
        assert surf(dl, gm) == pytest.approx(want, rel=1e-9)
        row, _ = surf.row(dl, [gm, 0.0])
        assert row[0] == pytest.approx(want, rel=1e-9)


def test_scale_and_relabel_invariance():
    d = planted(3, n=200)
    base = epsilon(d, 0.2, 0.1)
    scaled = CollapseData(7.5 * d.y, d.x, d.C, d.stock)
    relabeled = CollapseData(d.y, d.x, d.C, np.char.add("s", d.stock))
    assert epsilon(scaled, 0.2, 0.1) == pytest.approx(base, rel=1e-12)
    assert epsilon(relabeled, 0.2, 0.1) == base


def test_degenerate_bins():
    d = CollapseData(np.zeros(100), np.arange(1, 101.0), np.repeat([1.0, 2.0], 50), np.zeros(100))
    with pytest.raises(DegenerateBins):
        epsilon(d, 0.0, 0.0, 5)
    with pytest.raises(DegenerateBins):
        epsilon(d, 0.0, 0.0, 200)


def test_search_properties_and_recovery():
    res = search_exponents(planted(4), 100)
    assert res.delta == pytest.approx(0.3, abs=0.02)
    assert res.gamma == pytest.approx(0.4, abs=0.02)
    assert res.R >= 0.9
    assert res.R == pytest.approx(1 - res.eps_min / res.eps_00, abs=0)
    assert res.eps_min <= res.eps_00
    assert np.nanmin(res.surface) >= 0
    assert len(res.surface_frame()) == 201 * 201


def test_search_null():
    rng = np.random.default_rng(5)
    n = 30_000
    x = np.exp(rng.uniform(-4, 4, n))
    d = CollapseData(x / (1 + x) * np.exp(0.05 * rng.standard_normal(n)), x,
                     rng.choice(CAPS, n), np.zeros(n))
    res = search_exponents(d)
    assert abs(res.delta) <= 0.02 and abs(res.gamma) <= 0.02 and res.R <= 0.05


def test_search_validation():
    with pytest.raises(ValueError):
        search_exponents(planted(0, n=50), 10, coarse_step=0.03)


def test_lc_uniform_and_mean():
    assert np.all(lc_normalize(np.full(7, 300.0), np.zeros(7)) == 1.0)
    rng = np.random.default_rng(6)
    omega = rng.integers(1, 1000, 900).astype(float)
    day = rng.integers(0, 5, 900)
    x = lc_normalize(omega, day)
    assert x.mean() == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(lc_normalize(3 * omega, day), x, rtol=1e-12)
    np.testing.assert_allclose(lc_normalize(omega, (day + 3) % 5 + 10), x, rtol=1e-12)


def test_lc_days_with_same_sizes_agree():
    sizes = np.array([100.0, 200.0, 700.0])
    x = lc_normalize(np.r_[sizes, sizes], np.r_[np.zeros(3), np.ones(3)])
    np.testing.assert_array_equal(x[:3], x[3:])


def test_lc_errors():
    with pytest.raises(EmptyDay):
        lc_normalize([], [])
    with pytest.raises(EmptyDay):
        lc_normalize([0.0, 0.0], [0, 0])


def _stocks(seed, identical=False):
    """Ten stocks sharing f after double normalization, scales unrelated to C."""
    rng = np.random.default_rng(seed)
    frames, metas = [], {}
    scale_rng = np.random.default_rng(seed + 100)
    for i, c in enumerate(CAPS):
        code = f"S{i}"
        metas[code] = StockMeta(code, 2 * c, c)
        s_w, s_r = (1.0, 1.0) if identical else np.exp(scale_rng.uniform(0, np.log(10), 2))
        if identical:
            rng = np.random.default_rng(seed)
        n = 4000
        w = np.ceil(s_w * 100 * (1 - rng.random(n)) ** (-1 / 1.8))
        wn = w / w.mean()
        r = s_r * 1e-4 * wn**0.6 * np.exp(0.1 * rng.standard_normal(n))
        frames.append(pd.DataFrame({"stock": code, "omega": w.astype(np.int64), "r": r,
                                    "type": "FB", "direction": "B",
                                    "ts_ns": rng.integers(0, 5, n) * 86_400 * 10**9}))
    return pd.concat(frames, ignore_index=True), metas


def test_double_normalization_dominates():
    trades, metas = _stocks(7)
    rep = compare_normalizations(lfm_points(trades, metas, "FB"), lc_points(trades, metas, "FB"),
                                 double_points(trades, metas, "FB"), 50,
                                 search=dict(coarse_step=0.05))
    assert rep["R"]["double"] > rep["R"]["lfm"]
    assert rep["R"]["double"] > rep["R"]["lc"]


def test_identical_stocks_score_equally():
    trades, metas = _stocks(8, identical=True)
    metas = {k: type(m)(k, 500.0, 400.0) for k, m in metas.items()}
    rep = compare_normalizations(lfm_points(trades, metas, "FB"), lc_points(trades, metas, "FB"),
                                 double_points(trades, metas, "FB"), 20,
                                 search=dict(coarse_step=0.1), keep_surfaces=True)
    assert rep["R"]["lfm"] == rep["R"]["lc"] == 0.0
    assert rep["R"]["double"] == pytest.approx(0.0, abs=1e-12)
    assert set(rep["surfaces"]) == {"lfm", "lc"}
