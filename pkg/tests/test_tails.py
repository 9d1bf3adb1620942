import numpy as np
import pytest

from lobimpact.errors import TooFewTailPoints
from lobimpact.orderflow import generate_planted_impact, pareto_sizes
from lobimpact.reference import RELATION_ALL
from lobimpact.tails import (RelationTest, ccdf, fit_tail, impact_return_ccdf, ks_distance,
                             loglog_slope, pareto_ccdf, relation_test, select_range)


def pareto(n, tail, seed, x_min=1.0):
    rng = np.random.Generator(np.random.Philox(seed))
    return pareto_sizes(1.0 - rng.random(n), tail, x_min)


def test_ccdf_small_sample():
    x, p = ccdf([3, 1, 2])
    assert list(x) == [1, 2, 3]
    np.testing.assert_allclose(p, [2 / 3, 1 / 3, 0])
    x, p = ccdf([2, 2, 5])
    assert list(x) == [2, 5] and list(p) == [1 / 3, 0]


def test_ccdf_monotone():
    _, p = ccdf(pareto(5000, 1.2, 0))
    assert np.all(np.diff(p) <= 0)
    with pytest.raises(ValueError):
        ccdf([])


def test_pareto_ccdf_slope():
    x, p = ccdf(pareto(100_000, 1.5, 1))
    use = (x > 2) & (x < 200)
    slope = np.polyfit(np.log(x[use]), np.log(p[use]), 1)[0]
    assert slope == pytest.approx(-1.5, abs=0.05)


def test_exact_power_law_points():
    # sample whose CCDF at each point is exactly (x)^-2.5 on the range
    n = 1000
    i = np.arange(1, n)
    x = ((n - i) / n) ** (-1 / 2.5)
    x = np.r_[x, x[-1] * 2]
    fit = fit_tail(x, (x[0], x[-2]), min_points=10)
    assert fit.exponent == pytest.approx(2.5, abs=1e-12)


def test_hill_and_ccdf_agree():
    x = pareto(200_000, 2.0, 2)
    a = fit_tail(x, (1.0, 100.0), "ccdf")
    b = fit_tail(x, (1.0, 100.0), "hill")
    assert abs(a.exponent - b.exponent) <= 2 * (a.stderr + b.stderr) + 0.02
    assert b.exponent == pytest.approx(2.0, abs=3 * b.stderr)
    assert "ignored" in b.note


def test_rescaling_invariance():
    x = pareto(50_000, 2.3, 3)
    for method in ("ccdf", "hill"):
        a = fit_tail(x, (2.0, 50.0), method)
        b = fit_tail(4 * x, (8.0, 200.0), method)
        assert a.exponent == pytest.approx(b.exponent, rel=1e-9)


def test_too_few_points_and_bad_input():
    with pytest.raises(TooFewTailPoints):
        fit_tail(pareto(100, 2.0, 4), (15.9, 141.0))
    with pytest.raises(ValueError):
        fit_tail([1, 2, 3], (5, 1))
    with pytest.raises(ValueError):
        fit_tail(pareto(1000, 2.0, 4), (1, 10), method="mle")


def test_normalized_pareto_in_reference_range_statistical_error():
    # Pareto(2.36) normalized by its mean puts a few hundred points in [15.9, 141];
    # the estimator should sit within three standard errors of the truth.
    x = pareto(1_000_000, 2.36, 5)
    fit = fit_tail(x / x.mean(), (15.9, 141.0))
    assert 300 < fit.n_tail < 500
    assert abs(fit.exponent - 2.36) < 3 * max(fit.stderr, 2.36 / np.sqrt(fit.n_tail))


@pytest.mark.xfail(reason="about 400 points in range: sampling spread ~0.19 exceeds 0.06",
                   strict=False)
@pytest.mark.parametrize("seed", range(4))
def test_normalized_pareto_in_reference_range_tight(seed):
    x = pareto(1_000_000, 2.36, 100 + seed)
    assert fit_tail(x / x.mean(), (15.9, 141.0)).exponent == pytest.approx(2.36, abs=0.06)


def test_select_range_on_pareto_with_bulk():
    rng = np.random.default_rng(6)
    x = np.r_[rng.uniform(0.1, 1.0, 20_000), pareto(20_000, 2.5, 6)]
    lo, hi = select_range(x)
    assert 0.7 <= lo <= 2.0 and hi == x.max()
    assert ks_distance(np.sort(x[x >= lo]), lo, 2.5) < 0.05
    with pytest.raises(TooFewTailPoints):
        select_range(np.ones(10))


def test_relation_from_exponents_exact():
    t = RelationTest.from_exponents(2.30, 3.45, 0.66)
    assert t.ratio == 2.30 / 3.45 and t.D == (t.ratio - 0.66) / 0.66
    ref = RELATION_ALL["buy"]
    assert round(ref["alpha_omega"] / ref["alpha_r"], 2) == ref["ratio"]


def test_relation_planted_two_thirds():
    omega, r = generate_planted_impact(200_000, 2 / 3, 1.0, 1.5, seed=7)
    t, details = relation_test(omega, r, (2.0, 200.0), (2.0 ** (2 / 3), 200.0 ** (2 / 3)),
                               method="hill")
    se = details["size_tail"]["stderr"] + details["return_tail"]["stderr"]
    assert t.ratio == pytest.approx(2 / 3, abs=2 * se)
    assert abs(t.D) < 0.05


@pytest.mark.parametrize("tail, alpha", [(1.5, 2 / 3), (2.3, 0.66), (2.36, 0.69)])
def test_change_of_variables_analytic(tail, alpha):
    fn = lambda y: impact_return_ccdf(y, alpha, tail, prefactor=3.0, x_min=2.0)  # noqa: E731
    y1 = 3.0 * 2.0**alpha * 1.5
    assert loglog_slope(fn, y1, y1 * 40) == pytest.approx(tail / alpha, abs=1e-12)


def test_pareto_ccdf_below_minimum():
    assert pareto_ccdf(0.5, 2.0, 1.0) == 1.0
    assert pareto_ccdf(4.0, 2.0, 2.0) == 0.25
