import numpy as np
import pytest

from lobimpact.errors import ConfigError
from lobimpact.events import BUY_LOT
from lobimpact.orderflow import (FlowConfig, generate, generate_arrays, generate_planted_impact,
                                 pareto_sizes, planted_return_exponent)
from lobimpact.orderbook import replay
from lobimpact.tails import fit_tail


def test_zero_events_is_empty():
    assert list(generate(FlowConfig(n_events=0))) == []
    assert len(generate_arrays(FlowConfig(n_events=0))) == 0


def test_same_seed_same_stream():
    a = generate_arrays(FlowConfig(seed=5, n_events=5000))
    b = generate_arrays(FlowConfig(seed=5, n_events=5000))
    c = generate_arrays(FlowConfig(seed=6, n_events=5000))
    assert a == b and a != c


def test_stream_independent_of_backend():
    from lobimpact.orderbook import available_backends
    streams = [generate_arrays(FlowConfig(seed=2, n_events=3000), b) for b in available_backends()]
    assert all(s == streams[0] for s in streams)


def test_events_are_valid_against_the_book():
    ev = generate_arrays(FlowConfig(seed=1, n_events=30_000))
    rr = replay(ev)  # raises on a dead cancel or a duplicate id
    sub = ev.kind == 0
    assert (ev.price[sub] >= 1).all() and (ev.size[sub] >= 1).all()
    assert (ev.size[sub & (ev.side == 1)] % BUY_LOT == 0).all()
    assert np.all(np.diff(ev.seq) > 0) and np.all(np.diff(ev.ts_ns) >= 0)
    assert set(np.unique(rr.status)) <= {-1, 0, 1, 2}


def test_no_lot_rule_leaves_sizes_unrounded():
    ev = generate_arrays(FlowConfig(seed=1, n_events=5000, lot_rule=None))
    buys = ev.size[(ev.kind == 0) & (ev.side == 1)]
    assert (buys % BUY_LOT != 0).any()


@pytest.mark.parametrize("bad", [dict(p_cancel=1.5), dict(size_tail=1.0), dict(size_min=0),
                                 dict(placement_width=0.5), dict(lot_rule="x")])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        FlowConfig(**bad)


@pytest.mark.slow
def test_generated_size_tail():
    ev = generate_arrays(FlowConfig(seed=1, n_events=1_000_000, size_tail=1.5, lot_rule=None))
    sizes = ev.size[ev.kind == 0]
    assert fit_tail(sizes, (1000, 1e5)).exponent == pytest.approx(1.5, abs=0.05)


def test_pareto_sampler_is_inverse_cdf():
    u = np.array([1.0, 0.5, 0.25])
    np.testing.assert_allclose(pareto_sizes(u, 2.0, 3.0), 3.0 * u ** -0.5)


def test_planted_exponents():
    assert planted_return_exponent(2 / 3, 1.5) == pytest.approx(2.25, abs=1e-15)
    assert planted_return_exponent(0.66, 2.30) == pytest.approx(3.4848, abs=1e-4)


def test_planted_pairs_are_exact_without_noise():
    omega, r = generate_planted_impact(1000, 0.66, 2.5, 2.3, seed=4)
    np.testing.assert_allclose(r / 2.5, omega**0.66, rtol=1e-14)
    assert omega.min() >= 1.0


def test_planted_is_seeded():
    a = generate_planted_impact(100, 0.5, seed=1, noise=0.1)
    b = generate_planted_impact(100, 0.5, seed=1, noise=0.1)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_planted_validation():
    with pytest.raises(ConfigError):
        generate_planted_impact(10, 0.0)
    with pytest.raises(ConfigError):
        generate_planted_impact(10, 0.5, tail_exponent=1.0)
