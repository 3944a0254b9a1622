import numpy as np
import pytest
from hypothesis import given, strategies as st

from bidask.dynkin import (brute_force_game_value, doob_decomposition, drift_harvest_strategy,
                           drift_sign_check, dynkin_value, game_payoff, grid_convergence,
                           grid_monotonicity_check, level_grid, mean_variation,
                           mean_variation_from_drift, median3, nash_check, sandwich_check)
from bidask.scenario import TreeStoppingTime, build_tree, conditional_expectation, STOP
from conftest import random_game
from oracles import game_value_enumerated, game_value_recursive


def depth1():
    tree = build_tree([2], [[0.5, 0.5]])
    return tree, np.array([0.1, 0.2, 0.8]), np.array([0.4, 0.2, 0.8])


@given(a=st.floats(-1e6, 1e6), b=st.floats(-1e6, 1e6), c=st.floats(-1e6, 1e6))
def test_median_returns_middle_input(a, b, c):
    m = float(median3(a, b, c))
    assert m == sorted([a, b, c])[1]


def test_depth_one_example():
    tree, bid, ask = depth1()
    game = dynkin_value(tree, bid, ask)
    assert game.value0 == pytest.approx(0.4)
    assert game.value0 == ask[0]
    mart, drift = doob_decomposition(tree, game.value)
    assert drift[1] == pytest.approx(0.1) and drift[2] == pytest.approx(0.1)
    assert mart[1:].tolist() == pytest.approx([-0.3, 0.3])
    assert mean_variation(tree, game.value) == pytest.approx(0.1)
    assert drift_sign_check(game).n_positive == 1 and drift_sign_check(game).ok
    bf = brute_force_game_value(tree, bid, ask)
    assert bf.maxmin[0] == pytest.approx(0.4) and bf.minmax[0] == pytest.approx(0.4)
    # the maximizer stops at 1, the minimizer stops at once
    assert game.tau_star().on_leaves().tolist() == [1, 1]
    assert game.sigma_star().on_leaves().tolist() == [0, 0]


def test_depth_one_harvest():
    tree, bid, ask = depth1()
    h = drift_harvest_strategy(dynkin_value(tree, bid, ask))
    assert h.holding[0] == 1.0
    assert h.harvested[1:].tolist() == pytest.approx([0.1, 0.1])
    assert h.liquidation[1:].tolist() == pytest.approx([-0.2, 0.4])
    assert h.replay().ok


def test_frictionless_value_is_the_price():
    tree = build_tree([2, 3], None)
    rng = np.random.default_rng(0)
    x = rng.uniform(size=tree.n_nodes)
    game = dynkin_value(tree, x, x)
    assert np.array_equal(game.value, x)
    # a martingale price leaves nothing to harvest
    leaf = rng.uniform(size=tree.n_nodes)
    m = leaf.copy()
    for t in (2, 1):
        m[tree.layer_slice(t - 1)] = conditional_expectation(tree, m, t)[tree.layer_slice(t - 1)]
    game = dynkin_value(tree, m, m)
    assert np.allclose(game.drift, 0.0, atol=1e-15)
    assert drift_harvest_strategy(game).is_empty
    bf = brute_force_game_value(tree, m, m)
    assert bf.maxmin[0] == pytest.approx(m[0], abs=1e-12)


def test_terminal_payoff_in_spread():
    tree, bid, ask = depth1()
    ask = ask.copy()
    ask[1:] = [0.3, 0.9]
    game = dynkin_value(tree, bid, ask, terminal=[0.3, 0.85])
    assert game.value[1:].tolist() == [0.3, 0.85]
    with pytest.raises(ValueError):
        dynkin_value(tree, bid, ask, terminal=[0.35, 0.85])
    with pytest.raises(ValueError):
        dynkin_value(tree, ask, bid)


@given(seed=st.integers(0, 2**32), depth=st.integers(1, 3), branching=st.integers(1, 3))
def test_matches_plain_recursion_and_enumeration(seed, depth, branching):
    tree, bid, ask = random_game(seed, depth, branching)
    game = dynkin_value(tree, bid, ask)
    assert np.max(np.abs(game.value - game_value_recursive(tree, bid, ask))) <= 1e-12
    if tree.n_nodes <= 15:
        for v in (0, int(tree.layer_start[1])):
            lo, hi, _ = game_value_enumerated(tree, bid, ask, v)
            assert lo == pytest.approx(game.value[v], abs=1e-12)
            assert hi == pytest.approx(game.value[v], abs=1e-12)


@given(seed=st.integers(0, 2**32), depth=st.integers(1, 3))
def test_equilibrium_and_sandwich(seed, depth):
    tree, bid, ask = random_game(seed, depth, 2)
    game = dynkin_value(tree, bid, ask)
    assert not sandwich_check(game)
    assert drift_sign_check(game).ok
    assert nash_check(game).ok
    pay = game_payoff(game, game.tau_star(), game.sigma_star())
    assert pay == pytest.approx(game.value0, abs=1e-12)


@given(seed=st.integers(0, 2**32), depth=st.integers(1, 4))
def test_doob_exactness(seed, depth):
    tree, bid, ask = random_game(seed, depth, 3)
    x = dynkin_value(tree, bid, ask).value
    mart, drift = doob_decomposition(tree, x)
    assert np.max(np.abs(x - x[0] - mart - drift)) <= 1e-12
    for t in range(depth):
        cm = conditional_expectation(tree, mart, t + 1)[tree.layer_slice(t)] - mart[tree.layer_slice(t)]
        assert np.max(np.abs(cm)) <= 1e-12
    # the drift at t+1 is known at t: siblings share it
    for v in range(tree.n_nodes):
        kids = list(tree.children(v))
        if kids:
            assert np.ptp(drift[kids]) == 0.0
    assert mean_variation(tree, x) == pytest.approx(mean_variation_from_drift(tree, drift), abs=1e-12)


def test_mean_variation_trivial_cases():
    tree = build_tree([2, 2])
    up = tree.time.astype(float) ** 2
    assert mean_variation(tree, up) == pytest.approx(4.0)
    mart, drift = doob_decomposition(tree, up)
    assert np.allclose(mart, 0.0) and np.allclose(drift, up)
    coin = np.zeros(tree.n_nodes)
    for v in range(1, tree.n_nodes):
        coin[v] = coin[tree.parent[v]] + (1 if v % 2 else -1)
    assert mean_variation(tree, coin) == pytest.approx(0.0)


def test_grid_monotonicity_depth_two_example():
    tree = build_tree([2, 2])
    rng = np.random.default_rng(1)
    bid = rng.uniform(0.2, 0.8, tree.n_nodes)
    ask = bid + 0.1
    rep = grid_monotonicity_check(tree, bid, ask, 0, 1)
    assert rep.ok
    assert rep.lhs <= rep.rhs + 2
    with pytest.raises(ValueError):
        grid_monotonicity_check(tree, bid - 1, ask, 0, 1)
    with pytest.raises(ValueError):
        grid_monotonicity_check(tree, bid, ask, 1, 1)


def test_grid_monotonicity_frictionless_martingale():
    tree = build_tree([2, 2, 2, 2])
    x = np.full(tree.n_nodes, 0.5)
    rep = grid_monotonicity_check(tree, x, x, 1, 2)
    assert rep.lhs == 0 and rep.rhs == 0 and rep.ok


def random_stop(tree, rng, grid, p=0.3):
    flags = np.zeros(tree.n_nodes, dtype=np.int8)
    stopped = np.zeros(tree.n_nodes, dtype=bool)
    allowed = set(grid)
    for v in range(tree.n_nodes):
        above = bool(stopped[tree.parent[v]]) if v else False
        if not above and int(tree.time[v]) in allowed and rng.uniform() < p:
            flags[v] = STOP
        stopped[v] = above or flags[v] == STOP
    return TreeStoppingTime(tree, flags)


@given(seed=st.integers(0, 2**32))
def test_grid_monotonicity_with_stopping(seed):
    rng = np.random.default_rng(seed)
    tree, bid, ask = random_game(seed, 4, 2, drift=rng.uniform(-1, 1))
    stop = random_stop(tree, rng, level_grid(tree, 2))
    assert grid_monotonicity_check(tree, bid, ask, 1, 2, stop).ok
    assert grid_monotonicity_check(tree, bid, ask, 0, 2, stop).ok
    off_grid = random_stop(tree, rng, [1, 3], p=1.0)
    with pytest.raises(ValueError):
        grid_monotonicity_check(tree, bid, ask, 0, 1, off_grid)


def test_grid_convergence_for_pure_stopping():
    # a deterministic but wiggling bid with huge ask: an optimal stopping problem
    tree = build_tree([1] * 8)
    bid = np.array([0.1, 0.3, 0.2, 0.6, 0.5, 0.4, 0.9, 0.2, 0.1])
    ask = np.ones(9)
    report = grid_convergence(tree, bid, ask)
    assert report["levels"] == [0, 1, 2, 3]
    assert report["root_values"][-1] == pytest.approx(0.9)
    assert report["monotone"]


@given(seed=st.integers(0, 2**32), scale=st.floats(0.5, 20), stop_p=st.floats(0, 0.5))
def test_harvest_replay(seed, scale, stop_p):
    rng = np.random.default_rng(seed)
    tree, bid, ask = random_game(seed, 4, 2, drift=rng.uniform(-1, 1))
    game = dynkin_value(tree, bid, ask)
    stop = random_stop(tree, rng, range(tree.depth + 1), stop_p)
    h = drift_harvest_strategy(game, scale, stop)
    rep = h.replay()
    assert rep.ok, rep
    # purchases only where the value sits at the ask, exits at the bid unless stopped
    stopped = stop.stopped_by()
    for v in range(tree.n_nodes):
        if np.isnan(h.holding[v]):
            continue
        trade = h.holding[v] - h.held[v]
        if trade > 0:
            assert game.value[v] == ask[v]
        if trade < 0 and not stopped[v]:
            assert game.value[v] == bid[v]
