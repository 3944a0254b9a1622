import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from bidask.cost import AlmostSimpleStrategy, StrategyPath  # noqa: E402
from bidask.market import BidAskPath  # noqa: E402
from bidask.paths import GeneratorConfig, generate  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# acceptance lines collected while the suite runs, printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} {detail}")


# ---------------------------------------------------------------------------
# random inputs shared by several test modules


def random_game(seed: int, depth: int, max_branching: int = 2, drift: float = 0.0):
    g = generate(GeneratorConfig(kind="tree_random", depth=depth, max_branching=max_branching,
                                 seed=seed, drift=drift))
    return g.tree, g.bid, g.ask


def random_step_path(rng: np.random.Generator, n: int, zero_prob: float = 0.3,
                     min_run: int = 1) -> BidAskPath:
    """Mid random walk with a spread that is zero on random runs; S uniform in [bid, ask]."""
    mid = np.cumsum(rng.normal(0.0, 0.3, n + 1))
    spread = rng.uniform(0.01, 0.5, n + 1)
    k = 0
    while k <= n:
        run = int(rng.integers(min_run, min_run + 4))
        if rng.uniform() < zero_prob:
            spread[k:k + run] = 0.0
        k += run
    bid = mid - spread / 2
    ask = bid + spread
    S = bid + rng.uniform(0.0, 1.0, n + 1) * spread
    S = np.clip(S, bid, ask)
    return BidAskPath.uniform(bid, ask, S)


def random_almost_simple(rng: np.random.Generator, n: int, dyadic: bool = False) -> AlmostSimpleStrategy:
    m = int(rng.integers(0, min(n, 6) + 1))
    times = sorted(rng.choice(n + 1, size=m, replace=False).tolist())

    def draw():
        x = rng.uniform(-2, 2)
        return round(x * 1024) / 1024 if dyadic else x

    at = [draw() for _ in times]
    after = [draw() for _ in times]
    if times and times[0] == 0:
        at[0] = 0.0
    return AlmostSimpleStrategy(n, tuple(times), tuple(at), tuple(after))


def random_strategy(rng: np.random.Generator, n: int) -> StrategyPath:
    kind = rng.integers(0, 3)
    if kind == 0:
        v = rng.uniform(-2, 2, n + 1)
    elif kind == 1:
        v = np.cumsum(rng.normal(0, 0.5, n + 1))
    else:
        v = rng.choice([-1.0, 0.0, 1.0, 2.0], size=n + 1)
    v[0] = 0.0
    return StrategyPath(v)


@st.composite
def step_paths(draw, min_steps: int = 1, max_steps: int = 25, with_zeros: bool = True):
    n = draw(st.integers(min_steps, max_steps))
    mid = draw(st.lists(st.floats(-5, 5), min_size=n + 1, max_size=n + 1))
    spread = draw(st.lists(st.one_of(st.just(0.0), st.floats(0.001, 2.0)) if with_zeros
                           else st.floats(0.001, 2.0), min_size=n + 1, max_size=n + 1))
    w = draw(st.lists(st.floats(0, 1), min_size=n + 1, max_size=n + 1))
    bid = np.array(mid) - np.array(spread) / 2
    ask = bid + np.array(spread)
    S = np.clip(bid + np.array(w) * (ask - bid), bid, ask)
    return BidAskPath.uniform(bid, ask, S)


@st.composite
def path_and_strategy(draw, **kw):
    path = draw(step_paths(**kw))
    vals = draw(st.lists(st.floats(-3, 3), min_size=path.times.size, max_size=path.times.size))
    vals[0] = 0.0
    return path, StrategyPath(vals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
