"""Self-financing accounting for strategies on bid-ask step paths.

The risk-less position of a strategy phi under a price system S is

    Pi_t = (phi . S)_t - phi_t S_t - C_t(phi),

where phi . S is the discrete stochastic integral and C the cost process
of :mod:`bidask.cost`.  On a grid, summation by parts turns Pi into the
bank account of trading at bid and ask, which does not involve S at all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cost import (AlmostSimpleStrategy, StrategyPath, approximate_values, cost_process,
                   induced_strategy_path, json_number)
from .market import BidAskPath, check_spread_assumption, excursion_cover
from .paths import refine, rng_for

TOL = 1e-12


# ---------------------------------------------------------------------------
# bond position and liquidation value


def _holdings(phi, path: BidAskPath) -> tuple[StrategyPath, BidAskPath, int]:
    """Holdings on a grid where every trade is a right jump.

    Almost simple strategies move to the twice refined grid; the returned
    stride maps the coarse index k to the fine index stride * k."""
    if isinstance(phi, AlmostSimpleStrategy):
        if phi.n_steps != path.n_steps:
            raise ValueError("strategy and path have different grids")
        return induced_strategy_path(phi), refine(path, 2), 2
    if not isinstance(phi, StrategyPath):
        phi = StrategyPath(phi)
    if len(phi) != path.times.size:
        raise ValueError("strategy and path have different grids")
    return phi, path, 1


def bond_position(phi, path: BidAskPath) -> np.ndarray:
    """Cash from buying at the ask and selling at the bid, accumulated before each grid time.

    The entry at t_k includes every trade strictly before t_k and a left jump
    at t_k (paid at the left limits of the prices)."""
    h, p, stride = _holdings(phi, path)
    d = np.diff(h.values)
    cash = p.bid[:-1] * np.maximum(-d, 0.0) - p.ask[:-1] * np.maximum(d, 0.0)
    bond = np.concatenate([[0.0], np.cumsum(cash)])
    return bond[::stride]


def positions(phi, path: BidAskPath) -> np.ndarray:
    """Number of shares held at each grid time."""
    h, _, stride = _holdings(phi, path)
    return h.values[::stride]


def liquidation_value(phi, path: BidAskPath) -> np.ndarray:
    """V^liq = bond + phi^+ bid - phi^- ask."""
    x = positions(phi, path)
    return bond_position(phi, path) + np.maximum(x, 0.0) * path.bid - np.maximum(-x, 0.0) * path.ask


def stochastic_integral(phi, S) -> np.ndarray:
    """(phi . S)_k = sum_{1 <= j <= k} phi_j (S_j - S_{j-1}); zero at index 0."""
    v = phi.values if isinstance(phi, StrategyPath) else np.asarray(phi, dtype=float)
    S = np.asarray(S, dtype=float)
    if v.shape != S.shape:
        raise ValueError("strategy and price have different lengths")
    return np.concatenate([[0.0], np.cumsum(v[1:] * np.diff(S))])


# ---------------------------------------------------------------------------
# risk-less position


@dataclass(frozen=True, eq=False)
class LedgerProcess:
    """Bond, holdings, liquidation value, wealth and risk-less position on the grid.

    ``riskless`` is ``-inf`` from ``ruined_from`` on (infinite costs); the
    ``ruin`` mask marks those entries, and wealth is ``-inf`` there too.
    """

    bond: np.ndarray
    risky: np.ndarray
    liquidation: np.ndarray
    gains: np.ndarray
    cost: np.ndarray
    wealth: np.ndarray
    riskless: np.ndarray
    price: np.ndarray
    ruined_from: int | None = None

    @property
    def ruin(self) -> np.ndarray:
        mask = np.zeros(self.riskless.size, dtype=bool)
        if self.ruined_from is not None:
            mask[self.ruined_from:] = True
        return mask

    def wealth_identity_residual(self) -> float:
        """max |V - Pi - phi S| over entries with finite Pi."""
        ok = ~self.ruin
        r = self.wealth[ok] - self.riskless[ok] - self.risky[ok] * self.price[ok]
        return float(np.max(np.abs(r))) if r.size else 0.0

    def to_dict(self) -> dict:
        return {name: [json_number(x) for x in getattr(self, name)]
                for name in ("bond", "risky", "liquidation", "gains", "cost", "wealth", "riskless")}


def riskless_position(phi, path: BidAskPath, price=None) -> LedgerProcess:
    """Pi = phi . S - phi S - C(phi) and V = phi . S - C(phi) under ``price`` (default: the path's)."""
    S = path.require_price() if price is None else np.asarray(price, dtype=float)
    if np.any(S < path.bid) or np.any(S > path.ask):
        raise ValueError("price system leaves [bid, ask]")
    work = path.with_price(S)
    h, p, stride = _holdings(phi, work)
    if h.values[0] != 0.0:
        raise ValueError("the strategy must start with no shares (phi[0] = 0)")
    if h.has_infinite_variation:
        # positions with infinite variation keep a symbolic integral; only the cost matters here
        gains_f = stochastic_integral(np.nan_to_num(h.values), p.price)
    else:
        gains_f = stochastic_integral(h, p.price)
    cp = cost_process(h, p)
    x = np.nan_to_num(h.values)
    cost = cp.values[::stride]
    gains = gains_f[::stride]
    risky = x[::stride]
    ruined = cp.infinite_from
    ruined = None if ruined is None else -(-ruined // stride)
    with np.errstate(invalid="ignore"):
        wealth = gains - cost
        pi = gains - risky * S - cost
    liq = liquidation_value(phi, path) if not h.has_infinite_variation else np.full(S.size, np.nan)
    bond = bond_position(phi, path) if not h.has_infinite_variation else np.full(S.size, np.nan)
    if ruined is not None:
        wealth[ruined:] = -math.inf
        pi[ruined:] = -math.inf
    return LedgerProcess(bond, risky, liq, gains, cost, wealth, pi, S, ruined)


@dataclass(frozen=True)
class InvarianceReport:
    max_abs_diff: float
    terminal_diff: float
    spread_assumption_ok: bool
    tol: float = TOL

    @property
    def ok(self) -> bool:
        return self.max_abs_diff <= self.tol

    def to_dict(self) -> dict:
        return {"max_abs_diff": self.max_abs_diff, "terminal_diff": self.terminal_diff,
                "spread_assumption_ok": self.spread_assumption_ok, "ok": self.ok}


def invariance_check(phi, path: BidAskPath, s1, s2, tol: float = TOL,
                     require_assumption: bool = True) -> InvarianceReport:
    """Compare Pi(phi) under two price systems inside the spread."""
    st = check_spread_assumption(path)
    if require_assumption and not st.assumption_ok:
        raise ValueError(f"spread assumption fails (chatter at {list(st.chatter_windows)})")
    p1 = riskless_position(phi, path, s1).riskless
    p2 = riskless_position(phi, path, s2).riskless
    with np.errstate(invalid="ignore"):
        diff = np.where(np.isinf(p1) & (p1 == p2), 0.0, np.abs(p1 - p2))
    return InvarianceReport(float(np.max(diff)), float(diff[-1]), st.assumption_ok, tol)


def refinement_sweep(phi_fn, path: BidAskPath, s1, s2, factors: Sequence[int] = (1, 2, 4, 8)) -> list[float]:
    """max |Pi(S1) - Pi(S2)| for phi sampled on refine(path, f) by ``phi_fn(times)``."""
    out = []
    for f in factors:
        fine = refine(path, f)
        idx = np.minimum(np.arange(fine.times.size) // f, path.n_steps)
        idx[-1] = path.n_steps
        a = np.asarray(s1, dtype=float)[idx]
        b = np.asarray(s2, dtype=float)[idx]
        phi = StrategyPath(phi_fn(fine.times))
        out.append(invariance_check(phi, fine, a, b).max_abs_diff)
    return out


# ---------------------------------------------------------------------------
# the reflected random walk example


def counterexample_pi(walk, alpha: float) -> tuple[float, float]:
    """Terminal Pi of phi_k = 1{B_{k-1} = 0} with bid = -|B|, ask = |B|, S = alpha |B|.

    Returns (continuum, grid).  The continuum value charges no cost: the
    strategy only holds shares while B sits at zero, so the spread at its
    trades vanishes in the scaling limit and Pi = phi . S - phi S.  The grid
    value also charges the exits, which happen one step after a zero where
    the spread is already 1/sqrt(N); it does not depend on alpha."""
    w = np.asarray(walk)
    n = w.size - 1
    b = np.abs(w) / math.sqrt(n)
    phi = np.zeros(n + 1)
    phi[1:] = w[:-1] == 0
    S = alpha * b
    cont = float(np.dot(phi[1:], np.diff(S)) - phi[-1] * S[-1])
    d = np.diff(phi)
    grid = float(np.sum(-b[:-1] * np.maximum(-d, 0.0) - b[:-1] * np.maximum(d, 0.0)))
    return cont, grid


def local_time_estimate(walk) -> float:
    """Visits of the walk to 0 on [0, T) divided by sqrt(N)."""
    w = np.asarray(walk)
    n = w.size - 1
    return float(np.count_nonzero(w[:-1] == 0)) / math.sqrt(n)


def _walk_stats(seed: int, index: int, steps: int) -> tuple[int, int, int, int]:
    """(|W_N|, zeros on 0..N-1, zeros on 0..N-2, exits) for one simple random walk."""
    rng = rng_for(seed, index)
    inc = rng.integers(0, 2, size=steps, dtype=np.int8).astype(np.int32) * 2 - 1
    w = np.empty(steps + 1, dtype=np.int32)
    w[0] = 0
    np.cumsum(inc, out=w[1:])
    zero = w == 0
    exits = int(np.count_nonzero(zero[:-1] & ~zero[1:]))
    return abs(int(w[-1])), int(np.count_nonzero(zero[:-1])), int(np.count_nonzero(zero[:-2])), exits


def local_time_counterexample(steps: int, paths: int, alphas: Sequence[float], seed: int) -> dict:
    """Monte Carlo of Pi_T(1{B = 0}) in the reflected-walk model for each alpha.

    The walk of path i uses the stream keyed by (seed, i), so all alphas see
    the same paths.  The estimator of E[L_1] is checked first against the
    reflection identity E[L_1] = E|B_1| = sqrt(2/pi) through the sample mean of
    |W_N| / sqrt(N)."""
    if steps < 1 or paths < 1:
        raise ValueError("steps and paths must be positive")
    alphas = [float(a) for a in alphas]
    if any(not -1 <= a <= 1 for a in alphas):
        raise ValueError("alpha must lie in [-1, 1]")
    stats = np.array([_walk_stats(seed, i, steps) for i in range(paths)], dtype=float)
    root = math.sqrt(steps)
    abs_b1 = stats[:, 0] / root
    local = stats[:, 1] / root
    held = stats[:, 2] / root
    exits = stats[:, 3] / root
    target = math.sqrt(2 / math.pi)

    def mean_se(x):
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0

    per_alpha = {}
    for a in alphas:
        m, se = mean_se(a * held)
        g, gse = mean_se(-exits)
        per_alpha[repr(a)] = {"mean_Pi": m, "stderr": se, "mean_Pi_grid_cost": g, "stderr_grid_cost": gse,
                              "mean_localtime": float(local.mean())}
    mb, sb = mean_se(abs_b1)
    report = {
        "steps": steps, "paths": paths, "seed": seed, "alphas": alphas,
        "mean_abs_B1": mb, "stderr_abs_B1": sb, "target_sqrt_2_over_pi": target,
        "abs_B1_rel_error": abs(mb - target) / target,
        "mean_localtime": float(local.mean()),
        "per_alpha": per_alpha,
    }
    if 1.0 in alphas and -1.0 in alphas:
        sep = per_alpha[repr(1.0)]["mean_Pi"] - per_alpha[repr(-1.0)]["mean_Pi"]
        report["separation"] = sep
        report["separation_target"] = 2 * target
        report["separation_rel_error"] = abs(sep - 2 * target) / (2 * target)
    w0 = _example_walk(seed, steps)
    report["chatter_detected"] = not check_spread_assumption(np.abs(w0)).assumption_ok
    return report


def _example_walk(seed: int, steps: int) -> np.ndarray:
    rng = rng_for(seed, 0)
    inc = rng.integers(0, 2, size=steps, dtype=np.int8).astype(np.int64) * 2 - 1
    return np.concatenate([[0], np.cumsum(inc)])


# ---------------------------------------------------------------------------
# unbounded profits with bounded risk


@dataclass(frozen=True)
class UPBRTable:
    thresholds: tuple[float, ...]
    tails: np.ndarray          # (strategies, thresholds)
    sup_tails: np.ndarray      # running sup over the family
    admissible: tuple[bool, ...]

    def nondecreasing_in_family(self, tol: float = TOL) -> bool:
        """Each strategy's tail probability is at least the previous one's, at every threshold."""
        t = self.tails
        return bool(np.all(t[1:] >= t[:-1] - tol))

    def to_dict(self) -> dict:
        return {"thresholds": list(self.thresholds),
                "tail_table": self.tails.tolist(),
                "sup_tail": self.sup_tails[-1].tolist() if self.tails.size else [],
                "running_sup": self.sup_tails.tolist(),
                "admissible": list(self.admissible)}


def upbr_tail_statistic(liqs, thresholds: Sequence[float], weights=None, running_min=None) -> UPBRTable:
    """P(V^liq_T(phi^n) >= m) for each strategy n and threshold m.

    ``liqs`` has one row per strategy and one column per scenario;
    ``weights`` are scenario probabilities (uniform by default) and
    ``running_min`` the pathwise minimum of V^liq per strategy and scenario,
    used to flag strategies that break the bound V^liq >= -1."""
    liqs = np.atleast_2d(np.asarray(liqs, dtype=float))
    k, m = liqs.shape
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    thr = np.asarray(thresholds, dtype=float)
    tails = np.array([[float(w[liqs[i] >= c].sum()) for c in thr] for i in range(k)]).reshape(k, thr.size)
    sup = np.maximum.accumulate(tails, axis=0) if k else tails
    if running_min is None:
        adm = tuple(True for _ in range(k))
    else:
        rm = np.atleast_2d(np.asarray(running_min, dtype=float))
        adm = tuple(bool(np.all(rm[i] >= -1 - TOL)) for i in range(k))
    return UPBRTable(tuple(float(c) for c in thr), tails, sup, adm)


def drift_tree_family(depth: int, scales: Sequence[float], thresholds: Sequence[float],
                      branching: int = 2, drift: float = 0.05, noise: float = 0.0) -> dict:
    """Drift-harvest strategies with growing scale on a zero-spread tree with a persistent trend.

    Prices are t * drift plus an optional martingale noise; the harvest
    strategy buys at the first positive drift and holds to the horizon."""
    from .dynkin import drift_harvest_strategy, dynkin_value
    from .scenario import build_tree

    tree = build_tree([branching] * depth)
    price = drift * tree.time.astype(float)
    if noise:
        sign = np.zeros(tree.n_nodes)
        for v in range(1, tree.n_nodes):
            pos = v - int(tree.first_child[tree.parent[v]])
            sign[v] = sign[tree.parent[v]] + noise * (1 if pos % 2 == 0 else -1)
        price = price + sign
    game = dynkin_value(tree, price, price)
    leaves = tree.layer_slice(depth)
    anc = tree.ancestors_table()
    liqs, mins = [], []
    for c in scales:
        h = drift_harvest_strategy(game, c)
        liqs.append(h.liquidation[leaves])
        mins.append(np.min(h.liquidation[anc], axis=1))
    table = upbr_tail_statistic(liqs, thresholds, tree.path_prob[leaves], mins)
    return {"scales": [float(c) for c in scales], "table": table}


# ---------------------------------------------------------------------------
# approximation by almost simple strategies


@dataclass(frozen=True)
class ApproximationResult:
    levels: tuple[int, ...]
    sup_errors: tuple[float, ...]
    sup_cost_errors: tuple[float, ...]
    sup_holding_errors: tuple[float, ...]
    excursions: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {"levels": list(self.levels), "sup_wealth_error": list(self.sup_errors),
                "sup_cost_error": list(self.sup_cost_errors),
                "sup_holding_error": list(self.sup_holding_errors),
                "excursion_intervals": [list(e) for e in self.excursions]}


def approximation_experiment(phi: StrategyPath, path: BidAskPath, levels: Sequence[int],
                             chatter_window: int = 8, min_switches: int = 4) -> ApproximationResult:
    """Wealth of per-excursion almost simple approximations against the wealth of phi.

    On zero-spread cells phi is kept as it is (those trades are free), on each
    excursion it is replaced by the level-n approximation."""
    st = excursion_cover(path, chatter_window, min_switches)
    S = path.require_price()
    if phi.has_infinite_variation:
        raise ValueError("strategy has infinite variation")
    if phi.values[0] != 0.0:
        raise ValueError("the strategy must start with no shares (phi[0] = 0)")
    base_cost = cost_process(phi, path).values
    base_wealth = stochastic_integral(phi, S) - base_cost
    intervals = tuple((e.first, e.end) for e in st.excursions)
    errs, cerrs, herrs = [], [], []
    for n in levels:
        vals = phi.values.copy()
        for a, b in intervals:
            vals, _ = approximate_values(vals, a, b, n)
        approx = StrategyPath(vals)
        cost = cost_process(approx, path).values
        wealth = stochastic_integral(approx, S) - cost
        errs.append(float(np.max(np.abs(wealth - base_wealth))))
        cerrs.append(float(np.max(np.abs(cost - base_cost))))
        herrs.append(float(np.max(np.abs(vals - phi.values))))
    return ApproximationResult(tuple(int(n) for n in levels), tuple(errs), tuple(cerrs), tuple(herrs), intervals)
