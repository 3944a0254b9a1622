"""Discrete Dynkin games on scenario trees.

The game value S solves S = median(bid, ask, E[S_next | F]) backwards from a
terminal payoff.  The module also provides the Doob decomposition, mean
variation along a partition, the drift-sign inclusions, a drift-harvesting
simple strategy and the grid monotonicity inequality for mean variation.

A ``grid`` is an increasing list of times that contains 0 and the tree depth.
Quantities computed on a grid are NaN at nodes whose time is off the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .scenario import (DEFAULT_CAP, STOP, ScenarioTree, TreeStoppingTime, expectation_between,
                       stopping_time_table)

TOL = 1e-12


def median3(a, b, c):
    """Middle value of three, returned as one of the inputs bit for bit."""
    return np.maximum(np.minimum(a, b), np.minimum(np.maximum(a, b), c))


def full_grid(tree: ScenarioTree) -> list[int]:
    return list(range(tree.depth + 1))


def level_grid(tree: ScenarioTree, level: int) -> list[int]:
    """Dyadic sub-grid with 2**level periods (needs depth divisible by 2**level)."""
    periods = 2**level
    if tree.depth % periods:
        raise ValueError(f"depth {tree.depth} is not divisible by 2**{level}")
    step = tree.depth // periods
    return list(range(0, tree.depth + 1, step))


def _check_grid(tree: ScenarioTree, grid: Sequence[int] | None) -> list[int]:
    if grid is None:
        return full_grid(tree)
    g = [int(t) for t in grid]
    if g[0] != 0 or g[-1] != tree.depth or any(b <= a for a, b in zip(g, g[1:])):
        raise ValueError("grid must increase from 0 to the tree depth")
    return g


def _next_expectation(tree: ScenarioTree, x: np.ndarray, grid: list[int]) -> np.ndarray:
    """cont[v] = E[x at the next grid time | v] for nodes on the grid (NaN elsewhere)."""
    out = np.full(tree.n_nodes, np.nan)
    for t, s in zip(grid, grid[1:]):
        out[tree.layer_slice(t)] = expectation_between(tree, x, s, t)
    return out


def _on_grid(tree: ScenarioTree, grid: list[int]) -> np.ndarray:
    mask = np.zeros(tree.n_nodes, dtype=bool)
    for t in grid:
        mask[tree.layer_slice(t)] = True
    return mask


def _grid_parent(tree: ScenarioTree, grid: list[int]) -> np.ndarray:
    """For each node on the grid, its ancestor at the previous grid time (-1 at 0)."""
    gp = np.full(tree.n_nodes, -1, dtype=np.int64)
    for t, s in zip(grid, grid[1:]):
        for v in tree.layer(s):
            gp[v] = tree.ancestor_at(v, t)
    return gp


@dataclass(frozen=True, eq=False)
class GameValue:
    """Result of the backward induction on a grid.

    ``continuation[v]`` is E[S at the next grid time | v]; the drift increment
    decided at ``v`` is ``continuation[v] - value[v]``.
    """

    tree: ScenarioTree
    grid: tuple[int, ...]
    bid: np.ndarray
    ask: np.ndarray
    terminal: np.ndarray
    value: np.ndarray
    continuation: np.ndarray
    drift: np.ndarray
    martingale: np.ndarray
    stop_bid: np.ndarray = field(repr=False)
    stop_ask: np.ndarray = field(repr=False)

    @property
    def value0(self) -> float:
        return float(self.value[0])

    @property
    def drift_increment(self) -> np.ndarray:
        """E[Delta S | F] decided at each non-terminal grid node (NaN elsewhere)."""
        return self.continuation - self.value

    def _first_stop(self, flags: np.ndarray, from_time: int) -> TreeStoppingTime:
        tree = self.tree
        out = np.zeros(tree.n_nodes, dtype=np.int8)
        stopped = np.zeros(tree.n_nodes, dtype=bool)
        grid = set(self.grid)
        for v in range(tree.n_nodes):
            t = int(tree.time[v])
            above = bool(stopped[tree.parent[v]]) if v else False
            hit = t >= from_time and t in grid and (bool(flags[v]) or t == tree.depth)
            if hit and not above:
                out[v] = STOP
            stopped[v] = above or (hit and not above)
        return TreeStoppingTime(tree, out)

    def tau_star(self, from_time: int = 0) -> TreeStoppingTime:
        """First grid time >= from_time with value = bid.

        The horizon always stops: there the game pays the terminal value."""
        return self._first_stop(self.stop_bid, from_time)

    def sigma_star(self, from_time: int = 0) -> TreeStoppingTime:
        """First grid time >= from_time with value = ask (horizon always stops)."""
        return self._first_stop(self.stop_ask, from_time)


def _terminal(tree: ScenarioTree, bid: np.ndarray, terminal) -> np.ndarray:
    if terminal is None:
        return bid.copy()
    term = np.asarray(terminal, dtype=float)
    if term.shape != (tree.n_nodes,):
        full = bid.copy()
        full[tree.layer_slice(tree.depth)] = term
        term = full
    return term


def dynkin_value(tree: ScenarioTree, bid, ask, terminal=None,
                 grid: Sequence[int] | None = None) -> GameValue:
    """Backward induction S_t = median(bid_t, ask_t, E[S_next | F_t]) on ``grid``."""
    bid = np.asarray(bid, dtype=float)
    ask = np.asarray(ask, dtype=float)
    if bid.shape != (tree.n_nodes,) or ask.shape != (tree.n_nodes,):
        raise ValueError("bid and ask need one value per node")
    if np.any(bid > ask):
        raise ValueError(f"bid > ask at nodes {np.flatnonzero(bid > ask).tolist()}")
    g = _check_grid(tree, grid)
    term = _terminal(tree, bid, terminal)
    leaves = tree.layer_slice(tree.depth)
    if np.any(term[leaves] < bid[leaves]) or np.any(term[leaves] > ask[leaves]):
        raise ValueError("terminal payoff outside [bid, ask] at the horizon")

    value = np.full(tree.n_nodes, np.nan)
    cont = np.full(tree.n_nodes, np.nan)
    value[leaves] = term[leaves]
    for t, s in zip(reversed(g[:-1]), reversed(g[1:])):
        sl = tree.layer_slice(t)
        c = expectation_between(tree, value, s, t)
        cont[sl] = c
        value[sl] = median3(bid[sl], ask[sl], c)

    drift, mart = _doob_from_continuation(tree, value, cont, g)
    on = _on_grid(tree, g)
    stop_bid = on & (value == bid)
    stop_ask = on & (value == ask)
    for arr in (value, cont, drift, mart, stop_bid, stop_ask):
        arr.setflags(write=False)
    return GameValue(tree, tuple(g), bid, ask, term, value, cont, drift, mart, stop_bid, stop_ask)


def _doob_from_continuation(tree, x, cont, grid):
    gp = _grid_parent(tree, grid)
    drift = np.full(tree.n_nodes, np.nan)
    mart = np.full(tree.n_nodes, np.nan)
    drift[0] = mart[0] = 0.0
    for s in grid[1:]:
        sl = tree.layer_slice(s)
        p = gp[sl]
        drift[sl] = drift[p] + (cont[p] - x[p])
        mart[sl] = mart[p] + (x[sl] - cont[p])
    return drift, mart


def doob_decomposition(tree: ScenarioTree, x, grid: Sequence[int] | None = None):
    """(martingale, drift) with x = x_0 + M + A on the grid, M_0 = A_0 = 0.

    The drift increment at t_i is E[x_{t_i} - x_{t_{i-1}} | F_{t_{i-1}}]."""
    g = _check_grid(tree, grid)
    x = np.asarray(x, dtype=float)
    cont = _next_expectation(tree, x, g)
    drift, mart = _doob_from_continuation(tree, x, cont, g)
    return mart, drift


def mean_variation_to_go(tree: ScenarioTree, x, partition: Sequence[int] | None = None,
                         stop: TreeStoppingTime | None = None) -> np.ndarray:
    """G[v] = E[sum_{t_i >= time(v)} 1{t_i < tau} |E[x_{t_{i+1}} - x_{t_i} | F_{t_i}]| | v].

    Defined on the partition nodes; G at the root is the (stopped) mean variation."""
    g = _check_grid(tree, partition)
    x = np.asarray(x, dtype=float)
    cont = _next_expectation(tree, x, g)
    alive = np.ones(tree.n_nodes, dtype=bool) if stop is None else stop.before()
    go = np.full(tree.n_nodes, np.nan)
    go[tree.layer_slice(tree.depth)] = 0.0
    for t, s in zip(reversed(g[:-1]), reversed(g[1:])):
        sl = tree.layer_slice(t)
        inc = np.abs(cont[sl] - x[sl]) * alive[sl]
        go[sl] = inc + expectation_between(tree, go, s, t)
    return go


def mean_variation(tree: ScenarioTree, x, partition: Sequence[int] | None = None,
                   stop: TreeStoppingTime | None = None) -> float:
    """E[sum_i 1{t_i < tau} |E[x_{t_{i+1}} - x_{t_i} | F_{t_i}]|] along ``partition``."""
    return float(mean_variation_to_go(tree, x, partition, stop)[0])


def mean_variation_from_drift(tree: ScenarioTree, drift, partition: Sequence[int] | None = None) -> float:
    """E[sum_i |A_{t_{i+1}} - A_{t_i}|] for a drift process given on the partition."""
    g = _check_grid(tree, partition)
    drift = np.asarray(drift, dtype=float)
    total = 0.0
    for t, s in zip(g, g[1:]):
        for v in tree.layer(s):
            u = tree.ancestor_at(v, t)
            total += tree.path_prob[v] * abs(drift[v] - drift[u])
    return total


@dataclass(frozen=True)
class DriftSignReport:
    violations: tuple[tuple[int, str], ...]
    n_positive: int
    n_negative: int

    @property
    def ok(self) -> bool:
        return not self.violations


def drift_sign_check(game: GameValue) -> DriftSignReport:
    """Positive drift increment forces value = ask, negative forces value = bid."""
    d = game.drift_increment
    viol = []
    pos = neg = 0
    for v in np.flatnonzero(~np.isnan(d)):
        if d[v] > 0:
            pos += 1
            if game.value[v] != game.ask[v]:
                viol.append((int(v), "positive drift but value < ask"))
        elif d[v] < 0:
            neg += 1
            if game.value[v] != game.bid[v]:
                viol.append((int(v), "negative drift but value > bid"))
    return DriftSignReport(tuple(viol), pos, neg)


def sandwich_check(game: GameValue) -> list[int]:
    """Grid nodes where the value leaves [bid, ask] (expected empty)."""
    on = ~np.isnan(game.value)
    bad = on & ((game.value < game.bid) | (game.value > game.ask))
    return np.flatnonzero(bad).tolist()


# ---------------------------------------------------------------------------
# brute force oracle


@dataclass(frozen=True)
class BruteForceResult:
    maxmin: np.ndarray
    minmax: np.ndarray
    nodes: tuple[int, ...]

    @property
    def saddle_gap(self) -> float:
        return float(np.max(np.abs(self.maxmin - self.minmax))) if self.nodes else 0.0


def _payoff_matrix(tau: np.ndarray, sigma: np.ndarray, bid_l: np.ndarray,
                   ask_l: np.ndarray, w: np.ndarray, chunk: int = 256) -> np.ndarray:
    """R[i, j] = sum_l w_l (bid at tau_i if tau_i <= sigma_j else ask at sigma_j)."""
    # bid_l[l, s] / ask_l[l, s]: prices at time s on the path to leaf l
    cols = np.arange(tau.shape[1])
    b = bid_l[cols, tau]          # (K, L)
    a = ask_l[cols, sigma]        # (K', L)
    out = np.empty((tau.shape[0], sigma.shape[0]))
    for i0 in range(0, tau.shape[0], chunk):
        t = tau[i0:i0 + chunk, None, :]
        payoff = np.where(t <= sigma[None, :, :], b[i0:i0 + chunk, None, :], a[None, :, :])
        out[i0:i0 + chunk] = payoff @ w
    return out


def _modified_prices(tree, bid, ask, terminal):
    """Bid/ask with the horizon layer replaced by the terminal payoff."""
    b, a = bid.copy(), ask.copy()
    leaves = tree.layer_slice(tree.depth)
    b[leaves] = terminal[leaves]
    a[leaves] = terminal[leaves]
    return b, a


def brute_force_game_value(tree: ScenarioTree, bid, ask, terminal=None, t: int = 0,
                           cap: int = DEFAULT_CAP) -> BruteForceResult:
    """max_tau min_sigma and min_sigma max_tau of E[R(tau, sigma) | node] by enumeration.

    R(tau, sigma) = bid_tau 1{tau <= sigma} + ask_sigma 1{tau > sigma}; at the
    horizon both prices are replaced by the terminal payoff."""
    bid = np.asarray(bid, dtype=float)
    ask = np.asarray(ask, dtype=float)
    term = _terminal(tree, bid, terminal)
    b, a = _modified_prices(tree, bid, ask, term)
    anc = tree.ancestors_table()
    leaf0 = int(tree.layer_start[tree.depth])
    maxmin, minmax, nodes = [], [], []
    for v in tree.layer(t):
        table = stopping_time_table(tree, v, cap)
        k = table.shape[0]
        if k * k > cap:
            raise OverflowError(f"{k * k} stopping-time pairs exceed cap {cap}")
        leaves = np.array(tree.descendants_at(v, tree.depth)) - leaf0
        w = tree.path_prob[leaves + leaf0] / tree.path_prob[v]
        bl = b[anc[leaves]]
        al = a[anc[leaves]]
        r = _payoff_matrix(table, table, bl, al, w)
        maxmin.append(r.min(axis=1).max())
        minmax.append(r.max(axis=0).min())
        nodes.append(v)
    return BruteForceResult(np.array(maxmin), np.array(minmax), tuple(nodes))


def game_payoff(game: GameValue, tau: TreeStoppingTime, sigma: TreeStoppingTime, node: int = 0) -> float:
    """E[R(tau, sigma) | node] with the terminal payoff at the horizon (full grid only)."""
    tree = game.tree
    b, a = _modified_prices(tree, game.bid, game.ask, game.terminal)
    anc = tree.ancestors_table()
    leaf0 = int(tree.layer_start[tree.depth])
    leaves = np.array(tree.descendants_at(node, tree.depth)) - leaf0
    tl = tau.on_leaves()[leaves]
    sl = sigma.on_leaves()[leaves]
    tl = np.where(tl < 0, tree.depth, tl)
    sl = np.where(sl < 0, tree.depth, sl)
    rows = anc[leaves]
    idx = np.arange(leaves.size)
    pay = np.where(tl <= sl, b[rows[idx, tl]], a[rows[idx, sl]])
    w = tree.path_prob[leaves + leaf0] / tree.path_prob[node]
    return float(pay @ w)


@dataclass(frozen=True)
class NashReport:
    value: float
    worst_tau_deviation: float
    worst_sigma_deviation: float

    def holds(self, tol: float = TOL) -> bool:
        return self.worst_tau_deviation <= self.value + tol and self.value <= self.worst_sigma_deviation + tol

    @property
    def ok(self) -> bool:
        return self.holds()


def nash_check(game: GameValue, cap: int = DEFAULT_CAP) -> NashReport:
    """Check E[R(tau, sigma*)] <= S_0 <= E[R(tau*, sigma)] against every deviation."""
    tree = game.tree
    if list(game.grid) != full_grid(tree):
        raise ValueError("Nash check needs the full grid")
    b, a = _modified_prices(tree, game.bid, game.ask, game.terminal)
    anc = tree.ancestors_table()
    w = tree.path_prob[tree.layer_slice(tree.depth)]
    table = stopping_time_table(tree, 0, cap)
    tau_star = game.tau_star(0).on_leaves()[None, :]
    sigma_star = game.sigma_star(0).on_leaves()[None, :]
    bl, al = b[anc], a[anc]
    vs_sigma = _payoff_matrix(tau_star, table, bl, al, w)[0]
    vs_tau = _payoff_matrix(table, sigma_star, bl, al, w)[:, 0]
    return NashReport(game.value0, float(vs_tau.max()), float(vs_sigma.min()))


# ---------------------------------------------------------------------------
# drift harvesting


@dataclass(frozen=True, eq=False)
class HarvestStrategy:
    """Long-only simple strategy on the game grid with its ledger.

    ``holding[v]`` is the number of shares held over the period after grid
    node ``v``; ``held[v]`` the number carried into ``v``.  The ledger arrays
    are cumulative along each path and live on grid nodes.
    """

    game: GameValue
    scale: float
    holding: np.ndarray
    held: np.ndarray
    bond: np.ndarray
    liquidation: np.ndarray
    harvested: np.ndarray
    martingale_sum: np.ndarray
    gains: np.ndarray
    trade_cost: np.ndarray

    @property
    def is_empty(self) -> bool:
        return not np.any(np.nan_to_num(self.holding) != 0)

    def replay(self, tol: float = TOL) -> "HarvestReplay":
        """Replay the lower bound V^liq >= harvested + martingale - scale*c.

        ``c`` is the largest value - bid gap on the grid; with bid >= 0 it is
        at most the largest ask."""
        g = self.game
        on = ~np.isnan(self.liquidation)
        gap = float(np.nanmax(g.value[on] - g.bid[on]))
        sup_ask = float(np.max(g.ask[on]))
        lhs = self.liquidation[on] - self.harvested[on]
        tight = np.flatnonzero(lhs < self.martingale_sum[on] - self.scale * gap - tol)
        loose = np.flatnonzero(lhs < self.martingale_sum[on] - self.scale * sup_ask - tol)
        negative_harvest = np.flatnonzero(self.harvested[on] < -tol)
        sides = self.harvested[on] + self.martingale_sum[on] - self.trade_cost[on] \
            - self.held[on] * (g.value[on] - g.bid[on])
        residual = float(np.max(np.abs(self.liquidation[on] - sides)))
        nodes = np.flatnonzero(on)
        return HarvestReplay(tuple(int(nodes[i]) for i in tight), tuple(int(nodes[i]) for i in loose),
                             tuple(int(nodes[i]) for i in negative_harvest), residual)


@dataclass(frozen=True)
class HarvestReplay:
    tight_violations: tuple[int, ...]
    sup_ask_violations: tuple[int, ...]
    negative_harvest: tuple[int, ...]
    identity_residual: float

    @property
    def ok(self) -> bool:
        return not (self.tight_violations or self.sup_ask_violations or self.negative_harvest) \
            and self.identity_residual <= 1e-9


def drift_harvest_strategy(game: GameValue, scale: float = 1.0,
                           stop_at: TreeStoppingTime | None = None) -> HarvestStrategy:
    """Hold ``scale`` shares from each positive drift increment until the next negative one.

    Entry happens where the drift increment is positive (there value = ask),
    exit where it is negative (value = bid); positions are cut at ``stop_at``.
    """
    tree = game.tree
    g = list(game.grid)
    gp = _grid_parent(tree, g)
    d = game.drift_increment
    stopped = np.zeros(tree.n_nodes, dtype=bool) if stop_at is None else stop_at.stopped_by()
    n = tree.n_nodes
    holding = np.full(n, np.nan)
    held = np.full(n, np.nan)
    bond = np.full(n, np.nan)
    liq = np.full(n, np.nan)
    harv = np.full(n, np.nan)
    msum = np.full(n, np.nan)
    gains = np.full(n, np.nan)
    tcost = np.full(n, np.nan)
    S, bid, ask = game.value, game.bid, game.ask
    for i, t in enumerate(g):
        for v in tree.layer(t):
            if i == 0:
                held[v] = 0.0
                bond[v] = harv[v] = msum[v] = gains[v] = tcost[v] = 0.0
            else:
                u = int(gp[v])
                h = holding[u]
                held[v] = h
                trade = h - held[u]
                bond[v] = bond[u] - ask[u] * max(trade, 0.0) + bid[u] * max(-trade, 0.0)
                tcost[v] = tcost[u] + (ask[u] - S[u]) * max(trade, 0.0) + (S[u] - bid[u]) * max(-trade, 0.0)
                harv[v] = harv[u] + h * d[u]
                msum[v] = msum[u] + h * (S[v] - game.continuation[u])
                gains[v] = gains[u] + h * (S[v] - S[u])
            if t < tree.depth:
                if stopped[v]:
                    holding[v] = 0.0
                elif held[v] == 0.0:
                    holding[v] = scale if d[v] > 0 else 0.0
                else:
                    holding[v] = 0.0 if d[v] < 0 else held[v]
            liq[v] = bond[v] + max(held[v], 0.0) * bid[v] - max(-held[v], 0.0) * ask[v]
    # the final liquidation of a position still open at the horizon is not a trade
    return HarvestStrategy(game, float(scale), holding, held, bond, liq, harv, msum, gains, tcost)


# ---------------------------------------------------------------------------
# grid monotonicity of the mean variation


@dataclass(frozen=True)
class MonotonicityReport:
    n: int
    m: int
    lhs: float
    rhs: float
    lhs_same_process: float
    rhs_same_process: float
    conditional_violations: tuple[int, ...]
    same_process_violations: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return (self.lhs <= self.rhs + 2 + TOL and self.lhs_same_process <= self.rhs_same_process + 1 + TOL
                and not self.conditional_violations and not self.same_process_violations)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "mv_coarse": self.lhs, "mv_fine": self.rhs,
                "mv_fine_process_coarse_grid": self.lhs_same_process,
                "mv_fine_process_fine_grid": self.rhs_same_process,
                "conditional_violations": list(self.conditional_violations),
                "same_process_violations": list(self.same_process_violations), "ok": self.ok}


def grid_monotonicity_check(tree: ScenarioTree, bid, ask, n: int, m: int,
                            stop: TreeStoppingTime | None = None, terminal=None) -> MonotonicityReport:
    """Compare stopped mean variations of the level-n and level-m game values.

    Checks, at every node s of the coarse grid,
      E[sum_{D_n, t_i >= s} 1{t_i < tau} |E[dS^n]| | F_s]
          <= E[sum_{D_m, t_i >= s} 1{t_i < tau} |E[dS^m]| | F_s] + (2 - |S^n_s - S^m_s|) 1{s < tau}
    and the same-process variant with constant 1 (S^m on both grids).
    Requires 0 <= bid <= ask <= 1 and a stopping time with values in D_m.
    """
    if not m > n >= 0:
        raise ValueError("need m > n >= 0")
    bid = np.asarray(bid, dtype=float)
    ask = np.asarray(ask, dtype=float)
    if np.any(bid < 0) or np.any(ask > 1) or np.any(bid > ask):
        raise ValueError("the monotonicity bound needs 0 <= bid <= ask <= 1")
    dn, dm = level_grid(tree, n), level_grid(tree, m)
    if stop is not None:
        stop_times = set(tree.time[np.flatnonzero(stop.flags == STOP)].tolist())
        if not stop_times <= set(dm):
            raise ValueError("stopping time takes values off the fine grid")
    sn = dynkin_value(tree, bid, ask, terminal, dn).value
    sm = dynkin_value(tree, bid, ask, terminal, dm).value
    alive = np.ones(tree.n_nodes, dtype=bool) if stop is None else stop.before()
    go_n = mean_variation_to_go(tree, sn, dn, stop)
    go_m = mean_variation_to_go(tree, sm, dm, stop)
    go_mn = mean_variation_to_go(tree, sm, dn, stop)
    cond, same = [], []
    for s in dn:
        for v in tree.layer(s):
            bound = go_m[v] + (2 - abs(sn[v] - sm[v])) * alive[v]
            if go_n[v] > bound + TOL:
                cond.append(v)
            if go_mn[v] > go_m[v] + 1.0 * alive[v] + TOL:
                same.append(v)
    return MonotonicityReport(n, m, float(go_n[0]), float(go_m[0]), float(go_mn[0]), float(go_m[0]),
                              tuple(cond), tuple(same))


def grid_convergence(tree: ScenarioTree, bid, ask, terminal=None) -> dict:
    """Root values on the dyadic sub-grids and their distance to the finest one."""
    levels = []
    L = 0
    while tree.depth % (2 ** (L + 1)) == 0:
        L += 1
    values = [dynkin_value(tree, bid, ask, terminal, level_grid(tree, lv)).value0 for lv in range(L + 1)]
    errors = [abs(v - values[-1]) for v in values]
    levels = list(range(L + 1))
    monotone = all(b <= a + TOL for a, b in zip(errors, errors[1:]))
    return {"levels": levels, "root_values": values, "errors": errors, "monotone": monotone}
