"""Pathwise transaction costs of a trading strategy on a bid-ask step path.

A strategy on a grid t_0 < ... < t_N is a left-continuous step function:
``phi[k]`` is the number of shares held on (t_{k-1}, t_k], with ``phi[0]``
the position at time 0.  The change ``phi[k+1] - phi[k]`` is therefore a
trade made right after t_k and is paid at the prices stored at index k:

    cost_k = (ask_k - S_k) (dphi)^+ + (S_k - bid_k) (dphi)^-

Partitions, tags and intervals are given as grid indices.  A NaN entry in a
strategy stands for a symbolic strategy of infinite variation on that cell;
its costs are ``INFINITE`` wherever the spread is positive.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .market import BidAskPath, certified_level, threshold_intervals
from .paths import refine

TOL = 1e-12


class _Infinite:
    """Marker for an infinite cost (a singleton, compares above every float)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __str__(self) -> str:
        return "inf"

    def __float__(self) -> float:
        return math.inf

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("INFINITE")

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self


INFINITE = _Infinite()


def as_extended(x: float):
    """Map a float to the extended-real convention (inf becomes ``INFINITE``)."""
    return INFINITE if x == math.inf else float(x)


# ---------------------------------------------------------------------------
# partitions and strategies


@dataclass(frozen=True)
class Partition:
    """Strictly increasing grid indices a = p_0 < ... < p_m = b (a single point is allowed)."""

    points: tuple[int, ...]

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        if not pts:
            raise ValueError("empty partition")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("partition points must increase strictly")
        object.__setattr__(self, "points", pts)

    @property
    def a(self) -> int:
        return self.points[0]

    @property
    def b(self) -> int:
        return self.points[-1]

    @classmethod
    def full(cls, a: int, b: int) -> "Partition":
        return cls(tuple(range(a, b + 1)))

    @classmethod
    def dyadic(cls, a: int, b: int, level: int) -> "Partition":
        """Points a + round(i (b - a) / 2**level); the full grid once 2**level >= b - a."""
        if b == a:
            return cls((a,))
        m = 2**level
        if m >= b - a:
            return cls.full(a, b)
        pts = sorted({a + (i * (b - a)) // m for i in range(m + 1)})
        return cls(tuple(pts))

    def common_refinement(self, other: "Partition") -> "Partition":
        if (self.a, self.b) != (other.a, other.b):
            raise ValueError("partitions of different intervals")
        return Partition(tuple(sorted(set(self.points) | set(other.points))))

    def refines(self, other: "Partition") -> bool:
        return set(other.points) <= set(self.points)


@dataclass(frozen=True)
class Subdivision:
    """Tags s_i with p_{i-1} <= s_i < p_i for each cell of a partition."""

    partition: Partition
    tags: tuple[int, ...]

    def __post_init__(self):
        tags = tuple(int(s) for s in self.tags)
        pts = self.partition.points
        if len(tags) != len(pts) - 1:
            raise ValueError("one tag per partition cell required")
        for i, s in enumerate(tags):
            if not pts[i] <= s < pts[i + 1]:
                raise ValueError(f"tag {s} outside the half-open cell [{pts[i]}, {pts[i + 1]})")
        object.__setattr__(self, "tags", tags)

    @classmethod
    def left(cls, partition: Partition) -> "Subdivision":
        return cls(partition, partition.points[:-1])

    @classmethod
    def right(cls, partition: Partition) -> "Subdivision":
        """Last admissible tag of each cell (one index before its right end)."""
        return cls(partition, tuple(p - 1 for p in partition.points[1:]))


@dataclass(frozen=True, eq=False)
class StrategyPath:
    """Holdings phi[k] on (t_{k-1}, t_k]; NaN marks a cell of infinite variation."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("strategy values must be a nonempty 1-d array")
        if np.any(np.isinf(v)):
            raise ValueError("strategy must be bounded")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def bound(self) -> float:
        finite = self.values[~np.isnan(self.values)]
        return float(np.max(np.abs(finite))) if finite.size else 0.0

    @property
    def has_infinite_variation(self) -> bool:
        return bool(np.any(np.isnan(self.values)))

    def __len__(self) -> int:
        return self.values.size

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def variation(self, s: int = 0, t: int | None = None) -> float:
        """Sum of |phi[j+1] - phi[j]| over s <= j < t (inf with NaN inside)."""
        t = self.values.size - 1 if t is None else t
        d = np.abs(np.diff(self.values[s:t + 1]))
        return math.inf if np.any(np.isnan(d)) else float(d.sum())

    def truncated(self, k: float) -> "StrategyPath":
        """median(-k, phi, k)."""
        return StrategyPath(np.clip(self.values, -k, k))

    def to_csv(self, times) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "phi"])
        for t, p in zip(times, self.values):
            w.writerow([f"{t:.17g}", f"{p:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> tuple["StrategyPath", np.ndarray]:
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if [h.strip() for h in rows[0]] != ["t", "phi"]:
            raise ValueError(f"unexpected strategy header {rows[0]}")
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
        return cls(data[:, 1]), data[:, 0]


@dataclass(frozen=True, eq=False)
class AlmostSimpleStrategy:
    """Finitely many jumps; phi = at_values[i] at t_{jump_times[i]} and
    after_values[i] on the open cells up to the next jump (0 before the first).

    The left jump at a jump time is ``at - before`` and is paid at the left
    limits of the prices; the right jump ``after - at`` at the current prices.
    """

    n_steps: int
    jump_times: tuple[int, ...]
    at_values: tuple[float, ...]
    after_values: tuple[float, ...]

    def __post_init__(self):
        jt = tuple(int(t) for t in self.jump_times)
        at = tuple(float(x) for x in self.at_values)
        af = tuple(float(x) for x in self.after_values)
        if not len(jt) == len(at) == len(af):
            raise ValueError("jump_times, at_values and after_values differ in length")
        if any(b <= a for a, b in zip(jt, jt[1:])):
            raise ValueError("jump times must increase strictly")
        if jt and not (0 <= jt[0] and jt[-1] <= self.n_steps):
            raise ValueError("jump times outside the grid")
        if jt and jt[0] == 0 and at[0] != 0.0:
            raise ValueError("the position at time 0 is 0; a jump at 0 must have at = 0")
        if not all(map(math.isfinite, at + af)):
            raise ValueError("jump values must be finite")
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "at_values", at)
        object.__setattr__(self, "after_values", af)

    def point_and_cell_values(self) -> tuple[np.ndarray, np.ndarray]:
        """p[k] = phi at t_k; c[k] = phi on the open cell (t_{k-1}, t_k) (c[0] = 0)."""
        n = self.n_steps
        p = np.zeros(n + 1)
        c = np.zeros(n + 1)
        cur = 0.0
        jumps = dict(zip(self.jump_times, zip(self.at_values, self.after_values)))
        for k in range(n + 1):
            c[k] = cur if k else 0.0
            if k in jumps:
                p[k], cur = jumps[k]
            else:
                p[k] = cur
        return p, c

    def to_dict(self, times=None) -> dict:
        ts = list(self.jump_times) if times is None else [float(times[k]) for k in self.jump_times]
        return {"n_steps": self.n_steps,
                "jumps": [{"t": t, "at": a, "after": b}
                          for t, a, b in zip(ts, self.at_values, self.after_values)]}

    def to_json(self, times=None) -> str:
        return json.dumps(self.to_dict(times), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict, times=None) -> "AlmostSimpleStrategy":
        """Jump ``t`` values are grid indices, or times when ``times`` is given."""
        jumps = d["jumps"]
        if times is None:
            idx = [int(j["t"]) for j in jumps]
            n = int(d["n_steps"])
        else:
            times = np.asarray(times, dtype=float)
            idx = [index_of(times, j["t"]) for j in jumps]
            n = times.size - 1
        return cls(n, tuple(idx), tuple(j["at"] for j in jumps), tuple(j["after"] for j in jumps))


def index_of(times: np.ndarray, t: float) -> int:
    """Grid index of time ``t`` (must be a grid point up to 1e-9 relative)."""
    times = np.asarray(times, dtype=float)
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"time {t} is not a grid point")
    return k


def induced_strategy_path(phi: AlmostSimpleStrategy) -> StrategyPath:
    """The same strategy as a StrategyPath on the grid refined by 2.

    Fine index 2k is t_k and fine index 2k - 1 the midpoint of (t_{k-1}, t_k),
    so both the left and the right jump of every jump time become trades."""
    p, c = phi.point_and_cell_values()
    fine = np.zeros(2 * phi.n_steps + 1)
    fine[0::2] = p
    fine[1::2] = c[1:]
    return StrategyPath(fine)


def strategy_to_almost_simple(phi: StrategyPath) -> AlmostSimpleStrategy:
    """Write a finite-variation StrategyPath as an almost simple strategy with right jumps."""
    v = phi.values
    if phi.has_infinite_variation:
        raise ValueError("strategy has infinite variation")
    if v[0] != 0.0:
        raise ValueError("strategy must start from 0")
    jt, at, af = [], [], []
    for k in range(v.size - 1):
        if v[k + 1] != v[k]:
            jt.append(k)
            at.append(v[k])
            af.append(v[k + 1])
    return AlmostSimpleStrategy(v.size - 1, tuple(jt), tuple(at), tuple(af))


# ---------------------------------------------------------------------------
# modified Riemann-Stieltjes sums and the cost term


def _price(path: BidAskPath) -> np.ndarray:
    return path.require_price()


def _check_lengths(phi: StrategyPath, path: BidAskPath) -> None:
    if len(phi) != path.times.size:
        raise ValueError(f"strategy has {len(phi)} values, path has {path.times.size} grid points")


def rs_sum(phi: StrategyPath, path: BidAskPath, partition: Partition,
           tags: Subdivision | None = None) -> float:
    """sum_i (ask - S)(s_i) (dphi_i)^+ + (S - bid)(s_i) (dphi_i)^- over the partition cells."""
    _check_lengths(phi, path)
    S = _price(path)
    if tags is None:
        tags = Subdivision.left(partition)
    elif tags.partition != partition:
        raise ValueError("subdivision belongs to another partition")
    pts = np.asarray(partition.points)
    if pts.size < 2:
        return 0.0
    s = np.asarray(tags.tags)
    d = phi.values[pts[1:]] - phi.values[pts[:-1]]
    up = (path.ask[s] - S[s]) * np.maximum(d, 0.0)
    down = (S[s] - path.bid[s]) * np.maximum(-d, 0.0)
    total = float(np.sum(up + down))
    return math.inf if math.isnan(total) else total


def trade_costs(phi: StrategyPath, path: BidAskPath) -> np.ndarray:
    """Cost of each trade phi[k+1] - phi[k] (length N); inf for NaN trades at positive spread."""
    _check_lengths(phi, path)
    S = _price(path)
    d = np.diff(phi.values)
    up = (path.ask[:-1] - S[:-1]) * np.maximum(d, 0.0)
    down = (S[:-1] - path.bid[:-1]) * np.maximum(-d, 0.0)
    out = up + down
    nan = np.isnan(out)
    if np.any(nan):
        positive = path.spread[:-1] > 0
        out = np.where(nan & positive, math.inf, np.where(nan, 0.0, out))
    return out


@dataclass(frozen=True)
class CostTerm:
    """Cost on an interval with the refining partition sums that lead to it."""

    value: object
    a: int
    b: int
    sums: tuple[float, ...]
    level: int


def cost_term(phi: StrategyPath, path: BidAskPath, a: int, b: int) -> CostTerm:
    """Cost of ``phi`` on [t_a, t_b] along dyadic partitions refining to the full grid.

    On step paths the full grid is the limit of every refining sequence whose
    mesh reaches the grid (zero oscillation within cells, exact variation).
    """
    _check_lengths(phi, path)
    n = path.n_steps
    if not 0 <= a <= n or not 0 <= b <= n:
        raise ValueError(f"interval [{a}, {b}] outside the grid 0..{n}")
    if b <= a:
        return CostTerm(0.0, a, b, (0.0,), 0)
    seg = phi.values[a:b + 1]
    if np.any(np.isnan(seg)):
        if np.min(path.spread[a:b]) > 0:
            return CostTerm(INFINITE, a, b, (), 0)
        raise ValueError("spread reaches zero on the interval and the variation is not finite")
    level = max(0, math.ceil(math.log2(b - a)))
    sums = tuple(rs_sum(phi, path, Partition.dyadic(a, b, lv)) for lv in range(level + 1))
    return CostTerm(sums[-1], a, b, sums, level)


def cost_on_interval(phi: StrategyPath, path: BidAskPath, a: int, b: int):
    """C(phi, [t_a, t_b]) as a float, ``INFINITE``, or 0 for an empty interval."""
    return cost_term(phi, path, a, b).value


@dataclass(frozen=True)
class AdditivityReport:
    whole: float
    left: float
    right: float

    @property
    def difference(self) -> float:
        return abs(float(self.whole) - float(self.left) - float(self.right))

    @property
    def ok(self) -> bool:
        if INFINITE in (self.whole, self.left, self.right):
            return self.whole is INFINITE and (self.left is INFINITE or self.right is INFINITE)
        return self.difference <= TOL


def interval_additivity_check(phi: StrategyPath, path: BidAskPath, a: int, c: int, b: int) -> AdditivityReport:
    if not a <= c <= b:
        raise ValueError("need a <= c <= b")
    return AdditivityReport(cost_on_interval(phi, path, a, b), cost_on_interval(phi, path, a, c),
                            cost_on_interval(phi, path, c, b))


# ---------------------------------------------------------------------------
# cost processes


@dataclass(frozen=True, eq=False)
class CostProcess:
    """C at every grid time with its left and right jumps.

    ``values[k]`` contains all trades strictly before t_k plus the left jump
    at t_k; the right jump at t_k shows up from index k + 1 on.  Entries from
    ``infinite_from`` on are infinite (stored as ``inf`` in ``values``).
    """

    values: np.ndarray
    left_jumps: np.ndarray
    right_jumps: np.ndarray
    level: int
    infinite_from: int | None = None

    def __post_init__(self):
        for name in ("values", "left_jumps", "right_jumps"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def at(self, k: int):
        return as_extended(self.values[k])

    @property
    def terminal(self):
        return self.at(self.values.size - 1)

    def is_nondecreasing(self) -> bool:
        v = self.values
        return bool(v[0] == 0 and np.all(v[1:] >= v[:-1]))

    def to_dict(self, times=None) -> dict:
        ts = range(self.values.size) if times is None else [float(t) for t in times]
        return {"C": [{"t": t, "value": json_number(self.values[k]),
                       "left_jump": json_number(self.left_jumps[k]),
                       "right_jump": json_number(self.right_jumps[k])}
                      for k, t in enumerate(ts)],
                "level_n_star": self.level}


def json_number(x: float):
    """Floats for JSON; infinite values become the string ``"inf"``."""
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _cumulate(costs: np.ndarray) -> tuple[np.ndarray, int | None]:
    values = np.concatenate([[0.0], np.cumsum(costs)])
    inf = np.flatnonzero(np.isinf(values))
    return values, (int(inf[0]) if inf.size else None)


def threshold_mask(path: BidAskPath, level: int) -> np.ndarray:
    """Trade indices j lying in some threshold interval [tau_{2k}, tau_{2k+1})."""
    n = path.n_steps
    mask = np.zeros(n, dtype=bool)
    for a, b in threshold_intervals(path, level):
        mask[a:(n if b is None else b)] = True
    return mask


def cost_process(phi: StrategyPath, path: BidAskPath, level: int | None = None) -> CostProcess:
    """C_t(phi) as the sum of interval costs over the threshold intervals of ``level``.

    At the certified level (the default) every cell with positive spread is
    inside a threshold interval, so the result is the full cost process;
    lower levels give the increasing approximations C^n <= C."""
    _check_lengths(phi, path)
    n_star = certified_level(path.spread)
    level = n_star if level is None else int(level)
    costs = trade_costs(phi, path)
    masked = np.where(threshold_mask(path, level), costs, 0.0)
    values, inf_from = _cumulate(masked)
    right = np.concatenate([masked, [0.0]])
    return CostProcess(values, np.zeros_like(values), right, level, inf_from)


def almost_simple_cost(phi: AlmostSimpleStrategy, path: BidAskPath) -> CostProcess:
    """Closed form: left jumps at the left limits of the prices, right jumps at the prices."""
    if phi.n_steps != path.n_steps:
        raise ValueError("strategy and path have different grids")
    S = _price(path)
    p, c = phi.point_and_cell_values()
    n = phi.n_steps

    def price_jump(d, k):
        return (path.ask[k] - S[k]) * max(d, 0.0) + (S[k] - path.bid[k]) * max(-d, 0.0)

    after_n = phi.after_values[-1] if phi.jump_times and phi.jump_times[-1] == n else p[n]
    left = np.zeros(n + 1)
    right = np.zeros(n + 1)
    seq = np.zeros(2 * n)  # left/right jump costs in time order
    for k in range(n + 1):
        if k > 0:
            left[k] = price_jump(p[k] - c[k], k - 1)
            seq[2 * k - 1] = left[k]
        nxt = c[k + 1] if k < n else after_n
        right[k] = price_jump(nxt - p[k], k)
        if k < n:
            seq[2 * k] = right[k]
    # right[n] is recorded for reference; it happens after the horizon
    fine, _ = _cumulate(seq)
    values = fine[0::2]
    inf = np.flatnonzero(np.isinf(values))
    return CostProcess(values, left, right, certified_level(path.spread),
                       int(inf[0]) if inf.size else None)


def cost_process_of(phi, path: BidAskPath) -> tuple[CostProcess, np.ndarray]:
    """Cost process on the coarse grid for either kind of strategy.

    Almost simple strategies are evaluated through their induced path on the
    twice refined grid and sampled at the coarse grid points."""
    if isinstance(phi, AlmostSimpleStrategy):
        fine = cost_process(induced_strategy_path(phi), refine(path, 2))
        v = fine.values[0::2]
        inf = np.flatnonzero(np.isinf(v))
        left = np.concatenate([[0.0], fine.right_jumps[1::2]])
        right = fine.right_jumps[0::2]
        return CostProcess(v, left, right, fine.level, int(inf[0]) if inf.size else None), v
    cp = cost_process(phi, path)
    return cp, cp.values


# ---------------------------------------------------------------------------
# property reports


def upper_bound_violations(phi: StrategyPath, path: BidAskPath, cp: CostProcess | None = None,
                           tol: float = TOL) -> list[tuple[int, int]]:
    """Pairs s < t with C_t - C_s > sup_{[s,t)} spread * Var_s^t(phi) (expected empty).

    Pairs with an infinite side are skipped."""
    cp = cost_process(phi, path) if cp is None else cp
    n = path.n_steps
    cumvar = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(phi.values)))])
    out = []
    for s in range(n):
        lhs = cp.values[s + 1:] - cp.values[s]
        rhs = np.maximum.accumulate(path.spread[s:n]) * (cumvar[s + 1:] - cumvar[s])
        with np.errstate(invalid="ignore"):
            bad = np.isfinite(lhs) & np.isfinite(rhs) & (lhs > rhs + tol)
        out.extend((s, s + 1 + int(j)) for j in np.flatnonzero(bad))
    return out


def truncation_monotone(phi: StrategyPath, path: BidAskPath, levels: Sequence[float], tol: float = 0.0) -> bool:
    """C(median(-K, phi, K)) is nondecreasing in K pointwise in time."""
    prev = None
    for k in sorted(levels):
        v = cost_process(phi.truncated(k), path).values
        if prev is not None and np.any(v < prev - tol):
            return False
        prev = v
    return True


@dataclass(frozen=True)
class LiminfReport:
    limit_cost: float
    sequence_costs: tuple[float, ...]
    tail_min: float
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return self.tail_min >= self.limit_cost - self.tol

    @property
    def strict(self) -> bool:
        return self.tail_min > self.limit_cost + self.tol

    def to_dict(self) -> dict:
        return {"limit_cost": self.limit_cost, "sequence_costs": list(self.sequence_costs),
                "tail_min": self.tail_min, "ok": self.ok, "strict": self.strict}


def liminf_check(phi: StrategyPath, phi_seq: Sequence[StrategyPath], path: BidAskPath,
                 interval: tuple[int, int], factors: Sequence[int] | None = None,
                 tail: int | None = None, tol: float = 1e-9) -> LiminfReport:
    """Compare C(phi^n, I) along a sequence with C(phi, I).

    ``factors[n]`` lets phi^n live on ``refine(path, factors[n])`` (with the
    interval scaled accordingly); this is how a spike supported on a shrinking
    time span vanishes pointwise.  The liminf is estimated by the minimum over
    the last ``tail`` members (default: the second half)."""
    a, b = interval
    limit = float(cost_on_interval(phi, path, a, b))
    costs = []
    for i, psi in enumerate(phi_seq):
        f = 1 if factors is None else int(factors[i])
        costs.append(float(cost_on_interval(psi, refine(path, f), a * f, b * f)))
    tail = max(1, len(costs) // 2) if tail is None else tail
    return LiminfReport(limit, tuple(costs), min(costs[-tail:]), tol)


# ---------------------------------------------------------------------------
# approximation by almost simple strategies


@dataclass(frozen=True)
class HittingLedger:
    """Jump times T_k of the approximation and whether phi attains the level there."""

    level: int
    times: tuple[int, ...]
    attained: tuple[bool, ...]

    def to_dict(self) -> dict:
        return {"n": self.level, "T": list(self.times), "attained": list(self.attained)}


def approximate_values(values: np.ndarray, a: int, b: int, n: int) -> tuple[np.ndarray, HittingLedger]:
    """Holdings of the level-n approximation on [t_a, t_b], unchanged outside.

    T_0 = a and T_k is the first index after T_{k-1} (and before b) at which
    the next holding moves by at least 1/n from the holding right after
    T_{k-1}.  The approximation keeps phi at t_a and holds phi right after
    T_k until T_{k+1}.  For left-continuous holdings the level is crossed on
    an open cell, so every jump is a right jump (never attained)."""
    if n < 1:
        raise ValueError("level n must be >= 1")
    v = np.asarray(values, dtype=float)
    out = v.copy()
    if b <= a:
        return out, HittingLedger(n, (), ())
    thr = 1.0 / n
    times = [a]
    ref = v[a + 1]
    for j in range(a + 1, b + 1):
        if j - 1 > times[-1] and abs(v[j] - ref) >= thr:
            times.append(j - 1)
            ref = v[j]
        out[j] = ref
    return out, HittingLedger(n, tuple(times), tuple(False for _ in times))


def approximate_by_almost_simple(phi: StrategyPath, path: BidAskPath, n: int,
                                 interval: tuple[int, int]) -> tuple[AlmostSimpleStrategy, StrategyPath, HittingLedger]:
    """Almost simple phi^n with |phi - phi^n| <= 1/n on the interval and phi^n = phi outside.

    Requires positive spread on [t_a, t_b) and finite variation there.
    Returns the strategy, its holdings on the grid and the hitting ledger."""
    _check_lengths(phi, path)
    a, b = interval
    if not 0 <= a <= b <= path.n_steps:
        raise ValueError("interval outside the grid")
    if b > a and np.min(path.spread[a:b]) <= 0:
        raise ValueError("spread is not bounded away from zero on the interval")
    if phi.has_infinite_variation:
        raise ValueError("strategy has infinite variation")
    vals, ledger = approximate_values(phi.values, a, b, n)
    approx = StrategyPath(vals)
    return strategy_to_almost_simple(approx), approx, ledger
