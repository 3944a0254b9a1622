"""Bid-ask paths on a uniform grid and the structure of their spread.

A path is a càdlàg step function: the value stored at index k holds on
[t_k, t_{k+1}).  The left limit at t_k is the value stored at k-1, and the
spread has left limit 0 at time 0.  Spread zero means exact equality of the
stored bid and ask.

Excursion bookkeeping uses index sets of holdings: an excursion reported as
``(start, end]`` covers the holding indices start+1, ..., end, i.e. the time
span (t_start, t_end].  ``start`` is the zero of the spread right before the
positive run (``-1`` stands for the conventional zero at 0-), and ``end`` is
the first index after the run where the spread is zero again (or the horizon).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class BidAskPath:
    """Bid, ask and an optional price system sampled on ``times``."""

    times: np.ndarray
    bid: np.ndarray
    ask: np.ndarray
    price: np.ndarray | None = None

    def __post_init__(self):
        arrays = {}
        for name in ("times", "bid", "ask", "price"):
            a = getattr(self, name)
            if a is None:
                continue
            a = np.array(a, dtype=float)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        n = arrays["times"].size
        if n < 1:
            raise ValueError("a path needs at least one grid point")
        for name, a in arrays.items():
            if a.shape != (n,):
                raise ValueError(f"{name} has shape {a.shape}, expected ({n},)")
        if n > 1:
            dt = np.diff(arrays["times"])
            if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
                raise ValueError("grid must be uniform and increasing")

    @classmethod
    def uniform(cls, bid, ask, price=None, horizon: float = 1.0) -> "BidAskPath":
        bid = np.asarray(bid, dtype=float)
        n = bid.size
        times = np.linspace(0.0, horizon, n) if n > 1 else np.zeros(1)
        return cls(times, bid, ask, price)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def spread(self) -> np.ndarray:
        return self.ask - self.bid

    @property
    def left_spread(self) -> np.ndarray:
        """Spread left limits: index 0 gets 0, index k gets the spread at k-1."""
        x = np.empty_like(self.bid)
        x[0] = 0.0
        x[1:] = self.spread[:-1]
        return x

    def require_price(self) -> np.ndarray:
        if self.price is None:
            raise ValueError("path carries no price system")
        return self.price

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.bid + self.ask)

    def with_price(self, price) -> "BidAskPath":
        return BidAskPath(self.times, self.bid, self.ask, price)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["t", "bid", "ask"] + (["S"] if self.price is not None else [])
        w.writerow(header)
        for k in range(self.times.size):
            row = [self.times[k], self.bid[k], self.ask[k]]
            if self.price is not None:
                row.append(self.price[k])
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, zero_tolerance: float = 0.0) -> "BidAskPath":
        """Parse the ``t,bid,ask[,S]`` format.

        ``zero_tolerance`` > 0 snaps spreads below it to exact zeros (ask := bid)."""
        rows = list(csv.reader(io.StringIO(text)))
        header = [h.strip() for h in rows[0]]
        if header[:3] != ["t", "bid", "ask"] or len(header) > 4 or (len(header) == 4 and header[3] != "S"):
            raise ValueError(f"unexpected header {header}")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        if data.ndim != 2 or data.shape[1] != len(header):
            raise ValueError("ragged path CSV")
        bid, ask = data[:, 1], data[:, 2].copy()
        if zero_tolerance > 0:
            snap = np.abs(ask - bid) < zero_tolerance
            ask[snap] = bid[snap]
        price = data[:, 3] if len(header) == 4 else None
        return cls(data[:, 0], bid, ask, price)


@dataclass(frozen=True)
class ValidationReport:
    ordering_violations: tuple[int, ...]
    price_violations: tuple[int, ...]
    normalized: bool

    @property
    def ok(self) -> bool:
        return not self.ordering_violations and not self.price_violations

    def to_dict(self) -> dict:
        return {"ordering_violations": list(self.ordering_violations),
                "price_violations": list(self.price_violations),
                "normalized": self.normalized, "ok": self.ok}


def validate_model(path: BidAskPath) -> ValidationReport:
    """Report bid > ask, prices outside [bid, ask] and whether 0 <= bid <= ask <= 1."""
    order = tuple(int(k) for k in np.flatnonzero(path.bid > path.ask))
    price = ()
    if path.price is not None:
        bad = (path.price < path.bid) | (path.price > path.ask)
        price = tuple(int(k) for k in np.flatnonzero(bad))
    normalized = bool(np.all(path.bid >= 0) and np.all(path.ask <= 1) and not order)
    return ValidationReport(order, price, normalized)


def require_valid(path: BidAskPath) -> None:
    rep = validate_model(path)
    if not rep.ok:
        raise ValueError(f"invalid bid-ask model: {rep.to_dict()}")


@dataclass(frozen=True)
class Excursion:
    """Positive run of the spread on value indices first..end-1.

    The covered holding indices are (start, end]; ``start = first - 1``.
    ``end_kind`` is ``hit_zero`` when the spread jumps to zero at ``end``,
    ``horizon`` when the run reaches the last grid point.  ``left_limit_zero``
    (a continuous approach to zero) cannot occur for step paths.
    """

    start: int
    first: int
    end: int
    end_kind: str

    def covers(self, k: int) -> bool:
        return self.start < k <= self.end


@dataclass(frozen=True)
class ZeroRegime:
    """Maximal run of zero spread on value indices first..last.

    ``entry_kind`` is ``left_limit_zero`` when the run starts at index 0 (the
    spread is zero at 0-), ``value_zero`` when it is entered by a jump to 0.
    """

    first: int
    last: int
    entry_kind: str

    def covers(self, k: int) -> bool:
        return self.first <= k <= self.last


@dataclass(frozen=True)
class SpreadStructure:
    zero_set: tuple[int, ...]
    excursion_starts: tuple[int, ...]
    excursions: tuple[Excursion, ...]
    zero_regimes: tuple[ZeroRegime, ...]
    right_inner_zeros: tuple[int, ...]
    chatter_windows: tuple[tuple[int, int], ...]
    assumption_ok: bool
    level_n_star: int
    chatter_window: int = field(default=8)

    def to_dict(self) -> dict:
        return {
            "zero_set": list(self.zero_set),
            "excursion_starts": list(self.excursion_starts),
            "excursions": [[e.start, e.end, e.end_kind] for e in self.excursions],
            "zero_regimes": [[z.first, z.last, z.entry_kind] for z in self.zero_regimes],
            "chatter_windows": [list(w) for w in self.chatter_windows],
            "assumption_ok": self.assumption_ok,
            "level_n_star": self.level_n_star,
        }


def certified_level(spread: np.ndarray) -> int:
    """Smallest n >= 0 with 2**-n <= min positive spread (0 if there is none).

    At this level both thresholds 2**-n and 2**-(n+1) lie at or below every
    positive spread value, so the threshold decomposition sees every positive
    cell."""
    pos = spread[spread > 0]
    if pos.size == 0:
        return 0
    m = float(pos.min())
    n = max(0, math.ceil(-math.log2(m)))
    while 2.0 ** -n > m:
        n += 1
    while n > 0 and 2.0 ** -(n - 1) <= m:
        n -= 1
    return n


def _as_spread(path_or_spread) -> np.ndarray:
    if isinstance(path_or_spread, BidAskPath):
        return path_or_spread.spread
    return np.asarray(path_or_spread, dtype=float)


def threshold_stopping_times(path_or_spread, n: int) -> tuple[float, ...]:
    """Alternating hitting indices tau_0 = 0 <= tau_1 < tau_2 < ...

    Odd entries: first index >= previous with spread <= 2**-(n+1).  Even
    entries: first index > previous with spread >= 2**-n.  The sequence ends
    with ``math.inf`` once a hitting time does not occur on the grid."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    x = _as_spread(path_or_spread)
    low, high = 2.0 ** -(n + 1), 2.0 ** -n
    times: list[float] = [0]
    k = 0
    while True:
        odd = len(times) % 2 == 1
        start = k if odd else k + 1
        hits = np.flatnonzero(x[start:] <= low) if odd else np.flatnonzero(x[start:] >= high)
        if hits.size == 0:
            times.append(math.inf)
            return tuple(times)
        k = start + int(hits[0])
        times.append(k)


def threshold_intervals(path_or_spread, n: int) -> list[tuple[int, int | None]]:
    """Pairs (tau_{2k}, tau_{2k+1}); ``None`` replaces an infinite right end."""
    times = threshold_stopping_times(path_or_spread, n)
    out = []
    for i in range(0, len(times), 2):
        a = times[i]
        if a == math.inf:
            break
        b = times[i + 1] if i + 1 < len(times) else math.inf
        out.append((int(a), None if b == math.inf else int(b)))
    return out


def _chatter(x: np.ndarray, window: int, min_switches: int) -> list[tuple[int, int]]:
    zero = x == 0
    switches = np.flatnonzero(zero[1:] != zero[:-1]) + 1
    hits = []
    for i in range(switches.size - min_switches + 1):
        lo, hi = int(switches[i]), int(switches[i + min_switches - 1])
        if hi - lo < window:
            hits.append((lo, hi))
    merged: list[tuple[int, int]] = []
    for lo, hi in hits:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def check_spread_assumption(path_or_spread, chatter_window: int = 8,
                            min_switches: int = 4) -> SpreadStructure:
    """Classify the zeros of the spread and decompose it into excursions.

    Every zero strictly before the horizon is an excursion start (positive
    spread at the next index) or a right-inner zero (zero at the next index),
    which always succeeds on a grid.  Assumption failure is therefore
    detected by its discrete proxy: ``min_switches`` or more zero/positive
    alternations within ``chatter_window`` consecutive indices.
    """
    x = _as_spread(path_or_spread)
    if np.any(x < 0):
        raise ValueError("negative spread: validate the model first")
    n_last = x.size - 1
    zero_set = tuple(int(k) for k in np.flatnonzero(x == 0))
    right_inner = tuple(k for k in zero_set if k < n_last and x[k + 1] == 0)

    excursions = []
    k = 0
    while k <= n_last:
        if x[k] > 0 and (k == 0 or x[k - 1] == 0):
            nxt = np.flatnonzero(x[k:] == 0)
            if nxt.size:
                end, kind = k + int(nxt[0]), "hit_zero"
            else:
                end, kind = n_last, "horizon"
            excursions.append(Excursion(k - 1, k, end, kind))
            k = end
        k += 1
    # a positive run that starts at the last grid point has no time to live
    # beyond T but is kept so that every positive left limit is covered

    zero_regimes = []
    k = 0
    while k <= n_last:
        if x[k] == 0:
            j = k
            while j + 1 <= n_last and x[j + 1] == 0:
                j += 1
            zero_regimes.append(ZeroRegime(k, j, "left_limit_zero" if k == 0 else "value_zero"))
            k = j
        k += 1

    chatter = _chatter(x, chatter_window, min_switches)
    return SpreadStructure(
        zero_set=zero_set,
        excursion_starts=tuple(e.start for e in excursions),
        excursions=tuple(excursions),
        zero_regimes=tuple(zero_regimes),
        right_inner_zeros=right_inner,
        chatter_windows=tuple(chatter),
        assumption_ok=not chatter,
        level_n_star=certified_level(x),
        chatter_window=chatter_window,
    )


def excursion_cover(path_or_spread, chatter_window: int = 8, min_switches: int = 4) -> SpreadStructure:
    """Excursion and zero-regime families; raises if the assumption proxy fails."""
    st = check_spread_assumption(path_or_spread, chatter_window, min_switches)
    if not st.assumption_ok:
        raise ValueError(f"spread assumption fails (chatter at {list(st.chatter_windows)})")
    return st
