"""Reproducible synthetic bid-ask paths and random scenario trees."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .market import BidAskPath
from .scenario import ScenarioTree, build_tree

KINDS = ("random_walk", "reflected_walk", "fbm", "spread_excursion", "tree_random")


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by (seed, path index).

    Streams for different indices are independent of the order in which they
    are requested, so ensembles can be generated in parallel."""
    key = np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)])
    return np.random.Generator(np.random.Philox(key))


@dataclass(frozen=True)
class GeneratorConfig:
    kind: str
    steps: int = 100
    horizon: float = 1.0
    seed: int = 0
    path_index: int = 0
    volatility: float = 1.0
    hurst: float = 0.5
    spread: float = 0.0
    pattern: tuple[float, ...] = ()
    alpha: float = 0.0
    start: float = 0.0
    depth: int = 3
    max_branching: int = 2
    drift: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.hurst < 1:
            raise ValueError("Hurst parameter must lie in (0, 1)")
        if self.spread < 0:
            raise ValueError("spread level must be nonnegative")
        if self.volatility < 0:
            raise ValueError("volatility must be nonnegative")
        if not -1 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [-1, 1]")
        if self.kind == "spread_excursion" and len(self.pattern) == 0:
            raise ValueError("spread_excursion needs a pattern")
        if any(p < 0 for p in self.pattern):
            raise ValueError("pattern entries must be nonnegative")
        if self.depth < 0 or self.max_branching < 1:
            raise ValueError("tree shape parameters out of range")
        object.__setattr__(self, "pattern", tuple(float(p) for p in self.pattern))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pattern"] = list(self.pattern)
        return d


def parse_pattern(text: str) -> tuple[float, ...]:
    """Parse ``"0++00+"`` or ``"0,1,1,0"`` into spread multipliers."""
    text = text.strip()
    if "," in text:
        return tuple(float(p) for p in text.split(","))
    table = {"0": 0.0, "+": 1.0}
    try:
        return tuple(table[c] for c in text)
    except KeyError as exc:
        raise ValueError(f"bad pattern character {exc}") from None


@dataclass(frozen=True, eq=False)
class GeneratedTree:
    tree: ScenarioTree
    bid: np.ndarray
    ask: np.ndarray
    config: GeneratorConfig = field(repr=False)


def _fgn_cholesky(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    k = np.arange(n)
    lag = np.abs(k[:, None] - k[None, :]).astype(float)
    cov = 0.5 * (np.abs(lag + 1) ** (2 * hurst) - 2 * lag ** (2 * hurst) + np.abs(lag - 1) ** (2 * hurst))
    return np.linalg.cholesky(cov) @ rng.standard_normal(n)


def _fgn_davies_harte(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray | None:
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        return None
    lam = np.clip(lam, 0.0, None)
    m = row.size  # 2n
    z = rng.standard_normal(m)
    w = np.empty(m, dtype=complex)
    w[0] = np.sqrt(lam[0] / m) * z[0]
    w[n] = np.sqrt(lam[n] / m) * z[n]
    re, im = z[1:n], z[n + 1:]
    w[1:n] = np.sqrt(lam[1:n] / (2 * m)) * (re + 1j * im)
    w[n + 1:] = np.conj(w[1:n][::-1])
    return np.fft.fft(w)[:n].real


def fractional_gaussian_noise(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-step fractional Gaussian noise.

    Davies-Harte circulant embedding for power-of-two sizes, Cholesky
    otherwise or when the embedding is not nonnegative definite."""
    if n & (n - 1) == 0:
        out = _fgn_davies_harte(n, hurst, rng)
        if out is not None:
            return out
    return _fgn_cholesky(n, hurst, rng)


def reflected_walk_path(walk, horizon: float = 1.0, alpha: float = 0.0) -> BidAskPath:
    """bid = -|B|, ask = |B|, S = alpha |B| for B = W sqrt(T/N)."""
    w = np.asarray(walk, dtype=float)
    n = w.size - 1
    b = np.abs(w) * np.sqrt(horizon / n)
    return BidAskPath(np.linspace(0.0, horizon, n + 1), -b, b, alpha * b)


def _tree_random(cfg: GeneratorConfig, rng: np.random.Generator) -> GeneratedTree:
    branching = []
    width = 1
    for _ in range(cfg.depth):
        counts = rng.integers(1, cfg.max_branching + 1, size=width)
        branching.append([int(c) for c in counts])
        width = int(counts.sum())
    probs = []
    for counts in branching:
        for c in counts:
            w = rng.uniform(0.2, 1.0, size=c)
            p = w / w.sum()
            p[-1] = 1.0 - p[:-1].sum()
            probs.append(p.tolist())
    tree = build_tree(branching, probs)
    u = rng.uniform(0.0, 1.0, size=(2, tree.n_nodes))
    lo, hi = u.min(axis=0), u.max(axis=0)
    if cfg.drift:
        # a deterministic trend in time, rescaled so that prices stay in [0, 1]
        d = abs(cfg.drift)
        frac = tree.time / max(cfg.depth, 1)
        trend = d * (frac if cfg.drift > 0 else 1 - frac)
        lo, hi = (lo + trend) / (1 + d), (hi + trend) / (1 + d)
    return GeneratedTree(tree, lo, hi, cfg)


def generate(cfg: GeneratorConfig) -> BidAskPath | GeneratedTree:
    """Generate a path (or a random tree for ``tree_random``); deterministic in the seed."""
    rng = rng_for(cfg.seed, cfg.path_index)
    n, T = cfg.steps, cfg.horizon
    times = np.linspace(0.0, T, n + 1)
    if cfg.kind == "tree_random":
        return _tree_random(cfg, rng)
    if cfg.kind == "reflected_walk":
        steps = rng.integers(0, 2, size=n) * 2 - 1
        walk = np.concatenate([[0], np.cumsum(steps)])
        return reflected_walk_path(walk, T, cfg.alpha)
    if cfg.kind == "random_walk":
        inc = cfg.volatility * np.sqrt(T / n) * rng.standard_normal(n)
        mid = cfg.start + np.concatenate([[0.0], np.cumsum(inc)])
        half = np.full(n + 1, cfg.spread / 2)
    elif cfg.kind == "fbm":
        inc = cfg.volatility * (T / n) ** cfg.hurst * fractional_gaussian_noise(n, cfg.hurst, rng)
        mid = cfg.start + np.concatenate([[0.0], np.cumsum(inc)])
        half = np.full(n + 1, cfg.spread / 2)
    else:  # spread_excursion
        pattern = np.asarray(cfg.pattern)
        if pattern.size != n + 1:
            pattern = np.resize(pattern, n + 1)
        inc = cfg.volatility * np.sqrt(T / n) * rng.standard_normal(n)
        mid = cfg.start + np.concatenate([[0.0], np.cumsum(inc)])
        half = pattern * cfg.spread / 2
    half = np.clip(half, 0.0, None)
    bid = mid - half
    ask = np.maximum(mid + half, bid)
    return BidAskPath(times, bid, ask, mid)


def refine(path: BidAskPath, factor: int) -> BidAskPath:
    """Insert ``factor - 1`` points per cell, repeating the step values."""
    if factor < 1:
        raise ValueError("refinement factor must be positive")
    if factor == 1 or path.n_steps == 0:
        return path
    n = path.n_steps
    times = np.linspace(0.0, path.horizon, n * factor + 1)
    idx = np.minimum(np.arange(n * factor + 1) // factor, n)
    # the last fine point is the coarse horizon itself
    idx[-1] = n
    price = None if path.price is None else path.price[idx]
    return BidAskPath(times, path.bid[idx], path.ask[idx], price)
