"""Finite filtered probability spaces represented as scenario trees.

Nodes are numbered breadth first, so every time layer is a contiguous block
of ids and the children of a node form a contiguous block in the next layer.
Adapted processes are plain float arrays indexed by node id.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PROB_TOL = 1e-12
DEFAULT_CAP = 10**6

# codes used by TreeStoppingTime.flags
CONTINUE = 0
STOP = 1
INFINITE = 2


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScenarioTree:
    """Immutable scenario tree with strictly positive transition probabilities.

    ``prob[v]`` is the probability of moving from ``parent[v]`` to ``v``
    (1.0 at the root).  ``first_child[v]`` and ``n_children[v]`` locate the
    children block of ``v``.
    """

    depth: int
    parent: np.ndarray
    time: np.ndarray
    prob: np.ndarray
    n_children: np.ndarray
    first_child: np.ndarray
    layer_start: np.ndarray = field(repr=False)
    path_prob: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return int(self.parent.size)

    def layer(self, t: int) -> range:
        """Node ids at time ``t``."""
        if not 0 <= t <= self.depth:
            raise IndexError(f"time {t} outside 0..{self.depth}")
        return range(int(self.layer_start[t]), int(self.layer_start[t + 1]))

    def layer_slice(self, t: int) -> slice:
        return slice(int(self.layer_start[t]), int(self.layer_start[t + 1]))

    def children(self, v: int) -> range:
        f = int(self.first_child[v])
        return range(f, f + int(self.n_children[v]))

    @property
    def leaves(self) -> range:
        return self.layer(self.depth)

    def ancestor_at(self, v: int, t: int) -> int:
        """The ancestor of ``v`` living at time ``t`` (``v`` itself if equal)."""
        if t > self.time[v]:
            raise ValueError("ancestor time after node time")
        while self.time[v] > t:
            v = int(self.parent[v])
        return v

    def ancestors_table(self) -> np.ndarray:
        """``table[l, s]`` = node at time ``s`` on the path to leaf number ``l``."""
        leaves = np.arange(self.layer_start[self.depth], self.layer_start[self.depth + 1])
        table = np.empty((leaves.size, self.depth + 1), dtype=np.int64)
        cur = leaves.copy()
        for s in range(self.depth, -1, -1):
            table[:, s] = cur
            cur = np.where(cur > 0, self.parent[cur], 0)
        return table

    def descendants_at(self, v: int, t: int) -> range:
        """Contiguous id range of the descendants of ``v`` at time ``t``."""
        if t < self.time[v]:
            raise ValueError("target time before node time")
        lo = hi = v
        for _ in range(int(self.time[v]), t):
            lo = int(self.first_child[lo])
            hi = int(self.first_child[hi] + self.n_children[hi] - 1)
        return range(lo, hi + 1)

    def to_json(self) -> str:
        """Serialize as ``{depth, nodes:[{id, parent, time, children:[{id, prob}]}]}``."""
        nodes = []
        for v in range(self.n_nodes):
            nodes.append({
                "id": v,
                "parent": None if v == 0 else int(self.parent[v]),
                "time": int(self.time[v]),
                "children": [{"id": c, "prob": float(f"{self.prob[c]:.17g}")}
                             for c in self.children(v)],
            })
        return json.dumps({"depth": self.depth, "nodes": nodes}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioTree":
        doc = json.loads(text)
        nodes = sorted(doc["nodes"], key=lambda n: n["id"])
        depth = int(doc["depth"])
        branching: list[list[int]] = [[] for _ in range(depth)]
        probs: list[list[float]] = []
        for n in nodes:
            if n["time"] < depth:
                branching[n["time"]].append(len(n["children"]))
                probs.append([c["prob"] for c in n["children"]])
        tree = build_tree(branching, probs)
        for n in nodes:
            kids = [c["id"] for c in n["children"]]
            if kids != list(tree.children(n["id"])):
                raise ValueError("node numbering is not breadth first")
        return tree


def build_tree(branching: Sequence[int | Sequence[int]],
               probabilities: Sequence[Sequence[float]] | None = None) -> ScenarioTree:
    """Build a tree from per-period child counts.

    ``branching[t]`` is either one integer (all nodes at time ``t`` get that
    many children) or a list with one count per node of layer ``t``.
    ``probabilities`` lists the transition probabilities of every
    non-terminal node in breadth-first order; ``None`` means uniform.
    """
    depth = len(branching)
    parent = [-1]
    time = [0]
    counts: list[int] = []
    layer_start = [0, 1]
    for t, b in enumerate(branching):
        width = layer_start[t + 1] - layer_start[t]
        per_node = [int(b)] * width if np.isscalar(b) else [int(x) for x in b]
        if len(per_node) != width:
            raise ValueError(f"period {t}: expected {width} child counts, got {len(per_node)}")
        if any(c < 1 for c in per_node):
            raise ValueError(f"period {t}: zero branching")
        for i, c in enumerate(per_node):
            parent.extend([layer_start[t] + i] * c)
            time.extend([t + 1] * c)
        counts.extend(per_node)
        layer_start.append(layer_start[-1] + sum(per_node))
    n = len(parent)
    counts.extend([0] * (n - len(counts)))
    n_children = np.array(counts, dtype=np.int64)
    first_child = np.zeros(n, dtype=np.int64)
    first_child[:] = -1
    nxt = 1
    for v in range(n):
        if n_children[v]:
            first_child[v] = nxt
            nxt += n_children[v]

    prob = np.ones(n)
    n_inner = int(layer_start[depth])
    if probabilities is None:
        for v in range(n_inner):
            prob[first_child[v]:first_child[v] + n_children[v]] = 1.0 / n_children[v]
    else:
        if len(probabilities) != n_inner:
            raise ValueError(f"expected probabilities for {n_inner} nodes, got {len(probabilities)}")
        for v, row in enumerate(probabilities):
            row = np.asarray(row, dtype=float)
            if row.size != n_children[v]:
                raise ValueError(f"node {v}: {n_children[v]} children but {row.size} probabilities")
            if np.any(~(row > 0)):
                raise ValueError(f"node {v}: probabilities must be strictly positive")
            if abs(row.sum() - 1.0) > PROB_TOL:
                raise ValueError(f"node {v}: probabilities sum to {row.sum()!r}, not 1")
            prob[first_child[v]:first_child[v] + n_children[v]] = row

    parent_a = np.array(parent, dtype=np.int64)
    path_prob = np.ones(n)
    for v in range(1, n):
        path_prob[v] = path_prob[parent_a[v]] * prob[v]
    return ScenarioTree(depth=depth, parent=_readonly(parent_a), time=_readonly(np.array(time)),
                        prob=_readonly(prob), n_children=_readonly(n_children),
                        first_child=_readonly(first_child),
                        layer_start=_readonly(np.array(layer_start, dtype=np.int64)),
                        path_prob=_readonly(path_prob))


def _average_children(tree: ScenarioTree, values: np.ndarray, t: int) -> np.ndarray:
    """Weighted child averages for the nodes of layer ``t - 1``.

    ``values`` holds the layer-``t`` values (in id order)."""
    sl = tree.layer_slice(t)
    weighted = tree.prob[sl] * values
    parents = tree.layer_slice(t - 1)
    offsets = tree.first_child[parents] - tree.layer_start[t]
    return np.add.reduceat(weighted, offsets)


def conditional_expectation(tree: ScenarioTree, x: np.ndarray, from_time: int) -> np.ndarray:
    """Replace the values at time ``from_time - 1`` by E[x_{from_time} | F_{from_time-1}]."""
    if not 1 <= from_time <= tree.depth:
        raise ValueError(f"from_time must lie in 1..{tree.depth}, got {from_time}")
    x = np.asarray(x, dtype=float)
    out = x.copy()
    out[tree.layer_slice(from_time - 1)] = _average_children(tree, x[tree.layer_slice(from_time)], from_time)
    return out


def expectation_between(tree: ScenarioTree, x: np.ndarray, s: int, t: int) -> np.ndarray:
    """E[x_s | F_t] evaluated on the nodes of layer ``t`` (requires t <= s)."""
    if t > s:
        raise ValueError("conditioning time after target time")
    vals = np.asarray(x, dtype=float)[tree.layer_slice(s)]
    for u in range(s, t, -1):
        vals = _average_children(tree, vals, u)
    return vals


def expectation(tree: ScenarioTree, x: np.ndarray, t: int) -> float:
    """Unconditional mean of a layer-``t`` quantity."""
    sl = tree.layer_slice(t)
    return float(np.dot(tree.path_prob[sl], np.asarray(x, dtype=float)[sl]))


@dataclass(frozen=True, eq=False)
class TreeStoppingTime:
    """A stopping time given by node flags.

    A ``STOP`` flag at ``v`` means tau = time(v) on every path through ``v``;
    an ``INFINITE`` flag may only sit on a leaf whose path never stops.  Nodes
    below a stop carry ``CONTINUE`` and are irrelevant.
    """

    tree: ScenarioTree
    flags: np.ndarray

    def __post_init__(self):
        flags = _readonly(np.asarray(self.flags, dtype=np.int8))
        object.__setattr__(self, "flags", flags)
        tree = self.tree
        if flags.size != tree.n_nodes:
            raise ValueError("one flag per node required")
        stopped = np.zeros(tree.n_nodes, dtype=bool)
        for v in range(tree.n_nodes):
            above = bool(stopped[tree.parent[v]]) if v else False
            if flags[v] == STOP and above:
                raise ValueError(f"node {v}: second stop on a path")
            if flags[v] == INFINITE and (above or tree.time[v] != tree.depth):
                raise ValueError(f"node {v}: infinite marking must be a leaf of a non-stopped path")
            stopped[v] = above or flags[v] == STOP
        object.__setattr__(self, "_stopped", _readonly(stopped))

    def stopped_by(self) -> np.ndarray:
        """Boolean per node: tau <= time(v) on the path through ``v``."""
        return self._stopped

    def before(self) -> np.ndarray:
        """Boolean per node: time(v) < tau, an F_{time(v)}-measurable event."""
        return ~self._stopped

    def on_leaves(self) -> np.ndarray:
        """Stopping time per leaf, -1 where tau is infinite."""
        tree = self.tree
        anc = tree.ancestors_table()
        hits = self.flags[anc] == STOP
        first = np.argmax(hits, axis=1)
        return np.where(hits.any(axis=1), first, -1)

    def to_dict(self) -> dict:
        names = {CONTINUE: "continue", STOP: "stop", INFINITE: "infinite"}
        return {str(v): names[int(f)] for v, f in enumerate(self.flags)}


def stopping_time_from_leaves(tree: ScenarioTree, leaf_times: Sequence[int]) -> TreeStoppingTime:
    """Build the flags of a stopping time given its value on every leaf (-1 = infinite).

    Raises ``ValueError`` when the leaf values are not adapted."""
    anc = tree.ancestors_table()
    flags = np.zeros(tree.n_nodes, dtype=np.int8)
    for l, s in enumerate(leaf_times):
        if s < 0:
            flags[anc[l, tree.depth]] = INFINITE
        else:
            flags[anc[l, s]] = STOP
    st = TreeStoppingTime(tree, flags)
    if not np.array_equal(st.on_leaves(), np.asarray(leaf_times)):
        raise ValueError("leaf values do not define a stopping time")
    return st


def count_stopping_times(tree: ScenarioTree, from_time: int = 0) -> int:
    """Closed-form count: f(leaf) = 1, f(v) = 1 + prod f(children), times the
    product over the layer at ``from_time``."""
    f = [1] * tree.n_nodes
    for v in range(tree.n_nodes - 1, -1, -1):
        if tree.n_children[v]:
            p = 1
            for c in tree.children(v):
                p *= f[c]
            f[v] = 1 + p
    total = 1
    for v in tree.layer(from_time):
        total *= f[v]
    return total


def stopping_time_table(tree: ScenarioTree, v: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All stopping times valued in {time(v), ..., depth} on the subtree of ``v``.

    Row ``i`` gives the stopping time on each leaf below ``v`` (leaves in id
    order)."""
    tables: dict[int, np.ndarray] = {}
    t0 = int(tree.time[v])
    for t in range(tree.depth, t0 - 1, -1):
        for u in tree.descendants_at(v, t):
            if t == tree.depth:
                tables[u] = np.array([[t]], dtype=np.int16)
                continue
            kids = [tables.pop(c) for c in tree.children(u)]
            rows = 1
            for k in kids:
                rows *= k.shape[0]
            if rows + 1 > cap:
                raise OverflowError(f"stopping-time count exceeds cap {cap}")
            width = sum(k.shape[1] for k in kids)
            out = np.empty((rows + 1, width), dtype=np.int16)
            out[0] = t
            # cartesian product of the children's tables, first child slowest
            col = 0
            reps_after = rows
            for k in kids:
                reps_after //= k.shape[0]
                block = np.repeat(k, reps_after, axis=0)
                out[1:, col:col + k.shape[1]] = np.tile(block, (rows // block.shape[0], 1))
                col += k.shape[1]
            tables[u] = out
    return tables[v]


def enumerate_stopping_times(tree: ScenarioTree, from_time: int = 0,
                             cap: int = DEFAULT_CAP) -> list[TreeStoppingTime]:
    """Exhaustive, duplicate-free list of {from_time, ..., depth}-valued stopping times."""
    if not 0 <= from_time <= tree.depth:
        raise ValueError(f"from_time outside 0..{tree.depth}")
    count = count_stopping_times(tree, from_time)
    if count > cap:
        raise OverflowError(f"{count} stopping times exceed cap {cap}")
    blocks = [stopping_time_table(tree, v, cap) for v in tree.layer(from_time)]
    out = []
    for combo in itertools.product(*[range(b.shape[0]) for b in blocks]):
        leaf_times = np.concatenate([b[i] for b, i in zip(blocks, combo)])
        out.append(stopping_time_from_leaves(tree, leaf_times))
    return out
