"""Combinatorial search space: full Steiner topologies, their degenerate
contractions, and block/attachment configurations for instances with
continuum terminals.

Terminals are labeled 0..n-1 and added vertices n..n+k-1.  A full topology
on n terminals has k = n-2 added vertices, every terminal a leaf, every
added vertex of degree 3; there are (2n-5)!! of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

DEFAULT_ENUM_CAP = 9


class EnumerationCapError(ValueError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""


@dataclass(frozen=True)
class SteinerTopology:
    """A candidate tree shape: n labeled terminals, k interchangeable
    Steiner nodes, edges over node ids."""

    n: int
    k: int
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(tuple(sorted(e)) for e in self.edges)))

    @property
    def node_count(self) -> int:
        return self.n + self.k

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def adjacency(self) -> dict:
        adj: dict = {v: [] for v in range(self.node_count)}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def is_valid(self) -> bool:
        """Tree on n+k nodes with every Steiner node of degree >= 3."""
        if len(self.edges) != self.node_count - 1:
            return False
        adj = self.adjacency()
        seen = set()
        stack = [0]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj[v])
        if len(seen) != self.node_count:
            return False
        return all(self.degree(s) >= 3 for s in range(self.n, self.node_count))

    def is_full(self) -> bool:
        return (
            self.k == self.n - 2
            and all(self.degree(t) == 1 for t in range(self.n))
            and all(self.degree(s) == 3 for s in range(self.n, self.node_count))
        )

    def encode(self) -> str:
        """Canonical parenthesized form, e.g. "(0,(1,2))" for the triod.

        Rooted at terminal 0; Steiner nodes are anonymous "(...)" groups, so
        sorting child encodings quotients out their relabelings.  A terminal
        that is interior (possible after contractions) keeps its id attached
        to its group, "1(2)", which keeps encodings unambiguous.
        """
        cached = getattr(self, "_encoded", None)
        if cached is not None:
            return cached
        adj = self.adjacency()

        def enc(v, parent):
            children = sorted(enc(w, v) for w in adj[v] if w != parent)
            if v < self.n:
                if not children:
                    return str(v)
                return str(v) + "(" + ",".join(children) + ")"
            return "(" + ",".join(children) + ")"

        kids = sorted(enc(w, 0) for w in adj[0])
        out = "(0)" if not kids else "(" + ",".join(["0"] + kids) + ")"
        object.__setattr__(self, "_encoded", out)
        return out


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def full_topology_count(n: int) -> int:
    """(2n-5)!! full topologies on n >= 3 terminals."""
    return double_factorial(2 * n - 5)


@lru_cache(maxsize=16)
def _full_topologies_cached(n: int) -> tuple:
    if n == 2:
        return (SteinerTopology(2, 0, ((0, 1),)),)
    out = []
    for prev in _full_topologies_cached(n - 1):
        # Insert terminal n-1 by splitting each existing edge with a new
        # Steiner node.  Previous Steiner ids shift up by one to keep
        # terminals packed at the front.
        shift = lambda v: v if v < n - 1 else v + 1
        new_steiner = n + (n - 3)  # ids: terminals 0..n-1, steiner n..2n-3
        for split in prev.edges:
            edges = []
            for e in prev.edges:
                if e == split:
                    continue
                edges.append((shift(e[0]), shift(e[1])))
            u, v = split
            edges.append((shift(u), new_steiner))
            edges.append((shift(v), new_steiner))
            edges.append((n - 1, new_steiner))
            out.append(SteinerTopology(n, n - 2, tuple(edges)))
    return tuple(out)


def enumerate_full_topologies(n: int, cap: int = DEFAULT_ENUM_CAP):
    """All (2n-5)!! full Steiner topologies on n terminals, in a fixed
    deterministic order."""
    if n < 2:
        raise ValueError("need at least 2 terminals")
    if n > cap:
        raise EnumerationCapError(
            f"n={n} exceeds the exhaustive cap {cap}; use the decomposition solver"
        )
    return list(_full_topologies_cached(n))


def degenerate_closures(t: SteinerTopology):
    """The input topology plus every distinct contraction of Steiner-incident
    edges.  Contractions that would identify two terminals are skipped; a
    Steiner-Steiner contraction leaves a degree-4 node (a shape that is
    never optimal but belongs to the closure).  Results are deduplicated by
    canonical encoding, input first."""
    seen = {t.encode(): t}
    order = [t]
    frontier = [t]
    while frontier:
        nxt = []
        for topo in frontier:
            for e in topo.edges:
                if e[0] < topo.n and e[1] < topo.n:
                    continue  # terminal-terminal edges are not contractible
                contracted = _contract_edge(topo, e)
                if contracted is None:
                    continue
                key = contracted.encode()
                if key not in seen:
                    seen[key] = contracted
                    order.append(contracted)
                    nxt.append(contracted)
        frontier = nxt
    return order


def _contract_edge(t: SteinerTopology, edge):
    u, v = edge
    # Merge the Steiner endpoint into the other endpoint (terminal wins).
    keep, drop = (u, v) if v >= t.n else (v, u)
    mapping = {}
    new_id = 0
    for w in range(t.node_count):
        if w == drop:
            continue
        mapping[w] = new_id
        new_id += 1
    mapping[drop] = mapping[keep]
    edges = set()
    for a, b in t.edges:
        if (a, b) == (u, v) or (a, b) == (v, u):
            continue
        na, nb = mapping[a], mapping[b]
        if na == nb:
            return None
        edges.add((min(na, nb), max(na, nb)))
    if len(edges) != t.node_count - 2:
        return None  # a parallel edge collapsed: not a tree contraction
    return SteinerTopology(t.n, t.k - 1, tuple(edges))


# ---------------------------------------------------------------------------
# Forest configurations for instances with continuum terminals.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForestConfig:
    """A partition of the point terminals into blocks, with each block
    claiming attachment slots on the continua.

    ``blocks`` is a tuple of tuples of point indices; ``slots[b]`` is a
    tuple of continuum indices (one entry per attachment slot of block b,
    repeats allowed)."""

    blocks: tuple
    slots: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "slots", tuple(tuple(sorted(s)) for s in self.slots))

    def encode(self) -> str:
        parts = []
        for blk, sl in zip(self.blocks, self.slots):
            parts.append(
                "{" + ",".join(map(str, blk)) + "|" + ",".join(map(str, sl)) + "}"
            )
        return "".join(sorted(parts))

    def block_size(self, b: int) -> int:
        return len(self.blocks[b]) + len(self.slots[b])


def _set_partitions(items):
    """All partitions of ``items`` into unordered nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]
        yield part + [[first]]


def _connected(num_blocks: int, slots, num_continua: int) -> bool:
    """Union of blocks and continua connected via attachment slots."""
    parent = list(range(num_blocks + num_continua))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b, sl in enumerate(slots):
        for c in sl:
            ra, rb = find(b), find(num_blocks + c)
            if ra != rb:
                parent[ra] = rb
    roots = {find(x) for x in range(num_blocks + num_continua)}
    return len(roots) == 1


def enumerate_forest_configs(
    n_points: int,
    continua: int,
    max_blocks: int = 4,
    max_attachments: int = 2,
    block_terminal_cap: int = DEFAULT_ENUM_CAP,
):
    """All admissible forest configurations, deterministically ordered.

    Each block takes between 0 and ``max_attachments`` slots in total,
    distributed over the continua; configurations whose union with the
    continua is disconnected are dropped.  With no continua the only
    configuration is the single block of all points."""
    if continua == 0:
        if n_points == 0:
            return [ForestConfig((), ())]
        return [ForestConfig((tuple(range(n_points)),), ((),))]
    if n_points == 0:
        return [ForestConfig((), ())]

    def slot_choices(total_cap):
        # Multisets of continuum indices with size 1..total_cap.
        out = []
        for size in range(1, total_cap + 1):
            out.extend(combinations_with_replacement_range(continua, size))
        return out

    configs = []
    seen = set()
    for part in _set_partitions(range(n_points)):
        if len(part) > max_blocks:
            continue
        blocks = tuple(tuple(sorted(b)) for b in sorted(part, key=lambda b: sorted(b)))
        per_block = [slot_choices(max_attachments) for _ in blocks]
        for combo in _product(per_block):
            if any(len(blk) + len(sl) > block_terminal_cap for blk, sl in zip(blocks, combo)):
                continue
            if not _connected(len(blocks), combo, continua):
                continue
            cfg = ForestConfig(blocks, tuple(combo))
            key = cfg.encode()
            if key not in seen:
                seen.add(key)
                configs.append(cfg)
    configs.sort(key=lambda c: c.encode())
    return configs


def combinations_with_replacement_range(n_options: int, size: int):
    from itertools import combinations_with_replacement

    return list(combinations_with_replacement(range(n_options), size))


def _product(choice_lists):
    from itertools import product

    return product(*choice_lists)
