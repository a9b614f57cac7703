"""Interconnection trees over complete multipartite endpoint graphs.

An interconnection tree is a matching whose quotient over the parts is a
spanning tree: the minimal way to wire every binding pattern into one
connected cage, using each attachment atom at most once. Existence has a
sharp size characterization and the full set can be enumerated with constant
amortized delay.
"""

import math
from dataclasses import dataclass

import numpy as np

try:  # fast counting kernel; the pure-Python path is used when unavailable
    from numba import njit as _njit
except ImportError:  # pragma: no cover
    _njit = None


@dataclass(frozen=True)
class MultipartiteGraph:
    """Complete multipartite graph: parts of vertex ids, optional coordinates.

    Vertex ids are atom ids when built from binding patterns; coords feed the
    edge weights (straight-line distance between attachment atoms).
    """

    parts: tuple[tuple[int, ...], ...]
    coords: dict | None = None

    def __post_init__(self):
        if not self.parts:
            raise ValueError("at least one part required")
        seen = set()
        for part in self.parts:
            if not part:
                raise ValueError("parts must be nonempty")
            for v in part:
                if v in seen:
                    raise ValueError(f"vertex {v} appears in two parts")
                seen.add(v)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def n_vertices(self) -> int:
        return sum(len(p) for p in self.parts)

    def part_of(self) -> dict[int, int]:
        return {v: i for i, part in enumerate(self.parts) for v in part}

    @classmethod
    def synthetic(cls, k: int, l: int) -> "MultipartiteGraph":
        """The (k, l) benchmark instance: k parts of l vertices each."""
        if k < 1 or l < 1:
            raise ValueError("k and l must be >= 1")
        parts = tuple(tuple(range(i * l, (i + 1) * l)) for i in range(k))
        return cls(parts)

    def edge_weight(self, u: int, v: int) -> float:
        if self.coords is None:
            return 0.0
        return float(np.linalg.norm(np.asarray(self.coords[u], dtype=float)
                                    - np.asarray(self.coords[v], dtype=float)))


@dataclass(frozen=True)
class InterconnectionTree:
    edges: tuple[tuple[int, int], ...]
    weight: float

    def canonical_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(tuple(sorted(e)) for e in self.edges))


def has_ict(g: MultipartiteGraph) -> bool:
    """Existence test: a tree exists iff |V| >= 2(k-1)."""
    return g.n_vertices >= 2 * (g.k - 1)


def verify_ict(g: MultipartiteGraph, edges) -> bool:
    """Linear-time witness check: matching + quotient spanning tree."""
    part_of = g.part_of()
    used = set()
    uf = list(range(g.k))

    def find(x):
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    count = 0
    for u, v in edges:
        if u not in part_of or v not in part_of:
            raise ValueError(f"unknown vertex in edge ({u}, {v})")
        if u in used or v in used:
            return False  # not a matching
        used.add(u)
        used.add(v)
        pu, pv = part_of[u], part_of[v]
        if pu == pv:
            return False  # not an edge of the multipartite graph
        ru, rv = find(pu), find(pv)
        if ru == rv:
            return False  # quotient cycle
        uf[ru] = rv
        count += 1
    return count == g.k - 1


def enumerate_icts(g: MultipartiteGraph, visit=None) -> int:
    """Visit every interconnection tree exactly once; returns the count.

    Parts are reordered largest-first, then the first part absorbs each
    merged part; a recursion level extends the tree by one edge out of the
    merged blob, dropping exhausted blob vertices and stopping the level as
    soon as the size margin |V| - 2(parts-1) goes negative. The callback may
    return False to stop the enumeration early.
    """
    order = sorted(range(g.k), key=lambda i: -len(g.parts[i]))
    parts = [list(g.parts[i]) for i in order]
    count = 0
    tree: list[tuple[int, int]] = []

    def rec(blob: list[int], others: list[list[int]], m: int) -> bool:
        nonlocal count
        if not others:
            count += 1
            if visit is not None and visit(tuple(tree)) is False:
                return False
            return True
        for ui in range(len(blob)):
            u = blob[ui]
            rest = blob[ui + 1:]
            for oi, part in enumerate(others):
                rem = others[:oi] + others[oi + 1:]
                for vi, v in enumerate(part):
                    merged = rest + part[:vi] + part[vi + 1:]
                    tree.append((u, v))
                    ok = rec(merged, rem, m)
                    tree.pop()
                    if not ok:
                        return False
            m -= 1
            if m < 0:
                return True
        return True

    m0 = g.n_vertices - 2 * (g.k - 1)
    if m0 >= 0:
        if g.k == 1:
            count = 1
            if visit is not None:
                visit(())
        else:
            rec(parts[0], parts[1:], m0)
    return count


def _count_python(sizes: list[int], s1: int, m: int) -> int:
    if not sizes:
        return 1
    total = 0
    while s1 > 0:
        for i in range(len(sizes)):
            rem = sizes[:i] + sizes[i + 1:]
            ns1 = s1 + sizes[i] - 2
            for _ in range(sizes[i]):
                total += _count_python(rem, ns1, m)
        s1 -= 1
        m -= 1
        if m < 0:
            break
    return total


if _njit is not None:
    @_njit(cache=True)
    def _count_kernel(sizes, active, nactive, s1, m):  # pragma: no cover
        if nactive == 0:
            return 1
        total = 0
        while s1 > 0:
            for i in range(sizes.shape[0]):
                if active[i]:
                    so = sizes[i]
                    active[i] = False
                    for _ in range(so):
                        total += _count_kernel(sizes, active, nactive - 1,
                                               s1 + so - 2, m)
                    active[i] = True
            s1 -= 1
            m -= 1
            if m < 0:
                break
        return total


def count_icts(g: MultipartiteGraph) -> int:
    """Number of interconnection trees, by running the enumeration recursion
    over part sizes only (vertices within a part are interchangeable for
    counting, so the tree objects need not be materialized)."""
    sizes = sorted((len(p) for p in g.parts), reverse=True)
    m0 = sum(sizes) - 2 * (len(sizes) - 1)
    if m0 < 0:
        return 0
    if len(sizes) == 1:
        return 1
    if _njit is not None:
        rest = np.array(sizes[1:], dtype=np.int64)
        active = np.ones(len(rest), dtype=np.bool_)
        return int(_count_kernel(rest, active, len(rest), sizes[0], m0))
    return _count_python(sizes[1:], sizes[0], m0)


def brute_force_icts(g: MultipartiteGraph) -> list[tuple[tuple[int, int], ...]]:
    """Exhaustive oracle: enumerate (k-1)-edge subsets of cross pairs (with
    matching pruning to stay feasible) and keep those verify_ict accepts."""
    if g.n_vertices > 14:
        raise ValueError("instance too large for oracle")
    part_of = g.part_of()
    vertices = [v for part in g.parts for v in part]
    edges = [(u, v) for i, u in enumerate(vertices) for v in vertices[i + 1:]
             if part_of[u] != part_of[v]]
    need = g.k - 1
    out = []

    def rec(start: int, chosen: list, used: set):
        if len(chosen) == need:
            if verify_ict(g, chosen):
                out.append(tuple(chosen))
            return
        remaining = need - len(chosen)
        for i in range(start, len(edges)):
            if len(edges) - i < remaining:
                break
            u, v = edges[i]
            if u in used or v in used:
                continue
            chosen.append(edges[i])
            used.add(u)
            used.add(v)
            rec(i + 1, chosen, used)
            chosen.pop()
            used.discard(u)
            used.discard(v)

    rec(0, [], set())
    return out


def tree_weight(g: MultipartiteGraph, edges) -> float:
    return sum(g.edge_weight(u, v) for u, v in edges)


def ordered_icts(g: MultipartiteGraph, limit: int | None = None,
                 cap: int = 10 ** 8) -> list[InterconnectionTree]:
    """All trees sorted ascending by weight (ties by canonical edge list),
    truncated to `limit`. Raises when the full enumeration would exceed
    `cap`; such instances must be processed on the fly."""
    trees: list[InterconnectionTree] = []

    def visit(edges):
        if len(trees) >= cap:
            raise ValueError(
                f"tree count exceeds the ordered-mode cap ({cap}); "
                "use on-the-fly generation")
        trees.append(InterconnectionTree(edges, tree_weight(g, edges)))
        return True

    enumerate_icts(g, visit)
    trees.sort(key=lambda t: (t.weight, t.canonical_edges()))
    if limit is not None:
        trees = trees[:limit]
    return trees
