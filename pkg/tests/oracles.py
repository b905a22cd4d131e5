"""Brute-force reference implementations used as test oracles.

Deliberately naive: plain enumeration with no pruning shared with the code
under test.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

from listlab.graph import Graph


def brute_coloring(g: Graph, lists) -> dict[int, int] | None:
    """First acceptable coloring in product order, or None."""
    verts = list(g.vertices)
    for choice in product(*(sorted(lists[v]) for v in verts)):
        if all(choice[u] != choice[v] for u, v in g.edges):
            return dict(zip(verts, choice))
    return None


def brute_colorable(g: Graph, lists) -> bool:
    """Depth-first, vertex order 0..n-1, checking only earlier neighbors."""
    color: dict[int, int] = {}

    def rec(v: int) -> bool:
        if v == g.n:
            return True
        for c in sorted(lists[v]):
            if all(color.get(w) != c for w in g.adjacency[v] if w < v):
                color[v] = c
                if rec(v + 1):
                    return True
        color.pop(v, None)
        return False

    return rec(0)


def brute_choosable(g: Graph, k: int, universe: int) -> bool:
    """Every assignment of k-subsets of ``range(universe)`` is colorable."""
    subsets = [frozenset(s) for s in combinations(range(universe), k)]
    for assignment in product(subsets, repeat=g.n):
        if not brute_colorable(g, dict(enumerate(assignment))):
            return False
    return True


def brute_chromatic(g: Graph) -> int:
    for c in range(1, g.n + 1):
        if brute_coloring(g, {v: range(c) for v in g.vertices}) is not None:
            return c
    raise AssertionError("unreachable")


def brute_matching_size(adj: dict[int, list[int]]) -> int:
    """Maximum matching by dynamic programming over (left index, used rights)."""
    left = sorted(adj)
    rights = sorted({b for bs in adj.values() for b in bs})
    index = {b: i for i, b in enumerate(rights)}

    @lru_cache(maxsize=None)
    def best(i: int, used: int) -> int:
        if i == len(left):
            return 0
        out = best(i + 1, used)
        for b in adj[left[i]]:
            bit = 1 << index[b]
            if not used & bit:
                out = max(out, 1 + best(i + 1, used | bit))
        return out

    return best(0, 0)


def max_deficiency(adj: dict[int, list[int]]) -> int:
    """``max |X| - |N(X)|`` over all left subsets, including the empty one."""
    left = sorted(adj)
    out = 0
    for r in range(1, len(left) + 1):
        for xs in combinations(left, r):
            nbrs = set()
            for a in xs:
                nbrs.update(adj[a])
            out = max(out, r - len(nbrs))
    return out


def smallest_deficient(adj: dict[int, list[int]]) -> frozenset | None:
    left = sorted(adj)
    for r in range(1, len(left) + 1):
        for xs in combinations(left, r):
            nbrs = set()
            for a in xs:
                nbrs.update(adj[a])
            if len(nbrs) < r:
                return frozenset(xs)
    return None
