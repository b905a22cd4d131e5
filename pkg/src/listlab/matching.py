"""Bipartite matching with Hall-condition witnesses.

Left and right ids are arbitrary hashables; in this package they are vertex
ids or colors, both small integers. Neighbor iteration follows the sorted
order of the right ids so that results are reproducible.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from itertools import combinations

from .errors import ResourceLimit

DEFAULT_DEFICIENT_CAP = 20

_INF = float("inf")


def _ordered(items: Iterable[Hashable]) -> list:
    items = list(items)
    try:
        return sorted(items)
    except TypeError:
        return items


@dataclass(frozen=True)
class BipartiteIncidence:
    left: tuple
    right: tuple
    adjacency: Mapping[Hashable, tuple] = field(repr=False)

    @classmethod
    def from_mapping(
        cls, adjacency: Mapping[Hashable, Iterable[Hashable]], right: Iterable[Hashable] | None = None
    ) -> BipartiteIncidence:
        adj = {a: tuple(_ordered(set(bs))) for a, bs in adjacency.items()}
        rights = set(right) if right is not None else set()
        for bs in adj.values():
            rights.update(bs)
        return cls(tuple(adj), tuple(_ordered(rights)), adj)

    def neighborhood(self, subset: Iterable[Hashable]) -> frozenset:
        out: set = set()
        for a in subset:
            out.update(self.adjacency.get(a, ()))
        return frozenset(out)

    def restrict(self, left: Iterable[Hashable]) -> BipartiteIncidence:
        keep = list(left)
        return BipartiteIncidence(tuple(keep), self.right, {a: self.adjacency.get(a, ()) for a in keep})


@dataclass(frozen=True)
class MatchingResult:
    """A maximum matching, plus a Hall violator when the left side is not saturated."""

    matching: Mapping[Hashable, Hashable]
    deficiency_witness: tuple[frozenset, frozenset] | None = None

    @property
    def size(self) -> int:
        return len(self.matching)

    @property
    def pairs(self) -> set[tuple]:
        return set(self.matching.items())

    @property
    def saturating(self) -> bool:
        return self.deficiency_witness is None


def max_matching(h: BipartiteIncidence) -> MatchingResult:
    """Hopcroft-Karp maximum matching.

    When the matching leaves some left vertex free, the witness is the set
    ``X`` of left vertices reachable from free left vertices along
    alternating paths together with ``N(X)``; by Konig's argument
    ``|N(X)| = |X| - (number of free vertices) < |X|``.
    """
    left = list(h.left)
    adj = h.adjacency
    mate_l: dict = {}
    mate_r: dict = {}

    def bfs() -> tuple[dict, bool]:
        dist: dict = {}
        queue: deque = deque()
        for a in left:
            if a not in mate_l:
                dist[a] = 0
                queue.append(a)
        found = False
        while queue:
            a = queue.popleft()
            for b in adj.get(a, ()):
                nxt = mate_r.get(b)
                if nxt is None:
                    found = True
                elif nxt not in dist:
                    dist[nxt] = dist[a] + 1
                    queue.append(nxt)
        return dist, found

    def dfs(root, dist: dict) -> bool:
        # iterative layered DFS; ``stack`` holds (left vertex, neighbor cursor)
        stack = [(root, 0)]
        path: list = []
        while stack:
            a, i = stack[-1]
            nbrs = adj.get(a, ())
            if i >= len(nbrs):
                dist[a] = _INF
                stack.pop()
                if path:
                    path.pop()
                continue
            stack[-1] = (a, i + 1)
            b = nbrs[i]
            nxt = mate_r.get(b)
            if nxt is None:
                path.append((a, b))
                for x, y in path:
                    mate_l[x] = y
                    mate_r[y] = x
                return True
            if dist.get(nxt, _INF) == dist[a] + 1:
                path.append((a, b))
                stack.append((nxt, 0))
        return False

    while True:
        dist, found = bfs()
        if not found:
            break
        for a in left:
            if a not in mate_l:
                dfs(a, dist)

    matching = {a: mate_l[a] for a in left if a in mate_l}
    if len(matching) == len(left):
        return MatchingResult(matching)
    reach_l: set = set()
    reach_r: set = set()
    queue = deque(a for a in left if a not in mate_l)
    reach_l.update(queue)
    while queue:
        a = queue.popleft()
        for b in adj.get(a, ()):
            if b in reach_r:
                continue
            reach_r.add(b)
            nxt = mate_r.get(b)
            if nxt is not None and nxt not in reach_l:
                reach_l.add(nxt)
                queue.append(nxt)
    return MatchingResult(matching, (frozenset(reach_l), frozenset(reach_r)))


def alternating_tree(h: BipartiteIncidence, result: MatchingResult, root) -> frozenset:
    """Left vertices reachable from the free vertex ``root`` by alternating paths.

    The set is an inclusion-minimal Hall violator.
    """
    mate_r = {b: a for a, b in result.matching.items()}
    seen = {root}
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in h.adjacency.get(a, ()):
            nxt = mate_r.get(b)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


def minimal_deficient_set(
    h: BipartiteIncidence, cap: int = DEFAULT_DEFICIENT_CAP
) -> frozenset | None:
    """Smallest left subset ``B`` with ``|N(B)| < |B|``, or None if Hall holds.

    Candidates are scanned by increasing size in lexicographic order of the
    sorted left ids, so the first hit is the lexicographically least among
    the minimum-cardinality violators. A minimum-cardinality violator is
    automatically inclusion-minimal.
    """
    result = max_matching(h)
    if result.saturating:
        return None
    free = next(a for a in h.left if a not in result.matching)
    bound = len(alternating_tree(h, result, free))
    if bound > cap:
        # a smaller violator may still exist; scan up to the cap before giving up
        bound = cap
    order = _ordered(h.left)
    for size in range(1, bound + 1):
        for subset in combinations(order, size):
            if len(h.neighborhood(subset)) < size:
                return frozenset(subset)
    raise ResourceLimit(
        f"no deficient set of size <= {cap}; raise the cap",
        {"cap": cap, "left": len(order)},
    )


def sdr_matching(vertices: Iterable[Hashable], lists: Mapping[Hashable, Iterable[int]]) -> MatchingResult:
    return max_matching(BipartiteIncidence.from_mapping({v: lists[v] for v in vertices}))


def sdr_coloring(vertices: Iterable[Hashable], lists: Mapping[Hashable, Iterable[int]]) -> dict | None:
    """Give every vertex a distinct color from its own list, if possible.

    Returns None when no system of distinct representatives exists; call
    :func:`sdr_matching` to obtain the Hall violator.
    """
    result = sdr_matching(vertices, lists)
    return dict(result.matching) if result.saturating else None
