"""Graphs, part structures and complete multipartite constructions."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

from .errors import InvalidArgument, ResourceLimit

DEFAULT_CHROMATIC_BUDGET = 16


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on the dense vertex ids ``0..n-1``."""

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise InvalidArgument("graph must have at least one vertex")
        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise InvalidArgument(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidArgument(f"edge ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            normalized.add(_edge(u, v))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        return cls(n, frozenset(_edge(int(u), int(v)) for u, v in edges))

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    @property
    def vertices(self) -> range:
        return range(self.n)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return _edge(u, v) in self.edges

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class PartStructure:
    """Ordered partition of the vertex set into nonempty parts."""

    parts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise InvalidArgument("part structure needs at least one part")
        parts = tuple(tuple(p) for p in self.parts)
        seen: set[int] = set()
        for p in parts:
            if not p:
                raise InvalidArgument("parts must be nonempty")
            for v in p:
                if v in seen:
                    raise InvalidArgument(f"vertex {v} appears in more than one part")
                seen.add(v)
        object.__setattr__(self, "parts", parts)

    @cached_property
    def part_of(self) -> dict[int, int]:
        return {v: i for i, p in enumerate(self.parts) for v in p}

    @property
    def vertices(self) -> list[int]:
        return [v for p in self.parts for v in p]

    @property
    def count(self) -> int:
        return len(self.parts)

    @property
    def singletons(self) -> list[int]:
        """Vertices forming parts of size one, in part order."""
        return [p[0] for p in self.parts if len(p) == 1]

    @property
    def non_singleton_count(self) -> int:
        return sum(1 for p in self.parts if len(p) > 1)

    def sizes(self) -> list[int]:
        return [len(p) for p in self.parts]

    def check_against(self, g: Graph, *, complete: bool = True) -> None:
        """Raise unless the parts cover ``g``, are independent and (optionally) fully joined."""
        if sorted(self.vertices) != list(g.vertices):
            raise InvalidArgument("parts do not cover the vertex set exactly")
        where = self.part_of
        for u, v in g.edges:
            if where[u] == where[v]:
                raise InvalidArgument(f"edge ({u}, {v}) lies inside a part")
        if complete:
            expected = sum(a * b for a, b in combinations(self.sizes(), 2))
            if expected != len(g.edges):
                raise InvalidArgument("graph is not complete multipartite over these parts")


def complete_multipartite(part_sizes: Sequence[int]) -> tuple[Graph, PartStructure]:
    """Build the complete multipartite graph with the given part sizes.

    Vertices are numbered part by part in the order given.
    """
    sizes = list(part_sizes)
    if not sizes:
        raise InvalidArgument("part_sizes must be nonempty")
    if any(int(s) != s or s < 1 for s in sizes):
        raise InvalidArgument(f"part sizes must be positive integers, got {sizes}")
    parts = []
    start = 0
    for s in sizes:
        parts.append(tuple(range(start, start + s)))
        start += s
    edges = frozenset(
        (u, v) for p, q in combinations(parts, 2) for u in p for v in q
    )
    return Graph(start, edges), PartStructure(tuple(parts))


def multipartite_parts(g: Graph) -> PartStructure | None:
    """Return the part structure if ``g`` is complete multipartite, else None.

    A graph is complete multipartite exactly when non-adjacency is an
    equivalence relation; the parts are its classes, ordered by least vertex.
    """
    groups: dict[frozenset[int], list[int]] = {}
    for v in g.vertices:
        groups.setdefault(g.adjacency[v], []).append(v)
    parts = sorted((tuple(vs) for vs in groups.values()), key=lambda p: p[0])
    try:
        structure = PartStructure(tuple(parts))
        structure.check_against(g, complete=True)
    except InvalidArgument:
        return None
    return structure


def is_proper(g: Graph, coloring: Mapping[int, int]) -> bool:
    return all(v in coloring for v in g.vertices) and all(
        coloring[u] != coloring[v] for u, v in g.edges
    )


def _greedy_clique(g: Graph) -> list[int]:
    best: list[int] = []
    order = sorted(g.vertices, key=lambda v: (-g.degree(v), v))
    for start in order:
        clique = [start]
        cand = set(g.adjacency[start])
        while cand:
            v = max(cand, key=lambda u: (len(g.adjacency[u] & cand), -u))
            clique.append(v)
            cand &= g.adjacency[v]
        if len(clique) > len(best):
            best = clique
    return best


def _dsatur(g: Graph) -> dict[int, int]:
    coloring: dict[int, int] = {}
    while len(coloring) < g.n:
        v = max(
            (u for u in g.vertices if u not in coloring),
            key=lambda u: (
                len({coloring[w] for w in g.adjacency[u] if w in coloring}),
                g.degree(u),
                -u,
            ),
        )
        used = {coloring[w] for w in g.adjacency[v] if w in coloring}
        coloring[v] = next(c for c in range(g.n) if c not in used)
    return coloring


def _color_with(g: Graph, c: int, seed: list[int]) -> dict[int, int] | None:
    """Exact test for a proper ``c``-coloring; clique ``seed`` is pre-colored 0..|seed|-1."""
    coloring = {v: i for i, v in enumerate(seed)}

    def pick() -> int:
        return max(
            (u for u in g.vertices if u not in coloring),
            key=lambda u: (
                len({coloring[w] for w in g.adjacency[u] if w in coloring}),
                g.degree(u),
                -u,
            ),
        )

    def rec(top: int) -> bool:
        if len(coloring) == g.n:
            return True
        v = pick()
        used = {coloring[w] for w in g.adjacency[v] if w in coloring}
        # a fresh class beyond ``top`` is interchangeable with any other fresh class
        for col in range(min(c, top + 1)):
            if col in used:
                continue
            coloring[v] = col
            if rec(max(top, col + 1)):
                return True
            del coloring[v]
        return False

    return dict(coloring) if rec(len(seed)) else None


def chromatic_number_exact(
    g: Graph, budget: int = DEFAULT_CHROMATIC_BUDGET
) -> tuple[int, dict[int, int]]:
    """Chromatic number by branch and bound, with a witness coloring.

    The lower bound comes from a greedy clique, the upper bound from DSATUR;
    the gap is closed by exact backtracking. Complete multipartite graphs
    are answered directly at any size; other graphs larger than ``budget``
    vertices are refused with :class:`ResourceLimit`.
    """
    parts = multipartite_parts(g)
    if parts is not None:
        return parts.count, {v: i for i, p in enumerate(parts.parts) for v in p}
    if g.n > budget:
        raise ResourceLimit(
            f"chromatic number search limited to {budget} vertices, graph has {g.n}",
            {"n": g.n, "budget": budget},
        )
    best = _dsatur(g)
    upper = len(set(best.values()))
    clique = _greedy_clique(g)
    for c in range(len(clique), upper):
        found = _color_with(g, c, clique)
        if found is not None:
            return c, found
    return upper, best


def saturate(g: Graph, coloring: Mapping[int, int]) -> tuple[Graph, PartStructure]:
    """Join every pair of vertices lying in different classes of ``coloring``.

    Parts are the color classes, ordered by class index.
    """
    if not all(v in coloring for v in g.vertices):
        raise InvalidArgument("coloring must assign every vertex")
    for u, v in g.edges:
        if coloring[u] == coloring[v]:
            raise InvalidArgument(f"coloring is improper on edge ({u}, {v})")
    classes: dict[int, list[int]] = {}
    for v in g.vertices:
        classes.setdefault(coloring[v], []).append(v)
    parts = tuple(tuple(classes[c]) for c in sorted(classes))
    edges = frozenset(
        _edge(u, v) for p, q in combinations(parts, 2) for u in p for v in q
    )
    return Graph(g.n, edges), PartStructure(parts)
