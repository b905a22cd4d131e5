"""Shrink the color universe of a bad list assignment below the vertex count.

One step works on the bipartite graph ``H`` with colors on the left and
vertices on the right, a color joined to every vertex whose list holds it.
While the universe has at least ``n`` colors the color side cannot be
matched, so there is a minimum Hall violator ``B`` with ``|N(B)| = |B| - 1``.
A matching ``M`` of size ``|B| - 1`` inside ``B`` covers exactly ``W = N(B)``,
so every vertex outside ``W`` avoids ``B``. Replacing each list in ``W`` by
the list of a vertex ``x`` outside ``W`` removes all of ``B`` from the
universe. Badness survives: a coloring of the new instance restricted to
``G - W`` never uses ``B``, and ``M`` would then finish it on ``W`` with
distinct colors of ``B``.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import InternalInconsistency, InvalidArgument, PreconditionViolation, ResourceLimit, VerificationFailure
from .graph import Graph
from .matching import BipartiteIncidence, max_matching, minimal_deficient_set
from .solver import Lists, find_acceptable_coloring, normalize_lists, universe

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompressionStep:
    deficient: frozenset[int]
    matching: tuple[tuple[int, int], ...]  # (color, vertex) pairs
    replaced: frozenset[int]
    donor: int
    universe_before: int
    universe_after: int

    def to_dict(self) -> dict:
        return {
            "deficient": sorted(self.deficient),
            "matching": [list(p) for p in self.matching],
            "replaced": sorted(self.replaced),
            "donor": self.donor,
            "universe_before": self.universe_before,
            "universe_after": self.universe_after,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CompressionStep:
        return cls(
            frozenset(d["deficient"]),
            tuple((int(c), int(v)) for c, v in d["matching"]),
            frozenset(d["replaced"]),
            int(d["donor"]),
            int(d["universe_before"]),
            int(d["universe_after"]),
        )


@dataclass
class CompressionTrace:
    n: int
    initial_universe: int
    final_universe: int
    steps: list[CompressionStep] = field(default_factory=list)
    # True / False once checked by exact search, None when beyond budget
    verified_before: bool | None = None
    verified_after: bool | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "initial_universe": self.initial_universe,
            "final_universe": self.final_universe,
            "steps": [s.to_dict() for s in self.steps],
            "verified_before": self.verified_before,
            "verified_after": self.verified_after,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CompressionTrace:
        return cls(
            int(d["n"]),
            int(d["initial_universe"]),
            int(d["final_universe"]),
            [CompressionStep.from_dict(s) for s in d["steps"]],
            d.get("verified_before"),
            d.get("verified_after"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass(frozen=True)
class DeficiencyStep:
    deficient: frozenset[int]
    matching: dict[int, int]  # color -> vertex
    replaced: frozenset[int]
    donor: int


def color_incidence(g: Graph, lists: Lists) -> BipartiteIncidence:
    """Colors on the left, each joined to the vertices whose list holds it."""
    holders: dict[int, list[int]] = {}
    for v in g.vertices:
        for c in lists[v]:
            holders.setdefault(c, []).append(v)
    return BipartiteIncidence.from_mapping(holders, right=g.vertices)


def _dump(g: Graph, lists: Lists) -> dict:
    return {"n": g.n, "edges": sorted(g.edges), "lists": {v: sorted(lists[v]) for v in g.vertices}}


def deficiency_step(g: Graph, lists: Lists, cap: int = 20) -> DeficiencyStep | None:
    """Find ``(B, M, W, x)`` for one compression step, or None if the colors can be matched.

    Requires a universe of at least ``n`` colors. Raises
    :class:`InvalidArgument` when ``W`` is the whole vertex set, since the
    matching is then an acceptable coloring.
    """
    lists = normalize_lists(g, lists)
    colors = universe(lists)
    if len(colors) < g.n:
        raise PreconditionViolation(
            f"universe has {len(colors)} colors, fewer than the {g.n} vertices",
            ["universe size >= vertex count"],
        )
    h = color_incidence(g, lists)
    b = minimal_deficient_set(h, cap=cap)
    if b is None:
        return None
    result = max_matching(h.restrict(sorted(b)))
    nbrs = h.neighborhood(b)
    if result.size != len(b) - 1 or len(nbrs) != len(b) - 1:
        raise InternalInconsistency(
            "minimum deficient set does not have deficiency exactly one",
            {"B": sorted(b), "N(B)": sorted(nbrs), "matching": result.matching, **_dump(g, lists)},
        )
    w = frozenset(result.matching.values())
    leaks = [v for v in g.vertices if v not in w and lists[v] & b]
    if leaks:
        raise InternalInconsistency(
            "a vertex outside W holds a color of B",
            {"B": sorted(b), "W": sorted(w), "leaks": leaks, **_dump(g, lists)},
        )
    outside = [v for v in g.vertices if v not in w]
    if not outside:
        # M then saturates every vertex with distinct colors
        raise InvalidArgument("the list assignment admits an acceptable coloring (W covers every vertex)")
    return DeficiencyStep(b, dict(result.matching), w, outside[0])


def _check_bad(g: Graph, lists: Lists, **budget) -> bool | None:
    try:
        return find_acceptable_coloring(g, lists, **budget) is None
    except ResourceLimit:
        return None


def compress_universe(
    g: Graph, bad: Lists, *, verify: bool = True, cap: int = 20, **budget
) -> tuple[dict[int, frozenset[int]], CompressionTrace]:
    """Rewrite a bad assignment until its universe has fewer than ``n`` colors.

    Badness is checked by exact search before and after when ``verify`` is
    set and the instance fits the solver budget; otherwise the trace records
    it as unverified. A colorable input is rejected with
    :class:`InvalidArgument`.
    """
    lists = normalize_lists(g, bad)
    start = len(universe(lists))
    trace = CompressionTrace(g.n, start, start)
    if verify:
        trace.verified_before = _check_bad(g, lists, **budget)
        if trace.verified_before is False:
            raise InvalidArgument("the list assignment admits an acceptable coloring")
    size = start
    while size >= g.n:
        step = deficiency_step(g, lists, cap=cap)
        if step is None:
            # the colors match into the vertices: a perfect matching is a coloring
            h = color_incidence(g, lists)
            coloring = {v: c for c, v in max_matching(h).matching.items()}
            if len(coloring) == g.n:
                raise InvalidArgument(
                    "the list assignment admits an acceptable coloring (distinct colors per vertex)"
                )
            raise InternalInconsistency(
                "no deficient color set although the universe is not below n",
                {"universe": size, **_dump(g, lists)},
            )
        donor = lists[step.donor]
        lists = {v: (donor if v in step.replaced else lists[v]) for v in g.vertices}
        after = len(universe(lists))
        if after >= size:
            raise InternalInconsistency(
                "universe did not shrink", {"before": size, "after": after, **_dump(g, lists)}
            )
        trace.steps.append(
            CompressionStep(
                step.deficient,
                tuple(sorted(step.matching.items())),
                step.replaced,
                step.donor,
                size,
                after,
            )
        )
        log.debug("compression step: |B|=%d, universe %d -> %d", len(step.deficient), size, after)
        size = after
    trace.final_universe = size
    if verify and trace.steps:
        trace.verified_after = _check_bad(g, lists, **budget)
        if trace.verified_after is False:
            raise InternalInconsistency("compression produced a colorable instance", _dump(g, lists))
    elif verify:
        trace.verified_after = trace.verified_before
    return lists, trace


def replay_trace(g: Graph, lists: Lists, trace: CompressionTrace) -> dict[int, frozenset[int]]:
    """Re-apply a trace step by step, re-checking each one.

    Raises :class:`VerificationFailure` on the first step whose recorded
    data do not hold on the current lists.
    """
    lists = normalize_lists(g, lists)
    if trace.n != g.n:
        raise VerificationFailure(f"trace is for {trace.n} vertices, graph has {g.n}")
    size = len(universe(lists))
    if size != trace.initial_universe:
        raise VerificationFailure(f"initial universe {size} differs from the recorded {trace.initial_universe}")
    for i, step in enumerate(trace.steps):
        b, w = step.deficient, step.replaced

        def fail(msg: str) -> VerificationFailure:
            return VerificationFailure(f"step {i}: {msg}")

        if step.universe_before != size:
            raise fail("universe size does not match the recorded value")
        holders = {v for v in g.vertices if lists[v] & b}
        if len(holders) >= len(b):
            raise fail(f"B has {len(holders)} neighbors, not fewer than |B| = {len(b)}")
        if len(step.matching) != len(b) - 1:
            raise fail("matching does not have size |B| - 1")
        m_colors = [c for c, _ in step.matching]
        m_vertices = [v for _, v in step.matching]
        if len(set(m_colors)) != len(m_colors) or len(set(m_vertices)) != len(m_vertices):
            raise fail("matching reuses a color or a vertex")
        for c, v in step.matching:
            if c not in b or c not in lists[v]:
                raise fail(f"pair ({c}, {v}) is not an edge between B and the vertices")
        if set(m_vertices) != set(w):
            raise fail("W is not the vertex side of the matching")
        leaks = [v for v in g.vertices if v not in w and lists[v] & b]
        if leaks:
            raise fail(f"vertices {leaks} outside W hold colors of B")
        if step.donor in w or not 0 <= step.donor < g.n:
            raise fail("donor lies inside W")
        donor = lists[step.donor]
        lists = {v: (donor if v in w else lists[v]) for v in g.vertices}
        after = len(universe(lists))
        if after >= size or after != step.universe_after:
            raise fail("universe did not shrink as recorded")
        size = after
    if size != trace.final_universe:
        raise VerificationFailure("final universe differs from the recorded value")
    return lists
