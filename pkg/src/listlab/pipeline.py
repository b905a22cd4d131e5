"""Constructive coloring of near-balanced complete multipartite graphs.

The engine reduces an instance step by step until it has the shape where a
random assignment of reserved colors to parts, followed by a matching for
the leftover vertices, succeeds with good probability:

1. saturate the graph along an optimal coloring (complete multipartite);
2. strip parts whose lists share a color, coloring each with that color;
3. find disjoint pairs (S_i, C_i): ``t`` singleton parts all of whose lists
   contain the same block ``C_i`` of ``m`` colors;
4. color ``r = chi - k*m`` further singletons greedily outside the blocks;
5. repeat random rounds: split each block into ``A_i`` (used on ``S_i``)
   and ``B_i`` (one color per remaining part), then match the uncolored
   vertices to non-block colors.

Anything outside the method's hypotheses drops to the exact solver when
``solver_fallback`` is set.
"""

from __future__ import annotations

import json
import logging
import math
import time
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalInconsistency, InvalidArgument, PreconditionViolation, StageFailure, VerificationFailure
from .graph import Graph, PartStructure, chromatic_number_exact, multipartite_parts, saturate
from .matching import BipartiteIncidence, max_matching
from .solver import Verdict, find_acceptable_coloring, normalize_lists, verify_coloring

log = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class MultipartiteInstance:
    """Complete multipartite graph given by its parts, with a list per vertex.

    Vertex ids need not be dense; reductions keep the ids of the input.
    """

    parts: PartStructure
    lists: Mapping[int, frozenset[int]]

    def __post_init__(self) -> None:
        lists = {v: frozenset(self.lists[v]) for v in self.parts.vertices if v in self.lists}
        missing = [v for v in self.parts.vertices if v not in lists]
        if missing:
            raise InvalidArgument(f"vertices {missing[:5]} have no list")
        object.__setattr__(self, "lists", lists)

    @classmethod
    def from_graph(cls, g: Graph, lists: Mapping[int, Iterable[int]]) -> MultipartiteInstance:
        structure = multipartite_parts(g)
        if structure is None:
            raise InvalidArgument("graph is not complete multipartite")
        return cls(structure, normalize_lists(g, lists))

    @property
    def n(self) -> int:
        return len(self.lists)

    @property
    def chi(self) -> int:
        return self.parts.count

    @property
    def vertices(self) -> list[int]:
        return self.parts.vertices

    @property
    def singletons(self) -> list[int]:
        return sorted(self.parts.singletons)

    def universe(self) -> frozenset[int]:
        out: set[int] = set()
        for lst in self.lists.values():
            out.update(lst)
        return frozenset(out)

    def graph(self) -> tuple[Graph, list[int]]:
        """Dense copy of the graph and the original id of each dense vertex."""
        ids = sorted(self.vertices)
        index = {v: i for i, v in enumerate(ids)}
        parts = [[index[v] for v in p] for p in self.parts.parts]
        edges = [(a, b) for i, p in enumerate(parts) for q in parts[i + 1:] for a in p for b in q]
        return Graph.from_edges(len(ids), edges), ids

    def drop_parts(self, drop: Iterable[int], remove_colors: Iterable[int] = ()) -> MultipartiteInstance:
        """Delete the parts with the given indices and the given colors from every list."""
        drop = set(drop)
        gone = frozenset(remove_colors)
        parts = tuple(p for i, p in enumerate(self.parts.parts) if i not in drop)
        if not parts:
            raise InvalidArgument("cannot drop every part")
        keep = {v for p in parts for v in p}
        return MultipartiteInstance(PartStructure(parts), {v: self.lists[v] - gone for v in keep})

    def verify(self, coloring: Mapping[int, int]) -> Verdict:
        """Acceptability check: colors from the lists, each color class inside one part."""
        where = self.parts.part_of
        owner: dict[int, int] = {}
        for v in sorted(self.vertices):
            if v not in coloring:
                return Verdict(False, f"vertex {v} is uncolored", vertex=v)
            c = coloring[v]
            if c not in self.lists[v]:
                return Verdict(False, f"vertex {v} got color {c} outside its list", vertex=v)
            u = owner.setdefault(c, v)
            if where[u] != where[v]:
                return Verdict(False, f"vertices {u} and {v} in different parts share color {c}", edge=(u, v))
        return Verdict(True)


@dataclass(frozen=True)
class PipelineConfig:
    epsilon: float = 0.5
    m: int = 10
    retry_limit: int = 1000
    seed: int = 0
    solver_fallback: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise InvalidArgument(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if int(self.m) != self.m or self.m < 3:
            raise InvalidArgument(f"m must be an integer >= 3, got {self.m}")
        if self.retry_limit < 1:
            raise InvalidArgument("retry_limit must be positive")

    @property
    def delta(self) -> float:
        return self.epsilon / 2

    def warnings(self) -> list[str]:
        if self.m > 6 / self.delta:
            return []
        return [f"m = {self.m} does not exceed 6/delta = {6 / self.delta:.3g}; the success analysis does not cover it"]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "m": self.m,
            "retry_limit": self.retry_limit,
            "seed": self.seed,
            "solver_fallback": self.solver_fallback,
        }


@dataclass(frozen=True)
class BicliqueSystem:
    """Disjoint color blocks ``C_i`` (size m) and singleton blocks ``S_i`` (size t)."""

    m: int
    t: int
    color_blocks: tuple[tuple[int, ...], ...]
    singleton_blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "color_blocks", tuple(tuple(sorted(b)) for b in self.color_blocks))
        object.__setattr__(self, "singleton_blocks", tuple(tuple(sorted(b)) for b in self.singleton_blocks))
        if len(self.color_blocks) != len(self.singleton_blocks):
            raise InvalidArgument("need as many color blocks as singleton blocks")

    @property
    def k(self) -> int:
        return len(self.color_blocks)

    @property
    def C(self) -> int:
        return self.k * self.m

    @property
    def S(self) -> int:
        return self.k * self.t

    @property
    def colors(self) -> frozenset[int]:
        return frozenset(c for b in self.color_blocks for c in b)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for b in self.singleton_blocks for v in b)

    def violations(self, inst: MultipartiteInstance) -> list[str]:
        """Structural problems of the system against ``inst``; empty when sound."""
        out = []
        for i, (cb, sb) in enumerate(zip(self.color_blocks, self.singleton_blocks)):
            if len(cb) != self.m:
                out.append(f"color block {i} has {len(cb)} colors, expected m = {self.m}")
            if len(sb) != self.t:
                out.append(f"singleton block {i} has {len(sb)} vertices, expected t = {self.t}")
            for s in sb:
                if s not in inst.lists:
                    out.append(f"vertex {s} of block {i} is not in the instance")
                elif not set(cb) <= inst.lists[s]:
                    out.append(f"color block {i} is not inside the list of vertex {s}")
        if len(self.colors) != self.C:
            out.append("color blocks overlap")
        if len(self.vertices) != self.S:
            out.append("singleton blocks overlap")
        single = set(inst.parts.singletons)
        stray = sorted(self.vertices - single)
        if stray:
            out.append(f"vertices {stray[:5]} of the singleton blocks are not singleton parts")
        return out

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "t": self.t,
            "color_blocks": [list(b) for b in self.color_blocks],
            "singleton_blocks": [list(b) for b in self.singleton_blocks],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> BicliqueSystem:
        return cls(
            int(d["m"]),
            int(d["t"]),
            tuple(tuple(int(c) for c in b) for b in d["color_blocks"]),
            tuple(tuple(int(v) for v in b) for b in d["singleton_blocks"]),
        )


@dataclass(frozen=True)
class SplitPlan:
    """Which non-block parts count as big; ``b`` blocks feed the big parts first."""

    b: int
    big_parts: tuple[int, ...]
    small_parts: tuple[int, ...]
    lower: float
    upper: float
    degenerate: bool
    regime: bool  # m <= delta^2 C / 40, the sufficient condition for the bracket

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "big_parts": list(self.big_parts),
            "small_parts": list(self.small_parts),
            "lower": self.lower,
            "upper": self.upper,
            "degenerate": self.degenerate,
            "regime": self.regime,
        }


def _finite(x: float) -> float | None:
    return x if math.isfinite(x) else None


@dataclass
class WeightDiagnostics:
    weights: dict[int, float]
    total: float
    per_color: dict[int, float]
    expected_total: float
    hall_witness: frozenset[int] | None = None
    witness_weight: float | None = None
    fast_path: bool = False  # n <= S + C: the expectation alone guarantees a good round
    big_weight: float = 0.0
    small_weight: float = 0.0
    expected_big: float = 0.0
    lemma4_failures: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "weights": {str(v): _finite(w) for v, w in sorted(self.weights.items())},
            "total": _finite(self.total),
            "per_color": {str(c): _finite(w) for c, w in sorted(self.per_color.items())},
            "expected_total": self.expected_total,
            "hall_witness": None if self.hall_witness is None else sorted(self.hall_witness),
            "witness_weight": None if self.witness_weight is None else _finite(self.witness_weight),
            "fast_path": self.fast_path,
            "big_weight": _finite(self.big_weight),
            "small_weight": _finite(self.small_weight),
            "expected_big": self.expected_big,
            "lemma4_failures": list(self.lemma4_failures),
        }


@dataclass
class RoundResult:
    """One execution of the random process on a fixed instance."""

    first_blocks: tuple[int, ...]
    a_sets: dict[int, tuple[int, ...]]
    part_color: dict[int, int]  # part index -> its assigned block color c_U
    partial: dict[int, int]
    uncolored: list[int]
    coloring: dict[int, int] | None = None
    witness: frozenset[int] | None = None


@dataclass
class RandomizedOutcome:
    coloring: dict[int, int] | None
    rounds: int
    diagnostics: WeightDiagnostics | None
    failures: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def light_witnesses(self) -> int:
        return sum(1 for f in self.failures if not f["weight"] > 1)


# ---------------------------------------------------------------- reductions


def remove_common_color_parts(inst: MultipartiteInstance) -> tuple[MultipartiteInstance, list[tuple[tuple[int, ...], int]]]:
    """Peel off parts of size >= 2 whose lists share a color.

    Such a part can be colored entirely with the shared color ``c``; deleting
    ``c`` from every other list keeps any later coloring compatible. Lowest
    part index and lowest color go first. Returns the reduced instance
    (possibly with no parts left, as None) and the ``(part, color)`` trace.
    """
    parts = [tuple(p) for p in inst.parts.parts]
    lists = dict(inst.lists)
    trace: list[tuple[tuple[int, ...], int]] = []
    changed = True
    while changed:
        changed = False
        for i, p in enumerate(parts):
            if len(p) < 2:
                continue
            common = frozenset.intersection(*(lists[v] for v in p))
            if common:
                c = min(common)
                trace.append((p, c))
                del parts[i]
                for v in p:
                    del lists[v]
                for v in lists:
                    lists[v] = lists[v] - {c}
                changed = True
                break
    if not parts:
        return None, trace  # type: ignore[return-value]
    return MultipartiteInstance(PartStructure(tuple(parts)), lists), trace


def extend_by_removals(coloring: Mapping[int, int], trace: Iterable[tuple[tuple[int, ...], int]]) -> dict[int, int]:
    out = dict(coloring)
    for part, c in trace:
        for v in part:
            out[v] = c
    return out


def choose_t(m: int, singletons: int, chi: int) -> int | None:
    """``t`` with ``(t+1)/m <= |X|/chi < (t+2)/m``, if it lands in ``(m/2, m-2]``."""
    if chi <= 0:
        return None
    t = (m * singletons) // chi - 1
    return t if m / 2 < t <= m - 2 else None


def extract_bicliques(
    inst: MultipartiteInstance, m: int, t: int, *, max_blocks: int | None = None, max_seeds: int | None = None
) -> BicliqueSystem:
    """Greedily pull out disjoint blocks ``(S_i, C_i)``.

    Each round grows a group of ``t`` singletons from every possible seed,
    always adding the singleton that keeps the common intersection largest,
    and keeps the group with the largest intersection; ``C_i`` is its ``m``
    lowest colors. Stops when no group of ``t`` shares ``m`` unused colors,
    or after ``max_blocks`` (default ``chi // m``).
    """
    if t < 1 or m < 1:
        raise InvalidArgument("m and t must be positive")
    if max_blocks is None:
        max_blocks = inst.chi // m
    mask = {v: sum(1 << c for c in inst.lists[v]) for v in inst.singletons}
    free = sorted(mask)
    used = 0
    color_blocks: list[tuple[int, ...]] = []
    singleton_blocks: list[tuple[int, ...]] = []
    while len(color_blocks) < max_blocks and len(free) >= t:
        best: tuple[int, list[int], int] | None = None
        seeds = free if max_seeds is None else free[:max_seeds]
        for s in seeds:
            cur = mask[s] & ~used
            if cur.bit_count() < m:
                continue
            group = [s]
            rest = [v for v in free if v != s]
            while len(group) < t:
                x = max(rest, key=lambda v: ((cur & mask[v]).bit_count(), -v))
                nxt = cur & mask[x]
                if nxt.bit_count() < m:
                    break
                group.append(x)
                rest.remove(x)
                cur = nxt
            if len(group) == t and (best is None or cur.bit_count() > best[0]):
                best = (cur.bit_count(), group, cur)
        if best is None:
            break
        _, group, cur = best
        colors = []
        while len(colors) < m:
            low = cur & -cur
            colors.append(low.bit_length() - 1)
            cur ^= low
        color_blocks.append(tuple(colors))
        singleton_blocks.append(tuple(sorted(group)))
        used |= sum(1 << c for c in colors)
        free = [v for v in free if v not in group]
    return BicliqueSystem(m, t, tuple(color_blocks), tuple(singleton_blocks))


def choose_w_and_t(
    inst: MultipartiteInstance, system: BicliqueSystem
) -> tuple[list[int], dict[int, int], MultipartiteInstance]:
    """Color ``r = chi - C`` singletons outside the blocks with distinct non-block colors.

    Returns ``W`` (in id order), its coloring (the color set is ``T``) and
    the residual instance with ``W`` removed and ``T`` deleted from every list.
    """
    r = inst.chi - system.C
    if r < 0:
        raise PreconditionViolation("blocks hold more colors than the chromatic number", [f"r = {r} < 0"])
    if r == 0:
        return [], {}, inst
    reserved = system.colors
    inside = system.vertices
    used: set[int] = set()
    chosen: dict[int, int] = {}
    for v in inst.singletons:
        if len(chosen) == r:
            break
        if v in inside:
            continue
        avail = inst.lists[v] - reserved - used
        if avail:
            chosen[v] = min(avail)
            used.add(chosen[v])
    if len(chosen) < r:
        raise PreconditionViolation(
            f"only {len(chosen)} of the r = {r} extra singletons could be colored",
            ["enough singletons outside the blocks with free non-block colors"],
        )
    where = inst.parts.part_of
    residual = inst.drop_parts({where[v] for v in chosen}, used)
    return sorted(chosen), chosen, residual


def check_lemma3_conditions(
    inst: MultipartiteInstance, system: BicliqueSystem, delta: float
) -> tuple[list[str], list[str]]:
    """Scan the five structural conditions; returns ``(violations, warnings)``.

    Warnings cover hypotheses that only feed the asymptotic analysis:
    ``m > 6/delta``, at most ``3k`` singletons outside the blocks, and
    lists longer than ``C``.
    """
    bad: list[str] = []
    warn: list[str] = []
    C, n = system.C, inst.n
    if system.k == 0:
        bad.append("no blocks")
        return bad, warn
    if not system.m > 6 / delta:
        warn.append(f"m = {system.m} does not exceed 6/delta = {6 / delta:.3g}")
    if inst.chi != C:
        bad.append(f"instance has {inst.chi} parts, expected C = {C}")
    if not n < (2 - delta) * C:
        bad.append(f"n = {n} is not below (2 - delta) C = {(2 - delta) * C:.4g}")
    short = [v for v in inst.vertices if len(inst.lists[v]) < C]
    if short:
        bad.append(f"{len(short)} lists are shorter than C = {C}")
    if any(len(inst.lists[v]) > C for v in inst.vertices):
        warn.append(f"some lists are longer than C = {C}")
    # no color common to a whole part
    for i, p in enumerate(inst.parts.parts):
        if len(p) > 1 and frozenset.intersection(*(inst.lists[v] for v in p)):
            bad.append(f"part {i} has a color common to all its lists")
    # blocks are disjoint and inside the lists of their singletons
    bad.extend(system.violations(inst))
    # no parts of size two
    sizes = inst.parts.sizes()
    if 2 in sizes:
        bad.append("instance has parts of size two")
    extra = len(set(inst.parts.singletons) - system.vertices)
    if extra > 3 * system.k:
        warn.append(f"{extra} singleton parts lie outside the blocks, more than 3k = {3 * system.k}")
    # fewer colors than vertices
    u = len(inst.universe())
    if not u < n:
        bad.append(f"{u} colors in total, not fewer than n = {n}")
    return bad, warn


def _outside_parts(inst: MultipartiteInstance, system: BicliqueSystem) -> list[int]:
    inside = system.vertices
    return [i for i, p in enumerate(inst.parts.parts) if not (len(p) == 1 and p[0] in inside)]


def choose_b(C: int, m: int, t: int, delta: float, k: int | None = None) -> int:
    """Smallest ``b >= 1`` with ``b(m-t) >= delta^2 C/40``, or 0 if it overshoots ``delta^2 C/20``.

    Also 0 when ``m - t <= 0`` or when more than ``k`` blocks would be needed.
    """
    gap = m - t
    if gap <= 0:
        return 0
    lower, upper = delta**2 * C / 40, delta**2 * C / 20
    b = max(1, math.ceil(lower / gap - 1e-12))
    if b * gap > upper or (k is not None and b > k):
        return 0
    return b


def plan_split(inst: MultipartiteInstance, system: BicliqueSystem, config: PipelineConfig) -> SplitPlan:
    """Mark the ``b(m-t)`` largest parts outside the singleton blocks as big.

    Ties go to the lower part index. With ``b = 0`` (see :func:`choose_b`)
    the plan is degenerate and every part is small.
    """
    delta, C = config.delta, system.C
    lower, upper = delta**2 * C / 40, delta**2 * C / 20
    order = sorted(_outside_parts(inst, system), key=lambda i: (-len(inst.parts.parts[i]), i))
    regime = system.m <= lower
    b = choose_b(C, system.m, system.t, delta, system.k)
    if b == 0:
        return SplitPlan(0, (), tuple(sorted(order)), lower, upper, True, regime)
    cut = b * (system.m - system.t)
    return SplitPlan(b, tuple(sorted(order[:cut])), tuple(sorted(order[cut:])), lower, upper, False, regime)


def trivial_plan(inst: MultipartiteInstance, system: BicliqueSystem) -> SplitPlan:
    """All parts small: the plain one-shot process."""
    return SplitPlan(0, (), tuple(_outside_parts(inst, system)), 0.0, 0.0, True, False)


# ------------------------------------------------------------- random rounds


def draw_round(inst: MultipartiteInstance, system: BicliqueSystem, plan: SplitPlan, rng: np.random.Generator) -> RoundResult:
    """Split the blocks, hand block colors to parts, and color every vertex that can take its part's color."""
    k, m, t = system.k, system.m, system.t
    blocks = system.color_blocks
    first = tuple(sorted(int(i) for i in rng.choice(k, size=plan.b, replace=False))) if plan.b else ()
    a_sets: dict[int, tuple[int, ...]] = {}
    part_color: dict[int, int] = {}

    def split(indices: Iterable[int]) -> list[int]:
        pool = []
        for i in indices:
            perm = rng.permutation(m)
            a_sets[i] = tuple(sorted(blocks[i][j] for j in perm[:t]))
            pool.extend(blocks[i][j] for j in perm[t:])
        return pool

    def assign(pool: list[int], parts: tuple[int, ...]) -> None:
        if len(pool) != len(parts):
            raise InternalInconsistency(
                "block colors and parts do not pair up", {"colors": len(pool), "parts": len(parts)}
            )
        for p, j in zip(parts, rng.permutation(len(pool))):
            part_color[p] = pool[j]

    assign(split(first), plan.big_parts)
    rest = [i for i in range(k) if i not in set(first)]
    assign(split(rest), plan.small_parts)

    partial: dict[int, int] = {}
    for i, sb in enumerate(system.singleton_blocks):
        partial.update(zip(sb, a_sets[i]))
    for p, c in part_color.items():
        for v in inst.parts.parts[p]:
            if c in inst.lists[v]:
                partial[v] = c
    uncolored = sorted(v for v in inst.vertices if v not in partial)
    return RoundResult(first, a_sets, part_color, partial, uncolored)


def residual_lists(inst: MultipartiteInstance, system: BicliqueSystem, vertices: Iterable[int]) -> dict[int, frozenset[int]]:
    reserved = system.colors
    return {v: inst.lists[v] - reserved for v in vertices}


def randomized_round(inst: MultipartiteInstance, system: BicliqueSystem, plan: SplitPlan, rng: np.random.Generator) -> RoundResult:
    """One full round: :func:`draw_round` then a matching on the rest; on failure ``witness`` is a Hall violator."""
    res = draw_round(inst, system, plan, rng)
    lists = residual_lists(inst, system, res.uncolored)
    result = max_matching(BipartiteIncidence.from_mapping(lists))
    if result.saturating:
        res.coloring = {**res.partial, **result.matching}
    else:
        res.witness = result.deficiency_witness[0]
    return res


def weight_report(
    inst: MultipartiteInstance,
    system: BicliqueSystem,
    outcome: RoundResult,
    plan: SplitPlan | None = None,
    delta: float | None = None,
) -> WeightDiagnostics:
    """Weights ``1/|L'(v)|`` of the vertices left for the matching, with the reference values."""
    lists = residual_lists(inst, system, outcome.uncolored)
    weights = {v: (1 / len(lst) if lst else math.inf) for v, lst in lists.items()}
    per_color: dict[int, float] = {}
    for v, lst in lists.items():
        for c in lst:
            per_color[c] = per_color.get(c, 0.0) + weights[v]
    n, C, S = inst.n, system.C, system.S
    big_vertices = set()
    if plan is not None:
        for p in plan.big_parts:
            big_vertices.update(inst.parts.parts[p])
    diag = WeightDiagnostics(
        weights=weights,
        total=sum(weights.values()),
        per_color=per_color,
        expected_total=(n - S) / C if C else math.nan,
        fast_path=n <= S + C,
        big_weight=sum(w for v, w in weights.items() if v in big_vertices),
        small_weight=sum(w for v, w in weights.items() if v not in big_vertices),
        expected_big=len(big_vertices) / C if C else 0.0,
    )
    if outcome.witness is not None:
        diag.hall_witness = outcome.witness
        diag.witness_weight = sum(weights[v] for v in outcome.witness)
    if plan is not None:
        diag.lemma4_failures = lemma4_failures(inst, system, plan, delta)
    return diag


def lemma4_failures(inst: MultipartiteInstance, system: BicliqueSystem, plan: SplitPlan, delta: float | None) -> list[int]:
    """Small non-singleton parts with fewer than two vertices whose ``|L'(v)|`` exceeds ``delta^3 C / 80``.

    ``delta`` defaults to the value implied by the plan bracket.
    """
    if delta is None:
        delta = math.sqrt(plan.lower * 40 / system.C) if plan.lower else 0.0
    bound = delta**3 * system.C / 80
    reserved = system.colors
    out = []
    for p in plan.small_parts:
        part = inst.parts.parts[p]
        if len(part) > 1 and sum(1 for v in part if len(inst.lists[v] - reserved) > bound) < 2:
            out.append(p)
    return out


def round_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for retry ``index``, derived from ``(seed, index)``."""
    return np.random.default_rng([seed & SEED_MASK, index])


def run_randomized_coloring(
    inst: MultipartiteInstance,
    system: BicliqueSystem,
    plan: SplitPlan,
    config: PipelineConfig,
    rng: np.random.Generator | None = None,
) -> RandomizedOutcome:
    """Las Vegas loop over :func:`randomized_round`.

    Round ``i`` draws from ``round_rng(config.seed, i)`` unless a generator
    is passed in. Every Hall failure is logged with the weight of its
    witness, which must exceed 1.
    """
    bad, warn = check_lemma3_conditions(inst, system, config.delta)
    if bad:
        raise PreconditionViolation("instance violates the block-coloring hypotheses", bad)
    outcome = RandomizedOutcome(None, 0, None, warnings=warn)
    for i in range(config.retry_limit):
        res = randomized_round(inst, system, plan, rng if rng is not None else round_rng(config.seed, i))
        outcome.rounds = i + 1
        diag = weight_report(inst, system, res, plan, config.delta)
        outcome.diagnostics = diag
        if res.coloring is not None:
            verdict = inst.verify(res.coloring)
            if not verdict:
                raise InternalInconsistency("randomized round produced a bad coloring", {"reason": verdict.reason})
            outcome.coloring = res.coloring
            return outcome
        weight = diag.witness_weight
        outcome.failures.append({"round": i, "witness_size": len(res.witness), "weight": weight})
        if not weight > 1:
            raise InternalInconsistency(
                "Hall violator with weight at most 1",
                {"round": i, "witness": sorted(res.witness), "weight": weight},
            )
    return outcome


# ------------------------------------------------------------------ driver


@dataclass
class ExecutionReport:
    status: str = "pending"  # "colored", "fallback", "counterexample-candidate"
    coloring: dict[int, int] | None = None
    stages: list[dict] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)
    rounds: int = 0
    fallback: dict | None = None
    warnings: list[str] = field(default_factory=list)
    diagnostics: WeightDiagnostics | None = None
    hall_failures: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    state: dict | None = None

    @property
    def randomized(self) -> bool:
        return self.status == "colored" and self.fallback is None

    def to_dict(self, *, timing: bool = True) -> dict:
        out = {
            "status": self.status,
            "coloring": None if self.coloring is None else {str(v): c for v, c in sorted(self.coloring.items())},
            "stages": self.stages,
            "rounds": self.rounds,
            "fallback": self.fallback,
            "warnings": self.warnings,
            "diagnostics": None if self.diagnostics is None else self.diagnostics.to_dict(),
            "hall_failures": self.hall_failures,
            "config": self.config,
            "state": self.state,
        }
        if timing:
            out["timing"] = self.timing
        return out

    def to_json(self, *, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing=timing), sort_keys=True, indent=2)


class _Fallback(Exception):
    def __init__(self, stage: str, reason: str, details: dict | None = None):
        super().__init__(reason)
        self.stage = stage
        self.reason = reason
        self.details = details or {}


def solve_via_theorem1(
    graph: Graph, lists: Mapping[int, Iterable[int]], config: PipelineConfig | None = None
) -> ExecutionReport:
    """Run the reduction pipeline and the randomized coloring, with exact fallback.

    A returned coloring has always passed :func:`verify_coloring`. When the
    exact fallback finds no coloring at all the report carries status
    ``"counterexample-candidate"`` and the full instance under ``state``.
    """
    config = config or PipelineConfig()
    lists = normalize_lists(graph, lists)
    report = ExecutionReport(config=config.to_dict(), warnings=config.warnings())

    def stage(name: str, status: str = "ok", **details) -> None:
        report.stages.append({"name": name, "status": status, **details})

    clock = time.perf_counter()

    def tick(name: str) -> None:
        nonlocal clock
        now = time.perf_counter()
        report.timing[name] = now - clock
        clock = now

    try:
        chi, witness = chromatic_number_exact(graph)
        short = [v for v in graph.vertices if len(lists[v]) < chi]
        if short:
            raise _Fallback("hypotheses", f"{len(short)} lists are shorter than chi = {chi}", {"vertices": short[:10]})
        if graph.n > (2 - config.epsilon) * chi:
            raise _Fallback("hypotheses", f"n = {graph.n} exceeds (2 - epsilon) chi = {(2 - config.epsilon) * chi:.4g}")
        stage("hypotheses", chi=chi, n=graph.n)
        tick("hypotheses")

        sat, parts = saturate(graph, witness)
        inst = MultipartiteInstance(parts, lists)
        stage("saturate", parts=parts.count, added_edges=len(sat.edges) - len(graph.edges))
        tick("saturate")

        reduced, removals = remove_common_color_parts(inst)
        stage("remove_common_color_parts", removed=[[list(p), c] for p, c in removals])
        tick("remove_common_color_parts")
        if reduced is None:
            coloring = extend_by_removals({}, removals)
            return _finish(graph, lists, coloring, report)

        x = len(reduced.singletons)
        t = choose_t(config.m, x, reduced.chi)
        if t is None:
            raise _Fallback("choose_t", f"no t in (m/2, m-2] for |X| = {x}, chi = {reduced.chi}, m = {config.m}")
        stage("choose_t", t=t, singletons=x, chi=reduced.chi)

        system = extract_bicliques(reduced, config.m, t)
        if system.k == 0:
            raise _Fallback("extract_bicliques", "no block found")
        stage("extract_bicliques", k=system.k, leftover_singletons=x - system.S, system=system.to_dict())
        tick("extract_bicliques")

        try:
            w, w_coloring, residual = choose_w_and_t(reduced, system)
        except PreconditionViolation as exc:
            raise _Fallback("choose_w_and_t", str(exc), {"violations": exc.violations}) from None
        stage("choose_w_and_t", W=w, T=sorted(w_coloring.values()))
        tick("choose_w_and_t")

        bad, warn = check_lemma3_conditions(residual, system, config.delta)
        report.warnings.extend(warn)
        if bad:
            raise _Fallback("lemma3_conditions", "residual instance outside the hypotheses", {"violations": bad})
        plan = plan_split(residual, system, config)
        stage("plan_split", **plan.to_dict())
        tick("plan_split")

        outcome = run_randomized_coloring(residual, system, plan, config)
        report.rounds = outcome.rounds
        report.diagnostics = outcome.diagnostics
        report.hall_failures = outcome.failures
        tick("randomized_coloring")
        if outcome.coloring is None:
            raise _Fallback("randomized_coloring", f"no success in {outcome.rounds} rounds")
        stage("randomized_coloring", rounds=outcome.rounds)
        coloring = extend_by_removals({**outcome.coloring, **w_coloring}, removals)
        return _finish(graph, lists, coloring, report)
    except _Fallback as fb:
        stage(fb.stage, "failed", reason=fb.reason, **fb.details)
        tick(fb.stage)
        if not config.solver_fallback:
            raise StageFailure(fb.stage, fb.reason, fb.details) from None
        report.fallback = {"stage": fb.stage, "reason": fb.reason}
        log.info("falling back to exact search after stage %s: %s", fb.stage, fb.reason)
        coloring = find_acceptable_coloring(graph, lists)
        tick("exact_fallback")
        if coloring is None:
            report.status = "counterexample-candidate"
            report.state = {
                "n": graph.n,
                "edges": [list(e) for e in sorted(graph.edges)],
                "lists": {str(v): sorted(lists[v]) for v in graph.vertices},
            }
            return report
        return _finish(graph, lists, coloring, report, status="fallback")


def _finish(graph: Graph, lists, coloring: dict[int, int], report: ExecutionReport, status: str = "colored") -> ExecutionReport:
    verdict = verify_coloring(graph, lists, coloring)
    if not verdict:
        raise VerificationFailure(f"pipeline produced an unacceptable coloring: {verdict.reason}")
    report.coloring = dict(sorted(coloring.items()))
    report.status = status
    return report
