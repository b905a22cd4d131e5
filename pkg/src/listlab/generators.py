"""Instance generators.

Every generator returns an :class:`~listlab.instance.InstanceFile` whose
metadata records the generator name, its parameters and the seed.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence

import numpy as np

from .errors import InvalidArgument
from .graph import Graph, complete_multipartite
from .instance import InstanceFile
from .pipeline import BicliqueSystem, MultipartiteInstance, check_lemma3_conditions
from .solver import find_bad_assignment, universe

LIST_MODES = ("range", "random", "bad")


def _lists_for(g: Graph, k: int, mode: str, rng: np.random.Generator, universe_size: int | None, budget: int):
    if mode == "range":
        return {v: range(k) for v in g.vertices}
    if mode == "random":
        u = universe_size or max(k, g.n - 1)
        if u < k:
            raise InvalidArgument(f"universe of {u} colors cannot hold {k}-lists")
        return {v: sorted(int(c) for c in rng.choice(u, k, replace=False)) for v in g.vertices}
    if mode == "bad":
        found = find_bad_assignment(g, k, budget=budget, seed=int(rng.integers(2**32)), universe_size=universe_size)
        if found is None:
            raise InvalidArgument(f"no bad {k}-list assignment found within {budget} trials")
        return found
    raise InvalidArgument(f"unknown list mode {mode!r}; choose from {LIST_MODES}")


def _multipartite(name: str, sizes: list[int], k: int, mode: str, seed: int, universe_size, budget, params) -> InstanceFile:
    g, parts = complete_multipartite(sizes)
    rng = np.random.default_rng(seed)
    lists = _lists_for(g, k, mode, rng, universe_size, budget)
    meta = {"generator": name, "params": {**params, "lists": mode, "k": k}, "seed": seed}
    return InstanceFile.from_graph(g, lists, parts=parts, metadata=meta)


def k33(mode: str = "bad", seed: int = 0) -> InstanceFile:
    """K_{3,3}; ``bad`` lists are the classic 2-assignment with no acceptable coloring."""
    g, parts = complete_multipartite([3, 3])
    if mode == "bad":
        pairs = [[0, 1], [0, 2], [1, 2]]
        lists = {v: pairs[v % 3] for v in g.vertices}
        return InstanceFile.from_graph(g, lists, parts=parts, metadata={"generator": "k33", "params": {"lists": mode, "k": 2}, "seed": seed})
    return _multipartite("k33", [3, 3], 2, mode, seed, None, 10**5, {})


def erdos_parts2(k: int, mode: str = "range", seed: int = 0, universe_size: int | None = None) -> InstanceFile:
    """``k`` parts of size two; both its chromatic and list-chromatic number are ``k``."""
    if k < 1:
        raise InvalidArgument("k must be positive")
    return _multipartite("erdos_parts2", [2] * k, k, mode, seed, universe_size, 10**5, {"parts_k": k})


def ohba_counterexample(k: int, mode: str = "range", seed: int = 0, universe_size: int | None = None, budget: int = 10**5) -> InstanceFile:
    """``k - 1`` parts of size two and one of size four: ``2k + 2`` vertices, ``chi = k``."""
    if k < 2:
        raise InvalidArgument("k must be at least 2")
    return _multipartite("ohba_counterexample", [2] * (k - 1) + [4], k, mode, seed, universe_size, budget, {"parts_k": k})


def random_multipartite(
    sizes: Sequence[int], list_size: int | None = None, universe_size: int | None = None, seed: int = 0
) -> InstanceFile:
    """Given part sizes, lists are uniform ``list_size``-subsets (default: the part count)."""
    sizes = [int(s) for s in sizes]
    k = list_size if list_size is not None else len(sizes)
    if k < 1:
        raise InvalidArgument("list size must be positive")
    return _multipartite(
        "random_multipartite", sizes, k, "random", seed, universe_size, 0,
        {"sizes": sizes, "universe": universe_size},
    )


def lemma3_layout(C: int, m: int, t: int, delta: float, n: int | None = None) -> dict:
    """Part sizes for a block-structured instance; raises when no layout fits.

    The instance has ``C`` parts: ``S = kt`` planted singletons, ``j``
    extra singletons and ``A`` parts of size at least ``s`` where ``s``
    is the smallest size for which lists of ``C`` colors out of ``n - 1``
    can avoid a common color on every part.
    """
    problems = []
    if C <= 0 or m <= 0 or t <= 0:
        problems.append("C, m and t must be positive")
    elif C % m:
        problems.append(f"m = {m} does not divide C = {C}")
    if not 0 < t < m:
        problems.append(f"t = {t} must lie strictly between 0 and m = {m}")
    if not 0 < delta < 1:
        problems.append(f"delta = {delta} must lie in (0, 1)")
    if problems:
        raise InvalidArgument("infeasible parameters: " + "; ".join(problems))
    k = C // m
    S, q = k * t, C - k * t
    cap = math.ceil((2 - delta) * C) - 1
    if n is None:
        n = min(2 * C - S, cap)
    if not n < (2 - delta) * C:
        raise InvalidArgument(f"infeasible parameters: n = {n} is not below (2 - delta) C = {(2 - delta) * C:.4g}")
    colors = n - 1
    missed = colors - C
    if missed <= 0:
        raise InvalidArgument(f"infeasible parameters: n - 1 = {colors} colors leave no room beyond lists of size C")
    need = max(3, math.ceil(colors / missed))
    rest = n - S
    for j in range(0, min(3 * k, q) + 1):
        a, r = q - j, rest - j
        if (a == 0 and r == 0) or (a > 0 and a * need <= r):
            sizes = [r // a + (1 if i < r % a else 0) for i in range(a)] if a else []
            return {"k": k, "S": S, "n": n, "colors": colors, "extra_singletons": j, "part_sizes": sizes, "min_part": need}
    raise InvalidArgument(
        f"infeasible parameters: {rest} vertices outside the planted singletons cannot form {q} parts "
        f"with at most {3 * k} extra singletons and the others of size >= {need}"
    )


def lemma3(C: int, m: int, t: int, delta: float, seed: int = 0, n: int | None = None) -> InstanceFile:
    """Complete ``C``-partite instance with planted blocks, lists of size ``C``.

    Colors ``0..C-1`` form the blocks ``C_i = [im, (i+1)m)``; the other
    ``n - 1 - C`` colors form a pool, so fewer than ``n`` colors occur.
    Planted singletons of block ``i`` hold ``C_i`` plus random colors; each
    extra singleton also holds a whole block (round robin), so block groups
    larger than ``t`` exist. Each non-singleton part gets its omitted colors
    from consecutive windows of one random color order, which together
    cover every color, so no color is common to a whole part.
    """
    layout = lemma3_layout(C, m, t, delta, n)
    k, n, colors = layout["k"], layout["n"], layout["colors"]
    missed = colors - C
    rng = np.random.default_rng(seed)
    all_colors = np.arange(colors)
    parts: list[list[int]] = []
    lists: list[list[int]] = []

    def with_block(i: int) -> list[int]:
        block = set(range(i * m, (i + 1) * m))
        others = np.array([c for c in range(colors) if c not in block])
        extra = rng.choice(others, C - m, replace=False)
        return sorted(block | {int(c) for c in extra})

    singleton_blocks = []
    for i in range(k):
        block = []
        for _ in range(t):
            v = len(lists)
            parts.append([v])
            lists.append(with_block(i))
            block.append(v)
        singleton_blocks.append(block)
    for j in range(layout["extra_singletons"]):
        parts.append([len(lists)])
        lists.append(with_block(j % k))
    for size in layout["part_sizes"]:
        order = rng.permutation(all_colors)
        part = []
        for i in range(size):
            window = {int(order[(i * missed + x) % colors]) for x in range(missed)}
            part.append(len(lists))
            lists.append(sorted(set(range(colors)) - window))
        parts.append(part)

    system = BicliqueSystem(m, t, tuple(tuple(range(i * m, (i + 1) * m)) for i in range(k)), tuple(map(tuple, singleton_blocks)))
    meta = {
        "generator": "lemma3",
        "params": {"C": C, "m": m, "t": t, "delta": delta, "n": n},
        "seed": seed,
        "layout": layout,
        "planted": system.to_dict(),
        "warnings": [] if m > 6 / delta else [f"m = {m} does not exceed 6/delta = {6 / delta:.3g}"],
    }
    out = InstanceFile(parts, lists, None, meta)
    bad, _ = check_lemma3_conditions(as_multipartite(out), system, delta)
    if bad:  # pragma: no cover - construction guarantees the conditions
        raise InvalidArgument("generated instance violates: " + "; ".join(bad))
    return out


def as_multipartite(inst: InstanceFile) -> MultipartiteInstance:
    if inst.edges is not None:
        raise InvalidArgument("instance is not complete multipartite")
    return MultipartiteInstance(inst.structure(), inst.list_map())


def planted_system(inst: InstanceFile) -> BicliqueSystem:
    planted = inst.metadata.get("planted")
    if planted is None:
        raise InvalidArgument("instance has no planted block system")
    return BicliqueSystem.from_dict(planted)


def inflate_universe(
    g: Graph, lists: Mapping[int, frozenset[int]], target: int | None = None
) -> tuple[Graph, dict[int, frozenset[int]]]:
    """Enlarge the color universe to at least ``target`` without making the instance colorable.

    First every color whose holders induce a disconnected subgraph is split,
    one fresh color per extra component (no edge joins two components, so a
    coloring of the split instance maps back to the original). If that is
    not enough, isolated vertices with lists of ``k`` fresh colors are added,
    ``k`` being the smallest list size, which needs ``k >= 2``. The default
    target is the final vertex count, the regime compression has to undo.
    """
    lists = {v: frozenset(lists[v]) for v in g.vertices}
    fresh = max(universe(lists), default=-1) + 1
    for c in sorted(universe(lists)):
        if len(universe(lists)) >= (target if target is not None else g.n):
            break
        holders = {v for v in g.vertices if c in lists[v]}
        seen: set[int] = set()
        comps = []
        for v in sorted(holders):
            if v in seen:
                continue
            comp, stack = set(), [v]
            while stack:
                x = stack.pop()
                if x in comp:
                    continue
                comp.add(x)
                stack.extend(y for y in g.adjacency[x] if y in holders and y not in comp)
            seen |= comp
            comps.append(comp)
        for comp in comps[1:]:
            for v in comp:
                lists[v] = (lists[v] - {c}) | {fresh}
            fresh += 1
    size = len(universe(lists))
    n = g.n

    def short() -> bool:
        return size < (target if target is not None else n)

    if not short():
        return g, lists
    k = min(len(lst) for lst in lists.values())
    if k < 2:
        raise InvalidArgument("cannot pad the universe with lists of size one")
    while short():
        lists[n] = frozenset(range(fresh, fresh + k))
        fresh += k
        size += k
        n += 1
    return Graph(n, g.edges), lists
