"""Exact list coloring: verification, search and choosability.

Lists are plain mappings ``vertex -> frozenset of colors``; colors are
nonnegative integers. Internally every list becomes a bitmask over the
sorted color universe.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Mapping
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from multiprocessing import Manager

import numpy as np

from .errors import InvalidArgument, ResourceLimit
from .graph import Graph, chromatic_number_exact, multipartite_parts

log = logging.getLogger(__name__)

Lists = Mapping[int, frozenset[int]]

MAX_VERTICES = 24
MAX_PRODUCT = 10**9
MAX_NODES = 10**7
MAX_ASSIGNMENTS = 5 * 10**6


def universe(lists: Lists) -> frozenset[int]:
    out: set[int] = set()
    for lst in lists.values():
        out.update(lst)
    return frozenset(out)


def normalize_lists(g: Graph, lists: Mapping[int, object]) -> dict[int, frozenset[int]]:
    """Check that every vertex of ``g`` has a list of nonnegative integer colors."""
    out = {}
    for v in g.vertices:
        if v not in lists:
            raise InvalidArgument(f"vertex {v} has no list")
        lst = frozenset(int(c) for c in lists[v])  # type: ignore[union-attr]
        if any(c < 0 for c in lst):
            raise InvalidArgument(f"list of vertex {v} contains a negative color")
        out[v] = lst
    return out


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    vertex: int | None = None
    edge: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_coloring(g: Graph, lists: Lists, coloring: Mapping[int, int]) -> Verdict:
    """Check that ``coloring`` is acceptable: list-respecting and proper.

    Reports the first offending vertex (in id order) or edge (in sorted order).
    """
    missing = [v for v in g.vertices if v not in coloring]
    if missing:
        raise InvalidArgument(f"coloring is partial; first uncolored vertex {missing[0]}")
    for v in g.vertices:
        if coloring[v] not in lists[v]:
            return Verdict(False, f"vertex {v} colored {coloring[v]} outside its list", vertex=v)
    for u, v in sorted(g.edges):
        if coloring[u] == coloring[v]:
            return Verdict(False, f"edge ({u}, {v}) monochromatic in color {coloring[u]}", edge=(u, v))
    return Verdict(True)


def _has_sdr(domains: list[int]) -> bool:
    """Kuhn's augmenting paths on bitmask domains."""
    owner: dict[int, int] = {}

    def augment(i: int, seen: int) -> tuple[bool, int]:
        m = domains[i] & ~seen
        while m:
            bit = m & -m
            m ^= bit
            seen |= bit
            j = owner.get(bit)
            if j is None:
                owner[bit] = i
                return True, seen
            ok, seen = augment(j, seen)
            if ok:
                owner[bit] = i
                return True, seen
        return False, seen

    for i in range(len(domains)):
        if not augment(i, 0)[0]:
            return False
    return True


class _Search:
    """Backtracking over bitmask domains with forward checking.

    Branches on the uncolored vertex with the fewest remaining colors; ties
    follow ``rank`` (ascending list size, then descending degree, then id).
    A Hall check on a few precomputed cliques prunes dead subtrees early.
    """

    def __init__(self, adj: list[list[int]], max_nodes: int = MAX_NODES):
        self.adj = adj
        self.n = len(adj)
        self.max_nodes = max_nodes
        self.nodes = 0

    def _cliques(self, dom: list[int], rank: list[int]) -> list[list[int]]:
        adjset = [set(a) for a in self.adj]
        seen: set[frozenset[int]] = set()
        out = []
        for v in sorted(range(self.n), key=rank.__getitem__):
            clique = [v]
            cand = set(adjset[v])
            while cand:
                u = min(cand, key=lambda w: (dom[w].bit_count(), rank[w]))
                clique.append(u)
                cand &= adjset[u]
            key = frozenset(clique)
            if len(clique) >= 3 and key not in seen:
                seen.add(key)
                out.append(clique)
        return out

    def run(self, dom: list[int]) -> list[int] | None:
        n = self.n
        if any(d == 0 for d in dom):
            return None
        adj = self.adj
        deg = [len(a) for a in adj]
        rank = [0] * n
        for r, v in enumerate(sorted(range(n), key=lambda v: (dom[v].bit_count(), -deg[v], v))):
            rank[v] = r
        cliques = self._cliques(dom, rank)
        dom = list(dom)
        colored = [False] * n
        assign = [0] * n

        def hall_ok() -> bool:
            for clique in cliques:
                ds = [dom[u] for u in clique if not colored[u]]
                if len(ds) < 2:
                    continue
                union = 0
                for d in ds:
                    union |= d
                if union.bit_count() < len(ds) or not _has_sdr(ds):
                    return False
            return True

        def rec(left: int) -> bool:
            self.nodes += 1
            if self.nodes > self.max_nodes:
                raise ResourceLimit("search node budget exhausted", {"nodes": self.nodes})
            if left == 0:
                return True
            v = -1
            best = None
            for u in range(n):
                if not colored[u]:
                    key = (dom[u].bit_count(), rank[u])
                    if best is None or key < best:
                        best, v = key, u
            m = dom[v]
            colored[v] = True
            while m:
                bit = m & -m
                m ^= bit
                touched = []
                ok = True
                for u in adj[v]:
                    if not colored[u] and dom[u] & bit:
                        dom[u] ^= bit
                        touched.append(u)
                        if not dom[u]:
                            ok = False
                            break
                if ok and hall_ok():
                    assign[v] = bit
                    if rec(left - 1):
                        return True
                for u in touched:
                    dom[u] |= bit
            colored[v] = False
            return False

        if not hall_ok():
            return None
        return assign if rec(n) else None


def _masks(g: Graph, lists: Lists) -> tuple[list[int], list[int]]:
    colors = sorted(universe({v: lists[v] for v in g.vertices}))
    index = {c: i for i, c in enumerate(colors)}
    dom = [sum(1 << index[c] for c in lists[v]) for v in g.vertices]
    return colors, dom


def find_acceptable_coloring(
    g: Graph,
    lists: Lists,
    *,
    max_vertices: int = MAX_VERTICES,
    max_product: int = MAX_PRODUCT,
    max_nodes: int = MAX_NODES,
) -> dict[int, int] | None:
    """Exact search for an acceptable coloring; None if none exists.

    Instances with more than ``max_vertices`` vertices are accepted only if
    the raw search space ``prod |L(v)|`` is at most ``max_product``.
    """
    lists = normalize_lists(g, lists)
    size = math.prod(len(lists[v]) for v in g.vertices)
    if g.n > max_vertices and size > max_product:
        raise ResourceLimit(
            f"instance with {g.n} vertices and search space {size:.3g} exceeds the exact-solver budget",
            {"n": g.n, "product": size, "max_vertices": max_vertices, "max_product": max_product},
        )
    colors, dom = _masks(g, lists)
    adj = [sorted(g.adjacency[v]) for v in g.vertices]
    found = _Search(adj, max_nodes).run(dom)
    if found is None:
        return None
    return {v: colors[found[v].bit_length() - 1] for v in g.vertices}


def twin_classes(g: Graph) -> list[list[int]]:
    """Classes of pairwise non-adjacent vertices with identical neighborhoods.

    Any permutation inside a class is an automorphism of ``g``. For a
    complete multipartite graph the classes are exactly the parts.
    """
    groups: dict[frozenset[int], list[int]] = {}
    for v in g.vertices:
        groups.setdefault(g.adjacency[v], []).append(v)
    return sorted(groups.values(), key=lambda c: c[0])


def _multichoose(n: int, k: int) -> int:
    return math.comb(n + k - 1, k) if k >= 0 else 0


@dataclass
class ChoosabilityResult:
    choosable: bool
    k: int
    witness: dict[int, frozenset[int]] | None = None
    checked: int = 0
    universe_size: int = 0
    mode: str = "full"
    stats: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.choosable


class _Enumerator:
    """Streams k-list assignments over the color universe ``range(u)``.

    ``none``: the full product. ``colors``: colors first appear in
    increasing order scanning vertices by id (restricted growth). ``full``:
    lists are non-decreasing inside each twin class, and one list of the
    first class is ``{0..k-1}``; both reductions are orbit-complete, the
    second because relabeling colors cannot move a list out of its class.
    Each assignment is yielded as a tuple of per-vertex list masks.
    """

    def __init__(self, g: Graph, k: int, u: int, mode: str):
        if mode not in ("none", "colors", "full"):
            raise InvalidArgument(f"unknown canonicalization mode {mode!r}")
        self.g, self.k, self.u, self.mode = g, k, u, mode
        self.subsets = [sum(1 << c for c in s) for s in combinations(range(u), k)]
        self.classes = twin_classes(g)

    def estimate(self) -> int | None:
        L, n = len(self.subsets), self.g.n
        if self.mode == "none":
            return L**n
        if self.mode == "full":
            first, *rest = self.classes
            total = _multichoose(L, len(first) - 1)
            for c in rest:
                total *= _multichoose(L, len(c))
            return total
        return None

    def prefixes(self) -> list:
        """Split points for parallel enumeration: choices for the first block."""
        if self.mode == "full":
            return list(combinations_with_replacement(range(len(self.subsets)), len(self.classes[0]) - 1))
        if self.mode == "none":
            return list(range(len(self.subsets)))
        return list(self._growth(1, [self.subsets[0]], self.k, limit_depth=2))

    def __iter__(self) -> Iterator[list[int]]:
        return self.stream(None)

    def stream(self, prefixes: list | None) -> Iterator[list[int]]:
        n = self.g.n
        subs = self.subsets
        if self.mode == "none":
            heads = range(len(subs)) if prefixes is None else prefixes
            for h in heads:
                for rest in product(subs, repeat=n - 1):
                    yield [subs[h], *rest]
            return
        if self.mode == "colors":
            heads = prefixes
            if heads is None:
                yield from self._growth(1, [subs[0]], self.k, None)
                return
            for head in heads:
                used = max(m.bit_length() for m in head)
                yield from self._growth(len(head), list(head), used, None)
            return
        first, *rest = self.classes
        heads = (
            combinations_with_replacement(range(len(subs)), len(first) - 1)
            if prefixes is None
            else prefixes
        )
        others = [list(combinations_with_replacement(range(len(subs)), len(c))) for c in rest]
        for head in heads:
            for tail in product(*others) if others else [()]:
                out = [0] * n
                out[first[0]] = subs[0]
                for v, idx in zip(first[1:], head):
                    out[v] = subs[idx]
                for cls, choice in zip(rest, tail):
                    for v, idx in zip(cls, choice):
                        out[v] = subs[idx]
                yield out

    def _growth(self, depth: int, acc: list[int], used: int, limit_depth: int | None):
        if depth == (limit_depth if limit_depth is not None else self.g.n):
            yield list(acc)
            return
        k, u = self.k, self.u
        for fresh in range(0, min(k, u - used) + 1):
            new = sum(1 << c for c in range(used, used + fresh))
            for old in combinations(range(used), k - fresh):
                acc.append(new | sum(1 << c for c in old))
                yield from self._growth(depth + 1, acc, used + fresh, limit_depth)
                acc.pop()


def _joined_class(g: Graph) -> list[int] | None:
    """Largest twin class (size >= 2) adjacent to every vertex outside it."""
    best = None
    for cls in twin_classes(g):
        if len(cls) > 1 and len(g.adjacency[cls[0]]) == g.n - len(cls):
            if best is None or len(cls) > len(best):
                best = cls
    return best


def _used_color_sets(adj: list[list[int]], dom: list[int], cap: int) -> list[int] | None:
    """Inclusion-minimal color sets used by the acceptable colorings.

    ``adj`` and ``dom`` describe the graph on ``0..len(dom)-1``. Returns
    None when more than ``cap`` distinct color sets occur.
    """
    n = len(dom)
    found: set[int] = set()
    color = [0] * n

    def rec(i: int, used: int) -> None:
        if i == n:
            found.add(used)
            if len(found) > cap:
                raise OverflowError
            return
        blocked = 0
        for w in adj[i]:
            if w < i:
                blocked |= color[w]
        m = dom[i] & ~blocked
        while m:
            bit = m & -m
            m ^= bit
            color[i] = bit
            rec(i + 1, used | bit)
        color[i] = 0

    try:
        rec(0, 0)
    except OverflowError:
        return None
    minimal: list[int] = []
    for m in sorted(found, key=int.bit_count):
        if not any(o & m == o for o in minimal):
            minimal.append(m)
    return minimal


def _block_part(minimal: list[int], size: int, subsets: list[int]) -> list[int] | None:
    """Pick at most ``size`` lists so that each color set contains one of them.

    A vertex of an independent set joined to everything else is stuck
    exactly when its list lies inside the colors used elsewhere.
    """
    if not minimal:
        return [subsets[0]] * size
    cover = []
    for t in subsets:
        mask = 0
        for i, m in enumerate(minimal):
            if m & t == t:
                mask |= 1 << i
        cover.append(mask)
    full = (1 << len(minimal)) - 1
    best = max(c.bit_count() for c in cover)

    def rec(covered: int, chosen: list[int]) -> list[int] | None:
        if covered == full:
            return chosen
        slots = size - len(chosen)
        open_ = full & ~covered
        if slots == 0 or best * slots < open_.bit_count():
            return None
        i = (open_ & -open_).bit_length() - 1
        for t, c in zip(subsets, cover):
            if c >> i & 1:
                got = rec(covered | c, chosen + [t])
                if got is not None:
                    return got
        return None

    picked = rec(0, [])
    if picked is None:
        return None
    return picked + [picked[0]] * (size - len(picked))


def _split_off(g: Graph, part: list[int]) -> tuple[Graph | None, list[int]]:
    """The graph with ``part`` deleted, relabeled densely, and the kept ids."""
    keep = [v for v in g.vertices if v not in set(part)]
    if not keep:
        return None, keep
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[a], index[b]) for a, b in g.edges if a in index and b in index]
    return Graph.from_edges(len(keep), edges), keep


USED_SET_CAP = 10**5


def _scan(g: Graph, k: int, u: int, mode: str, block: bool, prefixes, stop=None,
          max_nodes: int = MAX_NODES, cap: int | None = None):
    """Run through the canonical assignments; return (count, first bad domain list or None)."""
    part = _joined_class(g) if (block and mode == "full") else None
    checked = 0
    if part is None:
        enum = _Enumerator(g, k, u, mode)
        search = _Search([sorted(g.adjacency[v]) for v in g.vertices], max_nodes)
        for dom in enum.stream(prefixes):
            checked += 1
            search.nodes = 0
            if search.run(dom) is None:
                return checked, dom
            if cap is not None and checked > cap:
                raise ResourceLimit("assignment cap exceeded", {"checked": checked, "cap": cap})
            if stop is not None and checked % 512 == 0 and stop.is_set():
                break
        return checked, None

    rest, keep = _split_off(g, part)
    subsets = [sum(1 << c for c in s) for s in combinations(range(u), k)]
    if rest is None:
        return 0, None
    enum = _Enumerator(rest, k, u, "full")
    adj = [sorted(rest.adjacency[v]) for v in rest.vertices]
    for dom in enum.stream(prefixes):
        checked += 1
        minimal = _used_color_sets(adj, dom, USED_SET_CAP)
        if minimal is None:
            raise ResourceLimit(
                "too many color sets while blocking the joined part",
                {"checked": checked, "cap": USED_SET_CAP},
            )
        if all(m.bit_count() >= k for m in minimal):
            picked = _block_part(minimal, len(part), subsets)
            if picked is not None:
                full = [0] * g.n
                for i, v in enumerate(keep):
                    full[v] = dom[i]
                for v, t in zip(part, picked):
                    full[v] = t
                return checked, full
        if stop is not None and checked % 512 == 0 and stop.is_set():
            break
    return checked, None


def _scan_worker(args):
    n, edges, k, u, mode, block, prefixes, stop, max_nodes = args
    checked, bad = _scan(Graph(n, edges), k, u, mode, block, prefixes, stop, max_nodes)
    if bad is not None:
        stop.set()
    return checked, bad


def is_choosable(
    g: Graph,
    k: int,
    *,
    mode: str = "full",
    block: bool = True,
    max_assignments: int = MAX_ASSIGNMENTS,
    max_nodes: int = MAX_NODES,
    workers: int = 1,
) -> ChoosabilityResult:
    """Decide whether every assignment of k-lists admits an acceptable coloring.

    It suffices to try lists of size exactly ``k`` drawn from ``n - 1``
    colors: any bad assignment can be rewritten into one whose color union
    has fewer than ``n`` colors (see :mod:`listlab.compression`), and
    shrinking lists preserves badness. For ``k >= n`` there is nothing to
    check.

    With ``mode="full"`` and ``block=True``, when some twin class ``P`` is
    joined to every other vertex (any part of a complete multipartite graph),
    only the lists outside ``P`` are enumerated: a vertex of ``P`` is stuck
    iff its list lies inside the colors used on ``G - P``, so the existence
    of bad lists for ``P`` is a small covering problem solved exactly.
    """
    if k < 1:
        raise InvalidArgument("k must be positive")
    u = g.n - 1
    if k > u:
        return ChoosabilityResult(True, k, universe_size=max(u, 0), mode=mode)
    part = _joined_class(g) if (block and mode == "full") else None
    target = g if part is None else _split_off(g, part)[0]
    if target is None:
        return ChoosabilityResult(True, k, universe_size=u, mode=mode)
    enum = _Enumerator(target, k, u, mode)
    estimate = enum.estimate()
    if estimate is not None and estimate > max_assignments:
        raise ResourceLimit(
            f"{estimate} canonical assignments exceed the cap of {max_assignments}",
            {"estimate": estimate, "cap": max_assignments, "n": g.n, "k": k, "universe": u},
        )
    colors = list(range(u))

    def decode(dom: list[int]) -> dict[int, frozenset[int]]:
        return {v: frozenset(c for c in colors if dom[v] >> c & 1) for v in g.vertices}

    if workers <= 1:
        cap = max_assignments if estimate is None else None
        checked, bad = _scan(g, k, u, mode, block, None, None, max_nodes, cap)
    else:
        prefixes = enum.prefixes()
        chunks = [prefixes[i::workers] for i in range(workers)]
        checked, bad = 0, None
        with Manager() as manager, ProcessPoolExecutor(workers) as pool:
            stop = manager.Event()
            futures = [
                pool.submit(_scan_worker, (g.n, g.edges, k, u, mode, block, chunk, stop, max_nodes))
                for chunk in chunks
                if chunk
            ]
            for fut in as_completed(futures):
                c, b = fut.result()
                checked += c
                if b is not None and bad is None:
                    bad = b
    stats = {"blocked_part": part}
    if bad is not None:
        return ChoosabilityResult(False, k, decode(bad), checked, u, mode, stats)
    return ChoosabilityResult(True, k, None, checked, u, mode, stats)


def chi_list_exact(g: Graph, **budget) -> int:
    """List-chromatic number, searching upward from the chromatic number."""
    k, _ = chromatic_number_exact(g)
    while True:
        if is_choosable(g, k, **budget):
            return k
        k += 1


def find_bad_assignment(
    g: Graph,
    k: int,
    budget: int = 10**6,
    seed: int = 0,
    *,
    universe_size: int | None = None,
    strategy: str = "auto",
) -> dict[int, frozenset[int]] | None:
    """Random search for k-lists admitting no acceptable coloring.

    Lists live on a small universe, about ``2k`` colors by default (capped
    at ``n - 1``), where the known extremal examples sit. Two strategies:

    ``uniform``
        every list is a uniform k-subset.
    ``part``
        complete multipartite graphs only: lists inside each other part are
        drawn disjoint where the universe allows, then the largest part's
        lists are solved for exactly, as a covering problem over the color
        sets the rest of the graph can use.

    ``auto`` picks ``part`` when it applies (universes up to 62 colors).
    Every returned witness has been
    re-checked by exact search; None proves nothing. ``budget`` counts
    sampled trials.
    """
    if k < 1:
        raise InvalidArgument("k must be positive")
    if k >= g.n:
        return None
    u = universe_size if universe_size is not None else min(max(2 * k, k + 1), g.n - 1)
    if u < k:
        raise InvalidArgument(f"universe of {u} colors cannot hold {k}-lists")
    structure = multipartite_parts(g)
    if strategy == "auto":
        strategy = "part" if structure is not None and max(structure.sizes()) > 1 and u <= 62 else "uniform"
    if strategy not in ("uniform", "part"):
        raise InvalidArgument(f"unknown strategy {strategy!r}")
    if strategy == "part" and structure is None:
        raise InvalidArgument("the part strategy needs a complete multipartite graph")
    if strategy == "part" and u > 62:
        raise InvalidArgument("the part strategy handles at most 62 colors")
    subsets = [sum(1 << c for c in s) for s in combinations(range(u), k)]
    adj = [sorted(g.adjacency[v]) for v in g.vertices]
    search = _Search(adj)
    rng = np.random.default_rng(seed)

    def decode(dom) -> dict[int, frozenset[int]]:
        return {v: frozenset(c for c in range(u) if dom[v] >> c & 1) for v in g.vertices}

    def confirm(dom) -> dict[int, frozenset[int]]:
        lists = decode(dom)
        if find_acceptable_coloring(g, lists) is not None:  # pragma: no cover - solver bug guard
            raise AssertionError("fast path disagrees with exact solver")
        return lists

    if strategy == "uniform":
        done = 0
        while done < budget:
            draws = rng.integers(0, len(subsets), size=(min(4096, budget - done), g.n))
            for row in draws:
                done += 1
                dom = [subsets[i] for i in row]
                search.nodes = 0
                if search.run(dom) is None:
                    log.debug("bad assignment found after %d trials", done)
                    return confirm(dom)
        return None

    parts = list(structure.parts)
    big = max(range(len(parts)), key=lambda i: (len(parts[i]), -i))
    others = [p for i, p in enumerate(parts) if i != big]
    rest, keep = _split_off(g, list(parts[big]))
    if rest is None:
        return None
    rest_adj = [sorted(rest.adjacency[v]) for v in rest.vertices]
    # the exact blocking check depends only on the lists outside the big
    # part, and those repeat a lot on small universes
    memo: dict[tuple[int, ...], list[int] | None] = {}
    size = len(parts[big])
    bits = np.left_shift(np.int64(1), np.arange(u, dtype=np.int64))
    done = 0
    while done < budget:
        batch = min(4096, budget - done)
        cols: dict[int, np.ndarray] = {}
        for p in others:
            perm = rng.permuted(np.tile(np.arange(u), (batch, 1)), axis=1)
            for i, v in enumerate(p):
                if (i + 1) * k <= u:
                    chunk = perm[:, i * k:(i + 1) * k]
                else:
                    chunk = rng.permuted(np.tile(np.arange(u), (batch, 1)), axis=1)[:, :k]
                cols[v] = bits[chunk].sum(axis=1)
        rows = np.stack([cols[v] for v in keep], axis=1).tolist()
        for row in rows:
            done += 1
            key = tuple(row)
            if key not in memo:
                minimal = _used_color_sets(rest_adj, list(key), cap=20000)
                if minimal is None or any(m.bit_count() < k for m in minimal):
                    memo[key] = None
                else:
                    memo[key] = _block_part(minimal, size, subsets)
            picked = memo[key]
            if picked is None:
                continue
            dom = [0] * g.n
            for v, mask in zip(keep, key):
                dom[v] = mask
            for v, t in zip(parts[big], picked):
                dom[v] = t
            log.debug("bad assignment found after %d trials", done)
            return confirm(dom)
    return None
