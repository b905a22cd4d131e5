from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from listlab.errors import InvalidArgument, ResourceLimit
from listlab.graph import Graph, complete_multipartite
from listlab.solver import (
    chi_list_exact,
    find_acceptable_coloring,
    find_bad_assignment,
    is_choosable,
    twin_classes,
    universe,
    verify_coloring,
)
from oracles import brute_choosable, brute_coloring, brute_colorable
from strategies import graphs, list_instances

K33, _ = complete_multipartite([3, 3])
K33_BAD = {v: frozenset(p) for v, p in enumerate([{0, 1}, {0, 2}, {1, 2}] * 2)}


def test_verify_single_vertex():
    g = Graph(1)
    assert verify_coloring(g, {0: {1}}, {0: 1})


def test_verify_reports_edge():
    g = Graph.from_edges(2, [(0, 1)])
    verdict = verify_coloring(g, {0: {1}, 1: {1, 2}}, {0: 1, 1: 1})
    assert not verdict
    assert verdict.edge == (0, 1)


def test_verify_reports_list_violation():
    g = Graph(2)
    verdict = verify_coloring(g, {0: {1}, 1: {2}}, {0: 1, 1: 3})
    assert not verdict and verdict.vertex == 1


def test_verify_partial_is_invalid():
    with pytest.raises(InvalidArgument):
        verify_coloring(Graph(2), {0: {1}, 1: {1}}, {0: 1})


def test_k33_bad_assignment_has_no_coloring():
    assert brute_coloring(K33, K33_BAD) is None
    assert find_acceptable_coloring(K33, K33_BAD) is None


def test_k33_three_lists_colorable():
    lists = {v: frozenset(range(v % 2, v % 2 + 3)) for v in K33.vertices}
    coloring = find_acceptable_coloring(K33, lists)
    assert verify_coloring(K33, lists, coloring)


@given(list_instances())
def test_search_agrees_with_enumeration(inst):
    g, lists = inst
    found = find_acceptable_coloring(g, lists)
    expected = brute_coloring(g, lists)
    assert (found is None) == (expected is None)
    if found is not None:
        assert verify_coloring(g, lists, found)


def test_search_is_deterministic():
    g, _ = complete_multipartite([2, 2, 2])
    lists = {v: frozenset({v % 3, (v + 1) % 3, 5}) for v in g.vertices}
    assert find_acceptable_coloring(g, lists) == find_acceptable_coloring(g, lists)


def test_search_budget():
    g = Graph(25)
    with pytest.raises(ResourceLimit):
        find_acceptable_coloring(g, {v: range(3) for v in g.vertices})
    # a small search space is fine at any size
    assert find_acceptable_coloring(g, {v: {0} for v in g.vertices}) is not None


def test_missing_list_is_invalid():
    with pytest.raises(InvalidArgument):
        find_acceptable_coloring(Graph(2), {0: {1}})


def test_twin_classes():
    g, _ = complete_multipartite([2, 1, 3])
    assert twin_classes(g) == [[0, 1], [2], [3, 4, 5]]


def test_k33_not_two_choosable():
    res = is_choosable(K33, 2)
    assert not res.choosable
    assert all(len(lst) == 2 for lst in res.witness.values())
    assert len(universe(res.witness)) < K33.n
    assert brute_coloring(K33, res.witness) is None


@pytest.mark.parametrize(
    "sizes, chi_l",
    [([3, 3], 3), ([2, 2], 2), ([2, 2, 2], 3), ([2, 4], 3), ([1, 1, 3], 3), ([2, 2, 4], 3)],
)
def test_chi_list_values(sizes, chi_l):
    g, _ = complete_multipartite(sizes)
    assert chi_list_exact(g) == chi_l


def test_odd_cycle():
    c5 = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert chi_list_exact(c5) == 3


@settings(max_examples=25)
@given(graphs(max_n=5), st.sampled_from(["none", "colors", "full"]), st.booleans())
def test_symmetry_pruning_agrees_with_brute_force(g, mode, block):
    k = 2
    if k >= g.n:
        return
    got = is_choosable(g, k, mode=mode, block=block)
    assert got.choosable == brute_choosable(g, k, g.n - 1)
    if not got.choosable:
        assert not brute_colorable(g, got.witness)


def test_modes_count_fewer_assignments():
    g, _ = complete_multipartite([2, 3])
    runs = {mode: is_choosable(g, 2, mode=mode, block=False) for mode in ("none", "colors", "full")}
    assert all(r.choosable for r in runs.values())
    assert runs["none"].checked == 6**5
    assert runs["full"].checked < runs["colors"].checked < runs["none"].checked


def test_assignment_cap():
    g, _ = complete_multipartite([2, 2, 2])
    with pytest.raises(ResourceLimit):
        is_choosable(g, 3, max_assignments=10)


def test_trivially_choosable_above_n_minus_one():
    res = is_choosable(K33, 6)
    assert res.choosable and res.checked == 0


def test_parallel_agrees():
    g, _ = complete_multipartite([3, 3])
    one = is_choosable(g, 2, block=False)
    two = is_choosable(g, 2, block=False, workers=2)
    assert one.choosable == two.choosable is False
    assert brute_coloring(g, two.witness) is None


@pytest.mark.parametrize("sizes, k", [([2, 4], 2), ([3, 3], 2), ([2, 2, 2, 4], 4)])
def test_find_bad_assignment(sizes, k):
    g, _ = complete_multipartite(sizes)
    bad = find_bad_assignment(g, k, budget=200_000, seed=0)
    assert bad is not None
    assert all(len(lst) == k for lst in bad.values())
    assert not brute_colorable(g, bad)


def test_hand_witness_for_three_pairs_and_a_quad():
    g, _ = complete_multipartite([2, 2, 2, 4])
    low, high = {1, 2, 3, 4}, {5, 6, 7, 8}
    quad = [{3, 4, 7, 8}, {3, 4, 5, 6}, {1, 2, 7, 8}, {1, 2, 5, 6}]
    lists = dict(enumerate([low, high] * 3 + quad))
    assert not brute_colorable(g, lists)


def test_k224_has_no_bad_three_assignment():
    g, _ = complete_multipartite([2, 2, 4])
    assert find_bad_assignment(g, 3, budget=50_000, seed=0) is None
    res = is_choosable(g, 3)
    assert res.choosable
    assert res.stats["blocked_part"] == [4, 5, 6, 7]


def test_uniform_strategy():
    bad = find_bad_assignment(K33, 2, budget=50_000, seed=3, strategy="uniform")
    assert bad is not None and not brute_colorable(K33, bad)


def test_find_bad_assignment_arguments():
    assert find_bad_assignment(K33, 6) is None
    with pytest.raises(InvalidArgument):
        find_bad_assignment(K33, 0)
    path = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    with pytest.raises(InvalidArgument):
        find_bad_assignment(path, 2, strategy="part")


def test_find_bad_assignment_reproducible():
    g, _ = complete_multipartite([2, 2, 2, 4])
    assert find_bad_assignment(g, 4, budget=10_000, seed=5) == find_bad_assignment(g, 4, budget=10_000, seed=5)


def test_witness_universe_below_n():
    # lists of size k drawn from n - 1 colors always suffice for a witness
    for sizes in ([2, 3], [3, 3]):
        g, _ = complete_multipartite(sizes)
        res = is_choosable(g, 2)
        if not res.choosable:
            assert len(universe(res.witness)) <= g.n - 1


def test_complete_graph_choosability():
    k4 = Graph.from_edges(4, combinations(range(4), 2))
    assert is_choosable(k4, 3).choosable is False
    assert chi_list_exact(k4) == 4
