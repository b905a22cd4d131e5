import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from listlab.compression import (
    CompressionTrace,
    compress_universe,
    deficiency_step,
    replay_trace,
)
from listlab.errors import InvalidArgument, PreconditionViolation, VerificationFailure
from listlab.generators import inflate_universe
from listlab.graph import Graph, complete_multipartite
from listlab.solver import find_bad_assignment, universe
from oracles import brute_colorable, smallest_deficient
from strategies import graphs

K33, _ = complete_multipartite([3, 3])
K33_BAD = {v: frozenset(p) for v, p in enumerate([{0, 1}, {0, 2}, {1, 2}] * 2)}


def holders(g, lists):
    out: dict[int, list[int]] = {}
    for v in g.vertices:
        for c in lists[v]:
            out.setdefault(c, []).append(v)
    return out


def test_small_universe_is_a_fixpoint():
    out, trace = compress_universe(K33, K33_BAD)
    assert out == K33_BAD
    assert trace.steps == []
    assert trace.initial_universe == trace.final_universe == 3
    assert trace.verified_before is trace.verified_after is True


def test_universe_below_n_is_rejected_by_step():
    g = Graph(2)
    with pytest.raises(PreconditionViolation):
        deficiency_step(g, {0: {1}, 1: {1}})


def test_matchable_colors_give_no_step():
    g = Graph.from_edges(2, [(0, 1)])
    assert deficiency_step(g, {0: {1, 2}, 1: {1, 2}}) is None


def test_four_vertex_step():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    lists = {0: {0, 1}, 1: {2, 3}, 2: {2, 3}, 3: {2, 3}}
    step = deficiency_step(g, lists)
    assert step.deficient == smallest_deficient(holders(g, lists)) == frozenset({0, 1})
    assert step.replaced == frozenset({0})
    assert step.donor == 1
    assert set(step.matching.values()) == {0}


@st.composite
def wide_instances(draw):
    g = draw(graphs(min_n=2, max_n=5))
    lists = {
        v: frozenset(draw(st.sets(st.integers(0, 7), min_size=1, max_size=3))) for v in g.vertices
    }
    return g, lists


@given(wide_instances())
def test_step_invariants(inst):
    g, lists = inst
    if len(universe(lists)) < g.n:
        with pytest.raises(PreconditionViolation):
            deficiency_step(g, lists)
        return
    try:
        step = deficiency_step(g, lists)
    except InvalidArgument:
        assert brute_colorable(g, lists)
        return
    if step is None:
        assert smallest_deficient(holders(g, lists)) is None
        return
    b = step.deficient
    nbrs = {v for v in g.vertices if lists[v] & b}
    assert len(b) == len(smallest_deficient(holders(g, lists)))
    assert len(nbrs) == len(b) - 1
    assert set(step.matching.values()) == step.replaced == nbrs
    assert set(step.matching) < b
    assert all(c in lists[v] for c, v in step.matching.items())
    assert step.donor not in step.replaced
    assert step.donor == min(set(g.vertices) - nbrs)


def witnesses():
    for sizes, k in ([2, 4], 2), ([3, 3], 2), ([2, 3], 2):
        g, _ = complete_multipartite(sizes)
        bad = find_bad_assignment(g, k, budget=100_000, seed=1)
        if bad is not None:
            yield g, bad
    yield K33, K33_BAD


@pytest.mark.parametrize("g, bad", list(witnesses()))
def test_compress_inflated_witnesses(g, bad):
    big_g, big = inflate_universe(g, bad)
    assert len(universe(big)) >= big_g.n
    assert not brute_colorable(big_g, big)
    out, trace = compress_universe(big_g, big)
    assert len(universe(out)) < big_g.n
    assert trace.steps
    assert trace.verified_before and trace.verified_after
    assert not brute_colorable(big_g, out)
    assert all(len(out[v]) >= min(len(s) for s in big.values()) for v in big_g.vertices)
    assert replay_trace(big_g, big, trace) == out


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_random_inflations_stay_bad(seed):
    g, _ = complete_multipartite([3, 3])
    bad = find_bad_assignment(g, 2, budget=20_000, seed=seed, universe_size=4)
    if bad is None:
        return
    big_g, big = inflate_universe(g, bad, target=g.n + 2)
    out, trace = compress_universe(big_g, big)
    assert not brute_colorable(big_g, out)
    assert trace.final_universe < big_g.n


def test_colorable_input_is_rejected():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    lists = {0: {0, 1}, 1: {2, 3}, 2: {4, 5}}
    with pytest.raises(InvalidArgument):
        compress_universe(g, lists)
    # without the check the rewrite runs, but nothing is promised about the output
    out, trace = compress_universe(g, lists, verify=False)
    assert trace.final_universe < g.n and trace.verified_after is None


def test_step_rejects_matching_that_colors_everything():
    g = Graph.from_edges(2, [(0, 1)])
    with pytest.raises(InvalidArgument):
        deficiency_step(g, {0: {0, 1}, 1: {0, 2}})


def test_tampered_trace_fails_replay():
    big_g, big = inflate_universe(K33, K33_BAD, target=8)
    _, trace = compress_universe(big_g, big)
    step = trace.steps[0]
    bad_donor = replace(trace, steps=[replace(step, donor=min(step.replaced))] + trace.steps[1:])
    with pytest.raises(VerificationFailure):
        replay_trace(big_g, big, bad_donor)
    wrong_size = replace(trace, final_universe=trace.final_universe + 1)
    with pytest.raises(VerificationFailure):
        replay_trace(big_g, big, wrong_size)
    with pytest.raises(VerificationFailure):
        replay_trace(K33, K33_BAD, trace)


def test_trace_json_roundtrip():
    big_g, big = inflate_universe(K33, K33_BAD, target=9)
    out, trace = compress_universe(big_g, big)
    back = CompressionTrace.from_dict(json.loads(trace.to_json()))
    assert back == trace
    assert replay_trace(big_g, big, back) == out
