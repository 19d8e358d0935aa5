import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_comparability, brute_has_induced_c4, brute_is_interval, brute_stable_set, random_graph
from packclass.graphs import (
    SimpleGraph,
    find_induced_c4,
    find_transitive_orientation,
    intersection_graph,
    interval_realization,
    is_interval_graph,
    max_weight_stable_set,
)


def cycle(n):
    return SimpleGraph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return SimpleGraph(n, itertools.combinations(range(n), 2))


P3 = SimpleGraph(3, [(0, 1), (1, 2)])


@st.composite
def graphs(draw, max_n=8):
    n = draw(st.integers(0, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return SimpleGraph(n, [e for e, k in zip(pairs, keep) if k])


def test_graph_rejects_self_loops_and_asymmetry():
    with pytest.raises(ValueError):
        SimpleGraph(2, [(1, 1)])
    with pytest.raises(ValueError):
        SimpleGraph.from_rows([0b10, 0b00])


def test_induced_c4_examples():
    a, b, c, d = find_induced_c4(cycle(4))
    g = cycle(4)
    assert g.has_edge(a, b) and g.has_edge(b, c) and g.has_edge(c, d) and g.has_edge(d, a)
    assert not g.has_edge(a, c) and not g.has_edge(b, d)
    assert find_induced_c4(complete(4)) is None


def test_induced_c4_matches_subset_search():
    rng = random.Random(3)
    for _ in range(300):
        g = random_graph(rng, rng.randint(0, 10), rng.random())
        witness = find_induced_c4(g)
        assert (witness is not None) == brute_has_induced_c4(g)
        if witness:
            a, b, c, d = witness
            assert g.has_edge(a, b) and g.has_edge(b, c) and g.has_edge(c, d) and g.has_edge(d, a)
            assert not g.has_edge(a, c) and not g.has_edge(b, d)


def test_transitive_orientation_of_path():
    o = find_transitive_orientation(P3)
    assert o is not None and o.orients(P3) and o.is_transitive()
    # the middle vertex is a common source or a common sink
    assert o.arcs() in ([(1, 0), (1, 2)], [(0, 1), (2, 1)])


def test_five_cycle_has_no_transitive_orientation():
    assert not brute_comparability(cycle(5))
    assert find_transitive_orientation(cycle(5)) is None


@settings(max_examples=300, deadline=None)
@given(graphs(max_n=7))
def test_transitive_orientation_matches_exhaustive_orientations(g):
    o = find_transitive_orientation(g)
    if len(g.edges()) <= 12:
        assert (o is not None) == brute_comparability(g)
    if o is not None:
        assert o.orients(g)
        for u in range(g.n):
            for v in range(g.n):
                for w in range(g.n):
                    if o.succ[u] >> v & 1 and o.succ[v] >> w & 1:
                        assert o.succ[u] >> w & 1


def test_interval_examples():
    assert is_interval_graph(P3)
    assert intersection_graph([(0, 2), (1, 3), (2, 4)]) == P3
    assert not is_interval_graph(cycle(4))
    assert is_interval_graph(SimpleGraph(0))
    # comparability complement but chordless C4 present, and vice versa
    assert not is_interval_graph(cycle(5))


@settings(max_examples=400, deadline=None)
@given(graphs(max_n=8))
def test_interval_recognition_matches_vertex_order_search(g):
    assert is_interval_graph(g) == brute_is_interval(g)


@settings(max_examples=300, deadline=None)
@given(graphs(max_n=8))
def test_realization_reproduces_graph(g):
    intervals = interval_realization(g)
    assert (intervals is not None) == is_interval_graph(g)
    if intervals is not None:
        assert all(a < b for a, b in intervals)
        assert intersection_graph(intervals) == g


@settings(max_examples=200, deadline=None)
@given(graphs(max_n=8), st.randoms(use_true_random=False))
def test_interval_recognition_ignores_labels(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    assert is_interval_graph(g.relabel(perm)) == is_interval_graph(g)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10), st.integers(1, 4)), max_size=9))
def test_intersection_graphs_are_interval(spans):
    g = intersection_graph([(a, a + d) for a, d in spans])
    assert is_interval_graph(g)


def test_stable_set_examples():
    assert max_weight_stable_set(SimpleGraph(3), [3, 4, 5]) == (12, frozenset({0, 1, 2}))
    assert max_weight_stable_set(complete(3), [3, 4, 5]) == (5, frozenset({2}))
    with pytest.raises(ValueError):
        max_weight_stable_set(SimpleGraph(2), [1])


@settings(max_examples=300, deadline=None)
@given(graphs(max_n=12).flatmap(lambda g: st.tuples(st.just(g), st.lists(st.integers(0, 9), min_size=g.n, max_size=g.n))))
def test_stable_set_matches_subset_enumeration(case):
    g, w = case
    value, chosen = max_weight_stable_set(g, w)
    assert value == brute_stable_set(g, w)
    assert value == sum(w[v] for v in chosen)
    assert all(not g.has_edge(a, b) for a, b in itertools.combinations(chosen, 2))
    assert value >= max(w, default=0)
