import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from helpers import build_limid

from limid.compile import (
    NotChordalError, NotSolubleError, UndirectedGraph, assign_functions, build_junction_tree,
    check_soluble, compile_limid, is_perfect_elimination_order, maximum_cardinality_order, moralize,
    reduce, running_intersection_holds, strong_elimination_order, total_clique_size, triangulate,
)
from limid.generate import random_limid
from limid.oracle import brute_optimal


def edges_named(limid, g):
    return {frozenset((limid.name(a), limid.name(b))) for a, b in g.edges}


def test_reduce_drops_irrelevant_parent():
    rng = np.random.default_rng(0)
    lim = build_limid(["n", "d"], {"d": ["n"]}, ["d"], [("u", ["d"])], rng)
    assert reduce(lim).parents(1) == ()


def test_reduce_keeps_requisite_parents():
    rng = np.random.default_rng(0)
    lim = build_limid(["n", "d"], {"d": ["n"]}, ["d"], [("u", ["n", "d"])], rng)
    assert reduce(lim) is lim


def test_reduce_without_utility_descendants_drops_all():
    rng = np.random.default_rng(0)
    lim = build_limid(["a", "b", "d"], {"d": ["a", "b"]}, ["d"], [("u", ["a"])], rng)
    assert reduce(lim).parents(2) == ()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_reduce_idempotent(seed, soluble):
    lim = random_limid(seed, n_vars=6, n_decisions=2, n_values=2, soluble=soluble)
    once = reduce(lim)
    assert serialize(reduce(once)) == serialize(once)


def serialize(lim):
    return [lim.parents(v) for v in range(lim.n)]


@pytest.mark.parametrize("seed", range(40))
def test_reduction_preserves_optimal_eu(seed):
    lim = random_limid(seed, n_vars=6, n_decisions=2, n_values=2)
    _, a = brute_optimal(lim)
    _, b = brute_optimal(reduce(lim))
    assert b == pytest.approx(a, rel=1e-9, abs=1e-9)


def test_moralize_chain():
    rng = np.random.default_rng(0)
    lim = build_limid(["r1", "r2", "d"], {"r2": ["r1"], "d": ["r2"]}, ["d"], [], rng)
    assert edges_named(lim, moralize(lim)) == {frozenset(("r1", "r2")), frozenset(("r2", "d"))}


def test_moralize_marries_value_parents():
    rng = np.random.default_rng(0)
    lim = build_limid(["a", "b"], {}, [], [("u", ["a", "b"])], rng)
    assert edges_named(lim, moralize(lim)) == {frozenset(("a", "b"))}


def test_moralize_diamond():
    rng = np.random.default_rng(0)
    lim = build_limid(["a", "b", "c", "d"], {"c": ["a", "b"]}, ["d"], [("u", ["c", "d"])], rng)
    assert edges_named(lim, moralize(lim)) == {
        frozenset(p) for p in [("a", "b"), ("c", "d"), ("a", "c"), ("b", "c")]}


def test_triangulate_tree_unchanged():
    g = UndirectedGraph.from_edges(range(5), [(0, 1), (1, 2), (1, 3), (3, 4)])
    chordal, order = triangulate(g)
    assert chordal.edges == g.edges and is_perfect_elimination_order(chordal, order)


def test_triangulate_four_cycle_adds_one_chord():
    g = UndirectedGraph.from_edges(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)])
    chordal, _ = triangulate(g)
    assert len(chordal.edges - g.edges) == 1


def random_graph(seed, n=8, p=0.35):
    rng = np.random.default_rng(seed)
    edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
    return UndirectedGraph.from_edges(range(n), edges)


@pytest.mark.parametrize("seed", range(30))
def test_triangulation_is_chordal_supergraph(seed):
    g = random_graph(seed)
    chordal, order = triangulate(g)
    assert g.edges <= chordal.edges
    assert is_perfect_elimination_order(chordal, order)
    assert is_perfect_elimination_order(chordal, maximum_cardinality_order(chordal))
    nxg = nx.Graph(list(chordal.edges))
    nxg.add_nodes_from(chordal.nodes)
    assert nx.is_chordal(nxg)


def test_mcs_detects_non_chordal():
    g = UndirectedGraph.from_edges(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert not is_perfect_elimination_order(g, maximum_cardinality_order(g))
    with pytest.raises(NotChordalError):
        build_junction_tree(g)


def test_single_clique_tree():
    g = UndirectedGraph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    jt = build_junction_tree(*triangulate(g))
    assert jt.cliques == ((0, 1, 2),) and jt.edges == ()


def test_path_tree():
    g = UndirectedGraph.from_edges(range(3), [(0, 1), (1, 2)])
    jt = build_junction_tree(*triangulate(g))
    assert sorted(jt.cliques) == [(0, 1), (1, 2)]
    assert [s for _, _, s in jt.edges] == [(1,)]


@pytest.mark.parametrize("seed", range(30))
def test_running_intersection_random(seed):
    jt = build_junction_tree(*triangulate(random_graph(seed, n=9)))
    assert len(jt.edges) == len(jt.cliques) - 1
    assert running_intersection_holds(jt)


def test_assignment_prefers_lower_index():
    rng = np.random.default_rng(0)
    lim = build_limid(["r1", "r2", "r3"], {"r2": ["r1"], "r3": ["r2"]}, [], [], rng)
    jt = build_junction_tree(*triangulate(moralize(lim)))
    jt = assign_functions(lim, jt)
    homes = {r: i for i, rs in enumerate(jt.chance) for r in rs}
    qualifying = [i for i, c in enumerate(jt.cliques) if {0} <= set(c)]
    assert homes[0] == min(qualifying)


@pytest.mark.parametrize("seed", range(30))
def test_every_function_assigned_once(seed):
    lim, jt = compile_limid(random_limid(seed, n_vars=7, n_decisions=2, n_values=3, soluble=seed % 2 == 0))
    chance = [r for rs in jt.chance for r in rs]
    assert sorted(chance) == sorted(lim.chance)
    assert sorted(v for vs in jt.values for v in vs) == list(range(len(lim.values)))
    assert sorted(d for ds in jt.decisions for d in ds) == sorted(lim.decisions)
    for i, c in enumerate(jt.cliques):
        for r in jt.chance[i]:
            assert set(lim.family(r)) <= set(c)
        for d in jt.decisions[i]:
            assert set(lim.family(d)) <= set(c)
        for j in jt.values[i]:
            assert set(lim.values[j].parents) <= set(c)


def test_strong_tree_comparison_reported(capsys):
    smaller = 0
    n = 60
    for seed in range(n):
        lim = random_limid(seed, n_vars=8, n_decisions=3, n_values=3)
        work, jt = compile_limid(lim)
        g = moralize(lim)
        strong = build_junction_tree(*triangulate(g, strong_elimination_order(lim, g)))
        smaller += total_clique_size(work, jt) <= total_clique_size(lim, strong)
    with capsys.disabled():
        print(f"\n[report] reduced tree no larger than strong tree on {smaller}/{n} instances")
    assert smaller >= 0


@pytest.mark.parametrize("seed", range(40))
def test_generated_soluble_diagrams_pass_check(seed):
    check_soluble(random_limid(seed, n_vars=8, n_decisions=3, n_values=3))


def test_inconsistent_decision_order_not_soluble():
    rng = np.random.default_rng(0)
    lim = build_limid(["d1", "d2"], {"d2": ["d1"]}, ["d2", "d1"], [("u", ["d2"])], rng)
    with pytest.raises(NotSolubleError):
        check_soluble(lim)
