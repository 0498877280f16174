import pytest
from hypothesis import given, settings

from twinwidth.graph import (
    BLACK,
    RED,
    Trigraph,
    UnknownVertexError,
    connected_components,
    dangling_paths,
    dangling_trees,
    feedback_edge_number,
    feedback_edge_set,
    is_forest,
    two_core,
)
from twinwidth.generators import cycle, tree, tree_plus_k

from .strategies import graphs


def test_colours_and_degrees():
    g = Trigraph(range(4), [(0, 1), (1, 2)], [(2, 3), (0, 2)])
    assert g.color(0, 1) == BLACK
    assert g.color(3, 2) == RED
    assert g.color(0, 3) is None
    assert g.red_degree(2) == 2
    assert g.black_degree(2) == 1
    assert g.max_red_degree() == 2
    assert not g.is_graph()
    assert g.all_black().is_graph()


def test_rejects_bad_edges():
    with pytest.raises(ValueError):
        Trigraph(range(2), [(0, 0)])
    with pytest.raises(UnknownVertexError):
        Trigraph(range(2), [(0, 5)])
    with pytest.raises(ValueError):
        Trigraph(range(2), [(0, 1)], [(1, 0)])


def test_induced_keeps_colours():
    g = Trigraph(range(5), [(0, 1), (1, 2)], [(2, 3), (3, 4)])
    h = g.induced([1, 2, 3])
    assert h.vertices == [1, 2, 3]
    assert h.black_edges() == {(1, 2)}
    assert h.red_edges() == {(2, 3)}


def test_dense_relabel():
    g = Trigraph([3, 7, 9], [(3, 9)], [(7, 9)])
    d, mapping = g.dense()
    assert d.vertices == [0, 1, 2]
    assert d.relabel({v: k for k, v in mapping.items()}) == g


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=10))
def test_feedback_edge_number_is_cyclomatic(g):
    comps = connected_components(g)
    k = feedback_edge_number(g)
    assert k == g.num_edges() - len(g) + len(comps)
    rest = Trigraph(g.vertices, g.edges() - feedback_edge_set(g))
    assert is_forest(rest)
    assert len(feedback_edge_set(g)) == k


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=10))
def test_two_core_has_min_degree_two(g):
    core = two_core(g)
    h = g.induced(core)
    assert all(h.degree(v) >= 2 for v in core)
    # everything outside the core lies in a dangling tree
    covered = set().union(*[t.vertices for t in dangling_trees(g)]) if dangling_trees(g) else set()
    assert covered == set(g.vertices) - core


def test_tree_and_cycle_shapes():
    assert feedback_edge_number(tree(30, 4)) == 0
    assert feedback_edge_number(cycle(9)) == 1
    assert feedback_edge_number(tree_plus_k(40, 7, 2)) == 7
    assert two_core(tree(20, 1)) == set()
    assert two_core(cycle(5)) == set(range(5))


def test_dangling_paths_on_theta():
    # two branch vertices joined by three paths of lengths 2, 3 and 1
    g = Trigraph.graph(6, [(0, 2), (2, 1), (0, 3), (3, 4), (4, 1), (0, 5), (5, 1)])
    paths = sorted(p.vertices for p in dangling_paths(g))
    assert sorted(map(sorted, paths)) == [[2], [3, 4], [5]]
    for p in dangling_paths(g):
        assert set(p.ends) == {0, 1}


def test_dangling_tree_attachment():
    g = Trigraph.graph(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (3, 5)])
    (t,) = dangling_trees(g)
    assert t.root == 3
    assert t.vertices == {3, 4, 5}
    assert t.attachment == (2, 3)
