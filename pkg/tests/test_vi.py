import itertools

import pytest
from hypothesis import given, settings

from twinwidth.contraction import replay
from twinwidth.exact import optimal_sequence
from twinwidth.generators import random_replicated
from twinwidth.graph import Trigraph, connected_components
from twinwidth.vi import (
    LiftError,
    ThresholdTooSmall,
    critical_index,
    f_of_p,
    find_safe_point,
    h_equivalence,
    lift_sequence,
    reduced_graph,
    reduced_size_bound,
    twin_block_partition,
    vertex_integrity,
    vi_approximate,
)

from .oracle import tww
from .strategies import graphs


def brute_vertex_integrity(g: Trigraph) -> int:
    vs = g.vertices
    best = len(vs)
    for r in range(len(vs) + 1):
        for s in itertools.combinations(vs, r):
            rest = [v for v in vs if v not in s]
            big = max((len(c) for c in connected_components(g.induced(rest))), default=0)
            best = min(best, r + big)
    return best


def triangles_on_edge(copies: int) -> Trigraph:
    """K2 on {0, 1} with ``copies`` triangles, each seeing 0 and 1 through different corners."""
    edges = [(0, 1)]
    for i in range(copies):
        a, b, c = 2 + 3 * i, 3 + 3 * i, 4 + 3 * i
        edges += [(a, b), (b, c), (a, c), (0, a), (1, b)]
    return Trigraph.graph(2 + 3 * copies, edges)


def test_growth_function_exact():
    assert f_of_p(1) == 128
    assert f_of_p(2) == 2 ** 56
    assert reduced_size_bound(1) == 513
    assert reduced_size_bound(2) == 2 + 4 * 2 ** 56 * 2 ** 8
    assert reduced_size_bound(2, threshold=3) == 2 + 4 * 3 * 256


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=8))
def test_vertex_integrity_matches_brute_force(g):
    d = vertex_integrity(g, cap=8)
    assert d.p == brute_vertex_integrity(g)
    d.check(g)


def test_twin_blocks_group_isomorphic_components():
    g = triangles_on_edge(5)
    d = vertex_integrity(g)
    assert d.s == {0, 1}
    classes = twin_block_partition(g, d)
    assert len(classes) == 1
    cls = classes[0]
    assert len(cls.members) == 5
    iso = cls.iso(1, 3)
    for x, y in iso.items():
        assert g.neighbors(x) and ({0, 1} & set(g.neighbors(x))) == ({0, 1} & set(g.neighbors(y)))


def test_attachment_splits_classes():
    # two pendant edges, one hanging from 0 and one from 1: not twins
    g = Trigraph.graph(6, [(0, 1), (0, 2), (2, 3), (1, 4), (4, 5)])
    d = vertex_integrity(g)
    classes = twin_block_partition(g, d)
    assert all(len(c.members) == 1 for c in classes)


def test_reduced_graph_keeps_threshold_members():
    g = triangles_on_edge(7)
    d = vertex_integrity(g)
    classes = twin_block_partition(g, d)
    red = reduced_graph(g, d, classes, threshold=3)
    assert len(red.g_prime) == 2 + 9
    assert len(red.removed) == 4
    with pytest.raises(ValueError):
        reduced_graph(g, d, classes, threshold=0)


def test_h_equivalence_fingerprints():
    g = triangles_on_edge(2)
    eq = h_equivalence(g, [0, 1], (2, 3, 4))
    assert eq.attached == {0, 1}
    assert eq.fingerprint[0] == {2}
    assert eq.fingerprint[1] == {3}
    assert len(eq.classes) == 2


def test_critical_index_and_safe_point():
    g = triangles_on_edge(6)
    d = vertex_integrity(g)
    classes = twin_block_partition(g, d)
    red = reduced_graph(g, d, classes, threshold=4)
    sol = optimal_sequence(red.g_prime)
    for comp, _ in red.removed:
        rep = critical_index(g, d.s, sol.sequence, comp)
        assert rep.violations == []
        assert rep.index is None or 2 <= rep.index <= rep.length
        try:
            safe = find_safe_point(g, d.s, sol.sequence, comp, classes, rep)
        except ThresholdTooSmall:
            continue
        assert safe.delta == (rep.length if rep.index is None else rep.index - 1)


def test_lift_doubles_at_most():
    g = triangles_on_edge(12)
    d = vertex_integrity(g)
    classes = twin_block_partition(g, d)
    red = reduced_graph(g, d, classes, threshold=4)
    sol = optimal_sequence(red.g_prime)
    seq = lift_sequence(g, d, red, classes, sol.sequence)
    assert seq.initial == g
    assert seq.is_complete
    assert replay(seq, keep=False).width <= 2 * sol.width


def test_vi_approximate_end_to_end():
    g = triangles_on_edge(12)
    res = vi_approximate(g, threshold_override=4)
    assert res.stats["guarantee"] == "2-approx"
    assert res.width <= 2 * tww(g.induced(range(14)))
    assert replay(res.sequence, keep=False).width == res.width


@pytest.mark.parametrize("seed", [0, 9, 17, 40, 52])
def test_vi_on_replicated_instances(seed):
    g = random_replicated(seed, core_size=1 + seed % 2, block_types=1 + (seed // 2) % 2, copies=6 + seed % 3)
    res = vi_approximate(g, threshold_override=3 + seed % 3, p_cap=5)
    assert res.sequence.is_complete
    assert replay(res.sequence, keep=False).width == res.width
    if res.stats["guarantee"] == "2-approx":
        assert res.width <= 2 * res.stats["width_gprime"]


def test_vi_requires_connected():
    with pytest.raises(ValueError):
        vi_approximate(Trigraph.graph(4, [(0, 1), (2, 3)]))


def test_lift_error_is_an_assertion():
    assert issubclass(LiftError, AssertionError)
