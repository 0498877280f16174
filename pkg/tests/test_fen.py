import math
import random

import pytest

from twinwidth.contraction import replay, width
from twinwidth.exact import SolveResult, optimal_sequence
from twinwidth.fen import (
    BoundViolation,
    PreconditionError,
    check_follow_preconditions,
    contract_dangling_trees,
    contract_given_CH,
    contract_gtidy_tail,
    contract_tidy,
    fen_approximate,
    follow_on_trigraph,
    kernel_size_bound,
    shorten_paths_kernel,
    sqrt_bound_sequence,
    start_gtidy,
    tidy_preprocess,
    validate_gtidy,
    validate_tidy,
)
from twinwidth.generators import cycle, tidy_instance, tree, tree_plus_k
from twinwidth.graph import Trigraph, dangling_trees

from .oracle import tww


def test_kernel_bound_values():
    assert kernel_size_bound(0) == 0
    assert kernel_size_bound(1) == 240
    assert kernel_size_bound(3) == 128 * 9 + 336


def test_dangling_trees_become_spikes():
    g = tree_plus_k(40, 3, 5)
    red = contract_dangling_trees(g)
    assert width(red.sequence) <= 2
    h = red.trigraph
    for core_vertex, spike in red.spikes.items():
        assert h.neighbors(spike) == [core_vertex]
    # nothing dangles except the spikes themselves
    for t in dangling_trees(h):
        assert len(t.vertices) == 1


def test_follow_preconditions_detected():
    bad = Trigraph(range(4), [], [(0, 1), (0, 2), (0, 3)])
    assert check_follow_preconditions(bad)
    with pytest.raises(PreconditionError):
        follow_on_trigraph(bad, optimal_sequence(bad.all_black()).sequence)


def test_follow_rejects_foreign_sequence():
    g = Trigraph(range(3), [(0, 1)], [(1, 2)])
    other = optimal_sequence(Trigraph.graph(3, [(0, 1)])).sequence
    with pytest.raises(PreconditionError):
        follow_on_trigraph(g, other)


def test_follow_on_red_cycle():
    g = Trigraph(range(6), [(0, 3)], [(i, (i + 1) % 6) for i in range(6)])
    black = optimal_sequence(g.all_black())
    followed = follow_on_trigraph(g, black.sequence)
    assert followed.initial == g
    assert width(followed) <= black.width + 4


@pytest.mark.parametrize("seed", range(6))
def test_sqrt_sequence_on_trees_plus_edges(seed):
    g = tree_plus_k(60 + 20 * seed, 2 + seed, seed)
    res = sqrt_bound_sequence(g)
    assert res.sequence.is_complete
    assert replay(res.sequence, keep=False).width == res.width
    assert res.stats["prefix_width"] <= 2
    assert res.stats["edges_beta"] <= 29 * res.stats["k"]
    assert res.stats["soft_ceiling"] == math.ceil(math.sqrt(87 * res.stats["k"])) + 10


def test_sqrt_handles_trees_and_rejects_trigraphs():
    assert sqrt_bound_sequence(tree(25, 1)).width <= 2
    with pytest.raises(PreconditionError):
        sqrt_bound_sequence(Trigraph(range(2), [], [(0, 1)]))
    with pytest.raises(PreconditionError):
        sqrt_bound_sequence(Trigraph.graph(4, [(0, 1), (2, 3)]))


def test_long_cycle_goes_through_the_width_two_branch():
    res = tidy_preprocess(cycle(40))
    assert isinstance(res, SolveResult)
    assert res.width == 2


def test_tidy_preprocess_without_branch():
    g = tree_plus_k(80, 3, 11)
    tidy = tidy_preprocess(g, small_width_branch=False)
    assert validate_tidy(tidy, allow_empty=True) == []
    assert replay(tidy.prefix, keep=False).width <= 2
    assert replay(tidy.prefix, keep=False).final == tidy.g
    for p in tidy.paths:
        assert all(tidy.g.red_degree(v) == 2 for v in p)


def test_validate_tidy_flags_black_attachment():
    t = tidy_instance(1, 0, core_size=5)
    assert validate_tidy(t) == []
    (p,) = t.paths
    end = t.g.neighbors(p[0])
    h_end = [x for x in end if x in t.h_vertices][0]
    other = [y for y in t.h_vertices if y != h_end and not t.g.has_edge(y, h_end)]
    if other:
        g2 = Trigraph(t.g.vertices, t.g.black_edges() | {tuple(sorted((h_end, other[0])))}, t.g.red_edges())
        t2 = type(t)(g2, t.h_vertices, t.paths)
        assert validate_tidy(t2)


@pytest.mark.parametrize("seed", range(8))
def test_gtidy_state_stays_valid(seed):
    m = 1 + seed % 2
    t = tidy_instance(m, seed, core_size=6 + seed % 3, extra=3)
    state = start_gtidy(t)
    assert validate_gtidy(state) == []
    ch = optimal_sequence(t.h)
    state = contract_given_CH(t, ch.sequence)
    assert validate_gtidy(state) == []
    assert state.builder.width <= max(ch.width + 1, 4)
    seq = contract_gtidy_tail(state)
    assert seq.is_complete
    assert state.tail_width <= 4


def test_core_sequence_must_match():
    t = tidy_instance(1, 2, core_size=6)
    wrong = optimal_sequence(Trigraph.graph(6, [(0, 1)])).sequence
    with pytest.raises(PreconditionError):
        contract_given_CH(t, wrong)


def test_short_paths_rejected_by_gtidy():
    t = tidy_instance(2, 0, core_size=6)
    short = type(t)(t.g, t.h_vertices, [t.paths[0][:5], t.paths[1]])
    with pytest.raises(PreconditionError):
        start_gtidy(short)


def test_kernel_shortens_to_8m_vertices():
    t = tidy_instance(2, 3, core_size=6, extra=9)
    kern = shorten_paths_kernel(t)
    assert all(len(p) == 16 for p in kern.paths)
    assert len(kern.kernel) == len(kern.h_vertices) + sum(len(p) for p in kern.paths)
    assert kern.kernel.vertices == list(range(len(kern.kernel)))
    full = contract_tidy(kern.as_tidy(), optimal_sequence(kern.as_tidy().h).sequence)
    assert full.is_complete
    lifted = kern.lift(full)
    assert lifted.initial == t.g
    assert lifted.is_complete


@pytest.mark.parametrize("seed", range(10))
def test_fen_within_one_of_optimum(seed):
    rng = random.Random(seed)
    g = tree_plus_k(rng.randint(8, 12), rng.randint(1, 3), seed)
    res = fen_approximate(g)
    assert replay(res.sequence, keep=False).width == res.width
    t = tww(g)
    assert t <= res.width <= t + 1


def test_fen_core_route_on_long_paths(monkeypatch):
    # a twin-width 3 core with two long cycles through it; the kernel is too
    # big for the exact solver but its core is not
    monkeypatch.setenv("TWW_SOLVER_CAP", "20")
    core = [(0, 7), (0, 8), (1, 5), (1, 6), (1, 7), (2, 4), (2, 5), (2, 6), (3, 4),
            (3, 6), (3, 8), (4, 5), (4, 7), (4, 8), (5, 8)]
    assert tww(Trigraph.graph(9, core)) == 3
    edges, n = list(core), 9
    for a, b in ((0, 1), (2, 3)):
        path = list(range(n, n + 80))
        n += 80
        edges += [(a, path[0]), (path[-1], b)] + list(zip(path, path[1:]))
    res = fen_approximate(Trigraph.graph(n, edges))
    assert res.stats["route"] == "core"
    assert res.stats["core_width"] == 3
    assert res.sequence.is_complete
    # the core is an induced subgraph, so tww >= 3 and width 4 is within one
    assert replay(res.sequence, keep=False).width == res.width <= 4


def test_fen_rejects_disconnected():
    with pytest.raises(PreconditionError):
        fen_approximate(Trigraph.graph(4, [(0, 1), (2, 3)]))


def test_bound_violation_is_an_assertion():
    assert issubclass(BoundViolation, AssertionError)


@pytest.mark.parametrize("seed", range(12))
def test_kernel_sandwich_small(seed):
    rng = random.Random(100 + seed)
    n, k = rng.randint(6, 14), rng.randint(1, 3)
    g = tree_plus_k(n, k, seed)
    kern = shorten_paths_kernel(tidy_preprocess(g, k, small_width_branch=False))
    t, tk = tww(g), tww(kern.kernel)
    # the lower half needs tww(g) >= 3; below that the width-2 prefix covers it
    assert t <= max(tk, 2)
    assert tk <= t + 1
