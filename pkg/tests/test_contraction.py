import pytest
from hypothesis import given, settings, strategies as st

from twinwidth.contraction import (
    ContractionSequence,
    ContractionStep,
    InvalidSequenceError,
    ProgressiveWidth,
    SequenceBuilder,
    bag_history,
    concatenate,
    contract,
    extension,
    progressive_width_check,
    replay,
    restriction,
    trigraph_at,
    trigraph_from_bags,
    width,
)
from twinwidth.graph import BLACK, RED, Trigraph
from twinwidth.generators import figure1

from .oracle import Instance, max_red, quotient
from .strategies import graphs, random_pairs, trigraphs


def test_black_survives_only_when_shared():
    g = Trigraph(range(5), [(0, 2), (1, 2), (0, 3)], [(1, 4)])
    h = contract(g, 0, 1, 5)
    assert h.color(5, 2) == BLACK
    assert h.color(5, 3) == RED
    assert h.color(5, 4) == RED
    assert 0 not in h and 1 not in h


def test_fresh_ids_follow_the_maximum():
    g = Trigraph([2, 9, 4], [(2, 9)])
    seq = ContractionSequence.from_pairs(g, [(2, 9), (10, 4)])
    assert [s.w for s in seq.steps] == [10, 11]
    assert seq.is_complete


def test_invalid_steps_are_reported():
    g = figure1()
    with pytest.raises(InvalidSequenceError):
        replay(ContractionSequence(g, (ContractionStep(0, 0, 6),)))
    with pytest.raises(InvalidSequenceError):
        replay(ContractionSequence(g, (ContractionStep(0, 1, 7),)))
    with pytest.raises(InvalidSequenceError):
        replay(ContractionSequence(g, (ContractionStep(0, 1, 6), ContractionStep(0, 2, 7))))


def test_width_counts_the_initial_trigraph():
    g = Trigraph(range(4), [], [(0, 1), (0, 2), (0, 3)])
    seq = ContractionSequence.from_pairs(g, [(1, 2), (4, 3), (5, 0)])
    assert replay(seq).profile[0] == 3
    assert width(seq) == 3


def test_empty_and_single_vertex():
    assert width(ContractionSequence(Trigraph())) == 0
    single = ContractionSequence(Trigraph([5]))
    assert single.is_complete
    assert width(single) == 0


@settings(max_examples=150, deadline=None)
@given(trigraphs(max_n=8), st.integers(0, 10**6))
def test_replay_matches_bag_recomputation(g, seed):
    seq = ContractionSequence.from_pairs(g, random_pairs(g, seed))
    rep = replay(seq, keep=True)
    inst = Instance.of(g)
    for tri, bags, w in zip(rep.trigraphs, rep.bags, rep.profile):
        assert trigraph_from_bags(g, bags) == tri
        assert max_red(inst, [frozenset(b) for b in bags.values()]) == w
        q = quotient(inst, [frozenset(b) for b in bags.values()])
        by_bag = {frozenset(b): v for v, b in bags.items()}
        for (x, y), colour in q.items():
            assert tri.color(by_bag[x], by_bag[y]) == (RED if colour == "red" else BLACK)


def test_bag_history_and_trigraph_at():
    g = figure1()
    seq = ContractionSequence.from_pairs(g, [(0, 1), (6, 2), (3, 4), (8, 5), (7, 9)])
    hist = bag_history(seq)
    assert hist[0] == {v: frozenset([v]) for v in range(6)}
    assert hist[2][7] == frozenset({0, 1, 2})
    assert trigraph_at(seq, 4) == trigraph_from_bags(g, hist[3])
    assert trigraph_at(seq, 1) == g


def test_restriction_width_does_not_grow():
    g = figure1()
    seq = ContractionSequence.from_pairs(g, random_pairs(g, 3))
    sub = g.induced([1, 2, 3, 5])
    r = restriction(seq, sub)
    assert r.initial == sub
    assert r.is_complete
    assert width(r) <= width(seq)


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=2, max_n=8), st.integers(0, 10**6), st.integers(0, 10**6))
def test_restriction_of_extension_is_identity(g, seed, pick):
    keep = [v for i, v in enumerate(g.vertices) if (pick >> i) & 1] or g.vertices[:1]
    h = g.induced(keep)
    c0 = ContractionSequence.from_pairs(h, random_pairs(h, seed))
    ext = extension(c0, g)
    outside = {frozenset([v]) for v in g.vertices if v not in keep}
    for bh, bg in zip(bag_history(c0), bag_history(ext)):
        assert set(bg.values()) == set(bh.values()) | outside
    assert restriction(ext, h).pairs() == c0.pairs()


def test_progressive_width_split_past_the_end():
    g = Trigraph(range(4), [(0, 1), (2, 3), (1, 2)])
    seq = ContractionSequence.from_pairs(g, [(0, 2), (4, 1), (5, 3)])
    prof = replay(seq).profile
    n = len(seq)
    assert progressive_width_check(seq, ProgressiveWidth(max(prof), n + 1, 0))
    assert progressive_width_check(seq, ProgressiveWidth(max(prof[:1]), 2, max(prof[1:])))
    with pytest.raises(IndexError):
        progressive_width_check(seq, ProgressiveWidth(0, n + 2, 0))


def test_concatenate_resumes_at_the_last_trigraph():
    g = figure1()
    first = ContractionSequence.from_pairs(g, [(0, 1), (3, 4)])
    mid = replay(first).final
    rest = ContractionSequence.from_pairs(mid, random_pairs(mid, 0))
    both = concatenate(first, rest)
    assert both.is_complete
    assert width(both) == max(width(first), width(rest))
    with pytest.raises(ValueError):
        concatenate(first, ContractionSequence(g))


def test_builder_descendants():
    g = figure1()
    b = SequenceBuilder(g)
    x = b.contract(0, 1)
    y = b.contract(x, 5)
    assert b.descendant(0) == y
    assert b.vertex_with_bag({0, 1, 5}) == y
    assert b.bags[y] == {0, 1, 5}
