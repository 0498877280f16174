"""Algorithms parameterised by the feedback edge number.

Two pipelines live here:

* :func:`sqrt_bound_sequence` builds a contraction sequence whose width grows
  like the square root of the feedback edge number: dangling trees become
  spikes, tree paths are shortened to three vertices, and the small remaining
  trigraph is finished on its all-black version.
* :func:`fen_approximate` returns a sequence of width at most tww(G) + 1
  through a quadratic kernel built from a tidy (H, P)-graph.

Every width or size bound the construction promises is re-checked on replay
and reported as :class:`BoundViolation` if it fails.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .contraction import ContractionSequence, SequenceBuilder, bag_steps, replay
from .exact import (
    SolveResult,
    SolverCapExceeded,
    decide_cap,
    decide_width_at_most,
    greedy_sequence,
    optimal_sequence,
    solver_cap,
    tree_sequence,
)
from .graph import (
    RED,
    Trigraph,
    bfs_distances,
    connected_components,
    dangling_paths,
    dangling_trees,
    feedback_edge_number,
    is_connected,
    two_core,
)

log = logging.getLogger(__name__)

H_FACTOR = 112
P_FACTOR = 4
EDGE_FACTOR = 29
# shortest degree-2 run turned into a dangling red path (three groups of two plus both ends)
MIN_TIDY_RUN = 8


class BoundViolation(AssertionError):
    """A width or size bound promised by a construction failed on replay."""


class PreconditionError(ValueError):
    pass


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise BoundViolation(message)


def kernel_size_bound(k: int) -> int:
    return 128 * k * k + 112 * k


# -- dangling trees and spikes -----------------------------------------------


@dataclass
class SpikeReduction:
    sequence: ContractionSequence
    trigraph: Trigraph
    spikes: Dict[int, int]


def _contract_dangling_trees(b: SequenceBuilder) -> Dict[int, int]:
    """Turn every maximal dangling tree into a spike; returns core vertex -> spike."""
    g = b.view()
    spikes: Dict[int, int] = {}
    for tree in dangling_trees(g):
        t = g.induced(tree.vertices)
        seq = tree_sequence(t, tree.root)
        ids = b.apply(seq)
        top = ids[seq.steps[-1].w] if seq.steps else tree.root
        if tree.attachment is None:
            continue
        c = tree.attachment[0] if tree.attachment[1] == tree.root else tree.attachment[1]
        if c in spikes:
            top = b.contract(spikes[c], top)
        spikes[c] = top
    return spikes


def contract_dangling_trees(g: Trigraph) -> SpikeReduction:
    """Contract each maximal dangling tree to a spike, at most one spike per vertex.

    The partial sequence has width at most 2.
    """
    b = SequenceBuilder(g)
    spikes = _contract_dangling_trees(b)
    _require(b.width <= 2, f"dangling-tree contraction reached width {b.width}")
    return SpikeReduction(b.sequence(), b.snapshot(), spikes)


@dataclass
class _Layout:
    """Spanning tree T of the core, its special vertices Q, and the paths of T - Q."""

    feedback: Set[Tuple[int, int]]
    q: Set[int]
    paths: List[List[int]]


def _path_preserving_feedback(g: Trigraph) -> Set[Tuple[int, int]]:
    """Minimum feedback edge set avoiding edges between two degree-2 vertices.

    Such edges go into the spanning forest first, so long degree-2 runs stay
    whole instead of being cut in the middle.
    """
    parent = {v: v for v in g.vertices}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ranked = sorted(g.edges(), key=lambda e: (not (g.degree(e[0]) == 2 and g.degree(e[1]) == 2), e))
    forest = set()
    for u, v in ranked:
        a, c = find(u), find(v)
        if a != c:
            parent[a] = c
            forest.add((u, v))
    return g.edges() - forest


def _layout(b: SequenceBuilder, spikes: Dict[int, int]) -> _Layout:
    spike_ids = set(spikes.values())
    core = [v for v in b.live() if v not in spike_ids]
    cg = b.view().induced(core)
    fes = _path_preserving_feedback(cg)
    tree_adj: Dict[int, Set[int]] = {v: set() for v in core}
    for u, v in cg.edges() - fes:
        tree_adj[u].add(v)
        tree_adj[v].add(u)
    q = {v for e in fes for v in e} | {v for v in core if len(tree_adj[v]) > 2}
    rest = set(core) - q
    paths = []
    seen: Set[int] = set()
    for s in sorted(rest):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in tree_adj[x]:
                if y in rest and y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        ends = sorted(v for v in comp if sum(1 for y in tree_adj[v] if y in comp) <= 1)
        order = [ends[0]]
        placed = {ends[0]}
        while True:
            nxt = [y for y in tree_adj[order[-1]] if y in comp and y not in placed]
            if not nxt:
                break
            order.append(nxt[0])
            placed.add(nxt[0])
        paths.append(order)
    paths.sort(key=lambda p: min(p[0], p[-1]))
    return _Layout(fes, q, paths)


def _absorb_path_spikes(b: SequenceBuilder, spikes: Dict[int, int], path: List[int]) -> List[int]:
    """Merge spikes hanging on a tree path into the path (paths of > 2 vertices)."""
    p = list(path)
    if len(p) <= 2:
        return p
    for i in range(1, len(p) - 1):
        if p[i] in spikes:
            p[i] = b.contract(p[i], spikes.pop(p[i]))
    if p[0] in spikes:
        p[1] = b.contract(spikes.pop(p[0]), p[1])
    if p[-1] in spikes:
        p[-2] = b.contract(spikes.pop(p[-1]), p[-2])
    return p


# -- red edges ---------------------------------------------------------------


def check_follow_preconditions(g: Trigraph) -> List[str]:
    """Problems preventing the red-to-black comparison; empty when it applies."""
    problems = []
    for v in g.vertices:
        if g.red_degree(v) > 2:
            problems.append(f"vertex {v} has red degree {g.red_degree(v)}")
    for u, v in sorted(g.red_edges()):
        if g.degree(u) > 2 and g.degree(v) > 2:
            problems.append(f"red edge {u}-{v} has no endpoint of degree <= 2")
    return problems


def follow_on_trigraph(g_red: Trigraph, c_black: ContractionSequence) -> ContractionSequence:
    """Replay a sequence of the all-black version of ``g_red`` on ``g_red`` itself.

    Requires red degree <= 2 and a low-degree endpoint on every red edge; then
    the width grows by at most 4 over the black sequence.
    """
    problems = check_follow_preconditions(g_red)
    if problems:
        raise PreconditionError("; ".join(problems))
    if c_black.initial != g_red.all_black():
        raise PreconditionError("sequence does not belong to the all-black version of the trigraph")
    followed = ContractionSequence(g_red, c_black.steps)
    w_red = replay(followed, keep=False).width
    w_black = replay(c_black, keep=False).width
    _require(w_red <= w_black + 4, f"followed width {w_red} exceeds {w_black} + 4")
    return followed


# -- the square-root construction --------------------------------------------


def _finish(g: Trigraph) -> Tuple[ContractionSequence, bool]:
    """Sequence for a graph: exact when small enough, greedy otherwise."""
    if len(g) <= solver_cap():
        return optimal_sequence(g).sequence, True
    return greedy_sequence(g), False


def sqrt_bound_sequence(g: Trigraph) -> SolveResult:
    if not is_connected(g):
        raise PreconditionError("input graph must be connected")
    if not g.is_graph():
        raise PreconditionError("input must be a graph without red edges")
    k = feedback_edge_number(g)
    if k == 0:
        seq = tree_sequence(g, min(g.vertices))
        w = replay(seq, keep=False).width
        return SolveResult(w, seq, False, stats={"k": 0, "prefix_width": w, "edges_beta": 0})

    b = SequenceBuilder(g)
    spikes = _contract_dangling_trees(b)
    layout = _layout(b, spikes)
    for path in layout.paths:
        p = _absorb_path_spikes(b, spikes, path)
        if len(p) > 3:
            x = p[1]
            for y in p[2:-1]:
                x = b.contract(x, y)
    prefix_width = b.width
    _require(prefix_width <= 2, f"preprocessing reached width {prefix_width}")
    g_beta = b.snapshot()
    edges_beta = g_beta.num_edges()
    _require(edges_beta <= EDGE_FACTOR * k, f"{edges_beta} edges left, more than {EDGE_FACTOR}k = {EDGE_FACTOR * k}")

    g_gamma = g_beta.all_black()
    dense, mapping = g_gamma.dense()
    c_dense, exact_finish = _finish(dense)
    back = {i: v for v, i in mapping.items()}
    bb = SequenceBuilder(g_gamma)
    bb.apply(c_dense, back)
    c_black = bb.sequence()
    followed = follow_on_trigraph(g_beta, c_black)
    b.apply(followed)
    seq = b.sequence()
    w = replay(seq, keep=False).width
    ceiling = math.ceil(math.sqrt(87 * k)) + 10
    if w > ceiling:
        log.warning("width %d is above the soft ceiling %d for k=%d", w, ceiling, k)
    stats = {
        "k": k,
        "prefix_width": prefix_width,
        "edges_beta": edges_beta,
        "vertices_beta": len(g_beta),
        "black_finish_width": replay(c_black, keep=False).width,
        "black_finish_exact": exact_finish,
        "soft_ceiling": ceiling,
        "within_ceiling": w <= ceiling,
    }
    return SolveResult(w, seq, False, stats=stats)


# -- tidy (H, P)-graphs ------------------------------------------------------


@dataclass
class TidyHPGraph:
    """A trigraph split into a core ``h_vertices`` and dangling red ``paths``.

    ``prefix`` is the partial sequence of the original graph that produced
    ``g``; :meth:`lift` prepends it to any sequence of ``g``.
    """

    g: Trigraph
    h_vertices: Set[int]
    paths: List[Tuple[int, ...]]
    source: Optional[Trigraph] = None
    prefix: Optional[ContractionSequence] = None
    stats: Dict[str, object] = field(default_factory=dict)

    @property
    def h(self) -> Trigraph:
        return self.g.induced(self.h_vertices)

    def lift(self, c: ContractionSequence) -> ContractionSequence:
        if self.prefix is None:
            return c
        b = SequenceBuilder(self.prefix.initial)
        b.apply(self.prefix)
        b.apply(c)
        return b.sequence()


def validate_tidy(t: TidyHPGraph, allow_empty: bool = False) -> List[str]:
    """Every violated condition of a tidy (H, P)-graph, as readable strings."""
    g = t.g
    out = []
    if not is_connected(g):
        out.append("trigraph is not connected")
    if not t.paths and not allow_empty:
        out.append("no dangling red paths")
    on_paths: Set[int] = set()
    for p in t.paths:
        if not p:
            out.append("empty path")
        for v in p:
            if v in on_paths or v in t.h_vertices:
                out.append(f"vertex {v} is used twice")
            on_paths.add(v)
    if on_paths | t.h_vertices != set(g.vertices):
        out.append("H and the paths do not cover the trigraph")
    for p in t.paths:
        for a, c in zip(p, p[1:]):
            if g.color(a, c) != RED:
                out.append(f"path edge {a}-{c} is not red")
        for v in p:
            if g.degree(v) != 2:
                out.append(f"path vertex {v} has degree {g.degree(v)}")
        if len(p) > 1 and any(g.has_edge(p[i], p[j]) for i in range(len(p)) for j in range(i + 2, len(p))):
            out.append("path has a chord")
    for u in t.h_vertices:
        into = [v for v in g.neighbor_colors(u) if v in on_paths]
        if into:
            if g.black_degree(u) != 0:
                out.append(f"attachment vertex {u} has black degree {g.black_degree(u)}")
            if len(into) > 1:
                out.append(f"attachment vertex {u} has {len(into)} path neighbours")
    return out


def _witnesses(g: Trigraph) -> List[List[int]]:
    """Small induced subgraphs worth solving to show tww(g) > 2.

    The branch vertices of the 2-core, then the 2-core without the interiors
    of its degree-2 runs of three or more vertices.
    """
    cg = g.induced(two_core(g))
    out = []
    branch = [v for v in cg.vertices if cg.degree(v) >= 3]
    if 3 <= len(branch):
        out.append(branch)
    runs = dangling_paths(cg)
    drop = {v for p in runs if len(p.vertices) >= 3 for v in p.vertices[1:-1]}
    rest = [v for v in cg.vertices if v not in drop]
    if rest != branch and len(rest) >= 3:
        out.append(rest)
    return [w for w in out if len(w) <= decide_cap(2)]


def _width_two_branch(g: Trigraph) -> Optional[SolveResult]:
    """Optimal sequence when tww(g) <= 2, ``None`` otherwise.

    Small inputs are decided exactly for 0, 1 and 2.  Larger inputs are
    decided for 2 after dangling trees are contracted, which keeps width 2.
    When even that is too big, an induced subgraph on the branch vertices of
    the 2-core with twin-width above 2 settles the question negatively, and a
    width-2 sequence of the trigraph left after shortening tree paths settles
    it positively.
    """
    if len(g) <= decide_cap(2):
        for c in (0, 1, 2):
            seq = decide_width_at_most(g, c)
            if seq is not None:
                return SolveResult(c, seq, True, stats={"route": "width<=2"})
        return None
    b = SequenceBuilder(g)
    spikes = _contract_dangling_trees(b)
    reduced = b.snapshot()
    if len(reduced) <= decide_cap(2):
        seq = decide_width_at_most(reduced, 2)
        if seq is None:
            return None
        b.apply(seq)
        full = b.sequence()
        return SolveResult(replay(full, keep=False).width, full, False, stats={"route": "width<=2 (reduced)"})
    for witness in _witnesses(g):
        if decide_width_at_most(g.induced(witness), 2) is None:
            return None
    if spikes or feedback_edge_number(g):
        for path in _layout(b, spikes).paths:
            p = _absorb_path_spikes(b, spikes, path)
            if len(p) > 3:
                x = p[1]
                for y in p[2:-1]:
                    x = b.contract(x, y)
        shortened = b.snapshot()
        if b.width <= 2 and len(shortened) <= decide_cap(2):
            seq = decide_width_at_most(shortened, 2)
            if seq is not None:
                b.apply(seq)
                full = b.sequence()
                w = replay(full, keep=False).width
                return SolveResult(w, full, False, stats={"route": "width<=2 (shortened)"})
    raise SolverCapExceeded(
        f"cannot decide twin-width <= 2: {len(reduced)} vertices remain after removing dangling trees"
    )


def tidy_preprocess(g: Trigraph, k: Optional[int] = None, small_width_branch: bool = True):
    """Either an optimal sequence of width <= 2 or a tidy (H, P)-graph.

    The tidy graph comes from contracting dangling trees, merging spikes into
    tree paths, and pairing up consecutive interior vertices of every path of
    at least ``MIN_TIDY_RUN`` vertices so that it turns red.  All of it has
    width <= 2 and is kept as the lift prefix.
    """
    if not is_connected(g):
        raise PreconditionError("input graph must be connected")
    if k is None:
        k = feedback_edge_number(g)
    if small_width_branch:
        early = _width_two_branch(g)
        if early is not None:
            return early

    b = SequenceBuilder(g)
    spikes = _contract_dangling_trees(b)
    layout = _layout(b, spikes)
    red_paths: List[Tuple[int, ...]] = []
    for path in layout.paths:
        p = _absorb_path_spikes(b, spikes, path)
        if len(p) < MIN_TIDY_RUN:
            continue
        inner = p[1:-1]
        groups = []
        i = 0
        while i < len(inner):
            if len(inner) - i == 3:
                y = b.contract(inner[i], inner[i + 1])
                y = b.contract(y, inner[i + 2])
                i += 3
            else:
                y = b.contract(inner[i], inner[i + 1])
                i += 2
            groups.append(y)
        red_paths.append(tuple(groups[1:-1]))
    _require(b.width <= 2, f"tidy preprocessing reached width {b.width}")
    on_paths = {v for p in red_paths for v in p}
    h_vertices = set(b.live()) - on_paths
    stats = {
        "k": k,
        "h_size": len(h_vertices),
        "num_paths": len(red_paths),
        "prefix_width": b.width,
    }
    if k and len(h_vertices) > H_FACTOR * k:
        log.warning("|V(H)| = %d exceeds %d k", len(h_vertices), H_FACTOR)
    if k and len(red_paths) > P_FACTOR * k:
        log.warning("|P| = %d exceeds %d k", len(red_paths), P_FACTOR)
    tidy = TidyHPGraph(b.snapshot(), h_vertices, red_paths, source=g, prefix=b.sequence(), stats=stats)
    problems = validate_tidy(tidy, allow_empty=True)
    if problems:
        raise BoundViolation("tidy preprocessing produced an invalid graph: " + "; ".join(problems))
    return tidy


# -- G-tidy trigraphs --------------------------------------------------------


@dataclass
class GTidyState:
    """A trigraph reached from a tidy graph ``G`` by the core-driven contractions.

    ``h`` and ``f`` are vertex sets of ``G``; ``level`` gives the distance from
    ``H`` of every vertex of ``f``.  The current trigraph lives in ``builder``.
    """

    tidy: TidyHPGraph
    builder: SequenceBuilder
    h: Set[int]
    f: Set[int]
    level: Dict[int, int]
    m: int
    tail_width: Optional[int] = None

    @property
    def trigraph(self) -> Trigraph:
        return self.builder.view()

    def h_part(self) -> List[int]:
        return [v for v in self.builder.live() if self.builder.bags[v] <= self.h]

    def f_part(self) -> List[int]:
        return [v for v in self.builder.live() if self.builder.bags[v] <= self.f]

    def level_of(self, v: int) -> int:
        return self.level[next(iter(self.builder.bags[v]))]


def _forest_children(state: GTidyState, v: int) -> List[int]:
    g = state.trigraph
    lv = state.level_of(v)
    return sorted(
        y for y in g.neighbor_colors(v) if state.builder.bags[y] <= state.f and state.level_of(y) == lv + 1
    )


def validate_gtidy(state: GTidyState) -> List[str]:
    """Violations of the seven G-tidy conditions (empty list when G-tidy)."""
    b = state.builder
    g = b.view()
    out = []
    hp = set(state.h_part())
    fp = set(state.f_part())
    for v in b.live():
        if v not in hp and v not in fp and len(b.bags[v]) != 1:
            out.append(f"item 1: vertex {v} mixes core, forest and path vertices")
    for v in hp:
        outside = [y for y in g.neighbor_colors(v) if y not in hp]
        if len(outside) > 1:
            out.append(f"item 2: core vertex {v} has {len(outside)} outside neighbours")
    for v in fp:
        levels = {state.level[x] for x in b.bags[v]}
        if len(levels) != 1:
            out.append(f"item 3: forest vertex {v} spans levels {sorted(levels)}")
    if out:
        return out
    fg = g.induced(fp)
    if feedback_edge_number(fg) != 0:
        out.append("item 4: the forest part has a cycle")
    for v in fp:
        if g.degree(v) > 3:
            out.append(f"item 4: forest vertex {v} has degree {g.degree(v)}")
    for comp in connected_components(fg):
        roots = [v for v in comp if state.level_of(v) == 1]
        if len(roots) != 1:
            out.append(f"item 4a: tree {comp[:3]}... has {len(roots)} level-1 vertices")
            continue
        r = roots[0]
        deg3 = [v for v in comp if g.degree(v) == 3]
        if deg3:
            sub = fg.induced(deg3)
            if len(connected_components(sub)) != 1:
                out.append(f"item 4b: degree-3 vertices of tree rooted at {r} are not connected")
            if r not in deg3:
                out.append(f"item 4c: degree-3 subtree misses the root {r}")
            limit = len(b.bags[r]) - 1
            for v in deg3:
                if state.level_of(v) > limit:
                    out.append(f"item 4c: vertex {v} at level {state.level_of(v)} exceeds {limit}")
    return out


def _check_gtidy(state: GTidyState, when: str) -> None:
    problems = validate_gtidy(state)
    if problems:
        raise BoundViolation(f"G-tidy invariant broken {when}: " + "; ".join(problems))


def _push_down(state: GTidyState, root: int) -> None:
    """Split the degree-3 part of a tree until its root has degree 2."""
    b = state.builder
    while b.view().degree(root) == 3:
        # deepest vertex reachable from the root through degree-3 vertices
        best = root
        frontier = [root]
        while frontier:
            nxt = []
            for v in frontier:
                for c in _forest_children(state, v):
                    if b.view().degree(c) == 3:
                        nxt.append(c)
            if nxt:
                best = min(nxt)
            frontier = nxt
        kids = _forest_children(state, best)
        if len(kids) != 2 or any(b.view().degree(x) != 2 for x in kids):
            raise BoundViolation(f"vertex {best} does not have two degree-2 children")
        b.contract(kids[0], kids[1])


def start_gtidy(tidy: TidyHPGraph) -> GTidyState:
    m = len(tidy.paths)
    for p in tidy.paths:
        if len(p) < 8 * m:
            raise PreconditionError(f"path of {len(p)} vertices is shorter than 8m = {8 * m}")
    g = tidy.g
    dist = bfs_distances(g, tidy.h_vertices)
    on_paths = {v for p in tidy.paths for v in p}
    f = {v for v in on_paths if dist[v] <= 2 * m}
    level = {v: dist[v] for v in f}
    state = GTidyState(tidy, SequenceBuilder(g), set(tidy.h_vertices), f, level, m)
    _check_gtidy(state, "at the start")
    return state


def contract_given_CH(tidy: TidyHPGraph, c_h: ContractionSequence) -> GTidyState:
    """Follow a sequence of the core while keeping the trigraph G-tidy.

    Before two core vertices that both see the paths are merged, their trees
    are pushed down and their roots merged.  The result has a single core
    vertex; the width stays within max(w(c_h) + 1, 4).
    """
    if set(c_h.initial.vertices) != tidy.h_vertices or c_h.initial != tidy.h:
        raise PreconditionError("core sequence does not start at the core of the tidy graph")
    state = start_gtidy(tidy)
    b = state.builder
    for bu, bv in bag_steps(c_h):
        u = b.vertex_with_bag(bu)
        v = b.vertex_with_bag(bv)
        g = b.view()
        out_u = [y for y in g.neighbor_colors(u) if not b.bags[y] <= state.h]
        out_v = [y for y in g.neighbor_colors(v) if not b.bags[y] <= state.h]
        if out_u and out_v:
            r_u, r_v = out_u[0], out_v[0]
            _push_down(state, r_u)
            _push_down(state, r_v)
            b.contract(r_u, r_v)
        b.contract(u, v)
        _check_gtidy(state, f"after merging core bags {sorted(bu)} and {sorted(bv)}")
    if len(state.h_part()) != 1:
        raise BoundViolation("core did not collapse to a single vertex")
    w_h = replay(c_h, keep=False).width
    _require(b.width <= max(w_h + 1, 4), f"core phase reached width {b.width} > max({w_h}+1, 4)")
    return state


def _tree_path(adj: Dict[int, Set[int]], a: int, z: int) -> List[int]:
    prev = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == z:
            break
        for y in sorted(adj[x]):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    out = [z]
    while out[-1] != a:
        out.append(prev[out[-1]])
    return out[::-1]


def contract_gtidy_tail(state: GTidyState) -> ContractionSequence:
    """Finish a G-tidy trigraph with one core vertex using width <= 4.

    The core vertex is merged into its root, every remaining path is shortened
    to the tree path joining its ends and zipped onto it, and the leftover tree
    is contracted bottom-up.  Returns the complete sequence of the tidy graph.
    """
    _check_gtidy(state, "before the tail")
    b = state.builder
    hp = state.h_part()
    if len(hp) != 1:
        raise PreconditionError(f"core has {len(hp)} vertices, expected 1")
    start = len(b.steps)
    if len(b) == 1:
        state.tail_width = b.profile[-1]
        return b.sequence()
    g = b.view()
    (u,) = hp
    fp = set(state.f_part())
    tree = {v for v in fp if g.degree(v) == 3}
    (r,) = list(g.neighbor_colors(u))
    root = b.contract(u, r)
    if r in tree:
        tree.discard(r)
        tree.add(root)

    def tree_adj() -> Dict[int, Set[int]]:
        cur = b.view()
        return {v: {y for y in cur.neighbor_colors(v) if y in tree} for v in tree}

    if tree:
        while True:
            cur = b.view()
            rest = [v for v in b.live() if v not in tree]
            if not rest:
                break
            pieces = connected_components(cur.induced(rest))
            piece = min(pieces, key=min)
            comp = set(piece)
            ends = sorted(v for v in comp if sum(1 for y in cur.neighbor_colors(v) if y in comp) <= 1)
            first = ends[0]
            order = [first]
            placed = {first}
            while True:
                nxt = [y for y in cur.neighbor_colors(order[-1]) if y in comp and y not in placed]
                if not nxt:
                    break
                order.append(nxt[0])
                placed.add(nxt[0])
            t_first = sorted(y for y in cur.neighbor_colors(order[0]) if y in tree)
            t_last = sorted(y for y in cur.neighbor_colors(order[-1]) if y in tree)
            if not t_first or not t_last:
                raise BoundViolation("a path is not attached to the degree-3 tree at both ends")
            v0 = t_first[0]
            v1 = t_last[-1] if len(order) > 1 or len(t_last) == 1 else t_last[1]
            q = _tree_path(tree_adj(), v0, v1)
            if len(order) < len(q):
                raise BoundViolation(f"path of {len(order)} vertices is shorter than its tree path of {len(q)}")
            path = list(order)
            while len(path) > len(q):
                mid = len(path) // 2
                path[mid - 1 : mid + 1] = [b.contract(path[mid - 1], path[mid])]
            for x, y in zip(path, q):
                z = b.contract(x, y)
                tree.discard(y)
                tree.add(z)
    rest = b.snapshot()
    if len(rest) > 1:
        b.apply(tree_sequence(rest, min(rest.vertices)))
    state.tail_width = max(b.profile[start:])
    _require(state.tail_width <= 4, f"tail reached width {state.tail_width}")
    return b.sequence()


def contract_tidy(tidy: TidyHPGraph, c_h: ContractionSequence) -> ContractionSequence:
    """Complete sequence of a tidy graph with long paths, of width max(w(c_h)+1, 4)."""
    state = contract_given_CH(tidy, c_h)
    return contract_gtidy_tail(state)


# -- the kernel --------------------------------------------------------------


@dataclass
class KernelResult:
    """Kernel trigraph on ``0..n-1`` plus the way back to the input graph.

    ``shorten`` contracts consecutive path vertices of the tidy graph until it
    becomes the kernel; ``labels`` sends kernel vertices to the vertices of the
    last trigraph of ``shorten``.
    """

    kernel: Trigraph
    tidy: TidyHPGraph
    shorten: ContractionSequence
    labels: Dict[int, int]
    k: int
    h_vertices: Set[int]
    paths: List[Tuple[int, ...]]

    @property
    def size_stats(self) -> Tuple[int, int]:
        return len(self.kernel), self.k

    def as_tidy(self) -> TidyHPGraph:
        return TidyHPGraph(self.kernel, set(self.h_vertices), list(self.paths))

    def lift(self, c: ContractionSequence) -> ContractionSequence:
        """Sequence of the input graph from a complete sequence of the kernel."""
        b = SequenceBuilder(self.tidy.prefix.initial if self.tidy.prefix else self.tidy.g)
        if self.tidy.prefix is not None:
            b.apply(self.tidy.prefix)
        ids = b.apply(self.shorten)
        b.apply(c, {v: ids[x] for v, x in self.labels.items()})
        return b.sequence()


def shorten_paths_kernel(tidy: TidyHPGraph) -> KernelResult:
    """Absorb short paths into the core and cut long ones to 8m vertices.

    Paths with fewer than 8m vertices join the core; paths with more than 8m
    vertices are shortened to length 8m - 1 by contracting consecutive
    vertices.
    """
    m = len(tidy.paths)
    k = int(tidy.stats.get("k", 0)) if tidy.stats else 0
    g = tidy.g
    b = SequenceBuilder(g)
    core = set(tidy.h_vertices)
    long_paths = []
    for p in tidy.paths:
        if len(p) < 8 * m:
            core |= set(p)
            continue
        path = list(p)
        while len(path) > 8 * m:
            mid = len(path) // 2
            path[mid - 1 : mid + 1] = [b.contract(path[mid - 1], path[mid])]
        long_paths.append(path)
    _require(b.width <= 2 or b.width <= g.max_red_degree(), f"path shortening reached width {b.width}")
    final = b.snapshot()
    dense, mapping = final.dense()
    labels = {i: v for v, i in mapping.items()}
    h_dense = {mapping[v] for v in core}
    paths_dense = [tuple(mapping[v] for v in p) for p in long_paths]
    if k:
        _require(
            len(dense) <= kernel_size_bound(k),
            f"kernel has {len(dense)} vertices, more than 128k^2 + 112k = {kernel_size_bound(k)}",
        )
    return KernelResult(dense, tidy, b.sequence(), labels, k, h_dense, paths_dense)


# -- end to end --------------------------------------------------------------


def fen_approximate(g: Trigraph) -> SolveResult:
    """A sequence of width at most tww(g) + 1, verified by replay.

    Graphs of twin-width at most 2 are solved optimally.  Otherwise the kernel
    is solved exactly when it fits the exact solver, or else its core is
    solved exactly and the paths are handled by the G-tidy construction.
    """
    if not is_connected(g):
        raise PreconditionError("input graph must be connected")
    k = feedback_edge_number(g)
    pre = tidy_preprocess(g, k)
    if isinstance(pre, SolveResult):
        pre.stats.update({"k": k})
        return pre
    kern = shorten_paths_kernel(pre)
    stats: Dict[str, object] = {
        "k": k,
        "route": None,
        "h_size": len(kern.h_vertices),
        "num_paths": len(kern.paths),
        "kernel_vertices": len(kern.kernel),
        "kernel_bound": kernel_size_bound(k),
        "prefix_width": pre.stats.get("prefix_width"),
    }
    if len(kern.kernel) <= solver_cap():
        sol = optimal_sequence(kern.kernel)
        seq = kern.lift(sol.sequence)
        stats.update(route="kernel", kernel_width=sol.width)
    elif len(kern.h_vertices) <= solver_cap():
        tidy_k = kern.as_tidy()
        h_sol = optimal_sequence(tidy_k.h)
        full = contract_tidy(tidy_k, h_sol.sequence)
        seq = kern.lift(full)
        stats.update(route="core", core_width=h_sol.width)
    else:
        raise SolverCapExceeded(
            f"kernel ({len(kern.kernel)} vertices) and its core ({len(kern.h_vertices)}) exceed the exact-solver cap"
        )
    w = replay(seq, keep=False).width
    stats["width"] = w
    return SolveResult(w, seq, False, stats=stats)
