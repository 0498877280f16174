"""Exact and width-capped contraction-sequence search, and the tree contractor.

The search works on bitmasks over a dense relabelling of the input.  A live
vertex is named by the smallest internal label in its bag, so a state is fully
described by its partition; the red graph is a function of the partition
(bag homogeneity), which is what makes memoising failed partitions sound.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .contraction import ContractionSequence, SequenceBuilder, width as sequence_width
from .graph import RED, Trigraph, connected_components

log = logging.getLogger(__name__)

DEFAULT_CAP = 16
DECIDE_CAP = 24
# pairs are only scanned within distance two once the greedy heuristic runs on larger inputs
_GREEDY_LOCAL_ABOVE = 40


class SolverCapExceeded(RuntimeError):
    pass


def solver_cap() -> int:
    env = os.environ.get("TWW_SOLVER_CAP")
    return int(env) if env else DEFAULT_CAP


def decide_cap(c: int) -> int:
    cap = solver_cap()
    return max(cap, DECIDE_CAP) if c <= 2 else cap


@dataclass
class SolveResult:
    width: int
    sequence: ContractionSequence
    optimal: bool
    stats: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "width": self.width,
            "optimal": self.optimal,
            "steps": [[s.u, s.v, s.w] for s in self.sequence.steps],
        }
        if self.stats:
            out["stats"] = dict(self.stats)
        return out


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _State:
    """Masks of a trigraph on internal labels ``0..n-1``."""

    __slots__ = ("live", "black", "red", "bags")

    def __init__(self, live: int, black: List[int], red: List[int], bags: List[int]):
        self.live = live
        self.black = black
        self.red = red
        self.bags = bags

    @classmethod
    def of(cls, g: Trigraph) -> Tuple["_State", List[int]]:
        labels = g.vertices
        index = {v: i for i, v in enumerate(labels)}
        n = len(labels)
        black = [0] * n
        red = [0] * n
        for v in labels:
            i = index[v]
            for x, c in g.neighbor_colors(v).items():
                if c == RED:
                    red[i] |= 1 << index[x]
                else:
                    black[i] |= 1 << index[x]
        return cls((1 << n) - 1, black, red, [1 << i for i in range(n)]), labels

    def key(self) -> frozenset:
        return frozenset(self.bags[r] for r in _bits(self.live))

    def max_red(self) -> int:
        return max((self.red[r].bit_count() for r in _bits(self.live)), default=0)

    def evaluate(self, u: int, v: int) -> Tuple[int, int, int, bool]:
        """Merged masks, resulting red degree peak, new red edge count and twin flag."""
        both = (1 << u) | (1 << v)
        bu, bv, ru, rv = self.black[u], self.black[v], self.red[u], self.red[v]
        nr = (ru | rv | (bu ^ bv)) & ~both
        peak = nr.bit_count()
        red = self.red
        for x in _bits(nr):
            d = (red[x] & ~both).bit_count() + 1
            if d > peak:
                peak = d
        new_red = (nr & ~(ru | rv)).bit_count()
        twin = (bu & ~both) == (bv & ~both) and (ru & ~both) == (rv & ~both)
        return peak, new_red, nr, twin

    def merged(self, u: int, v: int, nr: int) -> "_State":
        both = (1 << u) | (1 << v)
        nb = self.black[u] & self.black[v] & ~both
        black = list(self.black)
        red = list(self.red)
        bags = list(self.bags)
        keep, drop = (u, v) if u < v else (v, u)
        bit_keep = 1 << keep
        for x in _bits((black[u] | black[v] | red[u] | red[v]) & ~both):
            black[x] &= ~both
            red[x] &= ~both
            if (nr >> x) & 1:
                red[x] |= bit_keep
            else:
                black[x] |= bit_keep
        black[keep], red[keep] = nb, nr
        black[drop] = red[drop] = 0
        bags[keep] = bags[u] | bags[v]
        bags[drop] = 0
        return _State(self.live & ~(1 << drop), black, red, bags)


def _candidates(state: _State, limit: int, local: bool = False):
    """Admissible pairs sorted by (is not twin, new red edges, u, v).

    A twin pair, when one exists, is returned alone: contracting twins yields
    an induced subtrigraph and can never hurt.
    """
    live = list(_bits(state.live))
    out = []
    for i, u in enumerate(live):
        near = None
        if local:
            near = state.black[u] | state.red[u]
            for x in _bits(near):
                near |= state.black[x] | state.red[x]
        for v in live[i + 1 :]:
            if near is not None and not (near >> v) & 1:
                continue
            peak, new_red, nr, twin = state.evaluate(u, v)
            if peak > limit:
                continue
            if twin:
                return [(0, 0, peak, u, v, nr)]
            out.append((1, new_red, peak, u, v, nr))
    if local and not out and len(live) > 1:
        return _candidates(state, limit, local=False)
    out.sort(key=lambda t: (t[0], t[1], t[3], t[4]))
    return out


def _search(state: _State, d: int) -> Optional[List[Tuple[int, int]]]:
    """Depth-first search for a completion of width <= d; memoises failures."""
    failed: Set[frozenset] = set()
    path: List[Tuple[int, int]] = []

    def go(s: _State) -> bool:
        if s.live & (s.live - 1) == 0:
            return True
        key = s.key()
        if key in failed:
            return False
        for _, _, _, u, v, nr in _candidates(s, d):
            path.append((u, v))
            if go(s.merged(u, v, nr)):
                return True
            path.pop()
        failed.add(key)
        return False

    return list(path) if go(state) else None


def _greedy(state: _State) -> List[Tuple[int, int]]:
    n = state.live.bit_count()
    local = n > _GREEDY_LOCAL_ABOVE
    pairs = []
    s = state
    while s.live & (s.live - 1):
        best = None
        for _, new_red, peak, u, v, nr in _candidates(s, 1 << 30, local=local):
            key = (peak, new_red, u, v)
            if best is None or key < best[0]:
                best = (key, u, v, nr)
            if peak == 0 and new_red == 0:
                break
        _, u, v, nr = best
        pairs.append((u, v))
        s = s.merged(u, v, nr)
    return pairs


def _to_sequence(g: Trigraph, labels: List[int], pairs: List[Tuple[int, int]]) -> ContractionSequence:
    b = SequenceBuilder(g)
    current = {i: v for i, v in enumerate(labels)}
    for u, v in pairs:
        w = b.contract(current[u], current[v])
        current[min(u, v)] = w
        current.pop(max(u, v))
    return b.sequence()


def greedy_sequence(g: Trigraph) -> ContractionSequence:
    """Deterministic heuristic: always take the pair with the lowest red-degree peak."""
    state, labels = _State.of(g)
    return _to_sequence(g, labels, _greedy(state))


def _decide_pairs(g: Trigraph, c: int) -> Optional[List[Tuple[int, int]]]:
    state, _ = _State.of(g)
    if state.max_red() > c:
        return None
    return _search(state, c)


def decide_width_at_most(g: Trigraph, c: int, cap: Optional[int] = None) -> Optional[ContractionSequence]:
    """A sequence of width <= c, or ``None`` when the twin-width exceeds c."""
    cap = decide_cap(c) if cap is None else cap
    if len(g) > cap:
        raise SolverCapExceeded(f"{len(g)} vertices exceed the exact-solver cap of {cap}")
    state, labels = _State.of(g)
    if state.max_red() > c:
        return None
    greedy = _greedy(state)
    seq = _to_sequence(g, labels, greedy)
    if sequence_width(seq) <= c:
        return seq
    pairs = _search(state, c)
    if pairs is None:
        return None
    return _to_sequence(g, labels, pairs)


def optimal_sequence(
    g: Trigraph,
    upper_hint: Optional[int] = None,
    cap: Optional[int] = None,
    jobs: int = 1,
) -> SolveResult:
    """A contraction sequence of width exactly tww(g).

    Widths are tried upwards from the initial red degree until the greedy
    incumbent; the first bound admitting a sequence is optimal.  With
    ``jobs > 1`` the candidate bounds are decided in parallel processes; the
    reported width and sequence are the same as in a serial run.
    """
    cap = solver_cap() if cap is None else cap
    if len(g) > cap:
        raise SolverCapExceeded(f"{len(g)} vertices exceed the exact-solver cap of {cap}")
    state, labels = _State.of(g)
    lower = state.max_red()
    incumbent = _to_sequence(g, labels, _greedy(state))
    upper = sequence_width(incumbent)
    bounds = list(range(lower, upper))
    found: Optional[Tuple[int, List[Tuple[int, int]]]] = None
    if jobs > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_decide_pairs, [g] * len(bounds), bounds))
        for d, pairs in zip(bounds, results):
            if pairs is not None:
                found = (d, pairs)
                break
    else:
        for d in bounds:
            pairs = _search(state, d)
            if pairs is not None:
                found = (d, pairs)
                break
    if found is None:
        result = SolveResult(upper, incumbent, True)
    else:
        result = SolveResult(found[0], _to_sequence(g, labels, found[1]), True)
    if upper_hint is not None and result.width > upper_hint:
        log.warning("optimal width %d exceeds the supplied upper hint %d", result.width, upper_hint)
    return result


# -- trees -------------------------------------------------------------------


def _tree_children(t: Trigraph, r: int) -> Dict[int, List[int]]:
    if r not in t:
        raise ValueError(f"root {r} is not a vertex of the tree")
    comps = connected_components(t)
    if len(comps) != 1 or t.num_edges() != len(t) - 1:
        raise ValueError("not a tree")
    children: Dict[int, List[int]] = {r: []}
    order = [r]
    for x in order:
        for y in sorted(t.neighbor_colors(x)):
            if y not in children:
                children[y] = []
                children[x].append(y)
                order.append(y)
    return children


def tree_sequence(t: Trigraph, r: int) -> ContractionSequence:
    """Contract a tree to one vertex with width <= 2, touching ``r`` only last.

    Subtrees are collapsed in post-order; each freshly collapsed child is
    merged at once with the single leaf accumulated from its earlier siblings,
    and the accumulated leaf is merged into its parent when the parent is done.
    """
    children = _tree_children(t, r)
    b = SequenceBuilder(t)
    acc: Dict[int, Optional[int]] = {}
    stack: List[Tuple[int, int]] = [(r, 0)]
    done: Dict[int, int] = {}
    while stack:
        v, i = stack.pop()
        kids = children[v]
        if i < len(kids):
            stack.append((v, i + 1))
            stack.append((kids[i], 0))
            continue
        # all children of v collapsed and merged into acc[v]
        leaf = acc.pop(v, None)
        done[v] = v if leaf is None else b.contract(leaf, v)
        if stack:
            parent = stack[-1][0]
            prev = acc.get(parent)
            acc[parent] = done[v] if prev is None else b.contract(prev, done[v])
    return b.sequence()
