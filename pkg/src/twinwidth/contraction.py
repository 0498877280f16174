"""Contractions, contraction sequences and everything derived from them.

Vertex naming follows one convention throughout: the i-th contraction
(0-based) of a sequence on a trigraph whose largest vertex id is ``M`` creates
vertex ``M + 1 + i``.  For the usual dense input ``0..n-1`` that is ``n + i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .graph import BLACK, RED, Trigraph, UnknownVertexError

Bag = FrozenSet[int]


class InvalidSequenceError(ValueError):
    """A step refers to a dead vertex, repeats a vertex, or names the wrong product."""

    def __init__(self, index: int, message: str):
        super().__init__(f"step {index + 1}: {message}")
        self.index = index


@dataclass(frozen=True)
class ContractionStep:
    u: int
    v: int
    w: int


@dataclass(frozen=True)
class ContractionSequence:
    initial: Trigraph
    steps: Tuple[ContractionStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def first_fresh(self) -> int:
        return fresh_base(self.initial)

    @property
    def is_complete(self) -> bool:
        return len(self.steps) == max(len(self.initial) - 1, 0)

    def __len__(self) -> int:
        """Number of trigraphs, i.e. steps + 1."""
        return len(self.steps) + 1

    def pairs(self) -> List[Tuple[int, int]]:
        return [(s.u, s.v) for s in self.steps]

    def prefix(self, num_steps: int) -> "ContractionSequence":
        return ContractionSequence(self.initial, self.steps[:num_steps])

    @classmethod
    def from_pairs(cls, initial: Trigraph, pairs: Iterable[Tuple[int, int]]) -> "ContractionSequence":
        """Build a sequence from ``(u, v)`` pairs, assigning products by convention."""
        b = SequenceBuilder(initial)
        for u, v in pairs:
            b.contract(u, v)
        return b.sequence()


def fresh_base(g: Trigraph) -> int:
    return max(g.vertices, default=-1) + 1


# -- the contraction itself --------------------------------------------------


def _contract_adj(adj: Dict[int, Dict[int, int]], u: int, v: int, w: int) -> List[int]:
    """Contract ``u`` and ``v`` into ``w`` in place; returns the neighbours of ``w``."""
    nu = adj.pop(u)
    nv = adj.pop(v)
    nu.pop(v, None)
    nv.pop(u, None)
    nw: Dict[int, int] = {}
    for x in nu.keys() | nv.keys():
        cu = nu.get(x)
        cv = nv.get(x)
        colour = BLACK if cu == BLACK and cv == BLACK else RED
        nw[x] = colour
        nx = adj[x]
        nx.pop(u, None)
        nx.pop(v, None)
        nx[w] = colour
    adj[w] = nw
    return list(nw)


def contract(g: Trigraph, u: int, v: int, w: int) -> Trigraph:
    """Return the trigraph obtained by contracting ``u`` and ``v`` into ``w``.

    ``w`` is black to ``x`` iff both ``xu`` and ``xv`` are black; it is red to
    any other common or private neighbour.
    """
    if u == v:
        raise ValueError("cannot contract a vertex with itself")
    if u not in g or v not in g:
        raise UnknownVertexError(f"unknown vertex in contraction {u}, {v}")
    if w in g and w not in (u, v):
        raise ValueError(f"product id {w} is already in use")
    h = g.copy()
    _contract_adj(h._adj, u, v, w)
    return h


# -- single-owner builder ----------------------------------------------------


class SequenceBuilder:
    """Mutable replay state: the current trigraph, bags, steps and widths.

    Descendants are found through a union-find forest over vertex ids
    (original vertices and products), linking both contracted vertices to the
    product.
    """

    def __init__(self, g: Trigraph):
        self.initial = g
        self._adj = {v: dict(nb) for v, nb in g._adj.items()}
        self.bags: Dict[int, Bag] = {v: frozenset((v,)) for v in self._adj}
        self._parent: Dict[int, int] = {v: v for v in self._adj}
        self.steps: List[ContractionStep] = []
        self.next_id = fresh_base(g)
        self._red = {v: sum(1 for c in nb.values() if c == RED) for v, nb in self._adj.items()}
        self.profile: List[int] = [max(self._red.values(), default=0)]

    # state

    @property
    def width(self) -> int:
        return max(self.profile)

    def view(self) -> Trigraph:
        """The current trigraph, sharing storage with the builder."""
        return Trigraph._from_adj(self._adj)

    def snapshot(self) -> Trigraph:
        return Trigraph._from_adj({v: dict(nb) for v, nb in self._adj.items()})

    def live(self) -> List[int]:
        return sorted(self._adj)

    def __contains__(self, v: int) -> bool:
        return v in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def descendant(self, x: int) -> int:
        """Live vertex whose bag contains the vertex ``x`` (original or product)."""
        parent = self._parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def vertex_with_bag(self, bag: Iterable[int]) -> int:
        bag = frozenset(bag)
        v = self.descendant(next(iter(bag)))
        if self.bags[v] != bag:
            raise KeyError(f"no live vertex has bag {sorted(bag)}")
        return v

    def red_degree(self, v: int) -> int:
        return self._red[v]

    def sequence(self) -> ContractionSequence:
        return ContractionSequence(self.initial, tuple(self.steps))

    # mutation

    def contract(self, u: int, v: int) -> int:
        adj = self._adj
        if u == v:
            raise InvalidSequenceError(len(self.steps), f"cannot contract {u} with itself")
        for x in (u, v):
            if x not in adj:
                raise InvalidSequenceError(len(self.steps), f"vertex {x} is not live")
        w = self.next_id
        self.next_id += 1
        touched = set(adj[u]) | set(adj[v])
        touched.discard(u)
        touched.discard(v)
        _contract_adj(adj, u, v, w)
        red = self._red
        del red[u], red[v]
        for x in touched:
            red[x] = sum(1 for c in adj[x].values() if c == RED)
        red[w] = sum(1 for c in adj[w].values() if c == RED)
        bu, bv = self.bags.pop(u), self.bags.pop(v)
        self._parent[u] = w
        self._parent[v] = w
        self._parent[w] = w
        self.bags[w] = bu | bv
        self.steps.append(ContractionStep(u, v, w))
        self.profile.append(max(red.values(), default=0))
        return w

    def apply(self, seq: "ContractionSequence", mapping: Optional[Dict[int, int]] = None) -> Dict[int, int]:
        """Replay ``seq``'s steps here, translating ids through ``mapping``.

        ``mapping`` sends ``seq``'s initial vertices to live vertices of this
        builder (identity by default); products are added as they appear.
        """
        m = dict(mapping) if mapping is not None else {v: v for v in seq.initial.vertices}
        for s in seq.steps:
            m[s.w] = self.contract(m[s.u], m[s.v])
        return m


# -- replay ------------------------------------------------------------------


@dataclass
class Replay:
    """Outcome of replaying a sequence.

    ``profile[i]`` is the maximum red degree of the (i+1)-th trigraph, so the
    profile has one more entry than there are steps.
    """

    profile: List[int]
    final: Trigraph
    trigraphs: Optional[List[Trigraph]] = None
    bags: Optional[List[Dict[int, Bag]]] = None

    @property
    def width(self) -> int:
        return max(self.profile)


def replay(c: ContractionSequence, keep: bool = True) -> Replay:
    """Replay ``c`` step by step, validating ids against the fresh-id convention."""
    b = SequenceBuilder(c.initial)
    trigraphs = [c.initial.copy()] if keep else None
    bags = [dict(b.bags)] if keep else None
    for i, s in enumerate(c.steps):
        if s.w != b.next_id:
            raise InvalidSequenceError(i, f"product should be {b.next_id}, got {s.w}")
        b.contract(s.u, s.v)
        if keep:
            trigraphs.append(b.snapshot())
            bags.append(dict(b.bags))
    return Replay(profile=b.profile, final=b.snapshot(), trigraphs=trigraphs, bags=bags)


def width(c: ContractionSequence) -> int:
    return replay(c, keep=False).width


def trigraph_at(c: ContractionSequence, i: int) -> Trigraph:
    """The i-th trigraph of ``c`` (1-based, as in ``G_1, ..., G_n``)."""
    if not 1 <= i <= len(c):
        raise IndexError(f"trigraph index {i} outside 1..{len(c)}")
    return replay(c.prefix(i - 1), keep=False).final


def bag_history(c: ContractionSequence) -> List[Dict[int, Bag]]:
    b = SequenceBuilder(c.initial)
    out = [dict(b.bags)]
    for s in c.steps:
        b.contract(s.u, s.v)
        out.append(dict(b.bags))
    return out


def bag_steps(c: ContractionSequence) -> List[Tuple[Bag, Bag]]:
    """Each step as the pair of bags it merges."""
    b = SequenceBuilder(c.initial)
    out = []
    for s in c.steps:
        out.append((b.bags[s.u], b.bags[s.v]))
        b.contract(s.u, s.v)
    return out


# -- bag-homogeneity oracle --------------------------------------------------


def trigraph_from_bags(initial: Trigraph, bags: Mapping[int, Iterable[int]]) -> Trigraph:
    """Quotient trigraph determined by a partition of ``V(initial)`` alone.

    Two parts are joined black iff every cross pair is a black edge of
    ``initial``, are non-adjacent iff no cross pair is an edge, and are joined
    red otherwise.
    """
    parts = {v: frozenset(b) for v, b in bags.items()}
    owner: Dict[int, int] = {}
    for v, b in parts.items():
        if not b:
            raise ValueError(f"bag of {v} is empty")
        for x in b:
            if x in owner:
                raise ValueError(f"vertex {x} lies in two bags")
            if x not in initial:
                raise ValueError(f"vertex {x} is not in the initial trigraph")
            owner[x] = v
    if len(owner) != len(initial):
        raise ValueError("bags do not cover the initial trigraph")
    adj: Dict[int, Dict[int, int]] = {v: {} for v in parts}
    for a, bag in parts.items():
        black: Dict[int, int] = {}
        red = set()
        for x in bag:
            for y, c in initial.neighbor_colors(x).items():
                b = owner[y]
                if b == a:
                    continue
                if c == RED:
                    red.add(b)
                else:
                    black[b] = black.get(b, 0) + 1
        for b in red | black.keys():
            full = len(bag) * len(parts[b])
            adj[a][b] = BLACK if b not in red and black.get(b, 0) == full else RED
    return Trigraph._from_adj(adj)


# -- restriction and extension -----------------------------------------------


def _check_induced(big: Trigraph, small: Trigraph) -> None:
    for v in small.vertices:
        if v not in big:
            raise ValueError(f"vertex {v} is not in the larger trigraph")
    if big.induced(small.vertices) != small:
        raise ValueError("trigraph is not an induced subtrigraph")


def restriction(c: ContractionSequence, h: Trigraph) -> ContractionSequence:
    """Project ``c`` onto the induced subtrigraph ``h``.

    Only contractions merging two bags that both meet ``V(h)`` leave a trace.
    """
    _check_induced(c.initial, h)
    vh = frozenset(h.vertices)
    hb = SequenceBuilder(h)
    for bu, bw in bag_steps(c):
        pu, pw = bu & vh, bw & vh
        if pu and pw:
            hb.contract(hb.vertex_with_bag(pu), hb.vertex_with_bag(pw))
    return hb.sequence()


def extension(c0: ContractionSequence, g: Trigraph) -> ContractionSequence:
    """Replay a sequence of an induced subtrigraph inside ``g``.

    Vertices outside ``c0.initial`` are never touched; the i-th trigraph of
    the result is the lift of the i-th trigraph of ``c0``.
    """
    _check_induced(g, c0.initial)
    b = SequenceBuilder(g)
    b.apply(c0)
    return b.sequence()


# -- progressive width and concatenation -------------------------------------


@dataclass(frozen=True)
class ProgressiveWidth:
    a: int
    i: int
    b: int


def progressive_width_check(c: ContractionSequence, pw: ProgressiveWidth) -> bool:
    """True iff trigraphs ``1..i-1`` have width <= a and ``i..end`` have width <= b.

    ``i`` may be one past the last trigraph, in which case the suffix is empty.
    """
    n = len(c)
    if not 1 <= pw.i <= n + 1:
        raise IndexError(f"split index {pw.i} outside 1..{n + 1}")
    prof = replay(c, keep=False).profile
    return max(prof[: pw.i - 1], default=0) <= pw.a and max(prof[pw.i - 1 :], default=0) <= pw.b


def concatenate(
    c1: ContractionSequence,
    c2: ContractionSequence,
    vertex_map: Optional[Dict[int, int]] = None,
) -> ContractionSequence:
    """Append ``c2`` after ``c1``.

    ``vertex_map`` sends vertices of ``c2.initial`` to vertices of the last
    trigraph of ``c1``; under it the two trigraphs must be identical.
    """
    b = SequenceBuilder(c1.initial)
    b.apply(c1)
    final = b.view()
    if vertex_map is None:
        vertex_map = {v: v for v in c2.initial.vertices}
    try:
        moved = c2.initial.relabel(vertex_map)
    except KeyError as exc:
        raise ValueError(f"vertex map misses vertex {exc}") from None
    if moved != final:
        raise ValueError("the second sequence does not start where the first one ends")
    b.apply(c2, vertex_map)
    return b.sequence()
