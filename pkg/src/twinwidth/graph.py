"""Trigraphs: simple graphs whose edges are coloured black or red.

A plain graph is a :class:`Trigraph` without red edges.  Adjacency is stored
as ``vertex -> {neighbour: colour}`` so colour lookups are O(1); the contraction
code in :mod:`twinwidth.contraction` relies on that.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

BLACK = 0
RED = 1

Edge = Tuple[int, int]


def edge(u: int, v: int) -> Edge:
    """Normalise an unordered pair as ``(min, max)``."""
    return (u, v) if u < v else (v, u)


class UnknownVertexError(KeyError):
    pass


class Trigraph:
    """Vertex set plus disjoint black and red edge sets.

    Instances are treated as immutable once built; the only code that mutates
    ``_adj`` in place is the single-owner builder in ``contraction``.
    """

    __slots__ = ("_adj",)

    def __init__(
        self,
        vertices: Iterable[int] = (),
        black_edges: Iterable[Edge] = (),
        red_edges: Iterable[Edge] = (),
    ):
        adj: Dict[int, Dict[int, int]] = {}
        for v in vertices:
            if v < 0:
                raise ValueError(f"negative vertex id {v}")
            adj.setdefault(v, {})
        for colour, edges in ((BLACK, black_edges), (RED, red_edges)):
            for u, v in edges:
                if u == v:
                    raise ValueError(f"self-loop at {u}")
                if u not in adj or v not in adj:
                    raise UnknownVertexError(f"edge {u}-{v} has an endpoint outside the vertex set")
                if v in adj[u]:
                    if adj[u][v] != colour:
                        raise ValueError(f"edge {u}-{v} is both black and red")
                    continue
                adj[u][v] = colour
                adj[v][u] = colour
        self._adj = adj

    @classmethod
    def _from_adj(cls, adj: Dict[int, Dict[int, int]]) -> "Trigraph":
        g = cls.__new__(cls)
        g._adj = adj
        return g

    @classmethod
    def graph(cls, n: int, edges: Iterable[Edge]) -> "Trigraph":
        """All-black graph on vertices ``0..n-1``."""
        return cls(range(n), edges)

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self) -> List[int]:
        return sorted(self._adj)

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, v: object) -> bool:
        return v in self._adj

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._adj))

    def _check(self, v: int) -> Dict[int, int]:
        try:
            return self._adj[v]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {v}") from None

    def neighbors(self, v: int) -> List[int]:
        return sorted(self._check(v))

    def neighbor_colors(self, v: int) -> Dict[int, int]:
        """Read-only view of ``{neighbour: colour}``; do not mutate."""
        return self._check(v)

    def color(self, u: int, v: int) -> Optional[int]:
        """``BLACK``, ``RED`` or ``None`` when ``u`` and ``v`` are not adjacent."""
        return self._check(u).get(v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._check(u)

    def black_edges(self) -> Set[Edge]:
        return {edge(u, v) for u, nb in self._adj.items() for v, c in nb.items() if c == BLACK}

    def red_edges(self) -> Set[Edge]:
        return {edge(u, v) for u, nb in self._adj.items() for v, c in nb.items() if c == RED}

    def edges(self) -> Set[Edge]:
        return {edge(u, v) for u, nb in self._adj.items() for v in nb}

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self._adj.values()) // 2

    def degree(self, v: int) -> int:
        return len(self._check(v))

    def red_degree(self, v: int) -> int:
        return sum(1 for c in self._check(v).values() if c == RED)

    def black_degree(self, v: int) -> int:
        return sum(1 for c in self._check(v).values() if c == BLACK)

    def max_red_degree(self) -> int:
        return max((sum(1 for c in nb.values() if c == RED) for nb in self._adj.values()), default=0)

    def is_graph(self) -> bool:
        return not any(c == RED for nb in self._adj.values() for c in nb.values())

    # -- derived trigraphs -------------------------------------------------

    def copy(self) -> "Trigraph":
        return Trigraph._from_adj({v: dict(nb) for v, nb in self._adj.items()})

    def induced(self, vertices: Iterable[int]) -> "Trigraph":
        keep = set(vertices)
        for v in keep:
            self._check(v)
        return Trigraph._from_adj(
            {v: {x: c for x, c in self._adj[v].items() if x in keep} for v in keep}
        )

    def all_black(self) -> "Trigraph":
        return Trigraph._from_adj({v: {x: BLACK for x in nb} for v, nb in self._adj.items()})

    def relabel(self, mapping: Dict[int, int]) -> "Trigraph":
        if len(set(mapping[v] for v in self._adj)) != len(self._adj):
            raise ValueError("relabelling is not injective")
        return Trigraph._from_adj(
            {mapping[v]: {mapping[x]: c for x, c in nb.items()} for v, nb in self._adj.items()}
        )

    def dense(self) -> Tuple["Trigraph", Dict[int, int]]:
        """Relabel to ``0..n-1`` in increasing id order; returns the new ids."""
        mapping = {v: i for i, v in enumerate(sorted(self._adj))}
        return self.relabel(mapping), mapping

    # -- comparison --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trigraph):
            return NotImplemented
        return self._adj == other._adj

    def __hash__(self) -> int:
        return hash((frozenset(self._adj), frozenset(self.black_edges()), frozenset(self.red_edges())))

    def __repr__(self) -> str:
        return (
            f"Trigraph(n={len(self)}, black={sorted(self.black_edges())}, "
            f"red={sorted(self.red_edges())})"
        )


@dataclass(frozen=True)
class DegreeReport:
    black: int
    red: int

    @property
    def total(self) -> int:
        return self.black + self.red


def degree(g: Trigraph, v: int) -> DegreeReport:
    nb = g.neighbor_colors(v)
    red = sum(1 for c in nb.values() if c == RED)
    return DegreeReport(black=len(nb) - red, red=red)


def induced_subtrigraph(g: Trigraph, s: Iterable[int]) -> Trigraph:
    return g.induced(s)


def connected_components(g: Trigraph) -> List[List[int]]:
    """Components as sorted vertex lists, ordered by smallest vertex."""
    seen: Set[int] = set()
    out = []
    for s in g.vertices:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.neighbor_colors(x):
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    queue.append(y)
        out.append(sorted(comp))
    return out


def is_connected(g: Trigraph) -> bool:
    return len(connected_components(g)) <= 1


def spanning_forest(g: Trigraph) -> Set[Edge]:
    """BFS spanning forest, rooted at the smallest vertex of each component."""
    seen: Set[int] = set()
    tree: Set[Edge] = set()
    for s in g.vertices:
        if s in seen:
            continue
        seen.add(s)
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in sorted(g.neighbor_colors(x)):
                if y not in seen:
                    seen.add(y)
                    tree.add(edge(x, y))
                    queue.append(y)
    return tree


def feedback_edge_set(g: Trigraph) -> Set[Edge]:
    """Minimum feedback edge set: the complement of a spanning forest."""
    return g.edges() - spanning_forest(g)


def feedback_edge_number(g: Trigraph) -> int:
    return g.num_edges() - len(g) + len(connected_components(g))


def is_forest(g: Trigraph) -> bool:
    return feedback_edge_number(g) == 0


def two_core(g: Trigraph) -> Set[int]:
    """Vertices left after repeatedly deleting vertices of degree at most 1."""
    deg = {v: g.degree(v) for v in g.vertices}
    alive = set(deg)
    queue = deque(v for v, d in deg.items() if d <= 1)
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        alive.discard(v)
        for x in g.neighbor_colors(v):
            if x in alive:
                deg[x] -= 1
                if deg[x] <= 1:
                    queue.append(x)
    return alive


@dataclass(frozen=True)
class DanglingTree:
    """A maximal subtree cut off by the single edge ``attachment``.

    ``root`` is the tree endpoint of the attachment edge.  A whole tree
    component is reported with ``attachment=None`` and its smallest vertex as
    root.
    """

    root: int
    vertices: frozenset
    attachment: Optional[Edge]


@dataclass(frozen=True)
class DanglingPath:
    """A maximal path of degree-2 vertices, in path order.

    ``ends`` holds the outside neighbours of the first and last vertex.
    """

    vertices: Tuple[int, ...]
    ends: Tuple[int, int]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


def dangling_trees(g: Trigraph) -> List[DanglingTree]:
    core = two_core(g)
    out = []
    for comp in connected_components(g):
        comp_core = [v for v in comp if v in core]
        if not comp_core:
            out.append(DanglingTree(comp[0], frozenset(comp), None))
            continue
        for c in comp_core:
            for x in sorted(g.neighbor_colors(c)):
                if x in core:
                    continue
                tree = {x}
                stack = [x]
                while stack:
                    y = stack.pop()
                    for z in g.neighbor_colors(y):
                        if z != c and z not in tree:
                            tree.add(z)
                            stack.append(z)
                out.append(DanglingTree(x, frozenset(tree), edge(c, x)))
    return out


def dangling_paths(g: Trigraph, exclude: Iterable[int] = ()) -> List[DanglingPath]:
    """Maximal runs of degree-2 vertices that do not close a cycle."""
    banned = set(exclude)
    deg2 = {v for v in g.vertices if g.degree(v) == 2 and v not in banned}
    seen: Set[int] = set()
    out = []
    for s in sorted(deg2):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.neighbor_colors(x):
                if y in deg2 and y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        ends = [v for v in comp if sum(1 for y in g.neighbor_colors(v) if y in comp) < 2]
        if not ends:
            continue  # a whole cycle component
        start = min(ends)
        order = [start]
        placed = {start}
        cur = start
        while True:
            nxt = [y for y in g.neighbor_colors(cur) if y in comp and y not in placed]
            if not nxt:
                break
            cur = nxt[0]
            order.append(cur)
            placed.add(cur)
        if len(order) == 1:
            a, b = sorted(g.neighbor_colors(start))
            ends_pair = (a, b)
        else:
            (a,) = [y for y in g.neighbor_colors(order[0]) if y not in comp]
            (b,) = [y for y in g.neighbor_colors(order[-1]) if y not in comp]
            ends_pair = (a, b)
        out.append(DanglingPath(tuple(order), ends_pair))
    return out


def dangling_structures(g: Trigraph) -> Tuple[List[DanglingTree], List[DanglingPath]]:
    """Maximal dangling trees, and maximal dangling paths outside those trees."""
    trees = dangling_trees(g)
    in_trees = set().union(*(t.vertices for t in trees)) if trees else set()
    return trees, dangling_paths(g, exclude=in_trees)


def bfs_distances(g: Trigraph, sources: Iterable[int], within: Optional[Set[int]] = None) -> Dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        x = queue.popleft()
        for y in g.neighbor_colors(x):
            if y not in dist and (within is None or y in within):
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist
