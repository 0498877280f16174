"""Deterministic instance families.  Every random family takes an explicit seed."""

from __future__ import annotations

import itertools
import random
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .graph import Trigraph, edge

FAMILIES = ("paley", "tree", "cycle", "tree_plus_k", "replicated_components", "figure1")


def _prime_power(q: int) -> Optional[Tuple[int, int]]:
    if q < 2:
        return None
    p = next(d for d in itertools.count(2) if q % d == 0)
    e = 0
    while q % p == 0:
        q //= p
        e += 1
    return (p, e) if q == 1 else None


def _irreducible(p: int, e: int) -> Tuple[int, ...]:
    """Lowest monic irreducible polynomial of degree e over GF(p), low coefficients first."""
    if e == 1:
        return (0, 1)
    for tail in itertools.product(range(p), repeat=e):
        poly = tuple(reversed(tail)) + (1,)
        if poly[0] == 0:
            continue
        # degree <= 3 needs only a root test; degree 4+ is not needed for desk-scale q
        if e <= 3 and all(sum(c * x ** i for i, c in enumerate(poly)) % p for x in range(p)):
            return poly
    raise ValueError(f"no irreducible polynomial of degree {e} over GF({p}) found")


def _field(q: int):
    pe = _prime_power(q)
    if pe is None:
        raise ValueError(f"{q} is not a prime power")
    p, e = pe
    if e > 3:
        raise ValueError("prime powers with exponent above 3 are not supported")
    mod = _irreducible(p, e)
    elems = list(itertools.product(range(p), repeat=e))

    def mul(a, b):
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
        for k in range(len(prod) - 1, e - 1, -1):
            c = prod[k]
            if c:
                for i in range(e + 1):
                    prod[k - e + i] = (prod[k - e + i] - c * mod[i]) % p
        return tuple(prod[:e])

    def sub(a, b):
        return tuple((x - y) % p for x, y in zip(a, b))

    return elems, mul, sub


def paley(q: int) -> Trigraph:
    """Paley graph on GF(q): x ~ y iff x - y is a non-zero square.  Needs q = 1 (mod 4)."""
    if q % 4 != 1:
        raise ValueError("Paley graphs need q = 1 (mod 4)")
    elems, mul, sub = _field(q)
    zero = elems[0]
    squares = {mul(x, x) for x in elems if x != zero}
    index = {x: i for i, x in enumerate(elems)}
    edges = [(index[a], index[b]) for a, b in itertools.combinations(elems, 2) if sub(a, b) in squares]
    return Trigraph.graph(q, edges)


def cycle(n: int) -> Trigraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Trigraph.graph(n, [(i, (i + 1) % n) for i in range(n)])


def tree(n: int, seed: int = 0) -> Trigraph:
    """Random recursive tree: vertex i attaches to a uniform earlier vertex."""
    if n < 1:
        raise ValueError("a tree needs at least one vertex")
    r = random.Random(seed)
    return Trigraph.graph(n, [(r.randrange(i), i) for i in range(1, n)])


def tree_plus_k(n: int, k: int, seed: int = 0) -> Trigraph:
    """Random tree plus k distinct non-tree edges, so the feedback edge number is k."""
    if k > n * (n - 1) // 2 - (n - 1):
        raise ValueError(f"cannot add {k} edges to a tree on {n} vertices")
    r = random.Random(seed)
    edges = {edge(r.randrange(i), i) for i in range(1, n)}
    while len(edges) < n - 1 + k:
        a, b = r.sample(range(n), 2)
        edges.add(edge(a, b))
    return Trigraph.graph(n, sorted(edges))


def figure1() -> Trigraph:
    """Six-vertex example graph; A..F are 0..5."""
    return Trigraph.graph(6, [(0, 1), (1, 2), (2, 5), (4, 5), (3, 4), (1, 3), (0, 2), (2, 4)])


def replicated_components(
    core: Trigraph,
    component: Trigraph,
    attachment: Iterable[Tuple[int, int]],
    copies: int,
) -> Trigraph:
    """``copies`` disjoint copies of ``component`` hung on ``core`` by the same edges.

    ``attachment`` lists pairs (component vertex, core vertex).  Core vertices
    keep their ids; copy j of component vertex x gets id
    ``len(core) + j * len(component) + x``.  Both inputs use ids ``0..n-1``.
    """
    nc, nb = len(core), len(component)
    att = sorted(set(attachment))
    edges = list(core.edges())
    for j in range(copies):
        off = nc + j * nb
        edges += [(off + u, off + v) for u, v in component.edges()]
        edges += [(s, off + x) for x, s in att]
    return Trigraph.graph(nc + copies * nb, edges)


def clique(n: int) -> Trigraph:
    return Trigraph.graph(n, itertools.combinations(range(n), 2))


def random_replicated(
    seed: int,
    core_size: int = 2,
    block_types: int = 2,
    copies: int = 6,
    max_block: int = 3,
) -> Trigraph:
    """A random core with several block types, each repeated ``copies`` times."""
    r = random.Random(seed)
    core_edges = [(a, b) for a, b in itertools.combinations(range(core_size), 2) if r.random() < 0.6]
    for v in range(1, core_size):
        if not any(b == v for _, b in core_edges):
            core_edges.append((r.randrange(v), v))
    g = Trigraph.graph(core_size, core_edges)
    for _ in range(block_types):
        k = r.randint(1, max_block)
        inner = [(a, b) for a, b in itertools.combinations(range(k), 2) if r.random() < 0.6]
        for v in range(1, k):
            if not any(b == v for _, b in inner):
                inner.append((r.randrange(v), v))
        att = [(x, s) for x in range(k) for s in range(core_size) if r.random() < 0.5] or [(0, 0)]
        block = Trigraph.graph(k, inner)
        g = _hang(g, core_size, block, att, copies)
    return g


def _hang(g: Trigraph, core_size: int, block: Trigraph, att: Sequence[Tuple[int, int]], copies: int) -> Trigraph:
    n = len(g)
    edges = list(g.edges())
    for j in range(copies):
        off = n + j * len(block)
        edges += [(off + u, off + v) for u, v in block.edges()]
        edges += [(s, off + x) for x, s in att]
    return Trigraph.graph(n + copies * len(block), edges)


def tidy_instance(m: int, seed: int = 0, core_size: int = 8, extra: int = 0):
    """A tidy (H, P)-graph with ``m`` red paths of at least 8m vertices each.

    H is a random connected trigraph; the 2m path ends attach to distinct
    vertices of H whose edges inside H are all red.
    """
    from .fen import TidyHPGraph

    if core_size < 2 * m:
        raise ValueError("core too small for the path ends")
    r = random.Random(seed)
    h = list(range(core_size))
    ends = r.sample(h, 2 * m)
    attach = set(ends)
    black, red = set(), set()
    pairs = [(a, b) for a, b in itertools.combinations(h, 2) if r.random() < 0.4]
    for v in range(1, core_size):
        if not any(b == v for _, b in pairs):
            pairs.append((r.randrange(v), v))
    for a, b in pairs:
        if a in attach or b in attach or r.random() < 0.15:
            red.add(edge(a, b))
        else:
            black.add(edge(a, b))
    n = core_size
    paths: List[Tuple[int, ...]] = []
    for j in range(m):
        length = 8 * m + r.randint(0, extra)
        p = tuple(range(n, n + length))
        n += length
        red.add(edge(ends[2 * j], p[0]))
        red.update(edge(a, b) for a, b in zip(p, p[1:]))
        red.add(edge(p[-1], ends[2 * j + 1]))
        paths.append(p)
    g = Trigraph(range(n), black, red)
    return TidyHPGraph(g, set(h), paths)


def generate(family: str, seed: int = 0, **params: int) -> Trigraph:
    """Dispatch by family name; unknown parameters are rejected."""
    makers: Dict[str, object] = {
        "paley": lambda q: paley(q),
        "tree": lambda n: tree(n, seed),
        "cycle": lambda n: cycle(n),
        "tree_plus_k": lambda n, k: tree_plus_k(n, k, seed),
        "replicated_components": lambda core=2, types=2, copies=6, block=3: random_replicated(
            seed, core, types, copies, block
        ),
        "figure1": lambda: figure1(),
    }
    if family not in makers:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    try:
        return makers[family](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {family}: {exc}") from None
