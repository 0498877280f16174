"""Brute-force twin-width, written against plain edge sets.

Nothing here imports the package: colours between parts are recomputed from
the original edges every time, so this serves as an independent check on
both the contraction engine and the exact solver.
"""

from __future__ import annotations

import itertools
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

Part = FrozenSet[int]


class Instance:
    def __init__(self, n_or_vertices, black: Iterable[Tuple[int, int]], red: Iterable[Tuple[int, int]] = ()):
        vs = range(n_or_vertices) if isinstance(n_or_vertices, int) else n_or_vertices
        self.vertices = sorted(vs)
        self.black: Set[FrozenSet[int]] = {frozenset(e) for e in black}
        self.red: Set[FrozenSet[int]] = {frozenset(e) for e in red}

    @classmethod
    def of(cls, g) -> "Instance":
        # takes anything exposing vertices / black_edges() / red_edges()
        return cls(list(g.vertices), g.black_edges(), g.red_edges())

    def colour(self, x: Part, y: Part) -> Optional[str]:
        """'black', 'red' or None between two disjoint parts."""
        pairs = [frozenset((a, b)) for a in x for b in y]
        if any(p in self.red for p in pairs):
            return "red"
        hits = sum(p in self.black for p in pairs)
        if hits == 0:
            return None
        return "black" if hits == len(pairs) else "red"


def quotient(inst: Instance, parts: Iterable[Part]) -> Dict[Tuple[Part, Part], str]:
    parts = list(parts)
    out = {}
    for x, y in itertools.combinations(parts, 2):
        c = inst.colour(x, y)
        if c:
            out[(x, y)] = c
            out[(y, x)] = c
    return out


def red_degrees(inst: Instance, parts) -> Dict[Part, int]:
    q = quotient(inst, parts)
    deg = {p: 0 for p in parts}
    for (x, _), c in q.items():
        if c == "red":
            deg[x] += 1
    return deg


def max_red(inst: Instance, parts) -> int:
    d = red_degrees(inst, parts)
    return max(d.values()) if d else 0


def decide(inst: Instance, w: int) -> bool:
    start = frozenset(frozenset([v]) for v in inst.vertices)
    if max_red(inst, start) > w:
        return False
    failed: Set[FrozenSet[Part]] = set()

    def go(parts: FrozenSet[Part]) -> bool:
        if len(parts) <= 1:
            return True
        if parts in failed:
            return False
        ordered = sorted(parts, key=lambda p: sorted(p))
        for x, y in itertools.combinations(ordered, 2):
            nxt = parts - {x, y} | {x | y}
            if max_red(inst, nxt) <= w and go(nxt):
                return True
        failed.add(parts)
        return False

    return go(start)


def twin_width(inst: Instance, limit: int = 20) -> int:
    for w in range(limit + 1):
        if decide(inst, w):
            return w
    raise RuntimeError("twin-width above the search limit")


def tww(g) -> int:
    return twin_width(Instance.of(g))
