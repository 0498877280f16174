"""2-approximation of twin-width parameterised by vertex integrity.

A separator S splits the graph into small components.  Components that look
the same from S (twin-blocks) are grouped in classes; all but ``threshold``
members of each class are dropped, the reduced graph is solved exactly, and
the dropped blocks are put back one at a time by sequence surgery that at
most doubles the width.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .contraction import (
    ContractionSequence,
    ProgressiveWidth,
    SequenceBuilder,
    bag_steps,
    progressive_width_check,
    replay,
    restriction,
)
from .exact import SolveResult, SolverCapExceeded, greedy_sequence, optimal_sequence, solver_cap
from .graph import Trigraph, connected_components, is_connected

log = logging.getLogger(__name__)

Component = Tuple[int, ...]


class ThresholdTooSmall(RuntimeError):
    """No two twin-blocks of a removed block's class are merged where needed."""


class LiftError(AssertionError):
    """An invariant of the sequence surgery failed; this is a bug, not bad input."""


def f_of_p(p: int) -> int:
    return 2 ** (7 * p ** 3)


def reduced_size_bound(p: int, threshold: Optional[int] = None) -> int:
    f = f_of_p(p) if threshold is None else threshold
    return p + p * p * f * 2 ** (2 * p * p)


# -- vertex integrity --------------------------------------------------------


@dataclass
class ViDecomposition:
    p: int
    s: FrozenSet[int]
    components: List[Component]

    def check(self, g: Trigraph) -> None:
        rest = [v for v in g.vertices if v not in self.s]
        comps = [tuple(c) for c in connected_components(g.induced(rest))]
        if sorted(comps) != sorted(self.components):
            raise ValueError("components do not match the separator")
        for c in comps:
            if len(c) + len(self.s) > self.p:
                raise ValueError(f"component {c} is too large for p={self.p}")


def _first_violation(g: Trigraph, s: Set[int], budget: int) -> Optional[List[int]]:
    """A connected vertex set of size budget + 1 inside a too-large component."""
    rest = [v for v in g.vertices if v not in s]
    for comp in connected_components(g.induced(rest)):
        if len(comp) > budget:
            order = [comp[0]]
            seen = {comp[0]}
            i = 0
            while len(order) <= budget:
                for y in sorted(g.neighbor_colors(order[i])):
                    if y not in s and y not in seen:
                        seen.add(y)
                        order.append(y)
                i += 1
            return order[: budget + 1]
    return None


def _separator(g: Trigraph, p: int) -> Optional[Set[int]]:
    def go(s: Set[int]) -> Optional[Set[int]]:
        budget = p - len(s)
        if budget < 0:
            return None
        bad = _first_violation(g, s, budget)
        if bad is None:
            return set(s)
        if budget == 0:
            return None
        for v in bad:
            found = go(s | {v})
            if found is not None:
                return found
        return None

    return go(set())


def vertex_integrity(g: Trigraph, cap: int = 6) -> ViDecomposition:
    """Smallest p <= cap with a separator S such that |C| + |S| <= p for every component C of G - S."""
    for p in range(1, cap + 1):
        s = _separator(g, p)
        if s is not None:
            rest = [v for v in g.vertices if v not in s]
            comps = [tuple(c) for c in connected_components(g.induced(rest))]
            return ViDecomposition(p, frozenset(s), comps)
    raise SolverCapExceeded(f"vertex integrity exceeds the cap of {cap}")


# -- twin-blocks -------------------------------------------------------------


@dataclass
class TwinBlockClass:
    """Twin-blocks under the lexicographically first attachment-preserving isomorphism.

    ``isomorphisms[j]`` maps the representative (``members[0]``) onto ``members[j]``.
    """

    representative: Component
    members: List[Component]
    isomorphisms: List[Dict[int, int]]

    def iso(self, a: int, b: int) -> Dict[int, int]:
        """Canonical isomorphism from member ``a`` to member ``b``, via the representative."""
        to_a = self.isomorphisms[a]
        to_b = self.isomorphisms[b]
        return {to_a[r]: to_b[r] for r in self.representative}


def _attachment(g: Trigraph, s: FrozenSet[int], v: int) -> FrozenSet[int]:
    return frozenset(x for x in g.neighbor_colors(v) if x in s)


def _isomorphism(g: Trigraph, s: FrozenSet[int], a: Component, b: Component) -> Optional[Dict[int, int]]:
    """First isomorphism a -> b (candidates in increasing order) preserving S-neighbourhoods."""
    if len(a) != len(b):
        return None
    ga, gb = g.induced(a), g.induced(b)
    if ga.num_edges() != gb.num_edges():
        return None
    sig_a = {v: (ga.degree(v), _attachment(g, s, v)) for v in a}
    sig_b = {v: (gb.degree(v), _attachment(g, s, v)) for v in b}
    if sorted(map(_sig_key, sig_a.values())) != sorted(map(_sig_key, sig_b.values())):
        return None
    order = list(a)
    mapping: Dict[int, int] = {}
    used: Set[int] = set()

    def go(i: int) -> bool:
        if i == len(order):
            return True
        u = order[i]
        for x in b:
            if x in used or sig_b[x] != sig_a[u]:
                continue
            if any(ga.has_edge(u, y) != gb.has_edge(x, mapping[y]) for y in order[:i]):
                continue
            mapping[u] = x
            used.add(x)
            if go(i + 1):
                return True
            del mapping[u]
            used.discard(x)
        return False

    return dict(mapping) if go(0) else None


def _sig_key(sig: Tuple[int, FrozenSet[int]]) -> Tuple[int, Tuple[int, ...]]:
    return sig[0], tuple(sorted(sig[1]))


def twin_block_partition(g: Trigraph, d: ViDecomposition) -> List[TwinBlockClass]:
    """Classes of twin-blocks, each with members sorted by smallest vertex."""
    classes: List[TwinBlockClass] = []
    buckets: Dict[object, List[int]] = {}
    for comp in sorted(d.components, key=min):
        sub = g.induced(comp)
        key = (
            len(comp),
            sub.num_edges(),
            tuple(sorted(_sig_key((sub.degree(v), _attachment(g, d.s, v))) for v in comp)),
        )
        placed = False
        for ci in buckets.get(key, []):
            cls = classes[ci]
            iso = _isomorphism(g, d.s, cls.representative, comp)
            if iso is not None:
                cls.members.append(comp)
                cls.isomorphisms.append(iso)
                placed = True
                break
        if not placed:
            buckets.setdefault(key, []).append(len(classes))
            classes.append(TwinBlockClass(comp, [comp], [{v: v for v in comp}]))
    return classes


# -- reduced graph -----------------------------------------------------------


@dataclass
class ReducedGraph:
    g_prime: Trigraph
    removed: List[Tuple[Component, int]]
    threshold: int
    kept: Dict[int, List[int]] = field(default_factory=dict)


def reduced_graph(
    g: Trigraph, d: ViDecomposition, classes: List[TwinBlockClass], threshold: Optional[int] = None
) -> ReducedGraph:
    """Keep the first ``min(|class|, threshold)`` members of every class."""
    default = threshold is None
    threshold = f_of_p(d.p) if default else threshold
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    drop: Set[int] = set()
    removed = []
    kept = {}
    for ci, cls in enumerate(classes):
        kept[ci] = list(range(min(len(cls.members), threshold)))
        for comp in cls.members[threshold:]:
            removed.append((comp, ci))
            drop.update(comp)
    g_prime = g.induced(v for v in g.vertices if v not in drop)
    if default and len(g_prime) > reduced_size_bound(d.p):
        raise LiftError(f"reduced graph has {len(g_prime)} vertices, above {reduced_size_bound(d.p)}")
    return ReducedGraph(g_prime, removed, threshold, kept)


# -- critical and safe trigraphs ---------------------------------------------


@dataclass
class HEquivalenceClasses:
    attached: FrozenSet[int]
    classes: List[FrozenSet[int]]
    fingerprint: Dict[int, FrozenSet[int]]


def h_equivalence(g: Trigraph, s: Sequence[int], h: Component) -> HEquivalenceClasses:
    """Partition of S by neighbourhood inside ``h``; ``attached`` is S^H."""
    hs = set(h)
    fp = {v: frozenset(x for x in g.neighbor_colors(v) if x in hs) for v in s}
    groups: Dict[FrozenSet[int], List[int]] = {}
    for v in sorted(s):
        groups.setdefault(fp[v], []).append(v)
    classes = sorted((frozenset(x) for x in groups.values()), key=min)
    return HEquivalenceClasses(frozenset(v for v in s if fp[v]), classes, fp)


@dataclass
class CriticalReport:
    """``index`` is the 1-based critical trigraph, or ``None`` when no red edge ever reaches ``h``."""

    index: Optional[int]
    violations: List[str]
    length: int


def critical_index(g: Trigraph, s: FrozenSet[int], c_prime: ContractionSequence, h: Component) -> CriticalReport:
    """Replay ``c_prime`` extended by the block ``h`` until ``h`` gets a red edge.

    Bags of descendants of S^H are checked to stay inside one H-equivalence
    class before that point.
    """
    base = c_prime.initial
    hs = set(h)
    if hs & set(base.vertices):
        raise ValueError("block already belongs to the reduced graph")
    plus = g.induced(list(base.vertices) + list(h))
    eq = h_equivalence(g, sorted(s), h)
    b = SequenceBuilder(plus)
    ids = {v: v for v in base.vertices}
    violations = []
    for i, st in enumerate(c_prime.steps):
        w = b.contract(ids[st.u], ids[st.v])
        ids[st.w] = w
        index = i + 2
        if any(b.red_degree(x) for x in h):
            return CriticalReport(index, violations, len(c_prime))
        bag = b.bags[w]
        if bag & eq.attached:
            if not bag <= s:
                violations.append(f"trigraph {index}: bag {sorted(bag)} mixes S^H with block vertices")
            elif len({eq.fingerprint[x] for x in bag}) > 1:
                violations.append(f"trigraph {index}: bag {sorted(bag)} spans several H-classes")
    return CriticalReport(None, violations, len(c_prime))


@dataclass
class SafePoint:
    h: Component
    delta: int
    witness: Tuple[Component, Component]
    merge_map: Dict[int, int]
    critical: Optional[int]


def _builder_at(c: ContractionSequence, index: int) -> SequenceBuilder:
    b = SequenceBuilder(c.initial)
    b.apply(c.prefix(index - 1))
    return b


def _merged(b: SequenceBuilder, iso: Dict[int, int]) -> bool:
    return all(b.descendant(u) == b.descendant(x) for u, x in iso.items())


class _Blocks:
    """Lookup from a component to its class and position."""

    def __init__(self, classes: List[TwinBlockClass]):
        self.classes = classes
        self.where: Dict[Component, Tuple[int, int]] = {}
        for ci, cls in enumerate(classes):
            for j, comp in enumerate(cls.members):
                self.where[comp] = (ci, j)

    def iso(self, a: Component, b: Component) -> Dict[int, int]:
        ca, ja = self.where[a]
        cb, jb = self.where[b]
        if ca != cb:
            raise ValueError("blocks are not twins")
        return self.classes[ca].iso(ja, jb)

    def mates(self, h: Component, present: Set[int]) -> List[Component]:
        ci, _ = self.where[h]
        return [m for m in self.classes[ci].members if m != h and m[0] in present]


def find_safe_point(
    g: Trigraph,
    s: FrozenSet[int],
    c_prime: ContractionSequence,
    h: Component,
    classes: List[TwinBlockClass],
    report: Optional[CriticalReport] = None,
) -> SafePoint:
    """The last trigraph before the critical one, with two merged twin-blocks of ``h``."""
    blocks = classes if isinstance(classes, _Blocks) else _Blocks(classes)
    if report is None:
        report = critical_index(g, s, c_prime, h)
    delta = report.length if report.index is None else report.index - 1
    present = set(c_prime.initial.vertices)
    mates = blocks.mates(h, present)
    if len(mates) < 2:
        raise ThresholdTooSmall(f"class of block {h} has {len(mates)} members in the reduced graph")
    b = _builder_at(c_prime, delta)
    for i, a in enumerate(mates):
        for c in mates[i + 1 :]:
            iso = blocks.iso(a, c)
            if _merged(b, iso):
                return SafePoint(h, delta, (a, c), iso, report.index)
    raise ThresholdTooSmall(f"no two twin-blocks of {h} are merged in trigraph {delta}")


# -- sequence surgery --------------------------------------------------------


def _bag_index(b: SequenceBuilder, drop: Set[int]) -> Dict[FrozenSet[int], int]:
    return {b.bags[v] - drop: v for v in b.live()}


def one_new_H(
    g: Trigraph,
    c_star: ContractionSequence,
    h: Component,
    safe: SafePoint,
    t: int,
    classes,
) -> ContractionSequence:
    """Insert the block ``h`` into ``c_star`` (a sequence of an induced subgraph of ``g``).

    The prefix up to the safe trigraph is replayed with ``h`` untouched, then
    ``h`` copies what happened to one merged twin-block, is zipped onto it,
    and the rest of ``c_star`` follows unchanged.
    """
    blocks = classes if isinstance(classes, _Blocks) else _Blocks(classes)
    base = c_star.initial
    hs = set(h)
    delta = safe.delta
    plus = g.induced(list(base.vertices) + list(h))
    b = SequenceBuilder(plus)

    # 1. the prefix, ignoring h
    ids = {v: v for v in base.vertices}
    for st in c_star.steps[: delta - 1]:
        ids[st.w] = b.contract(ids[st.u], ids[st.v])
        if any(b.red_degree(x) for x in h):
            raise LiftError(f"block {h} has a red edge before the safe trigraph")
    if not progressive_width_check(b.sequence(), ProgressiveWidth(t, delta + 1, 2 * t)):
        raise LiftError(f"prefix exceeds width {t}")

    # 2. the prefix restricted to the twin H', copied onto h
    h1 = safe.witness[0]
    iota = blocks.iso(h, h1)
    back = {x: u for u, x in iota.items()}
    prefix = c_star.prefix(delta - 1)
    c_h = restriction(prefix, base.induced(h1))
    for bu, bv in bag_steps(c_h):
        b.contract(
            b.vertex_with_bag(back[x] for x in bu),
            b.vertex_with_bag(back[x] for x in bv),
        )

    # 3. zip each descendant of h with its counterpart
    pairs = []
    for x in sorted(v for v in b.live() if b.bags[v] <= hs):
        u = next(iter(b.bags[x]))
        pairs.append((x, b.descendant(iota[u])))
    if len({y for _, y in pairs}) != len(pairs):
        raise LiftError("descendants of the block do not match those of its twin")
    for x, y in pairs:
        b.contract(x, y)

    ref = _builder_at(c_star, delta)
    mine = _bag_index(b, hs)
    theirs = _bag_index(ref, set())
    if set(mine) != set(theirs):
        raise LiftError("after zipping, bags differ from the safe trigraph")
    to_mine = {theirs[k]: mine[k] for k in theirs}
    cur, old = b.view(), ref.view()
    for v in old.vertices:
        for x, col in old.neighbor_colors(v).items():
            if cur.color(to_mine[v], to_mine[x]) != col:
                raise LiftError("after zipping, the trigraph differs from the safe trigraph")
        if cur.degree(to_mine[v]) != old.degree(v):
            raise LiftError("after zipping, the trigraph differs from the safe trigraph")

    # 4. the rest of c_star
    suffix = ContractionSequence(ref.snapshot(), c_star.steps[delta - 1 :])
    b.apply(suffix, to_mine)
    out = b.sequence()
    if not progressive_width_check(out, ProgressiveWidth(t, delta + 1, 2 * t)):
        raise LiftError(f"inserted block breaks progressive width ({t} -> {2 * t})")
    got = bag_steps(out)[: delta - 1]
    if got != bag_steps(prefix):
        raise LiftError("prefix of the new sequence is not the extension of the old prefix")
    return out


def lift_sequence(
    g: Trigraph,
    d: ViDecomposition,
    reduced: ReducedGraph,
    classes: List[TwinBlockClass],
    c_prime: ContractionSequence,
) -> ContractionSequence:
    """Put every removed block back; the width is at most twice that of ``c_prime``."""
    if not reduced.removed:
        return c_prime
    blocks = _Blocks(classes)
    t = replay(c_prime, keep=False).width
    todo = []
    for comp, _ in reduced.removed:
        safe = find_safe_point(g, d.s, c_prime, comp, blocks)
        todo.append((safe.delta, comp))
    todo.sort(key=lambda x: (-x[0], x[1][0]))
    c_star = c_prime
    for delta, comp in todo:
        report = critical_index(g, d.s, c_star, comp)
        if report.violations:
            raise LiftError("; ".join(report.violations))
        if report.index is not None and delta >= report.index:
            raise LiftError(f"trigraph {delta} is no longer safe for block {comp}")
        present = set(c_star.initial.vertices)
        b = _builder_at(c_star, delta)
        witness = None
        for i, a in enumerate(blocks.mates(comp, present)):
            for c in blocks.mates(comp, present)[i + 1 :]:
                iso = blocks.iso(a, c)
                if _merged(b, iso):
                    witness = SafePoint(comp, delta, (a, c), iso, report.index)
                    break
            if witness:
                break
        if witness is None:
            raise ThresholdTooSmall(f"no merged twin-blocks for {comp} at trigraph {delta}")
        c_star = one_new_H(g, c_star, comp, witness, t, blocks)
    if set(c_star.initial.vertices) != set(g.vertices):
        raise LiftError("lifted sequence does not cover the graph")
    w = replay(c_star, keep=False).width
    if w > 2 * t:
        raise LiftError(f"lifted width {w} exceeds 2 * {t}")
    return c_star


# -- end to end --------------------------------------------------------------


def _solve_dense(g: Trigraph, upper_hint: Optional[int]) -> SolveResult:
    dense, mapping = g.dense()
    res = optimal_sequence(dense, upper_hint=upper_hint)
    back = {i: v for v, i in mapping.items()}
    b = SequenceBuilder(g)
    b.apply(res.sequence, back)
    return SolveResult(res.width, b.sequence(), res.optimal)


def vi_approximate(
    g: Trigraph,
    threshold_override: Optional[int] = None,
    p_cap: int = 6,
) -> SolveResult:
    """Sequence of width at most 2 tww(g) via the reduced graph.

    With a threshold override a failed lift raises the threshold by one and
    retries while the reduced graph fits the exact solver.  If nothing works,
    the greedy sequence of ``g`` is returned as a best-effort answer.
    """
    if not is_connected(g):
        raise ValueError("input graph must be connected")
    d = vertex_integrity(g, p_cap)
    classes = twin_block_partition(g, d)
    threshold = threshold_override
    notes: List[str] = []
    while True:
        reduced = reduced_graph(g, d, classes, threshold)
        if len(reduced.g_prime) > solver_cap():
            if threshold_override is not None and notes:
                break
            raise SolverCapExceeded(
                f"reduced graph has {len(reduced.g_prime)} vertices, above the exact-solver cap of {solver_cap()}"
            )
        sol = _solve_dense(reduced.g_prime, upper_hint=2 ** (d.p + 1))
        try:
            seq = lift_sequence(g, d, reduced, classes, sol.sequence)
        except ThresholdTooSmall as exc:
            if threshold_override is None:
                raise
            notes.append(f"threshold {reduced.threshold}: {exc}")
            threshold = reduced.threshold + 1
            continue
        w = replay(seq, keep=False).width
        stats = _report(d, classes, reduced, sol.width, w, "2-approx", notes)
        return SolveResult(w, seq, not reduced.removed and sol.optimal, stats=stats)
    seq = greedy_sequence(g)
    w = replay(seq, keep=False).width
    stats = _report(d, classes, reduced, None, w, "best-effort", notes)
    return SolveResult(w, seq, False, stats=stats)


def _report(d, classes, reduced, w_prime, w, guarantee, notes) -> Dict[str, object]:
    return {
        "p": d.p,
        "separator": sorted(d.s),
        "classes": [
            {"size": len(c.members), "block_size": len(c.representative), "kept": min(len(c.members), reduced.threshold)}
            for c in classes
        ],
        "removed": len(reduced.removed),
        "threshold": reduced.threshold,
        "width_gprime": w_prime,
        "width_final": w,
        "guarantee": guarantee,
        "retries": notes,
    }
