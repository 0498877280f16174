"""Text formats for graphs, trigraphs and contraction sequences.

Graph files start with ``n m`` (all edges black) or ``n m_black m_red`` and
list one edge ``u v`` per line, black edges first.  Sequence files start with
``n`` and list one step ``u v -> w`` per line.  Ids are 0-based and ``#``
starts a comment.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterator, List, Tuple, Union

from .contraction import ContractionSequence, ContractionStep, InvalidSequenceError, SequenceBuilder
from .graph import Trigraph

PathLike = Union[str, Path]

_STEP = re.compile(r"^\s*(\d+)\s+(\d+)\s*->\s*(\d+)\s*$")


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SequenceStepError(ParseError):
    """A well-formed step line that is not a valid contraction."""


def _lines(text: str) -> Iterator[Tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _ints(no: int, line: str, count: int) -> List[int]:
    parts = line.split()
    if len(parts) != count:
        raise ParseError(no, f"expected {count} integers, got {line!r}")
    try:
        vals = [int(x) for x in parts]
    except ValueError:
        raise ParseError(no, f"not an integer in {line!r}") from None
    if any(x < 0 for x in vals):
        raise ParseError(no, "negative value")
    return vals


def parse_graph(text: str) -> Trigraph:
    rows = list(_lines(text))
    if not rows:
        raise ParseError(0, "empty input")
    no, head = rows[0]
    parts = head.split()
    if len(parts) == 2:
        n, mb = _ints(no, head, 2)
        mr = 0
    elif len(parts) == 3:
        n, mb, mr = _ints(no, head, 3)
    else:
        raise ParseError(no, "header must be 'n m' or 'n m_black m_red'")
    body = rows[1:]
    if len(body) != mb + mr:
        raise ParseError(no, f"header announces {mb + mr} edges, found {len(body)}")
    black, red = [], []
    seen = set()
    for i, (no, line) in enumerate(body):
        u, v = _ints(no, line, 2)
        if u >= n or v >= n:
            raise ParseError(no, f"vertex out of range 0..{n - 1}")
        if u == v:
            raise ParseError(no, f"self-loop at {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(no, f"duplicate edge {u} {v}")
        seen.add(key)
        (black if i < mb else red).append(key)
    return Trigraph(range(n), black, red)


def format_graph(g: Trigraph) -> str:
    """Serialise a trigraph on ``0..n-1``; the two-field header is used when there are no red edges."""
    n = len(g)
    if g.vertices != list(range(n)):
        raise ValueError("vertices must be 0..n-1; relabel with Trigraph.dense() first")
    black = sorted(g.black_edges())
    red = sorted(g.red_edges())
    head = f"{n} {len(black)}" if not red else f"{n} {len(black)} {len(red)}"
    return "\n".join([head] + [f"{u} {v}" for u, v in black + red]) + "\n"


def parse_sequence(text: str, g: Trigraph) -> ContractionSequence:
    """Read steps for ``g``; every product id is checked against the fresh-id convention."""
    rows = list(_lines(text))
    if not rows:
        raise ParseError(0, "empty input")
    no, head = rows[0]
    (n,) = _ints(no, head, 1)
    if n != len(g):
        raise ParseError(no, f"sequence is for {n} vertices, graph has {len(g)}")
    b = SequenceBuilder(g)
    steps = []
    for i, (no, line) in enumerate(rows[1:]):
        m = _STEP.match(line)
        if not m:
            raise ParseError(no, f"expected 'u v -> w', got {line!r}")
        u, v, w = (int(x) for x in m.groups())
        if w != b.next_id:
            raise SequenceStepError(no, f"product should be {b.next_id}, got {w}")
        try:
            b.contract(u, v)
        except InvalidSequenceError as exc:
            raise SequenceStepError(no, str(exc).split(": ", 1)[1]) from None
        steps.append(ContractionStep(u, v, w))
    return ContractionSequence(g, tuple(steps))


def format_sequence(c: ContractionSequence) -> str:
    lines = [str(len(c.initial))] + [f"{s.u} {s.v} -> {s.w}" for s in c.steps]
    return "\n".join(lines) + "\n"


def read_graph(path: PathLike) -> Trigraph:
    return parse_graph(Path(path).read_text())


def write_graph(path: PathLike, g: Trigraph) -> None:
    Path(path).write_text(format_graph(g))


def read_sequence(path: PathLike, g: Trigraph) -> ContractionSequence:
    return parse_sequence(Path(path).read_text(), g)


def write_sequence(path: PathLike, c: ContractionSequence) -> None:
    Path(path).write_text(format_sequence(c))
