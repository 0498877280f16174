"""``tww`` command-line front end.

Every sequence the tool prints or writes is replayed independently first; a
width is only ever reported from that replay.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence

from . import __version__
from .contraction import (
    ContractionSequence,
    InvalidSequenceError,
    SequenceBuilder,
    replay,
    trigraph_from_bags,
)
from .exact import SolveResult, SolverCapExceeded, optimal_sequence
from .fen import (
    BoundViolation,
    PreconditionError,
    fen_approximate,
    kernel_size_bound,
    shorten_paths_kernel,
    sqrt_bound_sequence,
    tidy_preprocess,
)
from .generators import FAMILIES, generate
from .graph import Trigraph, connected_components, feedback_edge_number
from .io import ParseError, SequenceStepError, format_graph, format_sequence, parse_sequence, read_graph
from .vi import LiftError, ThresholdTooSmall, vi_approximate

SCHEMA = 1

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY = 2
EXIT_CAP = 3
EXIT_PARSE = 4

log = logging.getLogger("twinwidth")


class VerificationFailed(RuntimeError):
    pass


# -- verification ------------------------------------------------------------


def check_sequence(g: Trigraph, seq: ContractionSequence, claimed: Optional[int] = None) -> int:
    """Replay ``seq`` on ``g``; returns the width or raises :class:`VerificationFailed`."""
    if seq.initial != g:
        raise VerificationFailed("sequence does not start at the input graph")
    try:
        rep = replay(seq, keep=False)
    except InvalidSequenceError as exc:
        raise VerificationFailed(str(exc)) from None
    if not seq.is_complete:
        raise VerificationFailed(f"sequence stops with {len(rep.final)} vertices")
    if claimed is not None and rep.width != claimed:
        raise VerificationFailed(f"solver claimed width {claimed}, replay gives {rep.width}")
    return rep.width


def verify_report(g: Trigraph, seq: ContractionSequence) -> Dict[str, object]:
    """Replay plus the bag-oracle comparison after every step."""
    rep = replay(seq, keep=True)
    mismatches = 0
    for tri, bags in zip(rep.trigraphs, rep.bags):
        if trigraph_from_bags(g, bags) != tri:
            mismatches += 1
    return {
        "valid": True,
        "complete": seq.is_complete,
        "steps": len(seq.steps),
        "width": rep.width,
        "bag_oracle_mismatches": mismatches,
    }


# -- per-component solving ---------------------------------------------------


def solve_by_components(g: Trigraph, solve: Callable[[Trigraph], SolveResult]) -> SolveResult:
    """Solve each component on dense ids, then merge the leftover vertices (no red edges arise)."""
    comps = connected_components(g)
    if len(comps) == 1:
        dense, mapping = g.dense()
        res = solve(dense)
        if mapping == {i: i for i in range(len(g))}:
            return res
        back = {i: v for v, i in mapping.items()}
        b = SequenceBuilder(g)
        b.apply(res.sequence, back)
        return SolveResult(res.width, b.sequence(), res.optimal, stats=res.stats)
    b = SequenceBuilder(g)
    finals = []
    parts = []
    optimal = True
    for comp in comps:
        dense, mapping = g.induced(comp).dense()
        res = solve(dense)
        back = {i: v for v, i in mapping.items()}
        ids = b.apply(res.sequence, back)
        finals.append(ids[res.sequence.steps[-1].w] if res.sequence.steps else comp[0])
        optimal = optimal and res.optimal
        parts.append(dict(res.stats, n=len(comp), width=res.width))
    x = finals[0]
    for y in finals[1:]:
        x = b.contract(x, y)
    seq = b.sequence()
    w = replay(seq, keep=False).width
    return SolveResult(w, seq, optimal, stats={"components": parts})


# -- commands ----------------------------------------------------------------


def _graph_stats(g: Trigraph) -> Dict[str, object]:
    return {"n": len(g), "m": g.num_edges(), "k": feedback_edge_number(g)}


def _run_solver(args, g: Trigraph) -> Dict[str, object]:
    cmd = args.command
    if cmd == "exact":
        res = solve_by_components(g, lambda h: optimal_sequence(h, jobs=args.jobs))
    elif cmd == "fen":
        res = solve_by_components(g, fen_approximate)
    elif cmd == "sqrt":
        res = solve_by_components(g, sqrt_bound_sequence)
    elif cmd == "vi":
        res = solve_by_components(g, lambda h: vi_approximate(h, args.threshold, args.p_cap))
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(cmd)
    width = check_sequence(g, res.sequence, res.width)
    if args.emit_sequence:
        with open(args.emit_sequence, "w") as fh:
            fh.write(format_sequence(res.sequence))
    report: Dict[str, object] = {"width": width, "optimal": res.optimal, "verified": True}
    report.update(res.stats)
    if cmd == "vi":
        report.setdefault("width_final", width)
    if cmd == "fen" and args.emit_kernel:
        report.update(_kernelize(g, args.emit_kernel))
    return report


def _kernelize(g: Trigraph, path: Optional[str]) -> Dict[str, object]:
    if len(connected_components(g)) != 1:
        raise PreconditionError("kernelization needs a connected graph")
    k = feedback_edge_number(g)
    tidy = tidy_preprocess(g, k, small_width_branch=False)
    kern = shorten_paths_kernel(tidy)
    if path:
        with open(path, "w") as fh:
            fh.write(format_graph(kern.kernel))
    return {
        "kernel_vertices": len(kern.kernel),
        "kernel_edges": kern.kernel.num_edges(),
        "kernel_bound": kernel_size_bound(k),
        "h_size": len(kern.h_vertices),
        "num_paths": len(kern.paths),
    }


def _cmd_verify(args, g: Trigraph) -> Dict[str, object]:
    with open(args.sequence) as fh:
        seq = parse_sequence(fh.read(), g)
    return verify_report(g, seq)


def _parse_params(items: Sequence[str]) -> Dict[str, int]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"parameter {item!r} is not key=value")
        out[key.strip()] = int(val)
    return out


def _emit(report: Dict[str, object], as_csv: bool, out) -> None:
    if as_csv:
        flat = {k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in report.items()}
        w = csv.DictWriter(out, fieldnames=list(flat))
        w.writeheader()
        w.writerow(flat)
    else:
        out.write(json.dumps(report, indent=2, sort_keys=False) + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tww", description="Contraction sequences and twin-width bounds.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seq=True):
        p.add_argument("graph", help="graph file ('n m' or 'n m_black m_red' header)")
        p.add_argument("--json", action="store_true", help="JSON report (the default)")
        p.add_argument("--csv", action="store_true", help="one CSV row instead of JSON")
        p.add_argument("-v", "--verbose", action="store_true")
        if seq:
            p.add_argument("--emit-sequence", metavar="PATH", help="write the verified sequence here")

    p = sub.add_parser("exact", help="optimal contraction sequence (small graphs)")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the exact search")
    p = sub.add_parser("fen", help="tww+1 approximation via the feedback-edge kernel")
    common(p)
    p.add_argument("--emit-kernel", metavar="PATH", help="write the kernel trigraph here")
    p = sub.add_parser("sqrt", help="sequence of width O(sqrt k) for feedback edge number k")
    common(p)
    p = sub.add_parser("vi", help="2-approximation via vertex integrity")
    common(p)
    p.add_argument("--threshold", type=int, default=None, help="twin-blocks kept per class")
    p.add_argument("--p-cap", type=int, default=6, help="largest vertex integrity tried")
    p = sub.add_parser("kernelize", help="write the feedback-edge kernel")
    common(p, seq=False)
    p.add_argument("--emit-kernel", metavar="PATH", help="write the kernel trigraph here")
    p = sub.add_parser("verify", help="replay a sequence file against a graph")
    common(p, seq=False)
    p.add_argument("sequence", help="sequence file ('n' header, then 'u v -> w' lines)")
    p = sub.add_parser("generate", help="print an instance in graph format")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("-p", "--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", metavar="PATH")
    return ap


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "generate":
            g = generate(args.family, args.seed, **_parse_params(args.param))
            text = format_graph(g)
            if args.output:
                with open(args.output, "w") as fh:
                    fh.write(text)
            else:
                out.write(text)
            return EXIT_OK
        g = read_graph(args.graph)
        start = time.perf_counter()
        report: Dict[str, object] = {"schema": SCHEMA, "command": args.command}
        report.update(_graph_stats(g))
        if args.command == "verify":
            report.update(_cmd_verify(args, g))
        elif args.command == "kernelize":
            report.update(_kernelize(g, args.emit_kernel))
        else:
            report.update(_run_solver(args, g))
        report["wall_time"] = round(time.perf_counter() - start, 4)
        _emit(report, args.csv, out)
        return EXIT_OK
    except SequenceStepError as exc:
        print(f"tww: invalid sequence: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ParseError as exc:
        print(f"tww: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SolverCapExceeded as exc:
        print(f"tww: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (VerificationFailed, BoundViolation, LiftError) as exc:
        print(f"tww: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (PreconditionError, ThresholdTooSmall, ValueError, OSError) as exc:
        print(f"tww: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
