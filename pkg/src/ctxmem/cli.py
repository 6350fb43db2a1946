"""Command-line entry point: ``ctxmem <command> [options]``.

Exit codes: 0 pass/found, 1 fail/none, 2 inconclusive, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Callable, Sequence

from . import __version__
from .digraph import commuting_digraph, commuting_dot, strong_sinks
from .geometry import (
    STRUCTURE_NAMES,
    IncidenceStructure,
    StructureError,
    build_structure,
    contextuality_degree,
    dumps_structure,
    minimal_contradiction_sets,
    resolve_structure,
    witness_bounds,
)
from .machine import (
    FIXTURE_NAMES,
    MachineError,
    MealyMachine,
    dumps_machine,
    fixture,
    load_machine,
    machine_structure,
    run,
)
from .pauli import PauliError
from .verify import (
    Predictions,
    Status,
    Verdict,
    check,
    proposition_suite,
    replay,
    sequence_oracle,
)

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Report:
    """Collects human-readable lines and the structured result of one command."""

    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.lines: list[str] = []
        self.result: dict = {}
        self.timings: dict[str, float] = {}

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def render(self, as_json: bool, timings: bool) -> str:
        if as_json:
            doc = {
                "command": self.command,
                "inputs": self.inputs,
                "version": __version__,
                "result": self.result,
            }
            if timings:
                doc["timings"] = {k: round(v, 3) for k, v in sorted(self.timings.items())}
            return json.dumps(doc, indent=2, sort_keys=True) + "\n"
        text = "\n".join(self.lines) + "\n" if self.lines else ""
        if timings:
            text += "".join(f"time {k}: {v:.3f}s\n" for k, v in sorted(self.timings.items()))
        return text


def _structure(name: str) -> IncidenceStructure:
    try:
        return resolve_structure(name)
    except (OSError, StructureError, PauliError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _machine(args) -> tuple[MealyMachine, IncidenceStructure, str]:
    try:
        if args.fixture:
            m = fixture(args.fixture)
            label = f"fixture {args.fixture}"
        else:
            m = load_machine(args.machine)
            label = f"machine {args.machine}"
        return m, machine_structure(m), label
    except (OSError, MachineError, StructureError) as exc:
        raise UsageError(str(exc)) from exc


def _points(s: IncidenceStructure, text: str) -> list[int]:
    try:
        return [s.point_id(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (KeyError, StructureError) as exc:
        raise UsageError(exc.args[0] if exc.args else str(exc)) from exc


def _sign(v: int) -> str:
    return "+1" if v == 1 else "-1"


def _describe_verdict(report: Report, s: IncidenceStructure, m: MealyMachine, v: Verdict,
                      label: str) -> None:
    report.say(f"{label}: {v.status.value}")
    cert = v.certificate
    if cert is None:
        if v.stats.get("reason"):
            report.say(f"  {v.stats['reason']}")
        return
    kind, target = cert.scope
    where = f"block {s.block_label(target)}" if kind == "block" else f"point {s.point_names[target]}"
    inputs = ",".join(s.point_names[p] for p in cert.inputs)
    report.say(f"  violates {cert.kind} in {where}: start S{cert.start_state + 1}, inputs {inputs}")
    shown = replay(m, s, cert)
    report.say(f"  replay: {shown.detail}" if shown else "  replay: no violation (bug)")


def _verdict_code(v: Verdict) -> int:
    return {Status.PASS: EXIT_PASS, Status.FAIL: EXIT_FAIL, Status.INCONCLUSIVE: EXIT_INCONCLUSIVE}[
        v.status
    ]


# -- commands --------------------------------------------------------------------------

def cmd_structures(args, report: Report) -> int:
    if args.emit:
        s = _structure(args.emit)
        report.result = json.loads(dumps_structure(s))
        report.lines = dumps_structure(s).rstrip("\n").split("\n")
        return EXIT_PASS
    rows = []
    for name in STRUCTURE_NAMES:
        s = build_structure(name)
        negative = sum(1 for v in s.block_signs if v == -1)
        rows.append({"name": name, "points": s.num_points, "blocks": s.num_blocks,
                     "negative_blocks": negative})
    report.result = {"structures": rows}
    report.say(f"{'name':<10} {'points':>6} {'blocks':>6} {'negative':>8}")
    for r in rows:
        report.say(f"{r['name']:<10} {r['points']:>6} {r['blocks']:>6} {r['negative_blocks']:>8}")
    return EXIT_PASS


def cmd_verify(args, report: Report) -> int:
    m, s, label = _machine(args)
    preds = Predictions.parse(args.predictions)
    report.say(f"{label} ({s.name}, {m.state_count} states)")
    report.say(f"predictions: {preds.value}")
    t0 = time.perf_counter()
    v = check(m, s, preds)
    report.timings["criterion"] = time.perf_counter() - t0
    _describe_verdict(report, s, m, v, "criterion")
    report.result = {"criterion": v.to_dict(s)}
    code = _verdict_code(v)
    if args.oracle is not None:
        t0 = time.perf_counter()
        o = sequence_oracle(m, s, preds, args.oracle)
        report.timings["oracle"] = time.perf_counter() - t0
        o_stats = {k: val for k, val in o.stats.items() if k != "seconds"}
        o_doc = o.to_dict(s)
        o_doc["stats"] = o_stats
        report.result["oracle"] = o_doc
        _describe_verdict(report, s, m, o, f"oracle (length {args.oracle})")
        agree = (o.status is Status.INCONCLUSIVE) or (o.passed == v.passed)
        report.result["agree"] = agree
        if not agree:
            report.say("criterion and oracle DISAGREE")
            return EXIT_INCONCLUSIVE
        if o.status is Status.INCONCLUSIVE and code == EXIT_PASS:
            code = EXIT_INCONCLUSIVE
    return code


def cmd_run(args, report: Report) -> int:
    m, s, label = _machine(args)
    if not 1 <= args.start <= m.state_count:
        raise UsageError(f"--start must be in 1..{m.state_count}")
    inputs = _points(s, args.inputs)
    trace = run(m, args.start - 1, inputs)
    report.result = {
        "inputs": [s.point_names[p] for p in inputs],
        "outputs": list(trace.outputs),
        "states": [f"S{x + 1}" for x in trace.states],
    }
    report.say("outputs: " + " ".join(_sign(o) for o in trace.outputs))
    report.say("states: " + " ".join(f"S{x + 1}" for x in trace.states))
    return EXIT_PASS


def cmd_degree(args, report: Report) -> int:
    s = _structure(args.structure)
    degree, witness = contextuality_degree(s)
    assignment = {s.point_names[p]: int(v) for p, v in enumerate(witness)}
    report.result = {"degree": degree, "witness": assignment}
    report.say(f"contextuality degree: {degree}")
    report.say("witness: " + " ".join(f"{k}={_sign(v)}" for k, v in assignment.items()))
    return EXIT_PASS


def cmd_witness_bounds(args, report: Report) -> int:
    s = _structure(args.structure)
    classical, quantum = witness_bounds(s)
    report.result = {"noncontextual_bound": classical, "quantum_value": quantum}
    report.say(f"noncontextual bound: {classical}")
    report.say(f"quantum value: {quantum}")
    return EXIT_PASS


def cmd_contras(args, report: Report) -> int:
    s = _structure(args.structure)
    sets = minimal_contradiction_sets(s)
    report.result = {
        "counts": {str(k): len(v) for k, v in sets.items()},
        "sets": {str(k): [[s.block_label(b) for b in group] for group in v]
                 for k, v in sets.items()},
    }
    for size, group in sets.items():
        report.say(f"size {size}: {len(group)}")
    if args.list:
        for size, group in sets.items():
            for blocks in group:
                report.say(f"  {' | '.join(s.block_label(b) for b in blocks)}")
    return EXIT_PASS


def cmd_digraph(args, report: Report) -> int:
    m, s, _ = _machine(args)
    R = _points(s, args.restrict)
    try:
        cd = commuting_digraph(m, s, R)
    except StructureError as exc:
        raise UsageError(str(exc)) from exc
    dot = commuting_dot(cd, condensed=args.condense)
    sinks = strong_sinks(cd)
    report.result = {
        "vertices": len(cd.base),
        "arcs": len(cd.base.arcs),
        "components": len(cd.condensation.components),
        "sinks": [k.as_dict(s) for k in sinks.sinks],
        "dot": dot,
    }
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(dot)
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        report.say(f"vertices: {len(cd.base)}")
        report.say(f"condensed vertices: {len(cd.condensation.components)}")
        report.say("sinks: " + " ".join(
            "{" + ",".join(f"S{x + 1}" for x in k.states) + "}" for k in sinks.sinks
        ))
    else:
        report.lines = dot.rstrip("\n").split("\n")
    return EXIT_PASS


def cmd_search(args, report: Report) -> int:
    from .search import SearchError, SearchStatus, default_threads, find_machine

    s = _structure(args.structure)
    preds = Predictions.parse(args.predictions)
    code = None
    if args.cnf_out or args.solve:
        from .cnf import CNFError, SolverUnavailable, encode, solve

        try:
            enc = encode(s, preds, args.states)
        except CNFError as exc:
            raise UsageError(str(exc)) from exc
        doc = {"variables": enc.cnf.num_vars, "clauses": len(enc.cnf.clauses)}
        if args.cnf_out:
            try:
                with open(args.cnf_out, "w") as fh:
                    fh.write(enc.dimacs())
            except OSError as exc:
                raise UsageError(str(exc)) from exc
            report.say(f"cnf: {enc.cnf.num_vars} variables, {len(enc.cnf.clauses)} clauses "
                       f"written to {args.cnf_out}")
        if args.solve:
            t0 = time.perf_counter()
            try:
                m = solve(enc)
            except SolverUnavailable as exc:
                raise UsageError(str(exc)) from exc
            report.timings["solver"] = time.perf_counter() - t0
            doc["satisfiable"] = m is not None
            report.say(f"solver: {'satisfiable' if m else 'unsatisfiable'}")
            if m is not None:
                v = check(m, s, preds)
                doc["machine"] = json.loads(dumps_machine(m))
                doc["verified"] = v.passed
                report.say(f"decoded machine verified: {'pass' if v.passed else 'FAIL'}")
                _maybe_save(args, m, report)
                code = EXIT_PASS if v.passed else EXIT_INCONCLUSIVE
            else:
                code = EXIT_FAIL
        report.result["cnf"] = doc
        if args.cnf_out and not args.solve and not args.backtrack:
            return EXIT_PASS
        if args.solve and not args.backtrack:
            return code
    try:
        t0 = time.perf_counter()
        outcome = find_machine(
            s, preds, args.states, budget=args.budget,
            threads=args.threads or default_threads(), resume_from=args.resume_from,
            engine=args.engine,
        )
        report.timings["search"] = time.perf_counter() - t0
    except SearchError as exc:
        raise UsageError(str(exc)) from exc
    report.result["search"] = outcome.to_dict()
    stats = outcome.stats
    report.say(f"search {s.name} {preds.value} with {args.states} states: {outcome.status.value}")
    if args.engine == "sat":
        report.say(f"cnf: {stats.prunes['sat_variables']} variables, "
                   f"{stats.prunes['sat_clauses']} clauses")
    else:
        report.say(f"nodes: {stats.nodes}, output tables: {stats.output_tables}, "
                   f"partitions: {stats.partitions_done}/{stats.partitions}")
        if stats.prunes:
            report.say("prunes: " + ", ".join(f"{k}={v}" for k, v in sorted(stats.prunes.items())))
    if outcome.resume_from is not None:
        report.say(f"budget exhausted; resume with --resume-from {outcome.resume_from}")
    if outcome.machine is not None:
        _maybe_save(args, outcome.machine, report)
    result_code = {
        SearchStatus.FOUND: EXIT_PASS,
        SearchStatus.NONE_EXHAUSTED: EXIT_FAIL,
        SearchStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    }[outcome.status]
    if code is not None and code != result_code:
        report.say("solver and backtracker DISAGREE")
        return EXIT_INCONCLUSIVE
    return result_code


def _maybe_save(args, m: MealyMachine, report: Report) -> None:
    if args.machine_out:
        try:
            with open(args.machine_out, "w") as fh:
                fh.write(dumps_machine(m))
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        report.say(f"machine written to {args.machine_out}")
    else:
        report.lines.extend(dumps_machine(m).rstrip("\n").split("\n"))


def cmd_props(args, report: Report) -> int:
    m, s, label = _machine(args)
    rep = proposition_suite(m, s)
    report.result = rep.to_dict()
    report.say(f"{label} ({s.name}, {m.state_count} states)")
    report.say(f"(Ia)+(II): {'pass' if rep.verdicts['Ia_II'] else 'fail'}, "
               f"(Ib): {'pass' if rep.verdicts['Ib'] else 'fail'}")
    for r in rep.results:
        extra = f" ({r.instances} instances)" if r.status != "skipped" else f" ({r.reason})"
        report.say(f"{r.status:<8} {r.name}{extra}")
        for f in r.failures[:5]:
            report.say(f"         {f}")
    return EXIT_PASS if rep.all_held else EXIT_FAIL


def cmd_count_bounds(args, report: Report) -> int:
    from .search import SearchError, counting_bounds

    s = _structure(args.structure)
    try:
        bound = counting_bounds(s, args.predictions, args.states)
    except SearchError as exc:
        raise UsageError(str(exc)) from exc
    report.result = bound.to_dict()
    report.say(f"{s.name} {Predictions.parse(args.predictions).value} with {args.states} states: "
               f"{bound.verdict}")
    if bound.reason:
        report.say(f"  {bound.reason}")
    report.say(f"per-state quota: {bound.quota}")
    for ineq in bound.inequalities:
        report.say(f"  {ineq}")
    if bound.witness is not None:
        report.say("feasible: " + " ".join(f"x{i}={x}" for i, x in enumerate(bound.witness)))
    return EXIT_FAIL if bound.ruled_out else EXIT_PASS


# -- parser -------------------------------------------------------------------------------

def _machine_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--machine", metavar="FILE", help="machine JSON file")
    src.add_argument("--fixture", choices=FIXTURE_NAMES, help="built-in machine")


def _structure_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--structure", required=True,
                   help=f"built-in name ({', '.join(STRUCTURE_NAMES)}) or structure JSON file")


def _predictions_arg(p: argparse.ArgumentParser, choices=("ia-ii", "ia-ib-ii")) -> None:
    p.add_argument("--predictions", required=True, choices=choices)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctxmem", description="Memory cost of simulating contextuality "
                     "with Mealy machines.")
    parser.add_argument("--version", action="version", version=f"ctxmem {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    common.add_argument("--timings", action="store_true", help="append wall-clock timings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("structures", parents=[common], help="list or emit built-in structures")
    p.add_argument("--emit", metavar="NAME", help="print one structure as JSON")
    p.set_defaults(func=cmd_structures)

    p = sub.add_parser("verify", parents=[common], help="check a machine against predictions")
    _machine_args(p)
    _predictions_arg(p, ("ia-ii", "ia-ib-ii", "ib"))
    p.add_argument("--oracle", type=int, metavar="LEN",
                   help="also run the sequence oracle up to this length")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", parents=[common], help="trace an input sequence")
    _machine_args(p)
    p.add_argument("--start", type=int, default=1, help="start state, 1-indexed")
    p.add_argument("--inputs", required=True, help="comma-separated point names")
    p.set_defaults(func=cmd_run)

    for name, func, helptext in (
        ("degree", cmd_degree, "contextuality degree and a witness assignment"),
        ("witness-bounds", cmd_witness_bounds, "noncontextual bound and quantum value"),
        ("contras", cmd_contras, "minimal contradiction sets by size"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _structure_arg(p)
        if name == "contras":
            p.add_argument("--list", action="store_true", help="print every set")
        p.set_defaults(func=func)

    p = sub.add_parser("digraph", parents=[common], help="DOT for a commuting digraph")
    _machine_args(p)
    p.add_argument("--restrict", required=True, help="comma-separated compatible points")
    p.add_argument("--condense", action="store_true", help="group strongly connected components")
    p.add_argument("--out", metavar="FILE", help="write DOT here and print a summary")
    p.set_defaults(func=cmd_digraph)

    p = sub.add_parser("search", parents=[common], help="search for a minimal machine")
    _structure_arg(p)
    _predictions_arg(p)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**9, help="node limit per partition")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: $CTXMEM_THREADS or 1)")
    p.add_argument("--resume-from", type=int, default=0, metavar="K",
                   help="skip the first K partitions")
    p.add_argument("--engine", choices=("backtrack", "sat"), default="backtrack")
    p.add_argument("--cnf-out", metavar="FILE", help="write the DIMACS encoding")
    p.add_argument("--solve", action="store_true", help="solve the encoding with python-sat")
    p.add_argument("--backtrack", action="store_true",
                   help="with --cnf-out/--solve, also run the backtracker and compare")
    p.add_argument("--machine-out", metavar="FILE", help="write a found machine here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("props", parents=[common], help="run the proposition suite")
    _machine_args(p)
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("count-bounds", parents=[common], help="multi-sink counting argument")
    _structure_arg(p)
    _predictions_arg(p)
    p.add_argument("--states", type=int, required=True)
    p.set_defaults(func=cmd_count_bounds)
    return parser


def _inputs(args) -> dict:
    skip = {"func", "json", "timings", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = Report(args.command, _inputs(args))
    func: Callable = args.func
    try:
        code = func(args, report)
    except UsageError as exc:
        print(f"ctxmem {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(report.render(args.json, args.timings))
    return code


if __name__ == "__main__":
    sys.exit(main())
