"""Decide whether a Mealy machine reproduces the deterministic predictions.

Two independent routes are provided:

* a digraph criterion (``check_Ia_II``, ``check_Ib``) built on the sinks and
  reachability of commuting digraphs, and
* ``sequence_oracle``, which plays input sequences against the machine and
  inspects the outputs directly.

Every failure carries a certificate: a start state and input sequence whose
trace, replayed through :func:`ctxmem.machine.run`, shows the violation.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .digraph import (
    CommutingDigraph,
    SinkReport,
    block_digraph,
    commuting_digraph,
    reachable,
    strong_sinks,
)
from .geometry import IncidenceStructure, neighborhood_cover, nonsimple_quota
from .machine import MachineError, MealyMachine, run


class Predictions(str, Enum):
    IA_II = "Ia_II"
    IA_IB_II = "Ia_Ib_II"
    IB = "Ib"

    @classmethod
    def parse(cls, text: str) -> "Predictions":
        key = text.strip().lower().replace("-", "_")
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown prediction set {text!r}; use ia-ii, ia-ib-ii or ib")

    @property
    def cli_name(self) -> str:
        return self.value.lower().replace("_", "-")

    @property
    def includes_ib(self) -> bool:
        return self is not Predictions.IA_II

    @property
    def includes_ia_ii(self) -> bool:
        return self is not Predictions.IB


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


# -- violations and certificates -------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # "Ia", "Ib" or "II"
    index: int  # position in the input sequence where it shows up
    detail: str


def sequence_violation(
    s: IncidenceStructure,
    scope: tuple[str, int],
    inputs: Sequence[int],
    outputs: Sequence[int],
) -> Violation | None:
    """First prediction violated by one recorded run, or None.

    ``scope`` is ``("block", b)`` for (Ia)/(II) runs inside block ``b`` and
    ``("point", p)`` for (Ib) runs among observables compatible with ``p``.
    """
    kind, target = scope
    if kind == "block":
        block = s.blocks[target]
        first: dict[int, int] = {}
        for i, (p, o) in enumerate(zip(inputs, outputs)):
            if p not in block:
                raise ValueError(f"input {s.point_names[p]} is outside block {s.block_label(target)}")
            if p in first:
                if first[p] != o:
                    return Violation("Ia", i, f"{s.point_names[p]} gave {first[p]:+d} then {o:+d}")
                continue
            first[p] = o
            if len(first) == len(block):
                prod = 1
                for v in first.values():
                    prod *= v
                if prod != s.block_signs[target]:
                    return Violation(
                        "II", i, f"product over {s.block_label(target)} is {prod:+d}, "
                        f"expected {int(s.block_signs[target]):+d}"
                    )
        return None
    if kind == "point":
        allowed = set(s.common_compatible((target,)))
        seen = None
        for i, (p, o) in enumerate(zip(inputs, outputs)):
            if p not in allowed:
                raise ValueError(
                    f"input {s.point_names[p]} is not compatible with {s.point_names[target]}"
                )
            if p != target:
                continue
            if seen is None:
                seen = o
            elif seen != o:
                return Violation("Ib", i, f"{s.point_names[p]} gave {seen:+d} then {o:+d}")
        return None
    raise ValueError(f"unknown scope {scope!r}")


@dataclass(frozen=True)
class Certificate:
    kind: str  # violated prediction: Ia, Ib or II
    scope: tuple[str, int]
    start_state: int
    inputs: tuple[int, ...]
    witness: dict = field(default_factory=dict)  # digraph evidence, when available

    def to_dict(self, s: IncidenceStructure) -> dict:
        kind, target = self.scope
        return {
            "violates": self.kind,
            "scope": {
                "kind": kind,
                "name": s.block_label(target) if kind == "block" else s.point_names[target],
            },
            "start_state": f"S{self.start_state + 1}",
            "inputs": [s.point_names[p] for p in self.inputs],
            "witness": self.witness,
        }


def replay(m: MealyMachine, s: IncidenceStructure, cert: Certificate) -> Violation | None:
    """Re-run a certificate and return the violation it exhibits, if any."""
    trace = run(m, cert.start_state, cert.inputs)
    return sequence_violation(s, cert.scope, trace.inputs, trace.outputs)


@dataclass(frozen=True)
class Verdict:
    passed: bool
    prediction_set: Predictions
    status: Status
    certificate: Certificate | None = None
    stats: dict = field(default_factory=dict)

    def to_dict(self, s: IncidenceStructure) -> dict:
        return {
            "passed": self.passed,
            "prediction_set": self.prediction_set.value,
            "status": self.status.value,
            "certificate": None if self.certificate is None else self.certificate.to_dict(s),
            "stats": self.stats,
        }


def _bind(m: MealyMachine, s: IncidenceStructure) -> None:
    if m.num_points != s.num_points:
        raise MachineError(
            f"machine covers {m.num_points} points but {s.name} has {s.num_points}"
        )


def _state_path(
    m: MealyMachine, alphabet: Sequence[int], source: int, targets: Iterable[int]
) -> list[int]:
    """Shortest input word over ``alphabet`` driving ``source`` into ``targets``."""
    goal = set(targets)
    prev: dict[int, tuple[int, int] | None] = {source: None}
    queue = deque([source])
    while queue:
        st = queue.popleft()
        if st in goal:
            word = []
            while prev[st] is not None:
                st, p = prev[st]
                word.append(p)
            return word[::-1]
        for p in alphabet:
            nxt = m.update[st][p]
            if nxt not in prev:
                prev[nxt] = (st, p)
                queue.append(nxt)
    raise AssertionError("target states unreachable; digraph and state graph disagree")


def _names(s: IncidenceStructure, states: Iterable[int]) -> list[str]:
    return [f"S{x + 1}" for x in states]


def _certificate(
    m: MealyMachine, s: IncidenceStructure, scope: tuple[str, int], start: int,
    word: Sequence[int], witness: dict,
) -> Certificate:
    """Certificate for ``word``, labelled with the first violation its replay shows.

    A word built to expose one prediction can break another one earlier (e.g. a
    wrong block product before the intended repeat), so the label comes from the
    replay rather than from the digraph condition that produced the word.
    """
    trace = run(m, start, word)
    shown = sequence_violation(s, scope, trace.inputs, trace.outputs)
    if shown is None:
        raise AssertionError(f"certificate word {list(word)} does not replay to a violation")
    return Certificate(shown.kind, scope, start, tuple(word), witness)


# -- digraph criterion ---------------------------------------------------------------

def check_Ia_II(m: MealyMachine, s: IncidenceStructure) -> Verdict:
    _bind(m, s)
    preds = Predictions.IA_II
    for bi, block in enumerate(s.blocks):
        cd = block_digraph(m, s, bi)
        report = strong_sinks(cd)
        label = s.block_label(bi)
        for sink in report.sinks:
            if sink.outputs is None:
                # two states of one sink disagree on some point of the block
                for p in block:
                    vals = {m.output[st][p] for st in sink.states}
                    if len(vals) > 1:
                        break
                a = sink.states[0]
                b = next(st for st in sink.states if m.output[st][p] != m.output[a][p])
                word = [p] + _state_path(m, block, m.update[a][p], [b]) + [p]
                cert = _certificate(m, s, ("block", bi), a, word, {
                    "block": label,
                    "sink": _names(s, sink.states),
                    "reason": f"sink outputs disagree on {s.point_names[p]}",
                })
                return Verdict(False, preds, Status.FAIL, cert, {"block": label})
            prod = 1
            for p in block:
                prod *= sink.outputs[p]
            if prod != s.block_signs[bi]:
                start = sink.states[0]
                cert = _certificate(m, s, ("block", bi), start, block, {
                    "block": label,
                    "sink": _names(s, sink.states),
                    "reason": f"sink output product {prod:+d}",
                })
                return Verdict(False, preds, Status.FAIL, cert, {"block": label})
        bad = _upstream_mismatch(cd, report)
        if bad is not None:
            (st, p), sink = bad
            word = [p] + _state_path(m, block, m.update[st][p], sink.states) + [p]
            cert = _certificate(m, s, ("block", bi), st, word, {
                "block": label,
                "sink": _names(s, sink.states),
                "vertex": [f"S{st + 1}", s.point_names[p]],
                "reason": "vertex output differs from a reachable sink",
            })
            return Verdict(False, preds, Status.FAIL, cert, {"block": label})
    return Verdict(True, preds, Status.PASS, None, {"blocks_checked": s.num_blocks})


def _upstream_mismatch(cd: CommutingDigraph, report: SinkReport):
    cond = cd.condensation
    sink_of_comp = {}
    for sink in report.sinks:
        sink_of_comp[cond.component_of[sink.vertices[0]]] = sink
    m = cd.machine
    for v, (st, p) in enumerate(cd.base.vertices):
        comps = {cond.component_of[w] for w in reachable(cd.base, [v])}
        for ci in sorted(comps & sink_of_comp.keys()):
            sink = sink_of_comp[ci]
            if sink.outputs[p] != m.output[st][p]:
                return (st, p), sink
    return None


def check_Ib(m: MealyMachine, s: IncidenceStructure) -> Verdict:
    _bind(m, s)
    preds = Predictions.IB
    for p in range(s.num_points):
        cd = commuting_digraph(m, s, [p])
        alphabet = cd.points
        for st in range(m.state_count):
            v = cd.vertex(st, p)
            hits = reachable(cd.base, [v])
            for other in range(m.state_count):
                w = cd.vertex(other, p)
                if w in hits and m.output[other][p] != m.output[st][p]:
                    word = [p] + _state_path(m, alphabet, m.update[st][p], [other]) + [p]
                    cert = _certificate(m, s, ("point", p), st, word, {
                        "point": s.point_names[p],
                        "vertex": [f"S{st + 1}", s.point_names[p]],
                        "reached": [f"S{other + 1}", s.point_names[p]],
                        "reason": "reachable vertex of the same point has a different output",
                    })
                    return Verdict(False, preds, Status.FAIL, cert, {"point": s.point_names[p]})
    return Verdict(True, preds, Status.PASS, None, {"points_checked": s.num_points})


def check(m: MealyMachine, s: IncidenceStructure, preds: Predictions | str) -> Verdict:
    preds = Predictions.parse(preds) if isinstance(preds, str) else preds
    if preds is Predictions.IA_II:
        return check_Ia_II(m, s)
    if preds is Predictions.IB:
        return check_Ib(m, s)
    first = check_Ia_II(m, s)
    if not first.passed:
        return Verdict(False, preds, Status.FAIL, first.certificate, first.stats)
    second = check_Ib(m, s)
    return Verdict(second.passed, preds, second.status, second.certificate, second.stats)


# -- bounded sequence oracle ------------------------------------------------------------

class BudgetExceeded(RuntimeError):
    pass


def _oracle_cells(s: IncidenceStructure, preds: Predictions):
    cells = []
    if preds.includes_ia_ii:
        cells.extend((("block", bi), tuple(b)) for bi, b in enumerate(s.blocks))
    if preds.includes_ib:
        cells.extend((("point", p), s.common_compatible((p,))) for p in range(s.num_points))
    return cells


def _bfs_cell(m, s, scope, alphabet, start, max_len, budget_left):
    """Shortest (then lexicographically least) violating word from one start state.

    Search nodes are (state, first output recorded per relevant point); two
    words reaching the same node behave identically afterwards, so only the
    first one (in length-then-lexicographic order) is kept.
    """
    kind, target = scope
    if kind == "block":
        slots = {p: i for i, p in enumerate(s.blocks[target])}
    else:
        slots = {target: 0}
    width = len(slots)
    root = (start, (0,) * width)
    seen = {root}
    frontier = [(root, ())]
    nodes = 1
    for _ in range(max_len):
        nxt = []
        for (st, rec), word in frontier:
            for p in alphabet:
                nodes += 1
                if nodes > budget_left:
                    raise BudgetExceeded(nodes)
                o = m.output[st][p]
                new_rec = rec
                slot = slots.get(p)
                if slot is not None:
                    if rec[slot] == 0:
                        new_rec = rec[:slot] + (o,) + rec[slot + 1:]
                        if kind == "block" and 0 not in new_rec:
                            prod = 1
                            for v in new_rec:
                                prod *= v
                            if prod != s.block_signs[target]:
                                return word + (p,), nodes, False
                    elif rec[slot] != o:
                        return word + (p,), nodes, False
                node = (m.update[st][p], new_rec)
                if node not in seen:
                    seen.add(node)
                    nxt.append((node, word + (p,)))
        frontier = nxt
        if not frontier:
            return None, nodes, True
    return None, nodes, False


def sequence_oracle(
    m: MealyMachine,
    s: IncidenceStructure,
    preds: Predictions | str,
    max_len: int,
    *,
    budget: int = 10_000_000,
    naive: bool = False,
) -> Verdict:
    """Brute-force check of the predictions on every input word up to ``max_len``.

    With ``naive=True`` every word is enumerated literally and replayed through
    ``run``; otherwise words leading to an identical (state, recorded outputs)
    node are merged, which explores the same behaviours far faster.
    """
    _bind(m, s)
    preds = Predictions.parse(preds) if isinstance(preds, str) else preds
    t0 = time.perf_counter()
    best: tuple | None = None
    nodes = 0
    saturated = True
    try:
        for scope, alphabet in _oracle_cells(s, preds):
            for start in range(m.state_count):
                if naive:
                    word, used, done = _naive_cell(m, s, scope, alphabet, start, max_len, budget - nodes)
                else:
                    word, used, done = _bfs_cell(m, s, scope, alphabet, start, max_len, budget - nodes)
                nodes += used
                saturated = saturated and done
                if word is not None:
                    key = (len(word), start, word, scope)
                    if best is None or key < best:
                        best = key
    except BudgetExceeded:
        stats = {"max_len": max_len, "nodes": budget, "budget": budget}
        if best is None:
            stats["reason"] = f"budget exhausted before completing length {max_len}"
            return Verdict(False, preds, Status.INCONCLUSIVE, None, stats)
        saturated = False
    stats = {"max_len": max_len, "nodes": nodes, "saturated": saturated}
    stats["seconds"] = round(time.perf_counter() - t0, 6)
    if best is not None:
        length, start, word, scope = best
        violation = sequence_violation(s, scope, word, run(m, start, word).outputs)
        cert = Certificate(violation.kind, scope, start, word, {"found_by": "sequence oracle"})
        return Verdict(False, preds, Status.FAIL, cert, stats)
    longest_block = max(len(b) for b in s.blocks)
    if not saturated and preds.includes_ia_ii and max_len < longest_block:
        stats["reason"] = f"inconclusive at length {max_len}: blocks have {longest_block} points"
        return Verdict(False, preds, Status.INCONCLUSIVE, None, stats)
    return Verdict(True, preds, Status.PASS, None, stats)


def _naive_cell(m, s, scope, alphabet, start, max_len, budget_left):
    nodes = 0
    for length in range(1, max_len + 1):
        for word in itertools.product(alphabet, repeat=length):
            nodes += 1
            if nodes > budget_left:
                raise BudgetExceeded(nodes)
            trace = run(m, start, word)
            if sequence_violation(s, scope, word, trace.outputs) is not None:
                return tuple(word), nodes, False
    return None, nodes, False


# -- proposition suite ---------------------------------------------------------------

@dataclass
class PropositionResult:
    name: str
    summary: str
    status: str  # held, violated or skipped
    instances: int = 0
    failures: list[str] = field(default_factory=list)
    reason: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "summary": self.summary, "status": self.status,
               "instances": self.instances}
        if self.failures:
            out["failures"] = self.failures
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass
class PropositionReport:
    results: list[PropositionResult]
    verdicts: dict[str, bool]

    @property
    def all_held(self) -> bool:
        return all(r.status != "violated" for r in self.results)

    def to_dict(self) -> dict:
        return {"verdicts": self.verdicts, "all_held": self.all_held,
                "results": [r.to_dict() for r in self.results]}


class _Tally:
    def __init__(self, name: str, summary: str):
        self.result = PropositionResult(name, summary, "held")

    def check(self, ok: bool, what: str) -> None:
        self.result.instances += 1
        if not ok:
            self.result.status = "violated"
            self.result.failures.append(what)


def _skip(name: str, summary: str, reason: str) -> PropositionResult:
    return PropositionResult(name, summary, "skipped", reason=reason)


@dataclass
class _Digraphs:
    block: list[tuple[CommutingDigraph, SinkReport]]
    point: list[tuple[CommutingDigraph, SinkReport]]


def _state_reach(cd: CommutingDigraph, state: int) -> tuple[frozenset[int], set[int]]:
    """States and condensation components reachable from the entire state."""
    hits = reachable(cd.base, cd.state_vertices(state))
    states = frozenset(cd.base.vertices[v][0] for v in hits)
    comps = {cd.condensation.component_of[v] for v in hits}
    return states, comps


def proposition_suite(m: MealyMachine, s: IncidenceStructure) -> PropositionReport:
    """Check the structural consequences of the predictions on one machine.

    Each property holds for every machine satisfying the prediction set it
    assumes; those whose assumption fails are reported as skipped.
    """
    _bind(m, s)
    ia_ii = check_Ia_II(m, s).passed
    ib = check_Ib(m, s).passed
    full = ia_ii and ib
    graphs = _Digraphs(
        [(cd, strong_sinks(cd)) for cd in (block_digraph(m, s, bi) for bi in range(s.num_blocks))],
        [(cd, strong_sinks(cd)) for cd in (commuting_digraph(m, s, [p]) for p in range(s.num_points))],
    )
    contexts = {
        (st, bi): _product(m, st, b) != s.block_signs[bi]
        for st in range(m.state_count) for bi, b in enumerate(s.blocks)
    }
    results = [_sinks_are_states(m, s, graphs), _reach_inherited(m, s, graphs)]
    need = "machine does not satisfy (Ia)+(II)"
    need_full = "machine does not satisfy (Ia)+(Ib)+(II)"
    ia_checks = [
        ("block_sink_confirms", "a state inside a sink of D_b confirms b; in a simple sink b is simple",
         _block_sink_confirms),
        ("contradiction_two_nonsimple", "every contradiction context has two nonsimple vertices",
         _two_nonsimple),
        ("contradiction_two_sinks", "a contradiction context reaches two sinks of D_b with different "
         "outputs and lies in none", _two_sinks),
        ("point_sink_confirms", "a state in a sink of D_p of order at most 2 confirms every block "
         "through p; order 1 makes them simple", _point_sink_confirms),
        ("nonsimple_quota", "every state has at least the structure's quota of nonsimple vertices",
         _quota_nonsimple),
        ("one_simple_sink", "no state lies in simple sinks of two different D_p", _one_simple_sink),
    ]
    for name, summary, fn in ia_checks:
        if not ia_ii:
            results.append(_skip(name, summary, need))
        else:
            results.append(fn(_Tally(name, summary), m, s, graphs, contexts))
    full_checks = [
        ("point_sink_uniform", "within a sink of D_p all states give the same output for p",
         _point_sink_uniform),
        ("contradiction_two_multisink", "a contradiction context has two multi-sink points "
         "whose sinks avoid the state", _two_multisink),
        ("multisink_quota", "every state avoids the sinks of at least the quota of multi-sink points",
         _multisink_quota),
    ]
    for name, summary, fn in full_checks:
        if not full:
            results.append(_skip(name, summary, need_full))
        else:
            results.append(fn(_Tally(name, summary), m, s, graphs, contexts))
    return PropositionReport(results, {"Ia_II": ia_ii, "Ib": ib})


def _product(m: MealyMachine, st: int, points: Iterable[int]) -> int:
    prod = 1
    for p in points:
        prod *= m.output[st][p]
    return prod


def _is_simple(m: MealyMachine, st: int, points: Iterable[int]) -> bool:
    return all(m.update[st][p] == st for p in points)


def _sinks_are_states(m, s, graphs) -> PropositionResult:
    # strong_sinks raises on a malformed sink; reaching here means every sink passed
    tally = _Tally("sinks_are_states", "every strongly connected sink is a union of entire states")
    for cd, report in graphs.block + graphs.point:
        for sink in report.sinks:
            tally.check(len(sink.vertices) == len(sink.states) * len(cd.points), str(sink.states))
    return tally.result


def _reach_inherited(m, s, graphs) -> PropositionResult:
    tally = _Tally("block_reach_in_point_digraph",
                   "a state reachable in D_b stays reachable in D_p for every p in b")
    point_reach = [
        [_state_reach(cd, st)[0] for st in range(m.state_count)] for cd, _ in graphs.point
    ]
    for bi, (cd, _) in enumerate(graphs.block):
        for st in range(m.state_count):
            got = _state_reach(cd, st)[0]
            for p in s.blocks[bi]:
                tally.check(got <= point_reach[p][st],
                            f"S{st + 1} in D_{s.block_label(bi)} vs D_{s.point_names[p]}")
    return tally.result


def _block_sink_confirms(tally, m, s, graphs, contexts):
    for bi, (cd, report) in enumerate(graphs.block):
        for sink in report.sinks:
            for st in sink.states:
                tally.check(not contexts[(st, bi)], f"(S{st + 1}, {s.block_label(bi)}) contradicts")
                if sink.order == 1:
                    tally.check(_is_simple(m, st, s.blocks[bi]),
                                f"(S{st + 1}, {s.block_label(bi)}) not simple")
    return tally.result


def _two_nonsimple(tally, m, s, graphs, contexts):
    for (st, bi), contra in contexts.items():
        if contra:
            ns = sum(1 for p in s.blocks[bi] if m.update[st][p] != st)
            tally.check(ns >= 2, f"(S{st + 1}, {s.block_label(bi)}) has {ns} nonsimple vertices")
    return tally.result


def _two_sinks(tally, m, s, graphs, contexts):
    for (st, bi), contra in contexts.items():
        if not contra:
            continue
        cd, report = graphs.block[bi]
        _, comps = _state_reach(cd, st)
        cond = cd.condensation
        patterns = {
            tuple(k.outputs[p] for p in s.blocks[bi])
            for k in report.sinks
            if cond.component_of[k.vertices[0]] in comps and k.outputs is not None
        }
        inside = any(st in k.states for k in report.sinks)
        tally.check(len(patterns) >= 2 and not inside, f"(S{st + 1}, {s.block_label(bi)})")
    return tally.result


def _point_sink_confirms(tally, m, s, graphs, contexts):
    for p, (cd, report) in enumerate(graphs.point):
        for sink in report.sinks:
            if sink.order > 2:
                continue
            for st in sink.states:
                for bi in s.blocks_through[p]:
                    tally.check(not contexts[(st, bi)], f"(S{st + 1}, {s.block_label(bi)}) contradicts")
                    if sink.order == 1:
                        tally.check(_is_simple(m, st, s.blocks[bi]),
                                    f"(S{st + 1}, {s.block_label(bi)}) not simple")
    return tally.result


def _quota_nonsimple(tally, m, s, graphs, contexts):
    q = nonsimple_quota(s)
    for st in range(m.state_count):
        ns = m.nonsimple_count(st)
        tally.check(ns >= q, f"S{st + 1} has {ns} nonsimple vertices, quota {q}")
    return tally.result


def _one_simple_sink(tally, m, s, graphs, contexts):
    q = nonsimple_quota(s)
    worst = min(
        neighborhood_cover(s, p, r) for p in range(s.num_points) for r in range(p + 1, s.num_points)
    )
    if s.num_points - worst >= q:
        tally.result.status = "skipped"
        tally.result.reason = (
            f"two point neighbourhoods can leave {s.num_points - worst} points uncovered, "
            f"not fewer than the quota {q}"
        )
        return tally.result
    for st in range(m.state_count):
        simple = [p for p, (_, rep) in enumerate(graphs.point)
                  if any(k.states == (st,) for k in rep.sinks)]
        tally.check(len(simple) <= 1, f"S{st + 1} in simple sinks of {len(simple)} points")
    return tally.result


def _point_sink_uniform(tally, m, s, graphs, contexts):
    for p, (cd, report) in enumerate(graphs.point):
        for sink in report.sinks:
            vals = {m.output[st][p] for st in sink.states}
            tally.check(len(vals) == 1, f"sink {sink.states} of D_{s.point_names[p]}")
    return tally.result


def _multisink_points(graphs) -> list[int]:
    return [p for p, (_, rep) in enumerate(graphs.point) if len(rep.sinks) >= 2]


def _outside_sinks(graphs, p: int, st: int) -> bool:
    return all(st not in k.states for k in graphs.point[p][1].sinks)


def _two_multisink(tally, m, s, graphs, contexts):
    multi = set(_multisink_points(graphs))
    for (st, bi), contra in contexts.items():
        if contra:
            good = [p for p in s.blocks[bi] if p in multi and _outside_sinks(graphs, p, st)]
            tally.check(len(good) >= 2, f"(S{st + 1}, {s.block_label(bi)}) has {len(good)}")
    return tally.result


def _multisink_quota(tally, m, s, graphs, contexts):
    q = nonsimple_quota(s)
    multi = _multisink_points(graphs)
    for st in range(m.state_count):
        n = sum(1 for p in multi if _outside_sinks(graphs, p, st))
        tally.check(n >= q, f"S{st + 1} avoids sinks of {n} multi-sink points, quota {q}")
    return tally.result
