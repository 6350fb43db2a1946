"""Exhaustive search for small Mealy machines reproducing a prediction set.

The search runs in two stages.  Stage 1 picks one output row per state,
enumerating row multisets up to the sign-preserving automorphisms of the
structure and relabelling of states.  Rows are ranked by (number of violated
blocks, mask) and a multiset is kept only if its sorted rank vector is the
least among all its automorphic images.  Stage 2 assigns transitions, block by
block, and prunes with the reachability form of the predictions:

* (Ia): every state reachable inside block ``b`` after measuring ``p`` in
  ``S`` gives the same output for ``p`` as ``S``;
* (Ib): the same, with moves drawn from all observables compatible with ``p``;
* (II): every state in a bottom component of the block's state graph confirms
  the block.

These are equivalent to the commuting-digraph criterion in :mod:`ctxmem.verify`,
which re-checks every machine the search returns.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Iterator

from .geometry import (
    IncidenceStructure,
    _violated_table,
    automorphisms,
    build_structure,
    neighborhood_cover,
    nonsimple_quota,
)
from .machine import MealyMachine
from .verify import Predictions, check

MAX_STATES = 6
DEFAULT_BUDGET = 10**9


class SearchError(ValueError):
    pass


class UnsupportedBoundError(SearchError):
    pass


class SearchStatus(str, Enum):
    FOUND = "found"
    NONE_EXHAUSTED = "none_exhausted"
    INCONCLUSIVE = "inconclusive"


@dataclass
class SearchStats:
    nodes: int = 0
    output_tables: int = 0
    prunes: dict[str, int] = field(default_factory=dict)
    partitions: int = 0
    partitions_done: int = 0
    seconds: float = 0.0

    def prune(self, rule: str) -> None:
        self.prunes[rule] = self.prunes.get(rule, 0) + 1

    def merge(self, other: "SearchStats") -> None:
        self.nodes += other.nodes
        self.output_tables += other.output_tables
        for k, v in other.prunes.items():
            self.prunes[k] = self.prunes.get(k, 0) + v
        self.partitions_done += other.partitions_done

    def to_dict(self, *, timings: bool = False) -> dict:
        out = {
            "nodes": self.nodes,
            "output_tables": self.output_tables,
            "prunes": dict(sorted(self.prunes.items())),
            "partitions": self.partitions,
            "partitions_done": self.partitions_done,
        }
        if timings:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass(frozen=True)
class SearchOutcome:
    status: SearchStatus
    machine: MealyMachine | None
    stats: SearchStats
    budget: int
    resume_from: int | None = None  # first partition not fully explored

    def __post_init__(self) -> None:
        if (self.machine is not None) != (self.status is SearchStatus.FOUND):
            raise SearchError("a machine is reported exactly when the status is found")

    def to_dict(self, *, timings: bool = False) -> dict:
        from .machine import dumps_machine
        import json

        return {
            "status": self.status.value,
            "machine": None if self.machine is None else json.loads(dumps_machine(self.machine)),
            "stats": self.stats.to_dict(timings=timings),
            "budget": self.budget,
            "resume_from": self.resume_from,
        }


class _OutOfBudget(Exception):
    pass


class _Stopped(Exception):
    pass


# -- precomputed structure data ------------------------------------------------------

@dataclass
class _Tables:
    s: IncidenceStructure
    violated: list[int]
    rank: list[int]  # rank of each row mask under (violated count, mask)
    row_of_rank: list[int]
    groups: list[tuple[int, list[int]]]  # (violated mask, rows sorted by rank)
    group_of: dict[int, int]
    perms: list[tuple[list[int], list[int]]]  # split lookup tables per automorphism
    orbit_min: list[int] | None  # least rank in each row's orbit


def _perm_tables(perm: tuple[int, ...], n: int) -> tuple[list[int], list[int]]:
    lo_bits = min(n, 8)
    hi_bits = n - lo_bits

    def image(mask: int, offset: int) -> int:
        out = 0
        for i in range(8):
            if mask >> i & 1:
                out |= 1 << perm[offset + i]
        return out

    lo = [image(m, 0) for m in range(1 << lo_bits)]
    hi = [image(m, 8) for m in range(1 << hi_bits)] if hi_bits else [0]
    return lo, hi


@lru_cache(maxsize=None)
def _tables(name_key: IncidenceStructure, symmetry: bool) -> _Tables:
    s = name_key
    violated = _violated_table(s)
    order = sorted(range(1 << s.num_points), key=lambda r: (violated[r].bit_count(), r))
    rank = [0] * len(order)
    for k, r in enumerate(order):
        rank[r] = k
    by_mask: dict[int, list[int]] = {}
    for r in order:
        by_mask.setdefault(violated[r], []).append(r)
    groups = sorted(by_mask.items(), key=lambda kv: (kv[0].bit_count(), rank[kv[1][0]]))
    group_of = {vm: gi for gi, (vm, _) in enumerate(groups)}
    perms: list[tuple[list[int], list[int]]] = []
    orbit_min = None
    if symmetry:
        for g in automorphisms(s, signed=True).elements:
            if g != tuple(range(s.num_points)):
                perms.append(_perm_tables(g, s.num_points))
        orbit_min = list(rank)
        for lo, hi in perms:
            for r in range(len(rank)):
                img = lo[r & 0xFF] | hi[r >> 8]
                if rank[img] < orbit_min[r]:
                    orbit_min[r] = rank[img]
    return _Tables(s, violated, rank, order, groups, group_of, perms, orbit_min)


# -- the search proper ---------------------------------------------------------------

class _Search:
    def __init__(
        self,
        s: IncidenceStructure,
        preds: Predictions,
        states: int,
        *,
        symmetry: bool,
        theorem_pruning: bool,
        budget: int,
        stop=None,
    ):
        self.s = s
        self.preds = preds
        self.n = states
        self.symmetry = symmetry
        self.pruning = theorem_pruning
        self.budget = budget
        self.stop = stop
        self.stats = SearchStats()
        self.t = _tables(s, symmetry)
        self.P = s.num_points
        self.blocks = s.blocks
        self.ib = preds.includes_ib
        self.quota = nonsimple_quota(s) if theorem_pruning else 0
        # scopes whose reachability constrains outputs: blocks, and C(p) for (Ib)
        self.block_scopes = [tuple(b) for b in s.blocks]
        self.point_scopes = [s.common_compatible((p,)) for p in range(self.P)] if self.ib else []
        self.scopes_of_point: list[list[int]] = [[] for _ in range(self.P)]
        self.scopes = self.block_scopes + self.point_scopes
        for si, scope in enumerate(self.scopes):
            for p in scope:
                self.scopes_of_point[p].append(si)
        # anchors: which points' outputs a scope constrains
        self.anchors = [tuple(b) for b in self.block_scopes] + [(p,) for p in range(len(self.point_scopes))]
        self.order = self._variable_order()

    def _variable_order(self) -> list[int]:
        seen: list[int] = []
        for b in self.blocks:
            for p in b:
                if p not in seen:
                    seen.append(p)
        for p in range(self.P):
            if p not in seen:
                seen.append(p)
        return seen

    def _tick(self) -> None:
        self.stats.nodes += 1
        if self.stats.nodes > self.budget:
            raise _OutOfBudget
        if self.stop is not None and self.stats.nodes & 0x3FF == 0 and self.stop.is_set():
            raise _Stopped

    # -- stage 1 ---------------------------------------------------------------

    def first_rows(self) -> list[int]:
        """Candidate first rows (one per search partition), in rank order."""
        t = self.t
        if not self.symmetry:
            return list(t.row_of_rank)
        return [r for r in t.row_of_rank if t.orbit_min[r] == t.rank[r]]

    def run_partition(self, r0: int) -> MealyMachine | None:
        return self._extend([r0])

    def _extend(self, rows: list[int]) -> MealyMachine | None:
        if len(rows) == self.n:
            if self.symmetry and not self._canonical(rows):
                self.stats.prune("canonical")
                return None
            if self.pruning and not self._output_ok(rows, 0, final=True):
                self.stats.prune("output_support")
                return None
            self.stats.output_tables += 1
            return self._stage2(rows)
        remaining = self.n - len(rows) - 1
        t = self.t
        floor = t.rank[rows[-1]] if self.symmetry else -1
        least = t.rank[rows[0]]
        need_confirm = self._required_confirmations(rows, remaining) if self.pruning else 0
        for vm, members in t.groups:
            if vm & need_confirm:
                continue
            if self.symmetry and t.rank[members[-1]] < floor:
                continue
            if self.pruning and not self._group_ok(rows, vm, remaining):
                self.stats.prune("output_support")
                continue
            for r in members:
                if self.symmetry:
                    if t.rank[r] < floor or t.orbit_min[r] < least:
                        continue
                self._tick()
                rows.append(r)
                if not self.pruning or self._output_ok(rows, remaining, final=False):
                    found = self._extend(rows)
                    if found is not None:
                        return found
                else:
                    self.stats.prune("output_support")
                rows.pop()
        return None

    def _canonical(self, rows: list[int]) -> bool:
        t = self.t
        mine = sorted(t.rank[r] for r in rows)
        for lo, hi in t.perms:
            other = sorted(t.rank[lo[r & 0xFF] | hi[r >> 8]] for r in rows)
            if other < mine:
                return False
        return True

    def _pattern(self, row: int, bi: int) -> int:
        return row & self.s.block_masks[bi]

    def _required_confirmations(self, rows: list[int], remaining: int) -> int:
        """Blocks the next row must confirm, because too few other states are left."""
        viol = self.t.violated
        need = 0
        for i, r in enumerate(rows):
            vm = viol[r]
            bi = 0
            while vm:
                if vm & 1:
                    patterns = {
                        self._pattern(o, bi) for j, o in enumerate(rows)
                        if j != i and not viol[o] >> bi & 1
                    }
                    if len(patterns) + remaining < 2:
                        need |= 1 << bi
                vm >>= 1
                bi += 1
        return need

    def _group_ok(self, rows: list[int], vm: int, remaining: int) -> bool:
        # every block the new row contradicts needs two other confirming states
        viol = self.t.violated
        bi = 0
        while vm:
            if vm & 1:
                confirming = sum(1 for o in rows if not viol[o] >> bi & 1)
                if confirming + remaining < 2:
                    return False
            vm >>= 1
            bi += 1
        return True

    def _output_ok(self, rows: list[int], remaining: int, *, final: bool) -> bool:
        """Output-level consequences of a contradiction context (S, b).

        Two sinks of the block digraph must be reachable from S, made of other
        states that confirm b with different patterns, and for every point of b
        some reachable sink agrees with S on that point.
        """
        viol = self.t.violated
        for i, r in enumerate(rows):
            vm = viol[r]
            bi = 0
            while vm:
                if vm & 1:
                    mask = self.s.block_masks[bi]
                    patterns = set()
                    for j, o in enumerate(rows):
                        if j != i and not viol[o] >> bi & 1:
                            patterns.add(o & mask)
                    if len(patterns) + remaining < 2:
                        return False
                    if remaining == 0:
                        covered = 0
                        for pat in patterns:
                            covered |= ~(pat ^ r) & mask
                        if covered != mask:
                            return False
                vm >>= 1
                bi += 1
        return True

    # -- stage 2 ---------------------------------------------------------------
    #
    # Every scope (a block, or the observables compatible with a point) keeps
    # the successor masks of its partial state graph.  Reachability only grows
    # as transitions are added, so a target whose current reachable set already
    # mixes outputs for the anchor point can be struck from every domain.

    def _stage2(self, rows: list[int]) -> MealyMachine | None:
        n, P = self.n, self.P
        out = [[-1 if r >> p & 1 else 1 for p in range(P)] for r in rows]
        self.out = out
        # value[p][v]: states whose output on p is v (v = 0 for +1, 1 for -1)
        self.value = [
            [sum(1 << t for t in range(n) if (rows[t] >> p & 1) == v) for v in (0, 1)]
            for p in range(P)
        ]
        self.contra = [
            [bool(self.t.violated[rows[st]] >> bi & 1) for bi in range(len(self.blocks))]
            for st in range(n)
        ]
        dom = [[self.value[p][rows[st] >> p & 1] for p in range(P)] for st in range(n)]
        self.upd = [[-1] * P for _ in range(n)]
        nsc = len(self.scopes)
        self.succ = [[0] * n for _ in range(nsc)]
        self.open = [[len(scope)] * n for scope in self.scopes]
        self.reach = [[1 << st for st in range(n)] for _ in range(nsc)]
        if self.pruning:
            for st in range(n):
                movable = [dom[st][p] & ~(1 << st) != 0 for p in range(P)]
                if sum(movable) < self.quota:
                    self.stats.prune("nonsimple_quota")
                    return None
                for bi, b in enumerate(self.blocks):
                    if self.contra[st][bi] and sum(movable[p] for p in b) < 2:
                        self.stats.prune("two_nonsimple")
                        return None
        if self._assign(dom, n * P):
            return MealyMachine.from_rows(self.s.name, out, self.upd)
        return None

    def _pick(self, dom) -> tuple[int, int]:
        best = None
        best_size = 99
        for st in range(self.n):
            row = self.upd[st]
            drow = dom[st]
            for p in self.order:
                if row[p] < 0:
                    size = drow[p].bit_count()
                    if size < best_size:
                        best, best_size = (st, p), size
                        if size <= 1:
                            return best
        return best

    def _assign(self, dom, left: int) -> bool:
        if left == 0:
            return self._complete_ok()
        st, p = self._pick(dom)
        options = dom[st][p]
        candidates = ([st] if options >> st & 1 else []) + [
            t for t in range(self.n) if t != st and options >> t & 1
        ]
        for target in candidates:
            self._tick()
            saved = self._place(st, p, target)
            new_dom = self._propagate(dom, st, p)
            if new_dom is not None and self._assign(new_dom, left - 1):
                return True
            self._unplace(st, p, saved)
        return False

    def _place(self, st: int, p: int, target: int):
        self.upd[st][p] = target
        saved = []
        for si in self.scopes_of_point[p]:
            saved.append((si, self.succ[si][st], self.reach[si]))
            self.succ[si][st] |= 1 << target
            self.open[si][st] -= 1
            self.reach[si] = self._closure(self.succ[si])
        return saved

    def _unplace(self, st: int, p: int, saved) -> None:
        self.upd[st][p] = -1
        for si, succ, reach in saved:
            self.succ[si][st] = succ
            self.open[si][st] += 1
            self.reach[si] = reach

    def _closure(self, succ: list[int]) -> list[int]:
        n = self.n
        reach = [succ[st] | 1 << st for st in range(n)]
        for k in range(n):
            rk = reach[k]
            bit = 1 << k
            for i in range(n):
                if reach[i] & bit:
                    reach[i] |= rk
        return reach

    def _propagate(self, dom, st: int, p: int):
        n = self.n
        dom = [list(r) for r in dom]
        dom[st][p] = 1 << self.upd[st][p]
        nb = len(self.block_scopes)
        for si in self.scopes_of_point[p]:
            reach = self.reach[si]
            for a in self.anchors[si]:
                plus, minus = self.value[a]
                sp = sm = 0
                for t in range(n):
                    rt = reach[t]
                    if rt & minus == 0:
                        sp |= 1 << t
                    elif rt & plus == 0:
                        sm |= 1 << t
                stable = (sp, sm)
                for s2 in range(n):
                    allowed = stable[self.rows_bit(s2, a)]
                    d = dom[s2][a] & allowed
                    if d == 0:
                        self.stats.prune("ib_reach" if si >= nb else "ia_reach")
                        return None
                    dom[s2][a] = d
            if si < nb and not self._sinks_confirm(si):
                self.stats.prune("ii_sink")
                return None
        if self.pruning:
            if not self._nonsimple_room(dom):
                return None
            if self.ib and not self._multisink_possible():
                self.stats.prune("multisink_quota")
                return None
        return dom

    def rows_bit(self, st: int, p: int) -> int:
        return self.out[st][p] == -1

    def _final(self, si: int) -> list[bool]:
        reach = self.reach[si]
        opened = 0
        for st, c in enumerate(self.open[si]):
            if c:
                opened |= 1 << st
        return [reach[st] & opened == 0 for st in range(self.n)]

    def _sinks_confirm(self, si: int) -> bool:
        final = self._final(si)
        reach = self.reach[si]
        for st in range(self.n):
            if self.contra[st][si] and final[st] and self._bottom(reach, st):
                return False
        return True

    def _nonsimple_room(self, dom) -> bool:
        for st in range(self.n):
            me = 1 << st
            movable = [d & ~me != 0 for d in dom[st]]
            if sum(movable) < self.quota:
                self.stats.prune("nonsimple_quota")
                return False
            for bi, b in enumerate(self.blocks):
                if self.contra[st][bi] and sum(movable[q] for q in b) < 2:
                    self.stats.prune("two_nonsimple")
                    return False
        return True

    @staticmethod
    def _bottom(reach: list[int], st: int) -> bool:
        m = reach[st]
        while m:
            low = m & -m
            if not reach[low.bit_length() - 1] >> st & 1:
                return False
            m ^= low
        return True

    def _multisink_possible(self) -> bool:
        # a state settled into a sink of D_p cannot count p towards its quota
        nb = len(self.block_scopes)
        settled = [0] * self.n
        for p in range(self.P):
            si = nb + p
            final = self._final(si)
            reach = self.reach[si]
            for st in range(self.n):
                if final[st] and self._bottom(reach, st):
                    settled[st] += 1
        return all(self.P - c >= self.quota for c in settled)

    def _complete_ok(self) -> bool:
        for si in range(len(self.scopes)):
            reach = self.reach[si]
            for a in self.anchors[si]:
                for st in range(self.n):
                    same = self.value[a][self.rows_bit(st, a)]
                    if reach[self.upd[st][a]] & ~same:
                        return False
            if si < len(self.block_scopes):
                for st in range(self.n):
                    if self.contra[st][si] and self._bottom(reach, st):
                        return False
        return True


def _partition_worker(args) -> tuple[int, MealyMachine | None, SearchStats, str]:
    (structure, preds, states, symmetry, pruning, budget, index, r0, stop) = args
    search = _Search(structure, preds, states, symmetry=symmetry,
                     theorem_pruning=pruning, budget=budget, stop=stop)
    try:
        found = search.run_partition(r0)
        search.stats.partitions_done = 1
        return index, found, search.stats, "done"
    except _OutOfBudget:
        return index, None, search.stats, "budget"
    except _Stopped:
        return index, None, search.stats, "stopped"


def default_threads() -> int:
    value = os.environ.get("CTXMEM_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise SearchError(f"CTXMEM_THREADS must be an integer, got {value!r}") from None
    return 1


def find_machine(
    s: IncidenceStructure | str,
    preds: Predictions | str,
    states: int,
    *,
    budget: int = DEFAULT_BUDGET,
    symmetry: bool = True,
    theorem_pruning: bool = True,
    threads: int | None = None,
    resume_from: int = 0,
    engine: str = "backtrack",
) -> SearchOutcome:
    """Look for a ``states``-state machine satisfying ``preds`` on ``s``.

    The search space is split into partitions, one per admissible first output
    row.  ``budget`` caps the nodes explored in each partition; when it runs
    out the outcome is inconclusive and ``resume_from`` names the first
    partition to revisit.  Nonexistence is reported only after every partition
    has been exhausted.

    ``engine="sat"`` instead hands the CNF encoding from :mod:`ctxmem.cnf`
    to an external SAT solver; the budget and partitions do not apply there.
    """
    if isinstance(s, str):
        s = build_structure(s)
    preds = Predictions.parse(preds) if isinstance(preds, str) else preds
    if not 1 <= states <= MAX_STATES:
        raise SearchError(f"state count must be in 1..{MAX_STATES}, got {states}")
    if engine == "sat":
        return _find_with_sat(s, preds, states, budget)
    if engine != "backtrack":
        raise SearchError(f"unknown engine {engine!r}; use backtrack or sat")
    threads = threads or default_threads()
    start = time.perf_counter()
    probe = _Search(s, preds, states, symmetry=symmetry,
                    theorem_pruning=theorem_pruning, budget=budget)
    firsts = probe.first_rows()
    stats = SearchStats(partitions=len(firsts))
    jobs = [
        (s, preds, states, symmetry, theorem_pruning, budget, i, r0)
        for i, r0 in enumerate(firsts) if i >= resume_from
    ]
    stats.partitions_done = resume_from

    def finish(status, machine=None, resume=None):
        stats.seconds = time.perf_counter() - start
        return SearchOutcome(status, machine, stats, budget, resume)

    if threads <= 1:
        results = (_partition_worker(job + (None,)) for job in jobs)
        return _collect(results, s, preds, stats, finish)
    import multiprocessing

    with multiprocessing.Manager() as manager:
        stop = manager.Event()
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_partition_worker, job + (stop,)) for job in jobs]

            def ordered():
                for fut in futures:
                    yield fut.result()

            try:
                return _collect(ordered(), s, preds, stats, finish)
            finally:
                stop.set()
                for fut in futures:
                    fut.cancel()


def _find_with_sat(s, preds, states, budget) -> SearchOutcome:
    from .cnf import encode, solve

    start = time.perf_counter()
    enc = encode(s, preds, states)
    machine = solve(enc)
    stats = SearchStats(seconds=time.perf_counter() - start)
    stats.prunes["sat_variables"] = enc.cnf.num_vars
    stats.prunes["sat_clauses"] = len(enc.cnf.clauses)
    if machine is None:
        return SearchOutcome(SearchStatus.NONE_EXHAUSTED, None, stats, budget)
    verdict = check(machine, s, preds)
    if not verdict.passed:
        raise AssertionError(f"solver model fails the verifier: {verdict.certificate}")
    return SearchOutcome(SearchStatus.FOUND, machine, stats, budget)


def _collect(results, s, preds, stats, finish) -> SearchOutcome:
    for index, machine, part_stats, how in results:
        stats.merge(part_stats)
        if machine is not None:
            verdict = check(machine, s, preds)
            if not verdict.passed:
                raise AssertionError(
                    f"search produced a machine the verifier rejects: {verdict.certificate}"
                )
            return finish(SearchStatus.FOUND, machine)
        if how != "done":
            return finish(SearchStatus.INCONCLUSIVE, None, index)
    return finish(SearchStatus.NONE_EXHAUSTED)


# -- counting bounds -----------------------------------------------------------------

@dataclass(frozen=True)
class CountingBound:
    ruled_out: bool
    structure: str
    states: int
    quota: int
    lone_sink_lemma: bool
    inequalities: tuple[str, ...]
    witness: tuple[int, ...] | None  # a feasible x vector when not ruled out
    reason: str = ""

    @property
    def verdict(self) -> str:
        return "ruled_out" if self.ruled_out else "not_ruled_out"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "structure": self.structure,
            "states": self.states,
            "quota": self.quota,
            "lone_sink_lemma": self.lone_sink_lemma,
            "inequalities": list(self.inequalities),
            "witness": None if self.witness is None else list(self.witness),
            "reason": self.reason,
        }


def _simple_sinks_forced(in_sinks: int) -> int:
    """Fewest simple sinks when ``in_sinks`` states form at least two sinks."""
    if in_sinks == 2:
        return 2
    if in_sinks == 3:
        return 1
    return 0


def _term(coef: int, var: str) -> str:
    return var if coef == 1 else f"{coef}{var}"


def _linear(coefs: list[int]) -> str:
    parts = [_term(c, f"x{i}") for i, c in enumerate(coefs) if c]
    return " + ".join(parts) if parts else "0"


def counting_bounds(
    s: IncidenceStructure | str, preds: Predictions | str, states: int
) -> CountingBound:
    """Rule out machines with too few states by counting multi-sink points.

    ``x_i`` counts the multi-sink points ``p`` whose digraph ``D_p`` has exactly
    ``i`` states outside every sink.  Each state sits outside the sinks of at
    least ``quota`` multi-sink points; each state lies in a simple sink for at
    most one point (when two point neighbourhoods always leave fewer than
    ``quota`` points uncovered); and a point with only two or three states in
    sinks forces two or one simple sinks respectively.
    """
    if isinstance(s, str):
        s = build_structure(s)
    preds = Predictions.parse(preds) if isinstance(preds, str) else preds
    if not 1 <= states <= MAX_STATES:
        raise SearchError(f"state count must be in 1..{MAX_STATES}, got {states}")
    q = nonsimple_quota(s)
    P = s.num_points
    worst = min(neighborhood_cover(s, a, b) for a, b in combinations(range(P), 2))
    lemma = P - worst < q
    if not preds.includes_ib:
        return CountingBound(False, s.name, states, q, lemma, (), None,
                             "the multi-sink counting argument needs prediction (Ib)")
    if not lemma:
        raise UnsupportedBoundError(
            f"{s.name}: two point neighbourhoods can leave {P - worst} points uncovered, "
            f"not fewer than the per-state quota {q}; the lone-sink lemma does not apply"
        )
    if states < 2:
        return CountingBound(True, s.name, states, q, lemma,
                             ("a multi-sink point needs two states in sinks",), None)
    top = states - 2  # at least two states lie in sinks of a multi-sink point
    lower = list(range(top + 1))
    upper = [_simple_sinks_forced(states - i) for i in range(top + 1)]
    ineqs = (
        f"{_linear(lower)} >= {states * q}",
        f"{_linear(upper)} <= {states}",
        f"{_linear([1] * (top + 1))} <= {P}",
        f"{_linear([1 + u for u in upper])} <= {P + states}",
    )
    witness = None
    for xs in _compositions(top + 1, P):
        if (sum(i * x for i, x in enumerate(xs)) >= states * q
                and sum(u * x for u, x in zip(upper, xs)) <= states):
            witness = xs
            break
    return CountingBound(witness is None, s.name, states, q, lemma, ineqs, witness)


def _compositions(k: int, total: int) -> Iterator[tuple[int, ...]]:
    """All nonnegative integer k-vectors with sum at most ``total``."""
    if k == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(k - 1, total - first):
            yield (first,) + rest
