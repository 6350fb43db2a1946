"""CNF encoding of "a k-state machine satisfying the predictions exists".

Variables:

* ``out[S][p]`` is true when state ``S`` outputs -1 on point ``p``;
* ``upd[S][p][T]`` is true when measuring ``p`` in ``S`` moves to ``T``
  (exactly one per ``(S, p)``).

For every scope (a block, or the observables compatible with a point for
(Ib)) the encoding adds the state graph's edges and its exact reachability
relation, unrolled level by level.  The predictions then read:

* after measuring ``a`` in ``S``, every state reachable inside the scope
  gives the same output on ``a`` as ``S``;
* (II): a state that contradicts block ``b`` has some state reachable inside
  ``b`` that cannot reach it back, i.e. it is not in a bottom component.

Rows are constrained to be lexicographically nondecreasing, so each machine
appears once per ordering of identical rows.  A model maps back to a machine
with :func:`decode_model`; the variable map is written into the DIMACS comments
so a model can also be decoded from the file alone.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Sequence

from .geometry import IncidenceStructure, build_structure
from .machine import MealyMachine
from .verify import Predictions

MAX_STATES = 6


class CNFError(ValueError):
    pass


class SolverUnavailable(RuntimeError):
    pass


@dataclass
class CNF:
    num_vars: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    names: dict[int, str] = field(default_factory=dict)

    def var(self, name: str | None = None) -> int:
        self.num_vars += 1
        if name is not None:
            self.names[self.num_vars] = name
        return self.num_vars

    def add(self, clause: Iterable[int]) -> None:
        self.clauses.append(list(clause))

    def to_dimacs(self, header: Sequence[str] = ()) -> str:
        lines = [f"c {h}" for h in header]
        for v in sorted(self.names):
            lines.append(f"c var {v} {self.names[v]}")
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        lines.extend(" ".join(map(str, c)) + " 0" for c in self.clauses)
        return "\n".join(lines) + "\n"


@dataclass
class MachineEncoding:
    cnf: CNF
    structure: IncidenceStructure
    preds: Predictions
    states: int
    out: list[list[int]]
    upd: list[list[list[int]]]

    def dimacs(self) -> str:
        header = (
            f"machine existence: structure={self.structure.name} "
            f"predictions={self.preds.value} states={self.states}",
            "out S p is true when state S outputs -1 on point p; "
            "upd S p T is true when p moves S to T",
        )
        return self.cnf.to_dimacs(header)


def _exactly_one(cnf: CNF, lits: Sequence[int]) -> None:
    cnf.add(lits)
    for a, b in combinations(lits, 2):
        cnf.add([-a, -b])


def _reach_vars(cnf: CNF, upd, scope: Sequence[int], n: int, tag: str) -> list[list[int | None]]:
    """Variables R[U][T] (U != T) true exactly when T is reachable from U."""
    edge = [[None] * n for _ in range(n)]
    for u in range(n):
        for t in range(n):
            if u == t:
                continue
            e = cnf.var()
            edge[u][t] = e
            moves = [upd[u][q][t] for q in scope]
            for m in moves:
                cnf.add([-m, e])
            cnf.add([-e] + moves)
    level = edge
    # paths of length <= k + 1 after the k-th round; n - 1 edges always suffice
    for _ in range(n - 2):
        nxt = [[None] * n for _ in range(n)]
        for u in range(n):
            for t in range(n):
                if u == t:
                    continue
                r = cnf.var()
                nxt[u][t] = r
                ways = [level[u][t]]
                for w in range(n):
                    if w in (u, t):
                        continue
                    a = cnf.var()
                    cnf.add([-a, level[u][w]])
                    cnf.add([-a, edge[w][t]])
                    cnf.add([a, -level[u][w], -edge[w][t]])
                    ways.append(a)
                for x in ways:
                    cnf.add([-x, r])
                cnf.add([-r] + ways)
        level = nxt
    for u in range(n):
        for t in range(n):
            if u != t:
                cnf.names[level[u][t]] = f"reach {tag} S{u + 1} S{t + 1}"
    return level


def encode(
    s: IncidenceStructure | str, preds: Predictions | str, states: int, *, symmetry: bool = True
) -> MachineEncoding:
    if isinstance(s, str):
        s = build_structure(s)
    preds = Predictions.parse(preds) if isinstance(preds, str) else preds
    if not 1 <= states <= MAX_STATES:
        raise CNFError(f"state count must be in 1..{MAX_STATES}, got {states}")
    n, P = states, s.num_points
    names = s.point_names
    cnf = CNF()
    out = [[cnf.var(f"out S{st + 1} {names[p]}") for p in range(P)] for st in range(n)]
    upd = [
        [[cnf.var(f"upd S{st + 1} {names[p]} S{t + 1}") for t in range(n)] for p in range(P)]
        for st in range(n)
    ]
    for st in range(n):
        for p in range(P):
            _exactly_one(cnf, upd[st][p])
            for t in range(n):
                if t != st:
                    # measuring p twice in a row repeats the outcome
                    cnf.add([-upd[st][p][t], -out[t][p], out[st][p]])
                    cnf.add([-upd[st][p][t], out[t][p], -out[st][p]])
    scopes: list[tuple[str, tuple[int, ...], tuple[int, ...], int | None]] = []
    if preds.includes_ia_ii:
        for bi, b in enumerate(s.blocks):
            scopes.append((f"block {s.block_label(bi)}", tuple(b), tuple(b), bi))
    if preds.includes_ib:
        for p in range(P):
            scopes.append((f"point {names[p]}", s.common_compatible((p,)), (p,), None))
    for tag, scope, anchors, bi in scopes:
        reach = _reach_vars(cnf, upd, scope, n, tag.replace(" ", "_"))
        for a in anchors:
            for st, u, t in product(range(n), repeat=3):
                if u == t:
                    continue
                move = upd[st][a][u]
                cnf.add([-move, -reach[u][t], -out[t][a], out[st][a]])
                cnf.add([-move, -reach[u][t], out[t][a], -out[st][a]])
        if bi is not None:
            _bottom_confirms(cnf, s, bi, out, reach, n)
    if symmetry:
        for st in range(n - 1):
            _lex_leq(cnf, out[st], out[st + 1])
    return MachineEncoding(cnf, s, preds, n, out, upd)


def _bottom_confirms(cnf: CNF, s: IncidenceStructure, bi: int, out, reach, n: int) -> None:
    block = s.blocks[bi]
    negative = s.block_signs[bi] == -1
    for u in range(n):
        escapes = []
        for t in range(n):
            if t == u:
                continue
            w = cnf.var()
            cnf.add([-w, reach[u][t]])
            cnf.add([-w, -reach[t][u]])
            escapes.append(w)
        for bits in product((False, True), repeat=len(block)):
            if (sum(bits) % 2 == 1) == negative:
                continue  # this pattern confirms the block
            lits = [-out[u][p] if bit else out[u][p] for p, bit in zip(block, bits)]
            cnf.add(lits + escapes)


def _lex_leq(cnf: CNF, a: Sequence[int], b: Sequence[int]) -> None:
    """a <= b as bit strings, first position most significant, false < true."""
    eq = None  # "all earlier positions equal"; None stands for constant true
    for i, (x, y) in enumerate(zip(a, b)):
        guard = [] if eq is None else [-eq]
        cnf.add(guard + [-x, y])
        if i == len(a) - 1:
            break
        nxt = cnf.var()
        cnf.add(guard + [x, y, nxt])
        cnf.add(guard + [-x, -y, nxt])
        eq = nxt


def export_cnf(
    s: IncidenceStructure | str,
    preds: Predictions | str,
    states: int,
    path: str | Path,
    *,
    symmetry: bool = True,
) -> MachineEncoding:
    enc = encode(s, preds, states, symmetry=symmetry)
    try:
        Path(path).write_text(enc.dimacs())
    except OSError as exc:
        raise CNFError(f"cannot write {path}: {exc}") from exc
    return enc


def decode_model(enc: MachineEncoding, model: Iterable[int]) -> MealyMachine:
    true = {lit for lit in model if lit > 0}
    n, P = enc.states, enc.structure.num_points
    output = [[-1 if enc.out[st][p] in true else 1 for p in range(P)] for st in range(n)]
    update = []
    for st in range(n):
        row = []
        for p in range(P):
            targets = [t for t in range(n) if enc.upd[st][p][t] in true]
            if len(targets) != 1:
                raise CNFError(f"model sets {len(targets)} successors for S{st + 1}")
            row.append(targets[0])
        update.append(row)
    return MealyMachine.from_rows(enc.structure.name, output, update)


_VAR_LINE = re.compile(r"^c var (\d+) (out|upd) S(\d+) (\S+)(?: S(\d+))?$")
_HEADER = re.compile(r"structure=(\S+) predictions=(\S+) states=(\d+)")


def decode_dimacs_model(dimacs: str, model: Iterable[int]) -> MealyMachine:
    """Decode a solver model using only the variable map in a DIMACS file."""
    header = _HEADER.search(dimacs)
    if header is None:
        raise CNFError("DIMACS text lacks the machine-existence header comment")
    s = build_structure(header.group(1))
    n = int(header.group(3))
    true = {lit for lit in model if lit > 0}
    output = [[1] * s.num_points for _ in range(n)]
    update = [[None] * s.num_points for _ in range(n)]
    for line in dimacs.splitlines():
        m = _VAR_LINE.match(line)
        if not m or int(m.group(1)) not in true:
            continue
        st, p = int(m.group(3)) - 1, s.point_id(m.group(4))
        if m.group(2) == "out":
            output[st][p] = -1
        else:
            update[st][p] = int(m.group(5)) - 1
    if any(t is None for row in update for t in row):
        raise CNFError("model leaves some transition unset")
    return MealyMachine.from_rows(s.name, output, update)


def lex_normalize(m: MealyMachine) -> MealyMachine:
    """Relabel states so output rows are in the order the encoding enforces."""
    order = sorted(range(m.state_count), key=lambda st: tuple(v == -1 for v in m.output[st]))
    new_id = {old: new for new, old in enumerate(order)}
    output = [m.output[old] for old in order]
    update = [[new_id[t] for t in m.update[old]] for old in order]
    return MealyMachine.from_rows(m.structure, output, update)


def machine_units(enc: MachineEncoding, m: MealyMachine) -> list[int]:
    """Unit literals pinning the encoding to one concrete machine."""
    units = []
    for st in range(enc.states):
        for p in range(enc.structure.num_points):
            units.append(enc.out[st][p] if m.output[st][p] == -1 else -enc.out[st][p])
            for t in range(enc.states):
                v = enc.upd[st][p][t]
                units.append(v if m.update[st][p] == t else -v)
    return units


def solve(
    enc: MachineEncoding, *, solver: str = "cadical153", assumptions: Sequence[int] = ()
) -> MealyMachine | None:
    """Run an external SAT solver; None means unsatisfiable."""
    try:
        from pysat.solvers import Solver
    except ImportError as exc:
        raise SolverUnavailable(
            "the python-sat package is needed to solve; install ctxmem[sat]"
        ) from exc
    with Solver(name=solver, bootstrap_with=enc.cnf.clauses) as sat:
        if not sat.solve(assumptions=list(assumptions)):
            return None
        return decode_model(enc, sat.get_model())
