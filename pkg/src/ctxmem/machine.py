"""Mealy machines over the points of an incidence structure.

States are 0-indexed in code and 1-indexed (``S1``, ``S2``...) in files and
displays.  A machine file looks like::

    {
      "structure": "square",
      "state_count": 4,
      "states": [
        ["+", "+", ["+", 2], ...],
        ...
      ]
    }

Each state row lists, in the structure's point order, either a bare sign for
a simple vertex or a ``[sign, next_state]`` pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Sequence

from .geometry import IncidenceStructure, build_structure, resolve_structure
from .pauli import Sign

FIXTURE_NAMES = ("square_4", "pentagram_4", "pentagram_5", "doily_6")


class MachineError(ValueError):
    pass


class FixtureError(MachineError):
    pass


class VertexKind(str, Enum):
    SIMPLE = "simple"
    NONSIMPLE = "nonsimple"


class ContextKind(str, Enum):
    CONFIRMATION = "confirmation"
    CONTRADICTION = "contradiction"


@dataclass(frozen=True)
class MealyMachine:
    structure: str
    state_count: int
    output: tuple[tuple[int, ...], ...]
    update: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.state_count < 1:
            raise MachineError("a machine needs at least one state")
        if len(self.output) != self.state_count or len(self.update) != self.state_count:
            raise MachineError("output and update need one row per state")
        widths = {len(r) for r in self.output} | {len(r) for r in self.update}
        if len(widths) != 1:
            raise MachineError("every state row must cover the same points")
        for row in self.output:
            if any(v not in (1, -1) for v in row):
                raise MachineError("outputs must be +1 or -1")
        for row in self.update:
            if any(not 0 <= t < self.state_count for t in row):
                raise MachineError("update target outside the state range")

    @property
    def num_points(self) -> int:
        return len(self.output[0])

    @classmethod
    def from_rows(
        cls, structure: str, output: Sequence[Sequence[int]], update: Sequence[Sequence[int]]
    ) -> "MealyMachine":
        return cls(
            structure,
            len(output),
            tuple(tuple(int(v) for v in r) for r in output),
            tuple(tuple(int(t) for t in r) for r in update),
        )

    def with_output(self, state: int, point: int, value: int) -> "MealyMachine":
        rows = [list(r) for r in self.output]
        rows[state][point] = value
        return MealyMachine.from_rows(self.structure, rows, self.update)

    def nonsimple_count(self, state: int) -> int:
        return sum(1 for t in self.update[state] if t != state)


@dataclass(frozen=True)
class RunTrace:
    start_state: int
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    states: tuple[int, ...]


def _check_state(m: MealyMachine, state: int) -> None:
    if not (isinstance(state, int) and 0 <= state < m.state_count):
        raise MachineError(f"invalid state {state!r} for a {m.state_count}-state machine")


def _check_point(m: MealyMachine, point: int) -> None:
    if not (isinstance(point, int) and 0 <= point < m.num_points):
        raise MachineError(f"invalid point {point!r}")


def _check_bound(m: MealyMachine, s: IncidenceStructure) -> None:
    if m.num_points != s.num_points:
        raise MachineError(
            f"machine covers {m.num_points} points but {s.name} has {s.num_points}"
        )


def run(m: MealyMachine, start: int, inputs: Sequence[int]) -> RunTrace:
    _check_state(m, start)
    state = start
    states = [start]
    outputs = []
    for p in inputs:
        _check_point(m, p)
        outputs.append(m.output[state][p])
        state = m.update[state][p]
        states.append(state)
    return RunTrace(start, tuple(inputs), tuple(outputs), tuple(states))


def classify_vertex(m: MealyMachine, state: int, point: int) -> VertexKind:
    _check_state(m, state)
    _check_point(m, point)
    return VertexKind.SIMPLE if m.update[state][point] == state else VertexKind.NONSIMPLE


def context_sign(m: MealyMachine, state: int, points: Sequence[int]) -> Sign:
    value = 1
    for p in points:
        value *= m.output[state][p]
    return Sign(value)


def context_class(
    m: MealyMachine, s: IncidenceStructure, state: int, block: int
) -> tuple[ContextKind, Sign]:
    _check_state(m, state)
    _check_bound(m, s)
    if not 0 <= block < s.num_blocks:
        raise MachineError(f"invalid block {block!r}")
    sign = context_sign(m, state, s.blocks[block])
    kind = ContextKind.CONFIRMATION if sign == s.block_signs[block] else ContextKind.CONTRADICTION
    return kind, sign


def contradiction_blocks(m: MealyMachine, s: IncidenceStructure, state: int) -> list[int]:
    return [
        bi for bi in range(s.num_blocks)
        if context_class(m, s, state, bi)[0] is ContextKind.CONTRADICTION
    ]


def is_simple_context(m: MealyMachine, s: IncidenceStructure, state: int, block: int) -> bool:
    return all(m.update[state][p] == state for p in s.blocks[block])


def memory_cost(m: MealyMachine) -> float:
    return math.log2(m.state_count)


# -- serialization ----------------------------------------------------------------

def _cell_json(sign: int, target: int, state: int) -> str:
    mark = "+" if sign == 1 else "-"
    if target == state:
        return f'"{mark}"'
    return f'["{mark}", {target + 1}]'


def dumps_machine(m: MealyMachine) -> str:
    rows = []
    for s in range(m.state_count):
        cells = ", ".join(_cell_json(m.output[s][p], m.update[s][p], s) for p in range(m.num_points))
        rows.append(f"    [{cells}]")
    return (
        "{\n"
        f'  "structure": {json.dumps(m.structure)},\n'
        f'  "state_count": {m.state_count},\n'
        '  "states": [\n' + ",\n".join(rows) + "\n  ]\n}\n"
    )


def _parse_sign(value) -> int:
    if value == "+":
        return 1
    if value == "-":
        return -1
    raise MachineError(f"sign must be '+' or '-', got {value!r}")


def loads_machine(text: str) -> MealyMachine:
    try:
        d = json.loads(text)
        structure = d["structure"]
        count = int(d["state_count"])
        states = d["states"]
    except (ValueError, KeyError, TypeError) as exc:
        raise MachineError(f"malformed machine file: {exc}") from exc
    if len(states) != count:
        raise MachineError(f"state_count is {count} but {len(states)} state rows given")
    output, update = [], []
    for s, row in enumerate(states):
        out_row, upd_row = [], []
        for cell in row:
            if isinstance(cell, str):
                sign, target = _parse_sign(cell), s
            elif isinstance(cell, list) and len(cell) in (1, 2):
                sign = _parse_sign(cell[0])
                target = s if len(cell) == 1 else int(cell[1]) - 1
            else:
                raise MachineError(f"malformed cell {cell!r} in state S{s + 1}")
            out_row.append(sign)
            upd_row.append(target)
        output.append(out_row)
        update.append(upd_row)
    return MealyMachine.from_rows(structure, output, update)


def save_machine(m: MealyMachine, path: str | Path) -> None:
    Path(path).write_text(dumps_machine(m))


def load_machine(path: str | Path) -> MealyMachine:
    return loads_machine(Path(path).read_text())


def machine_structure(m: MealyMachine) -> IncidenceStructure:
    s = resolve_structure(m.structure)
    _check_bound(m, s)
    return s


def format_state(m: MealyMachine, s: IncidenceStructure, state: int) -> str:
    cells = []
    for p in range(s.num_points):
        mark = "+" if m.output[state][p] == 1 else "-"
        t = m.update[state][p]
        cells.append(f"{s.point_names[p]}:{mark}" + ("" if t == state else f"->S{t + 1}"))
    return f"S{state + 1}: " + " ".join(cells)


# -- fixtures ------------------------------------------------------------------------

def _validate_fixture(name: str, m: MealyMachine) -> None:
    s = build_structure(m.structure)
    _check_bound(m, s)
    for state in range(m.state_count):
        contras = contradiction_blocks(m, s, state)
        if not contras:
            raise FixtureError(f"{name}: S{state + 1} has no contradiction context")
        if name != "doily_6":
            for bi in contras:
                ns = sum(1 for p in s.blocks[bi] if m.update[state][p] != state)
                if ns < 2:
                    raise FixtureError(
                        f"{name}: contradiction context (S{state + 1}, {s.block_label(bi)}) "
                        f"has {ns} nonsimple vertices"
                    )
        elif m.nonsimple_count(state) < 5:
            raise FixtureError(f"{name}: S{state + 1} has fewer than five nonsimple vertices")


_FIXTURE_STRUCTURE = {
    "square_4": "square",
    "pentagram_4": "pentagram",
    "pentagram_5": "pentagram",
    "doily_6": "doily",
}


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise FixtureError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURE_NAMES)}")
    return resources.files("ctxmem.fixtures").joinpath(f"{name}.json").read_text()


def fixture(name: str) -> MealyMachine:
    m = loads_machine(fixture_text(name))
    if m.structure != _FIXTURE_STRUCTURE[name]:
        raise FixtureError(f"{name} is bound to {m.structure}, expected {_FIXTURE_STRUCTURE[name]}")
    _validate_fixture(name, m)
    return m
