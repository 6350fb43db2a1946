"""Directed graphs, strongly connected components and commuting digraphs.

A commuting digraph has one vertex per (state, point) pair with the point
compatible with every member of the restriction set, and an arc
``(S, p) -> (S', p')`` whenever ``update(S, p) = S'``, except the loop
``(S, p) -> (S, p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

from .geometry import IncidenceStructure, StructureError
from .machine import MealyMachine


class DigraphError(ValueError):
    pass


@dataclass(frozen=True)
class Digraph:
    vertices: tuple[Hashable, ...]
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        n = len(self.vertices)
        for u, v in self.arcs:
            if u == v:
                raise DigraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DigraphError(f"arc ({u}, {v}) has an endpoint outside 0..{n - 1}")

    @classmethod
    def from_arcs(cls, vertices: Sequence[Hashable], arcs: Iterable[tuple[int, int]]) -> "Digraph":
        return cls(tuple(vertices), frozenset(arcs))

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.arcs:
            out[u].append(v)
        return tuple(tuple(sorted(o)) for o in out)

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {v: i for i, v in enumerate(self.vertices)}


def scc(d: Digraph) -> list[tuple[int, ...]]:
    """Strongly connected components, each sorted, ordered by smallest member."""
    n = len(d)
    succ = d.successors
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[tuple[int, ...]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        # iterative Tarjan: frames of (vertex, next successor position)
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))
    comps.sort()
    return comps


@dataclass(frozen=True)
class Condensation:
    dag: Digraph  # vertex payloads are component member tuples
    component_of: tuple[int, ...]

    @property
    def components(self) -> tuple[tuple[int, ...], ...]:
        return self.dag.vertices

    @cached_property
    def sinks(self) -> tuple[int, ...]:
        return tuple(c for c, out in enumerate(self.dag.successors) if not out)

    @cached_property
    def sources(self) -> tuple[int, ...]:
        has_in = {v for _, v in self.dag.arcs}
        return tuple(c for c in range(len(self.dag)) if c not in has_in)


def condensation(d: Digraph) -> Condensation:
    comps = scc(d)
    comp_of = [0] * len(d)
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    arcs = {(comp_of[u], comp_of[v]) for u, v in d.arcs if comp_of[u] != comp_of[v]}
    return Condensation(Digraph(tuple(comps), frozenset(arcs)), tuple(comp_of))


def reachable(d: Digraph, sources: Iterable[int]) -> frozenset[int]:
    seen = set()
    frontier = []
    for v in sources:
        if not 0 <= v < len(d):
            raise DigraphError(f"invalid vertex {v}")
        if v not in seen:
            seen.add(v)
            frontier.append(v)
    while frontier:
        v = frontier.pop()
        for w in d.successors[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return frozenset(seen)


def find_path(d: Digraph, source: int, targets: Iterable[int]) -> list[int] | None:
    """Shortest path (as a vertex list) from ``source`` to any vertex of ``targets``."""
    goal = set(targets)
    parent = {source: None}
    queue = [source]
    for v in queue:
        if v in goal:
            path = []
            while v is not None:
                path.append(v)
                v = parent[v]
            return path[::-1]
        for w in d.successors[v]:
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def has_cycle(d: Digraph) -> bool:
    return any(len(c) > 1 for c in scc(d))


# -- commuting digraphs --------------------------------------------------------

@dataclass(frozen=True)
class CommutingDigraph:
    base: Digraph  # vertex payloads are (state, point)
    restriction: tuple[int, ...]
    points: tuple[int, ...]  # C(R)
    machine: MealyMachine = field(repr=False)
    structure: IncidenceStructure = field(repr=False)

    def vertex(self, state: int, point: int) -> int:
        return self.base.index[(state, point)]

    def state_vertices(self, state: int) -> tuple[int, ...]:
        return tuple(self.vertex(state, p) for p in self.points)

    @cached_property
    def condensation(self) -> Condensation:
        return condensation(self.base)


def commuting_digraph(
    m: MealyMachine, s: IncidenceStructure, restriction: Iterable[int]
) -> CommutingDigraph:
    R = tuple(sorted({s.point_id(p) for p in restriction}))
    if m.num_points != s.num_points:
        raise DigraphError(f"machine does not match structure {s.name}")
    for i, p in enumerate(R):
        for q in R[i + 1:]:
            if not s.compatible_ids(p, q):
                raise StructureError(
                    f"restriction points {s.point_names[p]} and {s.point_names[q]} are incompatible"
                )
    return _build(m, s, R, s.common_compatible(R))


def block_digraph(m: MealyMachine, s: IncidenceStructure, block: int) -> CommutingDigraph:
    """The commuting digraph over exactly the points of one block.

    Equal to ``commuting_digraph(m, s, s.blocks[block])`` whenever nothing
    outside the block is compatible with all of it (true for every built-in).
    """
    if m.num_points != s.num_points:
        raise DigraphError(f"machine does not match structure {s.name}")
    pts = tuple(s.blocks[block])
    return _build(m, s, pts, pts)


def _build(
    m: MealyMachine, s: IncidenceStructure, R: tuple[int, ...], points: tuple[int, ...]
) -> CommutingDigraph:
    vertices = tuple((st, p) for st in range(m.state_count) for p in points)
    width = len(points)
    arcs = set()
    for u, (st, p) in enumerate(vertices):
        target = m.update[st][p]
        base = target * width
        for j in range(width):
            v = base + j
            if v != u:
                arcs.add((u, v))
    return CommutingDigraph(Digraph(vertices, frozenset(arcs)), R, points, m, s)


@dataclass(frozen=True)
class Sink:
    states: tuple[int, ...]
    vertices: tuple[int, ...]
    outputs: dict[int, int] | None  # per-point output when constant over the states

    @property
    def order(self) -> int:
        return len(self.states)

    def as_dict(self, s: IncidenceStructure) -> dict:
        return {
            "states": [f"S{x + 1}" for x in self.states],
            "outputs": None if self.outputs is None else {
                s.point_names[p]: v for p, v in sorted(self.outputs.items())
            },
        }


@dataclass(frozen=True)
class SinkReport:
    sinks: tuple[Sink, ...]

    @property
    def state_sets(self) -> list[tuple[int, ...]]:
        return [k.states for k in self.sinks]

    def sink_of_state(self, state: int) -> Sink | None:
        for k in self.sinks:
            if state in k.states:
                return k
        return None


class SinkShapeError(AssertionError):
    """A strongly connected sink that is not a union of entire states."""


def strong_sinks(cd: CommutingDigraph) -> SinkReport:
    cond = cd.condensation
    width = len(cd.points)
    m = cd.machine
    sinks = []
    for ci in cond.sinks:
        members = cond.components[ci]
        states = tuple(sorted({cd.base.vertices[v][0] for v in members}))
        if len(members) != len(states) * width:
            raise SinkShapeError(f"sink {members} is not a union of entire states")
        outputs: dict[int, int] | None = {}
        for p in cd.points:
            values = {m.output[st][p] for st in states}
            if len(values) != 1:
                outputs = None
                break
            outputs[p] = values.pop()
        sinks.append(Sink(states, members, outputs))
    return SinkReport(tuple(sinks))


# -- DOT output ---------------------------------------------------------------------

GREEN = "#2e9e44"
RED = "#d33f3f"


@dataclass
class DotStyle:
    name: str = "D"
    label: Callable[[Hashable], str] = str
    color: Callable[[Hashable], str | None] = lambda v: None


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(d: Digraph, styling: DotStyle | None = None) -> str:
    style = styling or DotStyle()
    lines = [f"digraph {_quote(style.name)} {{"]
    for i, v in enumerate(d.vertices):
        attrs = [f"label={_quote(style.label(v))}"]
        color = style.color(v)
        if color:
            attrs.append(f"style=filled, fillcolor={_quote(color)}")
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for u, v in sorted(d.arcs):
        lines.append(f"  n{u} -> n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def commuting_dot(cd: CommutingDigraph, *, condensed: bool = False) -> str:
    """DOT for a commuting digraph; green vertices output +1, red ones -1."""
    s, m = cd.structure, cd.machine
    restriction = ",".join(s.point_names[p] for p in cd.restriction)

    def label(v):
        st, p = v
        return f"({st + 1},{s.point_names[p]})"

    def color(v):
        st, p = v
        return GREEN if m.output[st][p] == 1 else RED

    if not condensed:
        return to_dot(cd.base, DotStyle(f"D_{{{restriction}}}", label, color))
    cond = cd.condensation
    lines = [f"digraph {_quote(f'condensation of D_{{{restriction}}}')} {{", "  compound=true;"]
    for ci, members in enumerate(cond.components):
        lines.append(f"  subgraph cluster_{ci} {{")
        lines.append("    style=rounded;")
        for v in members:
            payload = cd.base.vertices[v]
            lines.append(
                f"    n{v} [label={_quote(label(payload))}, style=filled, "
                f"fillcolor={_quote(color(payload))}];"
            )
        lines.append("  }")
    for a, b in sorted(cond.dag.arcs):
        u = cond.components[a][0]
        v = cond.components[b][0]
        lines.append(f"  n{u} -> n{v} [ltail=cluster_{a}, lhead=cluster_{b}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
