"""Reproducible random machines for property tests.

Seed schedule: machine ``i`` for structure ``name`` in family ``kind`` is drawn
from ``random.Random(f"{kind}:{name}:{i}")``, so any failing index can be
regenerated on its own.
"""

from __future__ import annotations

import random

from ctxmem.geometry import IncidenceStructure
from ctxmem.machine import MealyMachine, fixture

FIXTURE_OF = {
    "square": ("square_4",),
    "pentagram": ("pentagram_4", "pentagram_5"),
    "doily": ("doily_6",),
}


def seeded(kind: str, name: str, i: int) -> random.Random:
    return random.Random(f"{kind}:{name}:{i}")


def uniform_machine(rng: random.Random, s: IncidenceStructure, states: int) -> MealyMachine:
    output = [[rng.choice((1, -1)) for _ in range(s.num_points)] for _ in range(states)]
    update = [[rng.randrange(states) for _ in range(s.num_points)] for _ in range(states)]
    return MealyMachine.from_rows(s.name, output, update)


def perturbed_machine(rng: random.Random, s: IncidenceStructure) -> MealyMachine:
    """A fixture with a few edits: sign flips, rewired transitions, a cloned state.

    Uniform machines almost never pass, so this family exercises the passing side
    and the near-misses around it.
    """
    base = fixture(rng.choice(FIXTURE_OF[s.name]))
    out = [list(r) for r in base.output]
    upd = [list(r) for r in base.update]
    n = base.state_count
    if rng.random() < 0.3 and n < 6:
        src = rng.randrange(n)
        out.append(list(out[src]))
        upd.append([n if t == src else t for t in upd[src]])
        n += 1
    for _ in range(rng.choice((0, 1, 1, 2, 3))):
        st, p = rng.randrange(n), rng.randrange(s.num_points)
        if rng.random() < 0.5:
            out[st][p] *= -1
        else:
            upd[st][p] = rng.randrange(n)
    return MealyMachine.from_rows(s.name, out, upd)


def machine_schedule(s: IncidenceStructure, count: int):
    """``count`` uniform machines cycling through 1..6 states, then ``count`` perturbed ones."""
    for i in range(count):
        yield f"uniform-{i}", uniform_machine(seeded("uniform", s.name, i), s, i % 6 + 1)
    for i in range(count):
        yield f"perturbed-{i}", perturbed_machine(seeded("perturbed", s.name, i), s)
