"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from itertools import combinations, permutations, product as cartesian

import pytest

from ctxmem.cnf import encode, solve
from ctxmem.digraph import block_digraph, commuting_digraph, commuting_dot, strong_sinks
from ctxmem.geometry import (
    STRUCTURE_NAMES,
    build_structure,
    contextuality_degree,
    dumps_structure,
    loads_structure,
    minimal_contradiction_sets,
    neighborhood_cover,
    pm_square_decomposition,
    witness_bounds,
)
from ctxmem.machine import FIXTURE_NAMES, dumps_machine, fixture, fixture_text, loads_machine, run
from ctxmem.pauli import (
    IncompatibleContextError,
    NotAContextError,
    PhaseError,
    context_sign,
    parse_pauli,
)
from ctxmem.search import SearchStatus, counting_bounds, find_machine
from ctxmem.verify import Predictions, Status, check, proposition_suite, replay, sequence_oracle

from randmachines import machine_schedule, seeded, uniform_machine


@pytest.fixture
def criterion(capsys):
    """Yield a notes list; print one PASS/FAIL line for the criterion when done."""

    @contextmanager
    def run_criterion(number: int, title: str):
        notes: list[str] = []
        start = time.perf_counter()
        try:
            yield notes
        except BaseException as exc:
            first = (str(exc).splitlines() or [""])[0][:300]
            with capsys.disabled():
                print(f"\nCRITERION {number} FAIL: {title}: {type(exc).__name__} {first}")
            raise
        elapsed = time.perf_counter() - start
        detail = "; ".join(notes)
        with capsys.disabled():
            print(f"\nCRITERION {number} PASS: {title} ({elapsed:.1f}s) {detail}")

    return run_criterion


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start


def test_criterion_1_fixture_verification(criterion):
    with criterion(1, "fixture verification") as notes:
        expectations = {
            "square_4": (Predictions.IA_IB_II, True),
            "pentagram_4": (Predictions.IA_II, True),
            "pentagram_5": (Predictions.IA_IB_II, True),
            "doily_6": (Predictions.IA_II, True),
        }
        for name, (preds, expected) in expectations.items():
            m = fixture(name)
            s = build_structure(m.structure)
            v, secs = timed(check, m, s, preds)
            assert v.passed is expected, name
            assert secs < 1.0, (name, secs)
        m = fixture("pentagram_4")
        s = build_structure("pentagram")
        v, secs = timed(check, m, s, Predictions.IB)
        assert not v.passed and secs < 1.0
        shown = replay(m, s, v.certificate)
        assert shown is not None and shown.kind == "Ib"
        notes.append("pentagram_4 fails Ib: " + ",".join(s.point_names[p] for p in v.certificate.inputs))
        m = fixture("doily_6")
        s = build_structure("doily")
        v, secs = timed(check, m, s, Predictions.IB)
        assert secs < 1.0
        if v.certificate is not None:
            assert replay(m, s, v.certificate) is not None
        notes.append(f"doily_6 Ib verdict (finding): {v.status.value}")


def test_criterion_2_run_traces(criterion):
    with criterion(2, "run-trace reproduction") as notes:
        m = fixture("square_4")
        s = build_structure("square")
        t = run(m, 0, [s.point_id(p) for p in ("C", "c", "gamma")])
        assert t.outputs == (1, -1, 1) and t.states[-1] == 1
        t2 = run(m, 0, [s.point_id(p) for p in ("A", "B", "c", "C")])
        assert t2.outputs == (1, 1, 1, -1)
        notes.append("(C,c,gamma) -> +1 -1 +1 ending S2; (A,B,c,C) -> +1 +1 +1 -1")


def test_criterion_3_geometry(criterion):
    with criterion(3, "geometry numbers") as notes:
        expected = {"square": (1, (4, 6)), "pentagram": (1, (3, 5)), "doily": (3, (9, 15))}
        for name, (degree, bounds) in expected.items():
            s = build_structure(name)
            (d, _), secs = timed(contextuality_degree, s)
            assert d == degree and secs < 5.0, name
            b, secs = timed(witness_bounds, s)
            assert b == bounds and secs < 5.0, name
        doily = build_structure("doily")
        sets, secs = timed(minimal_contradiction_sets, doily)
        assert secs < 5.0
        counts = {k: len(v) for k, v in sets.items()}
        assert counts[3] == 20 and counts[4] == 60
        size5 = counts[5]
        stated = 72
        notes.append(
            f"size-5 count measured {size5} vs stated {stated}; "
            f"6*comb(4,2)={6 * math.comb(4, 2)} disagrees, 6*4!/2={6 * math.factorial(4) // 2} agrees"
        )
        assert size5 == stated
        squares, secs = timed(pm_square_decomposition)
        assert len(squares) == 10 and secs < 5.0
        multiplicity = [0] * doily.num_blocks
        for sq in squares:
            for bi in sq.row_blocks + sq.col_blocks:
                multiplicity[bi] += 1
        assert set(multiplicity) == {4}
        pent = build_structure("pentagram")
        assert all(neighborhood_cover(pent, p, q) >= 9 for p, q in combinations(range(10), 2))
        assert all(neighborhood_cover(doily, p, q) == 11 for p, q in combinations(range(15), 2))
        notes.append("degrees (1,1,3), bounds (4,6) (3,5) (9,15), covers ok")


def test_criterion_4_digraphs(criterion):
    with criterion(4, "digraph reproduction and sink shape") as notes:
        m = fixture("square_4")
        s = build_structure("square")
        for R in (["C", "c", "gamma"], ["C"]):
            cd = commuting_digraph(m, s, R)
            assert len(cd.condensation.components) == 8, R
            assert strong_sinks(cd).state_sets == [(1,), (2,)], R
        checked = 0
        for name in FIXTURE_NAMES:
            fm = fixture(name)
            fs = build_structure(fm.structure)
            for R in [list(b) for b in fs.blocks] + [[p] for p in range(fs.num_points)]:
                strong_sinks(commuting_digraph(fm, fs, R))  # raises on a malformed sink
                checked += 1
        structures = [build_structure(n) for n in STRUCTURE_NAMES]
        machines = 0
        for i in range(10_000):
            rs = structures[i % 3]
            rng = seeded("sinkshape", rs.name, i)
            rm = uniform_machine(rng, rs, rng.randint(1, 6))
            for bi in range(rs.num_blocks):
                strong_sinks(block_digraph(rm, rs, bi))
            for p in range(rs.num_points):
                strong_sinks(commuting_digraph(rm, rs, [p]))
            machines += 1
        notes.append(f"{checked} fixture digraphs, {machines} random machines")


def test_criterion_5_exhaustive_search(criterion):
    with criterion(5, "exhaustive search tier") as notes:
        start = time.perf_counter()
        s = build_structure("square")
        two = find_machine(s, Predictions.IA_II, 2)
        assert two.status is SearchStatus.NONE_EXHAUSTED
        three = find_machine(s, Predictions.IA_II, 3)
        assert three.status is SearchStatus.FOUND
        assert check(three.machine, s, Predictions.IA_II).passed
        assert solve(encode(s, Predictions.IA_II, 2)) is None
        sat = solve(encode(s, Predictions.IA_II, 3))
        assert sat is not None and check(sat, s, Predictions.IA_II).passed
        total = time.perf_counter() - start
        assert total < 600
        notes.append(f"square Ia+II: 2 states none, 3 states found; memory cost log2(3)={math.log2(3):.3f}")


def test_criterion_6_certified_search(criterion):
    with criterion(6, "certified nonexistence tier") as notes:
        s = build_structure("pentagram")
        out = find_machine(s, Predictions.IA_II, 3, budget=10**9)
        cnf = solve(encode(s, Predictions.IA_II, 3))
        assert out.status is SearchStatus.NONE_EXHAUSTED or cnf is None
        if out.status is not SearchStatus.INCONCLUSIVE:
            assert (out.status is SearchStatus.FOUND) == (cnf is not None)
        notes.append(f"pentagram Ia+II/3: backtracker {out.status.value} ({out.stats.nodes} nodes), "
                     f"CNF {'sat' if cnf else 'unsat'}")
        b4 = counting_bounds(s, Predictions.IA_IB_II, 4)
        assert b4.ruled_out
        assert b4.inequalities[:2] == ("x1 + 2x2 >= 8", "x1 + 2x2 <= 4")
        b5 = counting_bounds("doily", Predictions.IA_IB_II, 5)
        assert b5.ruled_out
        assert "x1 + 2x2 + 3x3 >= 25" in b5.inequalities
        assert "x0 + x1 + 2x2 + 3x3 <= 20" in b5.inequalities
        notes.append("counting bounds rule out pentagram Ia+Ib+II/4 and doily Ia+Ib+II/5")


def test_criterion_7_property_tier(criterion):
    with criterion(7, "property tier") as notes:
        start = time.perf_counter()
        for name in STRUCTURE_NAMES:
            s = build_structure(name)
            k = 2 * max(len(b) for b in s.blocks)
            count = 0
            for label, m in machine_schedule(s, 500):
                for preds in (Predictions.IA_II, Predictions.IB):
                    v = check(m, s, preds)
                    o = sequence_oracle(m, s, preds, k)
                    assert o.status is not Status.INCONCLUSIVE, (name, label)
                    assert o.passed == v.passed, (name, label, preds)
                count += 1
            assert count >= 1000
        notes.append("oracle agreement on 1000 machines per structure")
        for name in FIXTURE_NAMES:
            m = fixture(name)
            assert proposition_suite(m, build_structure(m.structure)).all_held, name
            assert dumps_machine(loads_machine(fixture_text(name))) == fixture_text(name)
        for name in STRUCTURE_NAMES:
            text = dumps_structure(build_structure(name))
            assert dumps_structure(loads_structure(text)) == text
        for i in range(300):
            s = build_structure(STRUCTURE_NAMES[i % 3])
            m = uniform_machine(seeded("roundtrip", s.name, i), s, i % 6 + 1)
            assert dumps_machine(loads_machine(dumps_machine(m))) == dumps_machine(m)
        cd = commuting_digraph(fixture("square_4"), build_structure("square"), ["C"])
        assert commuting_dot(cd) == commuting_dot(cd) and commuting_dot(cd, condensed=True)
        ops = [parse_pauli(p + "".join(c)) for c in cartesian("IXYZ", repeat=2) for p in ("", "-")]
        contexts = 0
        for k in range(1, 5):
            for combo in combinations(range(len(ops)), k):
                group = [ops[j] for j in combo]
                try:
                    sign = context_sign(group)
                except (IncompatibleContextError, NotAContextError, PhaseError):
                    continue
                assert all(context_sign(list(p)) is sign for p in permutations(group))
                contexts += 1
        assert time.perf_counter() - start < 300
        notes.append(f"propositions green, round-trips byte-exact, {contexts} contexts permutation-invariant")
