from __future__ import annotations

import pytest
from pysat.formula import CNF as PySatCNF
from pysat.solvers import Solver

from ctxmem.cnf import (
    CNFError,
    decode_dimacs_model,
    encode,
    export_cnf,
    lex_normalize,
    machine_units,
    solve,
)
from ctxmem.geometry import build_structure
from ctxmem.machine import MealyMachine, fixture
from ctxmem.search import SearchStatus, find_machine
from ctxmem.verify import Predictions, check

from randmachines import perturbed_machine, seeded, uniform_machine


def satisfied_by(enc, m: MealyMachine) -> bool:
    with Solver(name="cadical153", bootstrap_with=enc.cnf.clauses) as sat:
        return sat.solve(assumptions=machine_units(enc, m))


class TestExactness:
    """A concrete machine satisfies the encoding exactly when the verifier accepts it."""

    @pytest.mark.parametrize("name,preds,states", [
        ("square", Predictions.IA_II, 3),
        ("square", Predictions.IA_IB_II, 4),
        ("square", Predictions.IB, 2),
        ("pentagram", Predictions.IA_II, 4),
        ("pentagram", Predictions.IA_IB_II, 5),
        ("doily", Predictions.IA_II, 3),
    ])
    def test_units_match_verifier(self, name, preds, states):
        s = build_structure(name)
        enc = encode(s, preds, states)
        raw = encode(s, preds, states, symmetry=False)
        accepted = 0
        for i in range(150):
            rng = seeded("cnf", name, i)
            m = perturbed_machine(rng, s) if i % 2 else uniform_machine(rng, s, states)
            if m.state_count != states:
                continue
            expected = check(m, s, preds).passed
            assert satisfied_by(raw, m) == expected, i
            assert satisfied_by(enc, lex_normalize(m)) == expected, i
            accepted += expected
        if (name, states) in {("square", 4), ("pentagram", 4), ("pentagram", 5)}:
            assert accepted > 0

    @pytest.mark.parametrize("name", ["square_4", "pentagram_4", "pentagram_5"])
    def test_fixtures_satisfy(self, name):
        m = fixture(name)
        s = build_structure(m.structure)
        for preds in (Predictions.IA_II, Predictions.IA_IB_II):
            enc = encode(s, preds, m.state_count)
            assert satisfied_by(enc, lex_normalize(m)) == check(m, s, preds).passed

    def test_lex_normalize_preserves_behaviour(self):
        s = build_structure("pentagram")
        for i in range(50):
            m = perturbed_machine(seeded("lex", "pentagram", i), s)
            n = lex_normalize(m)
            rows = [tuple(v == -1 for v in r) for r in n.output]
            assert rows == sorted(rows)
            for preds in Predictions:
                assert check(n, s, preds).passed == check(m, s, preds).passed


class TestSolving:
    @pytest.mark.parametrize("name,preds,states,sat", [
        ("square", "ia-ii", 2, False),
        ("square", "ia-ii", 3, True),
        ("square", "ia-ib-ii", 3, False),
        ("square", "ia-ib-ii", 4, True),
        ("pentagram", "ia-ii", 3, False),
        ("pentagram", "ia-ii", 4, True),
    ])
    def test_instances(self, name, preds, states, sat):
        s = build_structure(name)
        m = solve(encode(s, preds, states))
        assert (m is not None) == sat
        if m is not None:
            assert check(m, s, preds).passed

    @pytest.mark.parametrize("name,preds,states", [
        ("square", "ia-ii", 2), ("square", "ia-ii", 3), ("square", "ia-ib-ii", 3),
    ])
    def test_agrees_with_backtracker(self, name, preds, states):
        back = find_machine(name, preds, states)
        sat = solve(encode(name, preds, states))
        assert (back.status is SearchStatus.FOUND) == (sat is not None)


class TestDimacs:
    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "square3.cnf"
        enc = export_cnf("square", "ia-ii", 3, path)
        text = path.read_text()
        assert text.startswith("c machine existence: structure=square predictions=Ia_II states=3")
        assert f"p cnf {enc.cnf.num_vars} {len(enc.cnf.clauses)}" in text
        assert text == enc.dimacs()
        formula = PySatCNF(from_file=str(path))
        with Solver(name="cadical153", bootstrap_with=formula.clauses) as sat:
            assert sat.solve()
            m = decode_dimacs_model(text, sat.get_model())
        assert check(m, build_structure("square"), "ia-ii").passed

    def test_deterministic(self):
        assert encode("pentagram", "ia-ib-ii", 3).dimacs() == encode("pentagram", "ia-ib-ii", 3).dimacs()

    def test_unwritable(self, tmp_path):
        with pytest.raises(CNFError):
            export_cnf("square", "ia-ii", 2, tmp_path / "missing" / "x.cnf")

    def test_state_range(self):
        with pytest.raises(CNFError):
            encode("square", "ia-ii", 7)

    def test_missing_header(self):
        with pytest.raises(CNFError):
            decode_dimacs_model("p cnf 1 0\n", [1])
