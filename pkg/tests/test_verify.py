from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from ctxmem.geometry import build_structure
from ctxmem.machine import MachineError, MealyMachine, fixture, machine_structure, run
from ctxmem.verify import (
    Predictions,
    Status,
    check,
    check_Ia_II,
    check_Ib,
    proposition_suite,
    replay,
    sequence_oracle,
    sequence_violation,
)

from randmachines import machine_schedule, perturbed_machine, seeded, uniform_machine

SQUARE = build_structure("square")
FIXTURES = ["square_4", "pentagram_4", "pentagram_5", "doily_6"]


def oracle_len(s) -> int:
    return 2 * max(len(b) for b in s.blocks)


def assert_replays(m, s, verdict):
    cert = verdict.certificate
    assert cert is not None
    shown = replay(m, s, cert)
    assert shown is not None and shown.kind == cert.kind
    # replay is machine.run plus the sequence semantics
    trace = run(m, cert.start_state, cert.inputs)
    assert sequence_violation(s, cert.scope, trace.inputs, trace.outputs) == shown


class TestFixtures:
    @pytest.mark.parametrize("name,ia_ii,ib", [
        ("square_4", True, True),
        ("pentagram_4", True, False),
        ("pentagram_5", True, True),
        ("doily_6", True, False),
    ])
    def test_verdicts(self, name, ia_ii, ib):
        m = fixture(name)
        s = machine_structure(m)
        assert check_Ia_II(m, s).passed is ia_ii
        v = check_Ib(m, s)
        assert v.passed is ib
        assert check(m, s, "ia-ib-ii").passed is (ia_ii and ib)
        if not ib:
            assert_replays(m, s, v)

    def test_pentagram_4_certificate(self):
        m = fixture("pentagram_4")
        s = machine_structure(m)
        v = check(m, s, Predictions.IA_IB_II)
        assert v.status is Status.FAIL
        d = v.certificate.to_dict(s)
        assert d["violates"] == "Ib"
        assert d["start_state"] == "S1"
        assert d["inputs"] == ["D", "b_d", "C", "D"]

    def test_flipped_gamma_fails(self):
        m = fixture("square_4")
        g = SQUARE.point_id("gamma")
        bad = m.with_output(0, g, -m.output[0][g])
        v = check_Ia_II(bad, SQUARE)
        assert not v.passed
        assert_replays(bad, SQUARE, v)
        o = sequence_oracle(bad, SQUARE, "ia-ii", 6)
        assert o.status is Status.FAIL
        assert_replays(bad, SQUARE, o)

    def test_oracle_examples(self):
        assert sequence_oracle(fixture("square_4"), SQUARE, "ia-ii", 6).status is Status.PASS
        m = fixture("pentagram_4")
        o = sequence_oracle(m, machine_structure(m), "ia-ib-ii", 8)
        assert o.status is Status.FAIL
        assert_replays(m, machine_structure(m), o)

    def test_short_oracle_is_inconclusive(self):
        o = sequence_oracle(fixture("square_4"), SQUARE, "ia-ii", 1)
        assert o.status is Status.INCONCLUSIVE and not o.passed

    def test_budget_exhaustion_is_inconclusive(self):
        o = sequence_oracle(fixture("doily_6"), build_structure("doily"), "ia-ii", 6, budget=50)
        assert o.status is Status.INCONCLUSIVE

    def test_mismatched_structure(self):
        with pytest.raises(MachineError):
            check_Ia_II(fixture("square_4"), build_structure("pentagram"))

    def test_predictions_parse(self):
        assert Predictions.parse("ia-ii") is Predictions.IA_II
        assert Predictions.parse("Ia_Ib_II") is Predictions.IA_IB_II
        with pytest.raises(ValueError):
            Predictions.parse("ii")


class TestSequenceSemantics:
    def test_repeat_mismatch(self):
        bi = SQUARE.block_id(["A", "B", "C"])
        a, b = SQUARE.point_id("A"), SQUARE.point_id("B")
        v = sequence_violation(SQUARE, ("block", bi), [a, b, a], [1, 1, -1])
        assert v.kind == "Ia"

    def test_first_occurrence_product(self):
        bi = SQUARE.block_id(["C", "c", "gamma"])
        word = [SQUARE.point_id(x) for x in ("C", "c", "gamma")]
        assert sequence_violation(SQUARE, ("block", bi), word, [1, 1, 1]).kind == "II"
        assert sequence_violation(SQUARE, ("block", bi), word, [1, -1, 1]) is None

    def test_point_scope_rejects_incompatible_inputs(self):
        with pytest.raises(ValueError):
            sequence_violation(SQUARE, ("point", SQUARE.point_id("B")),
                               [SQUARE.point_id("a")], [1])


class TestOracleAgreement:
    """The digraph criterion and the brute-force oracle agree on every scheduled machine."""

    @pytest.mark.parametrize("preds", [Predictions.IA_II, Predictions.IB])
    def test_random_agreement(self, structure, preds):
        k = oracle_len(structure)
        disagreements = []
        passed = 0
        for label, m in machine_schedule(structure, 1000):
            v = check(m, structure, preds)
            o = sequence_oracle(m, structure, preds, k)
            if o.status is Status.INCONCLUSIVE or o.passed != v.passed:
                disagreements.append(label)
            if not v.passed:
                assert_replays(m, structure, v)
                assert_replays(m, structure, o)
            passed += v.passed
        assert disagreements == []
        assert passed > 0  # the schedule reaches the passing side

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(["square", "pentagram", "doily"]), st.integers(0, 10**6),
           st.sampled_from(list(Predictions)))
    def test_naive_matches_bfs(self, name, seed, preds):
        s = build_structure(name)
        rng = seeded("naive", name, seed)
        m = perturbed_machine(rng, s) if seed % 2 else uniform_machine(rng, s, rng.randint(1, 3))
        k = len(s.blocks[0]) + (1 if name == "square" else 0)
        fast = sequence_oracle(m, s, preds, k)
        slow = sequence_oracle(m, s, preds, k, naive=True)
        assert fast.status == slow.status
        if fast.certificate is not None:
            assert (fast.certificate.inputs, fast.certificate.start_state) == (
                slow.certificate.inputs, slow.certificate.start_state)

    @settings(max_examples=200, deadline=None)
    @given(st.sampled_from(["square", "pentagram", "doily"]), st.integers(0, 10**6))
    def test_monotone(self, name, seed):
        s = build_structure(name)
        m = perturbed_machine(seeded("mono", name, seed), s)
        full = check(m, s, Predictions.IA_IB_II)
        if full.passed:
            assert check(m, s, Predictions.IA_II).passed
        assert full.passed == (check(m, s, "ia-ii").passed and check(m, s, "ib").passed)


class TestPropositions:
    @pytest.mark.parametrize("name", FIXTURES)
    def test_suite_green(self, name):
        m = fixture(name)
        report = proposition_suite(m, machine_structure(m))
        assert report.all_held, [r.failures for r in report.results]
        statuses = {r.name: r.status for r in report.results}
        assert statuses["contradiction_two_nonsimple"] == "held"
        if name in ("doily_6", "pentagram_4"):
            assert statuses["point_sink_uniform"] == "skipped"
        if name == "pentagram_5":
            assert statuses["multisink_quota"] == "held"
        if name == "square_4":
            assert statuses["one_simple_sink"] == "skipped"

    def test_suite_green_on_passing_random_machines(self, structure):
        seen = 0
        for label, m in machine_schedule(structure, 60):
            if not check_Ia_II(m, structure).passed:
                continue
            report = proposition_suite(m, structure)
            assert report.all_held, (label, [r.failures for r in report.results])
            seen += 1
        assert seen > 0

    def test_failing_machine_skips_conditional_props(self):
        m = MealyMachine.from_rows("square", [[1] * 9], [[0] * 9])
        report = proposition_suite(m, SQUARE)
        assert report.verdicts["Ia_II"] is False
        assert {r.status for r in report.results if r.name == "block_sink_confirms"} == {"skipped"}
