from __future__ import annotations

from itertools import permutations, product as cartesian

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctxmem.pauli import (
    DimensionError,
    IncompatibleContextError,
    NotAContextError,
    PauliOperator,
    PauliParseError,
    PhaseError,
    Sign,
    commutes,
    context_sign,
    format_pauli,
    multiply,
    parse_pauli,
    product,
)

# dense-matrix oracle, independent of the symplectic arithmetic
_MAT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PREFIX = {"": 1, "+": 1, "-": -1, "i": 1j, "+i": 1j, "-i": -1j}


def matrix(text: str) -> np.ndarray:
    body = text.lstrip("+-i")
    coef = _PREFIX[text[: len(text) - len(body)]]
    out = np.array([[1]], dtype=complex)
    for ch in body:
        out = np.kron(out, _MAT[ch])
    return coef * out


def op_matrix(op: PauliOperator) -> np.ndarray:
    return matrix(format_pauli(op))


letters = st.sampled_from("IXYZ")


def pauli_strings(n: int):
    return st.lists(letters, min_size=n, max_size=n).map("".join)


hermitian_pairs = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.sampled_from(["", "-"]), pauli_strings(n), st.sampled_from(["", "-"]), pauli_strings(n)
    )
).map(lambda t: (parse_pauli(t[0] + t[1]), parse_pauli(t[2] + t[3])))


class TestParse:
    def test_zz(self):
        op = parse_pauli("ZZ")
        assert (op.z_bits, op.x_bits, op.phase_exp) == (0b11, 0, 0)

    def test_identity(self):
        assert parse_pauli("II") == PauliOperator.identity(2)

    def test_yy_is_hermitian(self):
        op = parse_pauli("YY")
        assert (op.x_bits, op.z_bits) == (0b11, 0b11)
        assert op.is_hermitian
        assert multiply(op, op) == PauliOperator.identity(2)

    def test_round_trip_all_strings(self):
        for n in (1, 2, 3):
            for chars in cartesian("IXYZ", repeat=n):
                for prefix in ("", "-", "i", "-i"):
                    text = prefix + "".join(chars)
                    op = parse_pauli(text)
                    assert parse_pauli(format_pauli(op)) == op
                    assert np.allclose(op_matrix(op), matrix(text))

    @pytest.mark.parametrize("bad,pos", [("", 0), ("XQ", 1), ("+", 1), ("-iXZW", 4)])
    def test_parse_errors_carry_position(self, bad, pos):
        with pytest.raises(PauliParseError) as info:
            parse_pauli(bad)
        assert info.value.position == pos

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            commutes(parse_pauli("X"), parse_pauli("XX"))


class TestAlgebra:
    def test_examples(self):
        assert commutes(parse_pauli("ZI"), parse_pauli("IZ"))
        assert not commutes(parse_pauli("XI"), parse_pauli("ZI"))
        assert commutes(parse_pauli("ZZ"), parse_pauli("XX"))
        zz = multiply(parse_pauli("ZI"), parse_pauli("IZ"))
        assert zz == parse_pauli("ZZ") and zz.phase_exp == 0
        assert product([parse_pauli(t) for t in ("ZZ", "XX", "YY")]) == -PauliOperator.identity(2)

    @given(hermitian_pairs)
    def test_multiply_matches_matrices(self, pair):
        a, b = pair
        assert np.allclose(op_matrix(multiply(a, b)), op_matrix(a) @ op_matrix(b))

    @given(hermitian_pairs)
    def test_commutes_iff_products_equal(self, pair):
        a, b = pair
        assert commutes(a, b) == (multiply(a, b) == multiply(b, a))
        ma, mb = op_matrix(a), op_matrix(b)
        assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)

    @given(st.integers(1, 4).flatmap(pauli_strings))
    def test_involution(self, text):
        op = parse_pauli(text)
        assert multiply(op, op) == PauliOperator.identity(op.n)


class TestContextSign:
    def test_examples(self):
        ops = lambda *ts: [parse_pauli(t) for t in ts]  # noqa: E731
        assert context_sign(ops("ZI", "IZ", "ZZ")) is Sign.PLUS
        assert context_sign(ops("ZZ", "XX", "YY")) is Sign.MINUS
        assert context_sign(ops("XXZ", "XZX", "ZXX", "ZZZ")) is Sign.MINUS

    def test_errors(self):
        with pytest.raises(IncompatibleContextError):
            context_sign([parse_pauli("XI"), parse_pauli("ZI")])
        with pytest.raises(NotAContextError):
            context_sign([parse_pauli("ZI"), parse_pauli("IZ")])
        with pytest.raises(NotAContextError):
            context_sign([])
        with pytest.raises(PhaseError):
            context_sign([parse_pauli("iZ"), parse_pauli("Z")])

    def test_permutation_invariance_exhaustive(self):
        """Every ordering of every 1- and 2-qubit context of length <= 4 gets one sign."""
        checked = 0
        for n in (1, 2):
            ops = [parse_pauli(s + "".join(c)) for c in cartesian("IXYZ", repeat=n) for s in ("", "-")]
            for k in range(1, 5):
                for combo in cartesian(range(len(ops)), repeat=k):
                    if list(combo) != sorted(combo):
                        continue
                    group = [ops[i] for i in combo]
                    try:
                        expected = context_sign(group)
                    except (IncompatibleContextError, NotAContextError, PhaseError):
                        continue
                    dense = np.eye(2**n, dtype=complex)
                    for o in group:
                        dense = dense @ op_matrix(o)
                    assert np.allclose(dense, int(expected) * np.eye(2**n))
                    for perm in permutations(group):
                        assert context_sign(list(perm)) is expected
                    checked += 1
        assert checked > 100
