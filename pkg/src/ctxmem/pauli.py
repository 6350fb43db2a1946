"""Exact n-qubit Pauli operator algebra.

An operator is stored as ``i**phase_exp * X^x_bits Z^z_bits`` where bit ``j``
of ``x_bits``/``z_bits`` refers to the ``j``-th character of the text form
(leftmost qubit is bit 0).  With this convention ``Y = i X Z``, so every ``Y``
in a string contributes one factor of ``i`` to ``phase_exp``.

Text form: an optional prefix (``+``, ``-``, ``i``, ``+i``, ``-i``) followed by
characters from ``IXYZ``.  Tensor-product forms such as ``sigma_z (x) 1`` are
written positionally, e.g. ``ZI``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from itertools import combinations
from typing import Iterable, Sequence

MAX_QUBITS = 8

_PREFIX_PHASE = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}


class PauliError(ValueError):
    """Base class for Pauli algebra errors."""


class PauliParseError(PauliError):
    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        super().__init__(f"cannot parse {text!r} at position {position}: {reason}")


class DimensionError(PauliError):
    pass


class IncompatibleContextError(PauliError):
    pass


class NotAContextError(PauliError):
    pass


class PhaseError(PauliError):
    pass


class Sign(IntEnum):
    PLUS = 1
    MINUS = -1

    def __str__(self) -> str:
        return "+" if self is Sign.PLUS else "-"

    @classmethod
    def of(cls, value: int) -> "Sign":
        if value not in (1, -1):
            raise ValueError(f"a sign is +1 or -1, got {value!r}")
        return cls(value)


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x_bits: int
    z_bits: int
    phase_exp: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise DimensionError(f"qubit count must be in 1..{MAX_QUBITS}, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise DimensionError("bit vectors exceed the qubit count")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @property
    def y_count(self) -> int:
        return (self.x_bits & self.z_bits).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0 and self.phase_exp == 0

    @property
    def is_hermitian(self) -> bool:
        return (self.phase_exp - self.y_count) % 2 == 0

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __neg__(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x_bits, self.z_bits, self.phase_exp + 2)

    def __str__(self) -> str:
        return format_pauli(self)


def parse_pauli(text: str) -> PauliOperator:
    if not text:
        raise PauliParseError(text, 0, "empty string")
    body_start = 0
    for prefix in ("+i", "-i", "+", "-", "i"):
        if text.startswith(prefix):
            body_start = len(prefix)
            break
    prefix_phase = _PREFIX_PHASE[text[:body_start]]
    body = text[body_start:]
    if not body:
        raise PauliParseError(text, body_start, "no qubit characters")
    if len(body) > MAX_QUBITS:
        raise PauliParseError(text, body_start + MAX_QUBITS, f"more than {MAX_QUBITS} qubits")
    x = z = 0
    for j, ch in enumerate(body):
        if ch == "X":
            x |= 1 << j
        elif ch == "Z":
            z |= 1 << j
        elif ch == "Y":
            x |= 1 << j
            z |= 1 << j
        elif ch != "I":
            raise PauliParseError(text, body_start + j, f"unexpected character {ch!r}")
    op = PauliOperator(len(body), x, z)
    return PauliOperator(op.n, x, z, prefix_phase + op.y_count)


def format_pauli(op: PauliOperator) -> str:
    chars = []
    for j in range(op.n):
        xb = op.x_bits >> j & 1
        zb = op.z_bits >> j & 1
        chars.append("IZXY"[xb << 1 | zb])
    return _PHASE_PREFIX[(op.phase_exp - op.y_count) % 4] + "".join(chars)


def _check_dims(a: PauliOperator, b: PauliOperator) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    _check_dims(a, b)
    return ((a.x_bits & b.z_bits).bit_count() + (b.x_bits & a.z_bits).bit_count()) % 2 == 0


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    _check_dims(a, b)
    # Z^za X^xb = (-1)^{|za & xb|} X^xb Z^za
    swaps = (a.z_bits & b.x_bits).bit_count()
    return PauliOperator(
        a.n,
        a.x_bits ^ b.x_bits,
        a.z_bits ^ b.z_bits,
        a.phase_exp + b.phase_exp + 2 * swaps,
    )


def product(ops: Iterable[PauliOperator]) -> PauliOperator:
    ops = list(ops)
    if not ops:
        raise NotAContextError("empty operator list")
    result = ops[0]
    for op in ops[1:]:
        result = multiply(result, op)
    return result


def context_sign(ops: Sequence[PauliOperator]) -> Sign:
    """Sign of the product of a set of mutually commuting operators.

    Raises if some pair anticommutes, if the product is not proportional to the
    identity, or if the proportionality constant is imaginary.
    """
    for (i, a), (j, b) in combinations(enumerate(ops), 2):
        if not commutes(a, b):
            raise IncompatibleContextError(f"operators {i} ({a}) and {j} ({b}) anticommute")
    total = product(ops)
    if total.x_bits or total.z_bits:
        raise NotAContextError(f"product {total} is not proportional to the identity")
    if total.phase_exp % 2:
        raise PhaseError(f"product has imaginary phase i^{total.phase_exp}")
    return Sign.PLUS if total.phase_exp == 0 else Sign.MINUS
