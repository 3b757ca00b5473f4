"""Gate-count comparison: native loop sequences versus two-qubit decompositions.

Single-qubit gates are not counted on the two-qubit side.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import comb

from .errors import ConfigError
from .model import Displace, PulseSequence, Rotate, Squeeze


def two_qubit_cost_string(order: int) -> int:
    """Two-qubit gates for one ``exp(-i t X...X)`` string of the given order."""
    if order < 2:
        raise ConfigError("Pauli string order must be at least 2")
    return 2 * order


def two_qubit_cost_full_polynomial(n_ions: int) -> int:
    """``sum_{n=2}^{N} C(N, n) 2n``: every string of order >= 2 applied in sequence."""
    if n_ions < 2:
        raise ConfigError("need at least 2 ions")
    return sum(comb(n_ions, n) * two_qubit_cost_string(n) for n in range(2, n_ions + 1))


@dataclass(frozen=True)
class NativeCost:
    displacements: int
    squeezes: int
    rotations: int
    total_time: float

    @property
    def entangling_ops(self) -> int:
        return self.displacements + self.squeezes


def native_cost(seq: PulseSequence) -> NativeCost:
    kinds = Counter(type(op) for op in seq.ops)
    return NativeCost(kinds[Displace], kinds[Squeeze], kinds[Rotate], seq.total_time())


def native_op_count(n_ions: int) -> int:
    """Displacements plus squeezes of the edge-displaced loop with N-2 squeezed middle ions.

    Four displacements, and one squeeze/anti-squeeze pair per middle ion
    around each of the two p-edges.
    """
    if n_ions < 2:
        raise ConfigError("need at least 2 ions")
    return 4 + 4 * (n_ions - 2)


@dataclass(frozen=True)
class CostRow:
    n_ions: int
    native_ops: int
    two_qubit_gates: int

    @property
    def ratio(self) -> float:
        return self.two_qubit_gates / self.native_ops


def compare(n_values) -> list[CostRow]:
    return [CostRow(n, native_op_count(n), two_qubit_cost_full_polynomial(n)) for n in n_values]
