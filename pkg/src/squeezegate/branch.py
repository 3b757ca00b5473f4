"""Gaussian branch engine.

Every op the engine accepts is diagonal in the sigma_x basis, so the joint
evolution splits into 2**N branches, one per x-basis spin configuration.
Within a branch the phonon mode sees unconditional displacements and
q-axis squeezes and its state stays in the normal form

    angle, beta, rho  ->  exp(i angle) D(beta) S(rho) |0>

with ``D(b) = exp(b a^dag - b^* a)`` and ``S(r) = exp(r/2 (a^2 - a^dag^2))``
(``r > 0`` squeezes q).  The branch angle is accumulated additively and never
re-wrapped, so Walsh coefficients of large phases stay unambiguous.

Sign convention: the effective unitary is ``U = sum_s exp(i theta_s)|s><s|``.
The builders in :mod:`squeezegate.sequences` orient their loops so that
``theta_s = -Phi(s)``, i.e. ``U = exp(-i Phi)`` with ``Phi`` the phase-space
area polynomial.  ``extract_polynomial`` returns the coefficients of theta;
``phase_polynomial`` returns those of Phi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import spin
from .errors import BranchCompatibilityError, ConfigError, OpenLoopError
from .model import PREP_TYPES, Displace, PulseOp, PulseSequence, Rotate, Squeeze, PRUNE_THRESHOLD

CLOSURE_TOL = 1e-9
_EXACT_TOL = 1e-12

SpinConfig = tuple[int, ...]


@dataclass(frozen=True)
class BranchState:
    angle: float = 0.0
    displacement: complex = 0j
    net_squeeze: float = 0.0

    @property
    def phase_factor(self) -> complex:
        return cmath.exp(1j * self.angle)


@dataclass(frozen=True)
class BranchResult:
    spin_config: SpinConfig
    final: BranchState
    closed: bool

    @property
    def residual(self) -> float:
        return max(abs(self.final.displacement), abs(self.final.net_squeeze))


def _near(x: float, target: float) -> bool:
    return abs(x - target) < _EXACT_TOL


def _phase_is(angle: float, target: float) -> bool:
    d = (angle - target) % (2 * math.pi)
    return min(d, 2 * math.pi - d) < _EXACT_TOL


def check_op(op: PulseOp) -> None:
    """Raise :class:`BranchCompatibilityError` unless ``op`` is x-diagonal."""
    if isinstance(op, PREP_TYPES):
        return
    if isinstance(op, Displace):
        if op.detuning != 0:
            raise BranchCompatibilityError("non-resonant displacement; use the fock oracle")
        if not _phase_is(op.spin_phase, 0.0):
            raise BranchCompatibilityError("branch engine requires x-diagonal ops (spin_phase = 0)")
    elif isinstance(op, Squeeze):
        if op.detuning != 0:
            raise BranchCompatibilityError("non-resonant squeeze; use the fock oracle")
        if not _phase_is(op.spin_phase, 0.0):
            raise BranchCompatibilityError("branch engine requires x-diagonal ops (spin_phase = 0)")
        if not (_phase_is(op.motional_phase, 0.0) or _phase_is(op.motional_phase, math.pi)):
            raise BranchCompatibilityError("squeeze orientation must be 0 or pi")
    elif isinstance(op, Rotate):
        if not (_phase_is(op.axis_angle, 0.0) and (_near(op.rotation_angle, math.pi)
                                                  or _near(op.rotation_angle, -math.pi))):
            raise BranchCompatibilityError("branch engine requires x-diagonal ops (R_0(+-pi) only)")
    else:
        raise BranchCompatibilityError(f"unknown op {op!r}")


def is_branch_compatible(op: PulseOp) -> bool:
    try:
        check_op(op)
    except BranchCompatibilityError:
        return False
    return True


def apply_op(state: BranchState, op: PulseOp, s: SpinConfig) -> BranchState:
    check_op(op)
    if isinstance(op, PREP_TYPES):
        return state
    sn = s[op.ion]
    if isinstance(op, Displace):
        a = sn * complex(op.alpha)
        b = state.displacement
        return BranchState(state.angle + (a * b.conjugate()).imag, b + a, state.net_squeeze)
    if isinstance(op, Squeeze):
        r = sn * op.amplitude.real
        b = state.displacement
        b_new = b * math.cosh(r) - b.conjugate() * math.sinh(r)
        return BranchState(state.angle, b_new, state.net_squeeze + r)
    # R_0(+pi) = -i X, R_0(-pi) = +i X: factor -+i s_n.
    sign = 1.0 if op.rotation_angle > 0 else -1.0
    return BranchState(state.angle - sign * sn * math.pi / 2, state.displacement, state.net_squeeze)


def run_branch(seq: PulseSequence, s: SpinConfig, tol: float = CLOSURE_TOL) -> BranchResult:
    if len(s) != seq.n_ions or any(x not in (1, -1) for x in s):
        raise ConfigError(f"spin config {s!r} does not match {seq.n_ions} ions")
    state = BranchState()
    for op in seq.ops:
        state = apply_op(state, op, s)
    closed = abs(state.displacement) <= tol and abs(state.net_squeeze) <= tol
    return BranchResult(tuple(s), state, closed)


def run_all_branches(seq: PulseSequence, tol: float = CLOSURE_TOL) -> dict[SpinConfig, BranchResult]:
    for op in seq.ops:
        check_op(op)
    return {s: run_branch(seq, s, tol) for s in spin.spin_configs(seq.n_ions)}


def _require_closed(results: Mapping[SpinConfig, BranchResult]) -> None:
    open_ = [r for r in results.values() if not r.closed]
    if open_:
        worst = max(open_, key=lambda r: r.residual)
        raise OpenLoopError(
            f"open loop: branch {worst.spin_config} ends with |beta|={abs(worst.final.displacement):.3e}, "
            f"|rho|={abs(worst.final.net_squeeze):.3e}; use the fock engine instead"
        )


def geometric_phases(seq: PulseSequence, tol: float = CLOSURE_TOL) -> dict[SpinConfig, float]:
    """Unwrapped branch angle ``theta_s`` for every spin configuration."""
    results = run_all_branches(seq, tol)
    _require_closed(results)
    return {s: r.final.angle for s, r in results.items()}


# --- Pauli-X polynomials ----------------------------------------------------


@dataclass(frozen=True)
class PauliXPolynomial:
    """Real polynomial in sigma_x operators.

    ``terms`` maps a subset bitmask (bit ``n`` set = ion ``n`` participates)
    to its coefficient; mask 0 is the global phase.
    """

    n_ions: int
    terms: Mapping[int, float]

    @classmethod
    def from_terms(cls, n_ions: int, terms: Mapping[int, float],
                   threshold: float = PRUNE_THRESHOLD) -> "PauliXPolynomial":
        return cls(n_ions, {m: float(c) for m, c in sorted(terms.items()) if abs(c) >= threshold})

    @staticmethod
    def mask(*ions: int) -> int:
        m = 0
        for n in ions:
            m |= 1 << n
        return m

    def coefficient(self, *ions: int) -> float:
        return self.terms.get(self.mask(*ions), 0.0)

    def evaluate(self, s: SpinConfig) -> float:
        total = 0.0
        for m, c in self.terms.items():
            prod = 1
            for n in range(self.n_ions):
                if m >> n & 1:
                    prod *= s[n]
            total += c * prod
        return total

    def scaled(self, factor: float) -> "PauliXPolynomial":
        return PauliXPolynomial.from_terms(self.n_ions, {m: c * factor for m, c in self.terms.items()})

    def __neg__(self) -> "PauliXPolynomial":
        return self.scaled(-1.0)

    def matrix(self) -> np.ndarray:
        """Dense z-basis matrix ``sum_T c_T prod_{n in T} X_n``."""
        dim = 2**self.n_ions
        out = np.zeros((dim, dim), dtype=complex)
        for m, c in self.terms.items():
            op = np.ones((1, 1), dtype=complex)
            for n in range(self.n_ions):
                op = np.kron(op, spin.SX if m >> n & 1 else spin.ID2)
            out += c * op
        return out

    def label(self, mask: int) -> str:
        ions = [n + 1 for n in range(self.n_ions) if mask >> n & 1]
        return "".join(f"X{n}" for n in ions) or "I"

    def to_dict(self) -> dict[str, float]:
        return {self.label(m): c for m, c in self.terms.items()}


def _fwht(values: np.ndarray) -> np.ndarray:
    h = values.astype(float).copy()
    n = h.size
    step = 1
    while step < n:
        h = h.reshape(-1, 2, step)
        h = np.stack((h[:, 0] + h[:, 1], h[:, 0] - h[:, 1]), axis=1).reshape(-1)
        step *= 2
    return h


def extract_polynomial(phases: Mapping[SpinConfig, float]) -> PauliXPolynomial:
    """Walsh coefficients ``c_T = 2^-N sum_s theta_s prod_{n in T} s_n``."""
    if not phases:
        raise ConfigError("no phases given")
    n = len(next(iter(phases)))
    configs = spin.spin_configs(n)
    missing = [s for s in configs if s not in phases]
    if missing:
        raise ConfigError(f"missing spin configurations: {missing[:4]}{'...' if len(missing) > 4 else ''}")
    theta = np.array([phases[s] for s in configs])
    coeffs = _fwht(theta) / 2**n
    # FWHT index j has ion 0 as its most significant bit.
    terms = {}
    for j, c in enumerate(coeffs):
        mask = 0
        for ion in range(n):
            if j >> (n - 1 - ion) & 1:
                mask |= 1 << ion
        terms[mask] = c
    return PauliXPolynomial.from_terms(n, terms)


def phase_polynomial(seq: PulseSequence) -> PauliXPolynomial:
    """Geometric-phase polynomial ``Phi`` with ``U = exp(-i Phi)``."""
    return -extract_polynomial(geometric_phases(seq))


def effective_hamiltonian(poly: PauliXPolynomial, duration: float) -> PauliXPolynomial:
    """``H_eff / hbar = Phi / T`` in rad/s per term."""
    if not duration > 0:
        raise ConfigError("effective time must be positive")
    return poly.scaled(1.0 / duration)


# --- effective unitary ------------------------------------------------------


@dataclass(frozen=True)
class DiagonalXUnitary:
    """Unitary diagonal in the x basis, stored as one phase factor per config."""

    n_ions: int
    phase_factors: np.ndarray

    def apply_to_state(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (2**self.n_ions,):
            raise ConfigError(f"state must have {2**self.n_ions} amplitudes")
        if np.all(self.phase_factors == self.phase_factors[0]):
            return self.phase_factors[0] * psi  # global phase; skip the basis round trip
        out = spin.from_x_basis(self.phase_factors * spin.to_x_basis(psi, self.n_ions), self.n_ions)
        return out / np.linalg.norm(out)

    def matrix(self) -> np.ndarray:
        h = np.ones((1, 1), dtype=complex)
        for _ in range(self.n_ions):
            h = np.kron(h, spin.HADAMARD)
        return h @ np.diag(self.phase_factors) @ h


def effective_unitary(seq: PulseSequence, tol: float = CLOSURE_TOL) -> DiagonalXUnitary:
    phases = geometric_phases(seq, tol)
    configs = spin.spin_configs(seq.n_ions)
    return DiagonalXUnitary(seq.n_ions, np.exp(1j * np.array([phases[s] for s in configs])))


def coherent_overlap(b1: BranchState, b2: BranchState) -> complex:
    """``<state2|state1>`` for two unsqueezed branch states."""
    if abs(b1.net_squeeze) > CLOSURE_TOL or abs(b2.net_squeeze) > CLOSURE_TOL:
        raise BranchCompatibilityError("coherent_overlap needs unsqueezed branches; use the fock oracle")
    d = b1.displacement - b2.displacement
    return (b2.phase_factor.conjugate() * b1.phase_factor
            * cmath.exp(-abs(d) ** 2 / 2 + 1j * (b1.displacement * b2.displacement.conjugate()).imag))
