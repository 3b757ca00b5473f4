"""Truncated-Fock reference simulator.

The joint state is a tensor of shape ``(2,)*N + (n_max + 1,)``.  Each pulse
is the matrix exponential of its anti-Hermitian generator on
``spin (x) oscillator``.  Spin-dependent generators have the form
``sigma (x) G`` with ``sigma**2 = 1``, so ``exp(sigma (x) G)`` is evaluated
exactly as ``P+ (x) exp(G) + P- (x) exp(-G)`` on the eigenprojectors of
``sigma``; :func:`op_generator` builds the full joint matrix for checks.

Truncation is never hidden: before every pulse the population in the top two
Fock levels must stay below ``leak_tol``, and the norm must not drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import spin
from .errors import ConfigError, NormDriftError, TruncationError
from .model import Displace, PrepX, PrepZ, PulseOp, PulseSequence, Rotate, Squeeze

NORM_TOL = 1e-9
MIN_SLICES = 200


@dataclass(frozen=True)
class FockConfig:
    n_max: int = 30
    leak_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max < 4:
            raise ConfigError("n_max must be at least 4")


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def displacement_generator(alpha: complex, n_max: int) -> np.ndarray:
    a = annihilation(n_max)
    return alpha * a.conj().T - np.conj(alpha) * a


def squeeze_generator(z: complex, n_max: int) -> np.ndarray:
    """``1/2 (z^* a^2 - z a^dag^2)``; real ``z > 0`` squeezes q."""
    a = annihilation(n_max)
    a2 = a @ a
    return 0.5 * (np.conj(z) * a2 - z * a2.conj().T)


@lru_cache(maxsize=4096)
def _displacement(alpha: complex, n_max: int) -> np.ndarray:
    return expm(displacement_generator(alpha, n_max))


@lru_cache(maxsize=4096)
def _squeeze(z: complex, n_max: int) -> np.ndarray:
    return expm(squeeze_generator(z, n_max))


def displacement_matrix(alpha: complex, n_max: int) -> np.ndarray:
    return _displacement(complex(alpha), int(n_max))


def squeeze_matrix(z: complex, n_max: int) -> np.ndarray:
    return _squeeze(complex(z), int(n_max))


def _embed(ion: int, n_ions: int, spin_op: np.ndarray, phonon_op: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for n in range(n_ions):
        out = np.kron(out, spin_op if n == ion else spin.ID2)
    return np.kron(out, phonon_op)


def op_generator(op: PulseOp, n_ions: int, n_max: int) -> np.ndarray:
    """Anti-Hermitian generator of a resonant op on the joint space."""
    dim_ph = n_max + 1
    if isinstance(op, Displace):
        return _embed(op.ion, n_ions, spin.sigma_phi(op.spin_phase), displacement_generator(op.alpha, n_max))
    if isinstance(op, Squeeze):
        return _embed(op.ion, n_ions, spin.sigma_phi(op.spin_phase), squeeze_generator(op.amplitude, n_max))
    if isinstance(op, Rotate):
        return _embed(op.ion, n_ions, -0.5j * op.rotation_angle * spin.sigma_phi(op.axis_angle),
                      np.eye(dim_ph, dtype=complex))
    raise ConfigError(f"op {op!r} has no generator")


@dataclass
class FockState:
    amplitudes: np.ndarray  # shape (2,)*N + (n_max+1,)

    @property
    def n_ions(self) -> int:
        return self.amplitudes.ndim - 1

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[-1] - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def product(cls, spin_state: np.ndarray, n_ions: int, n_max: int) -> "FockState":
        psi = np.asarray(spin_state, dtype=complex).reshape(-1)
        if psi.size != 2**n_ions:
            raise ConfigError(f"spin state must have {2**n_ions} amplitudes")
        vac = np.zeros(n_max + 1, dtype=complex)
        vac[0] = 1.0
        return cls(np.multiply.outer(psi.reshape((2,) * n_ions), vac))

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def phonon_distribution(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=tuple(range(self.n_ions)))


def _apply_spin(t: np.ndarray, gate: np.ndarray, ion: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(gate, t, axes=([1], [ion])), 0, ion)


def _apply_conditional(t: np.ndarray, ion: int, spin_phase: float,
                       plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    """Apply ``P+ (x) plus + P- (x) minus`` for the eigenprojectors of sigma_phi on ``ion``."""
    # Eigenvectors of sigma_phi in the (down, up) basis: sigma = [[0, e^{i phi}], [e^{-i phi}, 0]].
    e = np.exp(1j * spin_phase)
    w = np.array([[e, -e], [1, 1]], dtype=complex) / np.sqrt(2)  # columns: +1, -1
    t = _apply_spin(t, w.conj().T, ion)
    t = np.moveaxis(t, ion, 0)
    t = np.stack((t[0] @ plus.T, t[1] @ minus.T))
    t = np.moveaxis(t, 0, ion)
    return _apply_spin(t, w, ion)


def _check_leak(state: FockState, fock: FockConfig) -> None:
    top = state.phonon_distribution()[-2:].sum()
    if top > fock.leak_tol:
        raise TruncationError(f"truncation leak: {top:.3e} population in the top Fock levels; increase n_max")


def _slice_count(detuning: float, duration: float) -> int:
    return max(MIN_SLICES, math.ceil(MIN_SLICES * abs(detuning) * duration / (2 * math.pi)))


def _slice_weights(detuning: float, t0: float, duration: float, n: int) -> np.ndarray:
    """Exact ``(1/duration) int exp(i detuning t) dt`` over each of ``n`` slices."""
    edges = t0 + duration * np.arange(n + 1) / n
    ph = np.exp(1j * detuning * edges)
    return (ph[1:] - ph[:-1]) / (1j * detuning * duration)


def apply(state: FockState, op: PulseOp, fock: FockConfig = FockConfig(), t0: float = 0.0) -> FockState:
    """Evolve ``state`` through one op starting at sequence time ``t0``."""
    if isinstance(op, (PrepX, PrepZ)):
        raise ConfigError("prep ops are realized on the initial spin state, not applied")
    _check_leak(state, fock)
    n_max = state.n_max
    t = state.amplitudes
    if isinstance(op, Rotate):
        t = _apply_spin(t, spin.rotation(op.axis_angle, op.rotation_angle), op.ion)
    elif isinstance(op, (Displace, Squeeze)):
        is_disp = isinstance(op, Displace)
        amp = complex(op.alpha) if is_disp else op.amplitude
        make = displacement_matrix if is_disp else squeeze_matrix
        if op.detuning == 0:
            pieces = [amp]
        else:
            if not op.duration > 0:
                raise ConfigError("detuned op needs a positive duration")
            n = _slice_count(op.detuning, op.duration)
            pieces = list(amp * _slice_weights(op.detuning, t0, op.duration, n))
        for piece in pieces:
            t = _apply_conditional(t, op.ion, op.spin_phase, make(piece, n_max), make(-piece, n_max))
    else:
        raise ConfigError(f"unsupported op {op!r}")
    out = FockState(t)
    if abs(out.norm - 1.0) > NORM_TOL:
        raise NormDriftError(f"norm drifted to {out.norm:.12f}; increase n_max")
    return out


def initial_spin_state(seq: PulseSequence, prep: Sequence[tuple[str, str]] | None = None) -> np.ndarray:
    """Spin state from an explicit prep list, else from the sequence's prep ops (default all down-z)."""
    if prep is None:
        entries = [("z", "down")] * seq.n_ions
        for op in seq.prep_ops:
            entries[op.ion] = ("z" if isinstance(op, PrepZ) else "x", op.direction)
        prep = entries
    if len(prep) != seq.n_ions:
        raise ConfigError(f"prep has {len(prep)} entries for {seq.n_ions} ions")
    return spin.product_state(prep)


def run(seq: PulseSequence, spin_state: np.ndarray | None = None,
        fock: FockConfig = FockConfig()) -> FockState:
    if spin_state is None:
        spin_state = initial_spin_state(seq)
    state = FockState.product(spin_state, seq.n_ions, fock.n_max)
    t = 0.0
    for op in seq.dynamic_ops:
        state = apply(state, op, fock, t)
        t += getattr(op, "duration", 0.0)
    _check_leak(state, fock)
    return state


def reduced_spin_density(state: FockState) -> np.ndarray:
    v = state.amplitudes.reshape(-1, state.n_max + 1)
    return v @ v.conj().T


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    ev = np.linalg.eigvalsh((rho1 - rho2 + (rho1 - rho2).conj().T) / 2)
    return 0.5 * float(np.sum(np.abs(ev)))
