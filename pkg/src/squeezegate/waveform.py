"""Amplitude-shaped displacement pulses in a sine basis.

The Rabi envelope is ``Omega(t) = sum_m c_m sin(pi m t / T)`` (m = 1..M), so
it vanishes at both ends.  Mode ``k`` then receives

    alpha_k = (eta_nk / 2) exp(i dphi) int_0^T exp(i Delta_k t) Omega(t) dt,

which is linear in ``c``.  :func:`solve_waveform` fixes the target-mode
displacement and minimizes the summed spectator power; ties (a zero-power
null space) are broken by the minimum-norm coefficient vector.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq, null_space

from .errors import AmplitudeCapError, ConfigError, InfeasibleWaveformError
from .model import ChainConfig

CAP_SAMPLES = 4096


def basis_integrals(n_terms: int, duration: float, detuning: float) -> np.ndarray:
    """``int_0^T exp(i Delta t) sin(pi m t/T) dt`` for m = 1..M, in closed form."""
    if not duration > 0:
        raise ConfigError("duration must be positive")
    m = np.arange(1, n_terms + 1)
    w = np.pi * m / duration
    ends = (-1.0) ** m * np.exp(1j * detuning * duration)

    def piece(x):
        # (exp(i x T) - 1) / (i x) with exp(i x T) = ends; -> T as x -> 0.
        out = np.empty(x.shape, dtype=complex)
        small = np.abs(x * duration) < 1e-8
        out[~small] = (ends[~small] - 1.0) / (1j * x[~small])
        xs = x[small]
        out[small] = duration * (1 + 0.5j * xs * duration)
        return out

    return (piece(detuning + w) - piece(detuning - w)) / 2j


def displacement_integral(coeffs, duration: float, detuning: float, eta: float,
                          motional_phase: float = 0.0) -> complex:
    c = np.asarray(coeffs, dtype=float)
    return complex(0.5 * eta * cmath.exp(1j * motional_phase)
                   * (basis_integrals(c.size, duration, detuning) @ c))


def rabi_envelope(coeffs, duration: float, t) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    t = np.asarray(t, dtype=float)
    m = np.arange(1, c.size + 1)
    return np.sin(np.pi * np.multiply.outer(t, m) / duration) @ c


def mode_response(chain: ChainConfig, ion: int, n_terms: int, duration: float) -> np.ndarray:
    """``(n_modes, M)`` complex matrix mapping coefficients to displacements at dphi = 0."""
    det = chain.detunings()
    return np.array([0.5 * chain.eta(ion, k) * basis_integrals(n_terms, duration, det[k])
                     for k in range(chain.n_modes)])


@dataclass(frozen=True)
class WaveformSolution:
    coefficients: np.ndarray
    duration: float
    motional_phase: float
    achieved: np.ndarray  # complex displacement per mode
    objective: float  # summed spectator |alpha|^2
    ion: int
    target: complex

    def envelope(self, t) -> np.ndarray:
        return rabi_envelope(self.coefficients, self.duration, t)

    def peak_rabi(self, samples: int = CAP_SAMPLES) -> float:
        return float(np.max(np.abs(self.envelope(np.linspace(0, self.duration, samples)))))

    def to_dict(self) -> dict:
        return {
            "ion": self.ion,
            "duration": self.duration,
            "motional_phase": self.motional_phase,
            "target": [self.target.real, self.target.imag],
            "coefficients": [float(c) for c in self.coefficients],
            "achieved": [[complex(a).real, complex(a).imag] for a in self.achieved],
            "objective": self.objective,
            "peak_rabi": self.peak_rabi(),
        }


def solve_waveform(chain: ChainConfig, ion: int, target: complex, duration: float,
                   n_terms: int, enforce_cap: bool = True) -> WaveformSolution:
    if not 0 <= ion < chain.n_ions:
        raise ConfigError("ion index out of range")
    if n_terms < chain.n_modes + 1:
        raise ConfigError(f"need at least {chain.n_modes + 1} basis terms for {chain.n_modes} modes")
    target = complex(target)
    phase = cmath.phase(target) if target != 0 else 0.0
    resp = mode_response(chain, ion, n_terms, duration)
    k0 = chain.target_mode
    # The resonant target-mode response is real, so the constraint is a single real row.
    row = resp[k0].real[None, :]
    if np.linalg.norm(row) == 0 or abs(resp[k0].imag).max() > 1e-9 * np.abs(resp[k0]).max():
        raise InfeasibleWaveformError("target mode cannot be driven by this ion (rank-deficient constraint)")
    spectators = [k for k in range(chain.n_modes) if k != k0]
    spec = resp[spectators]
    b = np.vstack((spec.real, spec.imag)) if spectators else np.zeros((0, n_terms))

    # Column scaling keeps the normal equations well conditioned (coefficients ~ 1e6 rad/s).
    scale = 1.0 / np.linalg.norm(row)
    rs, bs = row * scale, b * scale
    c0 = np.linalg.pinv(rs) @ np.array([abs(target)])
    nsp = null_space(rs)
    if b.shape[0]:
        z, *_ = lstsq(bs @ nsp, -(bs @ c0))
        cs = c0 + nsp @ z
    else:
        cs = c0
    coeffs = cs * scale
    achieved = np.exp(1j * phase) * (resp @ coeffs)
    objective = float(np.sum(np.abs(achieved[spectators]) ** 2))
    sol = WaveformSolution(coeffs, duration, phase, achieved, objective, ion, target)
    if enforce_cap:
        peak = sol.peak_rabi()
        if peak > chain.rabi_max:
            raise AmplitudeCapError(
                f"waveform needs peak Rabi frequency {peak:.4g} rad/s above the cap {chain.rabi_max:.4g}",
                required=peak)
    return sol


@dataclass(frozen=True)
class ModeReport:
    mode: int
    alpha: complex
    expected: complex
    ok: bool


def verify_solution(sol: WaveformSolution, chain: ChainConfig, rel_tol: float = 1e-6) -> list[ModeReport]:
    """Recompute every mode's displacement from the coefficients and flag leakage."""
    det = chain.detunings()
    scale = max(abs(sol.target), 1e-300)
    out = []
    for k in range(chain.n_modes):
        a = displacement_integral(sol.coefficients, sol.duration, det[k], chain.eta(sol.ion, k),
                                  sol.motional_phase)
        expected = sol.target if k == chain.target_mode else 0j
        out.append(ModeReport(k, a, expected, abs(a - expected) <= rel_tol * scale))
    return out
