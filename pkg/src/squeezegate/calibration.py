"""Simulated calibration experiments, all run on the Fock oracle.

* common-phase scans: ``R_theta(pi/2) X R_theta(-pi/2)`` (pulse order
  ``R_theta(-pi/2)``, X, ``R_theta(pi/2)``) on one ion starting down-z, where
  X is a displacement or a squeeze coupling through ``sigma_phi``.  The flip
  probability vanishes when the rotated spin is a ``sigma_phi`` eigenstate,
  i.e. at ``theta0 = phi - pi/2 (mod pi)``, for either kind of pulse.
* squeeze-orientation scan of the three-ion squeezed rectangle.
* motional-frequency scans of ``D(alpha) D(-alpha)`` (and the squeeze analogue)
  driven with a detuning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import branch, fock, spin
from .errors import CalibrationError, ConfigError
from .model import DURATIONS, ChainConfig, Displace, PulseSequence, Rotate, Squeeze, preset_chain
from .sequences import squeezed_rectangle_3

DEGENERATE_TOL = 1e-12


def _single_ion_chain() -> ChainConfig:
    base = preset_chain(3)
    return ChainConfig(1, (base.mode_frequencies[0],), ((1.0,),))


def _flip_probability(seq: PulseSequence, fock_config: fock.FockConfig) -> float:
    state = fock.run(seq, spin.product_state([("z", "down")] * seq.n_ions), fock_config)
    return float(np.real(fock.reduced_spin_density(state)[-1, -1]))


@dataclass(frozen=True)
class CommonPhaseScan:
    kind: str
    thetas: np.ndarray
    flip: np.ndarray
    theta0: float | None
    spin_phase: float | None  # inferred phi, folded into [-pi/2, pi/2)

    @property
    def degenerate(self) -> bool:
        return self.theta0 is None


def _fold(x: float) -> float:
    return (x + math.pi / 2) % math.pi - math.pi / 2


def scan_common_phase(kind: str, amplitude: float, thetas: Sequence[float], drive_phase: float = 0.0,
                      fock_config: fock.FockConfig = fock.FockConfig()) -> CommonPhaseScan:
    """Scan the analysis axis and infer the drive's spin axis ``phi = theta0 + pi/2``.

    Needs at least three distinct angles (mod pi); both ``theta0`` and ``phi``
    are reported modulo pi.
    """
    chain = _single_ion_chain()
    if kind == "displace":
        pulse = Displace(0, complex(amplitude), spin_phase=drive_phase)
    elif kind == "squeeze":
        pulse = Squeeze(0, float(amplitude), spin_phase=drive_phase)
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size < 3:
        raise ConfigError("need at least three analysis angles")
    flip = np.array([
        _flip_probability(PulseSequence(chain, (Rotate(0, th, -math.pi / 2), pulse, Rotate(0, th, math.pi / 2))),
                          fock_config)
        for th in thetas
    ])
    if flip.max() - flip.min() < DEGENERATE_TOL:
        return CommonPhaseScan(kind, thetas, flip, None, None)
    # The flip probability is exactly a + b cos 2theta + c sin 2theta; its minimum sits at theta0.
    design = np.column_stack((np.cos(2 * thetas), np.sin(2 * thetas), np.ones_like(thetas)))
    (b, c, _), *_ = np.linalg.lstsq(design, flip, rcond=None)
    theta0 = _fold(0.5 * math.atan2(-c, -b))
    return CommonPhaseScan(kind, thetas, flip, theta0, _fold(theta0 + math.pi / 2))


@dataclass(frozen=True)
class OrientationScan:
    motional_phases: np.ndarray
    flip: np.ndarray
    p_a: float  # closed form at dphi = 0
    p_b: float  # closed form at dphi = pi
    extraction_enabled: bool


def squeeze_orientation_sequence(phi0: float, xi: float, motional_phase: float) -> PulseSequence:
    seq = squeezed_rectangle_3(preset_chain(3), phi0, xi)
    ops = tuple(replace(op, motional_phase=op.motional_phase + motional_phase) if isinstance(op, Squeeze) else op
                for op in seq.ops)
    return PulseSequence(seq.chain, ops, f"{seq.label}[dphi={motional_phase:.6g}]", dict(seq.metadata))


ORIENTATION_PREP = [("z", "down"), ("x", "down"), ("z", "down")]


def scan_squeeze_orientation(phi0: float, xi: float, motional_phases: Sequence[float],
                             fock_config: fock.FockConfig = fock.FockConfig()) -> OrientationScan:
    """Edge-pair flip probability of the squeezed rectangle versus squeeze orientation."""
    enabled = phi0 * math.exp(xi) < math.pi / 2
    if not enabled:
        warnings.warn("phi0 * exp(xi) >= pi/2: arcsin branch ambiguous, extraction disabled", stacklevel=2)
    psi0 = spin.product_state(ORIENTATION_PREP)
    flips = []
    for dphi in motional_phases:
        seq = squeeze_orientation_sequence(phi0, xi, float(dphi))
        p = spin.probabilities(fock.reduced_spin_density(fock.run(seq, psi0, fock_config)))
        flips.append(float(p[0b101] + p[0b111]))
    p_a = math.sin(math.exp(-xi) * phi0) ** 2
    p_b = math.sin(math.exp(xi) * phi0) ** 2
    return OrientationScan(np.asarray(motional_phases, dtype=float), np.array(flips), p_a, p_b, enabled)


def forward_model(phi0: float, xi: float) -> tuple[float, float]:
    return math.sin(math.exp(-xi) * phi0) ** 2, math.sin(math.exp(xi) * phi0) ** 2


def estimate_phi_xi(p_a: float, p_b: float, ambiguity_margin: float = 1e-3) -> tuple[float, float]:
    """Invert ``p_a = sin^2(e^-xi phi0)``, ``p_b = sin^2(e^xi phi0)`` on the principal branch."""
    if not 0 <= p_a <= p_b < 1:
        if p_a > p_b:
            raise CalibrationError("p_a must not exceed p_b")
        raise CalibrationError("probabilities must satisfy 0 <= p_a <= p_b < 1")
    if p_a == 0:
        raise CalibrationError("p_a = 0: xi is undefined")
    u = math.asin(math.sqrt(p_a))
    v = math.asin(math.sqrt(p_b))
    if v > math.pi / 2 - ambiguity_margin:
        warnings.warn("p_b is near 1: principal arcsin branch may be wrong", stacklevel=2)
    return math.sqrt(u * v), 0.5 * math.log(v / u)


@dataclass(frozen=True)
class FrequencyScan:
    variant: str
    detunings: np.ndarray
    flip: np.ndarray
    closed_form: np.ndarray | None  # displacement variant only

    @property
    def minimum_detuning(self) -> float:
        return float(self.detunings[int(np.argmin(self.flip))])


def detuned_displacement_pair(alpha: complex, detuning: float, duration: float) -> PulseSequence:
    """``D(alpha)`` then the same pulse with motional phase advanced by pi."""
    chain = _single_ion_chain()
    return PulseSequence(chain, (Displace(0, complex(alpha), detuning=detuning, duration=duration),
                                 Displace(0, -complex(alpha), detuning=detuning, duration=duration)),
                         f"DD(d={detuning:.6g})")


def detuned_squeeze_pair(xi: float, detuning: float, duration: float) -> PulseSequence:
    """Stand-in ``S(xi) S(-xi)`` with the second pulse's phase advanced by pi."""
    chain = _single_ion_chain()
    return PulseSequence(chain, (Squeeze(0, xi, detuning=detuning, duration=duration),
                                 Squeeze(0, xi, motional_phase=math.pi, detuning=detuning, duration=duration)),
                         f"SS(d={detuning:.6g})")


def _residual_displacement(alpha: complex, detuning: float, duration: float) -> complex:
    # Drive rate (alpha/T) e^{i d t} on [0, T], then its negative on [T, 2T].
    if detuning == 0:
        return 0j
    e = lambda t: np.exp(1j * detuning * t)  # noqa: E731
    first = (e(duration) - 1) / (1j * detuning * duration)
    second = (e(2 * duration) - e(duration)) / (1j * detuning * duration)
    return complex(alpha * (first - second))


def scan_motional_frequency(amplitude: float, detunings: Sequence[float], variant: str = "displace",
                            duration: float | None = None,
                            fock_config: fock.FockConfig = fock.FockConfig()) -> FrequencyScan:
    det = np.asarray(detunings, dtype=float)
    if variant == "displace":
        duration = DURATIONS[3]["displace"] if duration is None else duration
        make = lambda d: detuned_displacement_pair(amplitude, d, duration)  # noqa: E731
    elif variant == "squeeze":
        duration = DURATIONS[3]["squeeze"] if duration is None else duration
        make = lambda d: detuned_squeeze_pair(amplitude, d, duration)  # noqa: E731
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    flip = np.array([_flip_probability(make(d), fock_config) for d in det])
    closed = None
    if variant == "displace":
        # Down-z is an equal superposition of the x branches +-beta; P(up) = (1 - Re<-beta|beta>)/2.
        closed = []
        for d in det:
            beta = _residual_displacement(amplitude, d, duration)
            ov = branch.coherent_overlap(branch.BranchState(0.0, beta), branch.BranchState(0.0, -beta))
            closed.append((1 - ov.real) / 2)
        closed = np.array(closed)
    return FrequencyScan(variant, det, flip, closed)
