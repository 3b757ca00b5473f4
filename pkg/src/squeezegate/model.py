"""Chain configuration and the pulse-sequence intermediate representation.

Every engine consumes a :class:`PulseSequence`: a :class:`ChainConfig` plus a
time-ordered tuple of operations.  ``ops[0]`` acts first.  Ion indices are
zero-based everywhere in code and files; human-facing labels are one-based.

Units: angles in radians, angular frequencies in rad/s, durations in seconds,
displacements in phase-space units of ``a = q + i p``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
LAMB_DICKE_SCALE = 0.08
RABI_MAX = TWO_PI * 1.0e6

# Rounded target-mode participation factors and frequencies of the presets.
PUBLISHED_PARTICIPATION = {
    3: (0.41, 0.82, 0.41),
    4: (0.21, -0.67, 0.67, -0.21),
}
TARGET_FREQUENCY = {3: TWO_PI * 2.817e6, 4: TWO_PI * 2.781e6}
COM_FREQUENCY = TWO_PI * 3.03e6

# Pulse durations of the experimental sequences (seconds).
DURATIONS = {
    3: {"displace": 26e-6, "squeeze": 29e-6, "rotate": 12.7e-6},
    4: {"displace": 44e-6, "squeeze": 49e-6, "rotate": 12.7e-6},
}

PRUNE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ChainConfig:
    """Physical context of an ion chain.

    ``participation[n][k]`` is the amplitude of ion ``n`` in mode ``k``; modes
    are indexed in ascending frequency.  ``synthetic_modes`` lists mode
    indices whose frequency/vector were filled in rather than measured.
    """

    n_ions: int
    mode_frequencies: tuple[float, ...]
    participation: tuple[tuple[float, ...], ...]
    lamb_dicke_scale: float = LAMB_DICKE_SCALE
    rabi_max: float = RABI_MAX
    target_mode: int = 0
    synthetic_modes: tuple[int, ...] = ()

    @property
    def n_modes(self) -> int:
        return len(self.mode_frequencies)

    def participation_matrix(self) -> np.ndarray:
        return np.array(self.participation, dtype=float).reshape(self.n_ions, self.n_modes)

    def eta(self, ion: int, mode: int | None = None) -> float:
        """Lamb-Dicke parameter of ``ion`` on ``mode`` (default: the target mode)."""
        k = self.target_mode if mode is None else mode
        return self.lamb_dicke_scale * self.participation[ion][k]

    def detunings(self) -> np.ndarray:
        """Drive detuning seen by every mode when driving the target mode resonantly."""
        w = np.asarray(self.mode_frequencies)
        return w[self.target_mode] - w

    def check(self) -> list[str]:
        problems = []
        if self.n_ions < 1:
            problems.append("n_ions must be positive")
        w = np.asarray(self.mode_frequencies, dtype=float)
        if w.size == 0 or np.any(w <= 0) or np.any(np.diff(w) <= 0):
            problems.append("mode frequencies must be positive and strictly increasing")
        if not 0 <= self.target_mode < max(len(w), 1):
            problems.append("target mode index out of range")
        try:
            b = self.participation_matrix()
        except ValueError:
            return problems + ["participation matrix has the wrong shape"]
        gram = b.T @ b
        if np.max(np.abs(np.diag(gram) - 1.0), initial=0.0) > 1e-9:
            problems.append("participation columns are not unit norm")
        off = gram - np.diag(np.diag(gram))
        if np.max(np.abs(off), initial=0.0) > 1e-9:
            problems.append("participation columns are not orthogonal")
        return problems

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_ions": self.n_ions,
            "mode_frequencies": list(self.mode_frequencies),
            "participation": [list(row) for row in self.participation],
            "lamb_dicke_scale": self.lamb_dicke_scale,
            "rabi_max": self.rabi_max,
            "target_mode": self.target_mode,
            "synthetic_modes": list(self.synthetic_modes),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ChainConfig":
        return cls(
            n_ions=int(d["n_ions"]),
            mode_frequencies=tuple(float(x) for x in d["mode_frequencies"]),
            participation=tuple(tuple(float(x) for x in row) for row in d["participation"]),
            lamb_dicke_scale=float(d.get("lamb_dicke_scale", LAMB_DICKE_SCALE)),
            rabi_max=float(d.get("rabi_max", RABI_MAX)),
            target_mode=int(d.get("target_mode", 0)),
            synthetic_modes=tuple(int(k) for k in d.get("synthetic_modes", ())),
        )


def _spectator_candidates(n_ions: int) -> list[np.ndarray]:
    # Rough radial mode shapes, highest frequency (center of mass) last.
    if n_ions == 3:
        return [np.array([1.0, 0.0, -1.0]), np.ones(3)]
    if n_ions == 4:
        return [np.array([1.0, -1.0, -1.0, 1.0]), np.array([-3.0, -1.0, 1.0, 3.0]), np.ones(4)]
    raise ConfigError(f"no preset for {n_ions} ions", code="unsupported_chain")


def preset_chain(n_ions: int) -> ChainConfig:
    """The 3- or 4-ion chain of the experiment.

    The target (zig-zag) mode vector is renormalized and the spectator modes
    are Gram-Schmidt orthogonalized against it.  Spectator frequencies
    between the zig-zag and center-of-mass modes are linearly interpolated
    and flagged as synthetic.
    """
    if n_ions not in PUBLISHED_PARTICIPATION:
        raise ConfigError(f"no preset for {n_ions} ions (supported: 3, 4)", code="unsupported_chain")
    target = np.array(PUBLISHED_PARTICIPATION[n_ions])
    basis = [target / np.linalg.norm(target)]
    for v in _spectator_candidates(n_ions):
        for u in basis:
            v = v - (u @ v) * u
        basis.append(v / np.linalg.norm(v))
    b = np.column_stack(basis)
    n_modes = b.shape[1]
    freqs = np.linspace(TARGET_FREQUENCY[n_ions], COM_FREQUENCY, n_modes)
    return ChainConfig(
        n_ions=n_ions,
        mode_frequencies=tuple(float(w) for w in freqs),
        participation=tuple(tuple(float(x) for x in row) for row in b),
        target_mode=0,
        synthetic_modes=tuple(range(1, n_modes - 1)),
    )


# --- pulse operations -------------------------------------------------------


@dataclass(frozen=True)
class Displace:
    """Spin-dependent displacement ``exp(sigma_phi (alpha a^dag - alpha^* a))``.

    ``alpha`` is the complex displacement the pulse produces when driven on
    resonance; its argument is the motional phase.  A nonzero ``detuning``
    spreads the same drive over ``duration`` with a rotating phase.
    """

    ion: int
    alpha: complex
    spin_phase: float = 0.0
    detuning: float = 0.0
    duration: float = 0.0

    @property
    def motional_phase(self) -> float:
        return cmath.phase(self.alpha) % TWO_PI if self.alpha != 0 else 0.0


@dataclass(frozen=True)
class Squeeze:
    """Spin-dependent squeeze ``exp(1/2 sigma_phi (z^* a^2 - z a^dag^2))``.

    ``z = sign * xi * exp(i motional_phase)``; ``motional_phase`` 0 squeezes
    along q for the +1 spin eigenvalue, pi anti-squeezes.
    """

    ion: int
    xi: float
    sign: int = 1
    motional_phase: float = 0.0
    spin_phase: float = 0.0
    detuning: float = 0.0
    duration: float = 0.0

    @property
    def amplitude(self) -> complex:
        return self.sign * self.xi * cmath.exp(1j * self.motional_phase)


@dataclass(frozen=True)
class Rotate:
    """Single-spin rotation ``exp(-i chi/2 (cos theta X + sin theta Y))``."""

    ion: int
    axis_angle: float
    rotation_angle: float
    duration: float = 0.0


@dataclass(frozen=True)
class PrepZ:
    ion: int
    direction: str = "down"


@dataclass(frozen=True)
class PrepX:
    ion: int
    direction: str = "down"


PulseOp = Union[Displace, Squeeze, Rotate, PrepZ, PrepX]
PREP_TYPES = (PrepZ, PrepX)
_OP_TYPES = {"displace": Displace, "squeeze": Squeeze, "rotate": Rotate, "prep_z": PrepZ, "prep_x": PrepX}
_OP_NAMES = {v: k for k, v in _OP_TYPES.items()}


@dataclass(frozen=True)
class PulseSequence:
    chain: ChainConfig
    ops: tuple[PulseOp, ...] = ()
    label: str = ""
    metadata: dict[str, Any] = field(default_factory=dict, compare=True, hash=False)

    @property
    def n_ions(self) -> int:
        return self.chain.n_ions

    @property
    def prep_ops(self) -> tuple[PulseOp, ...]:
        return tuple(op for op in self.ops if isinstance(op, PREP_TYPES))

    @property
    def dynamic_ops(self) -> tuple[PulseOp, ...]:
        return tuple(op for op in self.ops if not isinstance(op, PREP_TYPES))

    def total_time(self) -> float:
        return sum(getattr(op, "duration", 0.0) for op in self.ops)

    def then(self, *ops: PulseOp, label: str | None = None) -> "PulseSequence":
        return PulseSequence(self.chain, self.ops + tuple(ops), self.label if label is None else label,
                             dict(self.metadata))

    def without_prep(self) -> "PulseSequence":
        return PulseSequence(self.chain, self.dynamic_ops, self.label, dict(self.metadata))


def validate_sequence(seq: PulseSequence) -> list[str]:
    """Return every invariant violation in ``seq``; an empty list means valid."""
    problems = list(seq.chain.check())
    seen_dynamics = False
    for i, op in enumerate(seq.ops):
        where = f"op {i} ({_OP_NAMES.get(type(op), type(op).__name__)})"
        if not isinstance(op, tuple(_OP_TYPES.values())):
            problems.append(f"{where}: unknown operation")
            continue
        if not 0 <= op.ion < seq.n_ions:
            problems.append(f"{where}: ion index out of range")
        if isinstance(op, PREP_TYPES):
            if seen_dynamics:
                problems.append(f"{where}: prep after dynamics")
            if op.direction not in ("up", "down"):
                problems.append(f"{where}: prep direction must be 'up' or 'down'")
            continue
        seen_dynamics = True
        if getattr(op, "duration", 0.0) < 0:
            problems.append(f"{where}: negative duration")
        if isinstance(op, Squeeze):
            if op.xi < 0:
                problems.append(f"{where}: squeeze magnitude must be nonnegative")
            if op.sign not in (1, -1):
                problems.append(f"{where}: squeeze sign must be +1 or -1")
            if not _is_zero_or_pi(op.motional_phase):
                problems.append(f"{where}: squeeze orientation must be 0 or pi")
    return problems


def _is_zero_or_pi(phase: float, tol: float = 1e-12) -> bool:
    r = phase % math.pi
    return min(r, math.pi - r) < tol


# --- serialization ----------------------------------------------------------


def _encode_value(v: Any) -> Any:
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def op_to_dict(op: PulseOp) -> dict[str, Any]:
    d: dict[str, Any] = {"type": _OP_NAMES[type(op)]}
    for f in fields(op):
        d[f.name] = _encode_value(getattr(op, f.name))
    return d


def op_from_dict(d: dict[str, Any]) -> PulseOp:
    try:
        cls = _OP_TYPES[d["type"]]
    except KeyError as exc:
        raise ConfigError(f"unknown op type {d.get('type')!r}", code="bad_sequence") from exc
    kwargs = {}
    for f in fields(cls):
        if f.name not in d:
            continue
        v = d[f.name]
        if f.name == "alpha":
            v = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
        elif f.name in ("ion", "sign"):
            v = int(v)
        elif f.name != "direction":
            v = float(v)
        kwargs[f.name] = v
    return cls(**kwargs)


def sequence_to_dict(seq: PulseSequence) -> dict[str, Any]:
    return {
        "label": seq.label,
        "metadata": seq.metadata,
        "chain": seq.chain.to_dict(),
        "ops": [op_to_dict(op) for op in seq.ops],
    }


def sequence_from_dict(d: dict[str, Any]) -> PulseSequence:
    try:
        return PulseSequence(
            chain=ChainConfig.from_dict(d["chain"]),
            ops=tuple(op_from_dict(o) for o in d["ops"]),
            label=d.get("label", ""),
            metadata=dict(d.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed sequence document: {exc}", code="bad_sequence") from exc


def dumps_sequence(seq: PulseSequence) -> str:
    return json.dumps(sequence_to_dict(seq), indent=2, sort_keys=True) + "\n"


def save_sequence(seq: PulseSequence, path: str | Path) -> None:
    Path(path).write_text(dumps_sequence(seq))


def load_sequence(path: str | Path) -> PulseSequence:
    return sequence_from_dict(json.loads(Path(path).read_text()))


def load_chain(path: str | Path) -> ChainConfig:
    d = json.loads(Path(path).read_text())
    return ChainConfig.from_dict(d.get("chain", d))
