"""Observables and statistics on simulated spin registers.

Populations are over z-basis outcomes in Kronecker order (ion 0 most
significant, bit 1 = up).  The parity observable is ``(-1)**(number of up
spins)``, which equals ``prod_n (-sigma_z^(n))`` with ``sigma_z |up> = +|up>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import branch, fock, spin
from .errors import BranchCompatibilityError, ConfigError, FitError, OpenLoopError
from .model import PulseSequence, Rotate
from .sequences import build

RNG_ALGORITHM = "numpy.random.PCG64 seeded by SeedSequence(seed, spawn_key=(point_index,))"
ENGINES = ("auto", "branch", "fock")

Prep = Sequence[tuple[str, str]]


# --- evolution --------------------------------------------------------------


def _branch_evolve(seq: PulseSequence, psi: np.ndarray) -> np.ndarray:
    """Apply closed branch-compatible blocks as diagonal unitaries, general rotations exactly."""
    block: list = []

    def flush(psi):
        if block:
            u = branch.effective_unitary(PulseSequence(seq.chain, tuple(block)))
            psi = u.apply_to_state(psi)
            block.clear()
        return psi

    for op in seq.dynamic_ops:
        if branch.is_branch_compatible(op):
            block.append(op)
        elif isinstance(op, Rotate):
            psi = flush(psi)
            psi = spin.apply_single(psi, spin.rotation(op.axis_angle, op.rotation_angle), op.ion, seq.n_ions)
        else:
            branch.check_op(op)
    return flush(psi)


def evolve(seq: PulseSequence, prep: Prep | None = None, engine: str = "auto",
           fock_config: fock.FockConfig = fock.FockConfig()) -> np.ndarray:
    """Final reduced spin density matrix.

    ``engine="auto"`` uses the branch engine and falls back to the Fock oracle
    for detuned, non-x-diagonal or open-loop sequences.
    """
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}")
    psi0 = fock.initial_spin_state(seq, prep)
    if engine in ("auto", "branch"):
        try:
            psi = _branch_evolve(seq, psi0)
            return np.outer(psi, psi.conj())
        except (BranchCompatibilityError, OpenLoopError):
            if engine == "branch":
                raise
    return fock.reduced_spin_density(fock.run(seq, psi0, fock_config))


def _rotate_all(rho: np.ndarray, theta: float, chi: float, n: int) -> np.ndarray:
    r = np.ones((1, 1), dtype=complex)
    g = spin.rotation(theta, chi)
    for _ in range(n):
        r = np.kron(r, g)
    return r @ rho @ r.conj().T


# --- populations ------------------------------------------------------------


def z_populations(seq: PulseSequence, prep: Prep | None = None, engine: str = "auto",
                  fock_config: fock.FockConfig = fock.FockConfig()) -> np.ndarray:
    return spin.probabilities(evolve(seq, prep, engine, fock_config))


def magnetization(probabilities: np.ndarray, ion: int) -> float:
    p = np.asarray(probabilities, dtype=float)
    n = int(round(math.log2(p.size)))
    return float(np.sum(p * np.where(spin.up_mask(n)[:, ion], 1.0, -1.0)))


def magnetizations(probabilities: np.ndarray) -> list[float]:
    n = int(round(math.log2(len(probabilities))))
    return [magnetization(probabilities, k) for k in range(n)]


def z_input(index: int, n: int) -> list[tuple[str, str]]:
    return [("z", "up" if b else "down") for b in spin.up_mask(n)[index]]


def truth_table(seq: PulseSequence, engine: str = "auto") -> np.ndarray:
    """Row ``i``: outcome distribution for z-basis input ``i``."""
    n = seq.n_ions
    return np.array([z_populations(seq, z_input(i, n), engine) for i in range(2**n)])


def _parity_signs(n: int) -> np.ndarray:
    return (-1.0) ** spin.up_mask(n).sum(axis=1)


def parity(probabilities: np.ndarray) -> float:
    p = np.asarray(probabilities, dtype=float)
    n = int(round(math.log2(p.size)))
    return float(np.sum(p * _parity_signs(n)))


# --- shot sampling ----------------------------------------------------------


def rng_for(seed: int, point_index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(point_index,))))


@dataclass(frozen=True)
class ShotSample:
    counts: np.ndarray
    n_shots: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_shots

    @property
    def sigmas(self) -> np.ndarray:
        f = self.frequencies
        return np.sqrt(f * (1 - f) / self.n_shots)


def sample_shots(probabilities: np.ndarray, n_shots: int, seed: int, point_index: int = 0) -> ShotSample:
    """Seeded multinomial draw of ``n_shots`` outcomes."""
    if n_shots < 1:
        raise ConfigError("n_shots must be at least 1")
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    counts = rng_for(seed, point_index).multinomial(n_shots, p / p.sum())
    return ShotSample(counts, n_shots)


# --- parity fringe ----------------------------------------------------------


@dataclass
class ParityScan:
    thetas: np.ndarray
    parities: np.ndarray  # observed: sampled if shots were drawn
    exact: np.ndarray
    sigmas: np.ndarray | None = None
    shots: int | None = None
    populations: np.ndarray | None = None  # z populations before the analysis pulses


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    phase: float
    offset: float
    rms_residual: float
    frequency: int = 1


def parity_scan(seq: PulseSequence, prep: Prep | None, thetas: Sequence[float], engine: str = "auto",
                shots: int | None = None, seed: int = 0) -> ParityScan:
    rho = evolve(seq, prep, engine)
    n = seq.n_ions
    thetas = np.asarray(thetas, dtype=float)
    exact = np.empty(thetas.size)
    observed = np.empty(thetas.size)
    sigmas = np.zeros(thetas.size) if shots else None
    sign = _parity_signs(n)
    for i, th in enumerate(thetas):
        p = spin.probabilities(_rotate_all(rho, th, math.pi / 2, n))
        exact[i] = float(p @ sign)
        if shots:
            sample = sample_shots(p, shots, seed, i)
            observed[i] = float(sample.frequencies @ sign)
            sigmas[i] = math.sqrt(max(1.0 - observed[i] ** 2, 0.0) / shots)
        else:
            observed[i] = exact[i]
    return ParityScan(thetas, observed, exact, sigmas, shots, spin.probabilities(rho))


def fit_sine(scan: ParityScan | tuple[Sequence[float], Sequence[float]], frequency: int) -> FitResult:
    """Least-squares ``A cos(N theta + phase) + offset`` at fixed integer N."""
    if isinstance(scan, ParityScan):
        th, y = scan.thetas, scan.parities
    else:
        th, y = scan
    th = np.asarray(th, dtype=float)
    y = np.asarray(y, dtype=float)
    if frequency < 1 or th.size < 2 * frequency + 1:
        raise FitError(f"need at least {2 * frequency + 1} points for frequency {frequency}")
    spacing = (th.max() - th.min()) / (th.size - 1)
    if th.max() - th.min() + spacing < 2 * math.pi / frequency - 1e-9:
        raise FitError("scan does not span one period")
    design = np.column_stack((np.cos(frequency * th), np.sin(frequency * th), np.ones_like(th)))
    (u, v, c), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([u, v, c])
    amp = math.hypot(u, v)
    return FitResult(amp, math.atan2(-v, u) if amp > 0 else 0.0, float(c),
                     float(np.sqrt(np.mean(resid**2))), frequency)


def ghz_fidelity(populations: np.ndarray, fit: FitResult) -> float:
    p = np.asarray(populations, dtype=float)
    return float((p[0] + p[-1]) / 2 + fit.amplitude / 2)


# --- parameter scans --------------------------------------------------------


@dataclass
class ScanTable:
    parameter: str
    values: np.ndarray
    columns: dict[str, np.ndarray]
    sampled: dict[str, np.ndarray] = field(default_factory=dict)
    sigmas: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


def edge_flip_probability(probabilities: np.ndarray, prep: Prep, edges: Sequence[int]) -> float:
    n = len(prep)
    mask = spin.up_mask(n)
    sel = np.ones(2**n, dtype=bool)
    for e in edges:
        basis, direction = prep[e]
        if basis != "z":
            raise ConfigError("flip probability needs edge ions prepared along z")
        sel &= mask[:, e] if direction == "down" else ~mask[:, e]
    return float(np.sum(np.asarray(probabilities)[sel]))


def scan_phi0(family: str, phi0s: Sequence[float], prep: Prep, xi: float = 0.0, zeta: float = 0.0,
              observable: str = "flip", engine: str = "auto", shots: int | None = None,
              seed: int = 0) -> ScanTable:
    """Edge-pair flip probability or per-ion magnetization versus ``phi0``."""
    if len(phi0s) == 0:
        raise ConfigError("phi0 grid is empty")
    values = np.asarray(phi0s, dtype=float)
    rows = []
    for i, phi0 in enumerate(values):
        seq = build(family, phi0=phi0, xi=xi, zeta=zeta)
        if len(prep) != seq.n_ions:
            raise ConfigError(f"prep has {len(prep)} entries for {seq.n_ions} ions")
        p = z_populations(seq, prep, engine)
        sample = sample_shots(p, shots, seed, i) if shots else None
        rows.append((seq, p, sample))
    n = rows[0][0].n_ions
    cols: dict[str, list] = {}
    sampled: dict[str, list] = {}
    sig: dict[str, list] = {}
    for seq, p, sample in rows:
        if observable == "flip":
            obs = {"flip": lambda q: edge_flip_probability(q, prep, (0, n - 1))}
        elif observable == "magnetization":
            obs = {f"m{k + 1}": (lambda q, k=k: magnetization(q, k)) for k in range(n)}
        else:
            raise ConfigError(f"unknown observable {observable!r}")
        for name, f in obs.items():
            cols.setdefault(name, []).append(f(p))
            if sample is not None:
                est = f(sample.frequencies)
                sampled.setdefault(name, []).append(est)
                var = est * (1 - est) if observable == "flip" else 1 - est**2
                sig.setdefault(name, []).append(math.sqrt(max(var, 0.0) / shots))
    meta = {"family": family, "xi": xi, "zeta": zeta, "prep": spin.format_prep(prep),
            "observable": observable}
    if shots:
        meta.update(shots=shots, seed=seed, rng=RNG_ALGORITHM)
    as_arr = lambda d: {k: np.array(v) for k, v in d.items()}  # noqa: E731
    return ScanTable("phi0", values, as_arr(cols), as_arr(sampled), as_arr(sig), meta)
