"""Simulator for spin-dependent displacement and squeezing gates on trapped-ion chains."""

from .analysis import evolve, fit_sine, ghz_fidelity, parity_scan, sample_shots, truth_table, z_populations
from .branch import (
    DiagonalXUnitary,
    PauliXPolynomial,
    effective_unitary,
    extract_polynomial,
    geometric_phases,
    phase_polynomial,
)
from .errors import SqueezeGateError
from .fock import FockConfig, trace_distance
from .model import (
    ChainConfig,
    Displace,
    PrepX,
    PrepZ,
    PulseSequence,
    Rotate,
    Squeeze,
    load_sequence,
    preset_chain,
    save_sequence,
)
from .sequences import build, ms_rectangle, pure_three_body, squeezed_rectangle_3, squeezed_rectangle_4

__version__ = "0.1.0"

__all__ = [
    "ChainConfig", "DiagonalXUnitary", "Displace", "FockConfig", "PauliXPolynomial", "PrepX", "PrepZ",
    "PulseSequence", "Rotate", "Squeeze", "SqueezeGateError", "build", "effective_unitary", "evolve",
    "extract_polynomial", "fit_sine", "geometric_phases", "ghz_fidelity", "load_sequence", "ms_rectangle",
    "parity_scan", "phase_polynomial", "preset_chain", "pure_three_body", "sample_shots", "save_sequence",
    "squeezed_rectangle_3", "squeezed_rectangle_4", "trace_distance", "truth_table", "z_populations",
]
