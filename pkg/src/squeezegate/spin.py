"""Spin-register helpers.

Single-spin basis order is ``(|down_z>, |up_z>)`` so that an all-down register
is the computational zero state.  Multi-spin vectors are Kronecker products
with ion 0 as the most significant factor.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
# Maps computational (z) amplitudes to sigma_x eigen-amplitudes (+1 first).
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

SINGLE_STATES = {
    ("z", "down"): np.array([1, 0], dtype=complex),
    ("z", "up"): np.array([0, 1], dtype=complex),
    ("x", "up"): np.array([1, 1], dtype=complex) / np.sqrt(2),
    ("x", "down"): np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def sigma_phi(phi: float) -> np.ndarray:
    """``cos(phi) X + sin(phi) Y``."""
    return np.cos(phi) * SX + np.sin(phi) * SY


def rotation(theta: float, chi: float) -> np.ndarray:
    """``R_theta(chi) = exp(-i chi/2 sigma_theta)``."""
    return np.cos(chi / 2) * ID2 - 1j * np.sin(chi / 2) * sigma_phi(theta)


def spin_configs(n: int) -> list[tuple[int, ...]]:
    """All x-basis eigenvalue tuples, in the order of the x-basis product index."""
    return list(itertools.product((1, -1), repeat=n))


def config_signs(n: int) -> np.ndarray:
    """``(2**n, n)`` array of +-1 eigenvalues matching :func:`spin_configs`."""
    return np.array(spin_configs(n), dtype=float).reshape(2**n, n)


def product_state(prep: Sequence[tuple[str, str]]) -> np.ndarray:
    psi = np.ones(1, dtype=complex)
    for basis, direction in prep:
        try:
            psi = np.kron(psi, SINGLE_STATES[(basis, direction)])
        except KeyError as exc:
            raise ConfigError(f"bad prep entry {(basis, direction)!r}", code="bad_prep") from exc
    return psi


def parse_prep(text: str) -> list[tuple[str, str]]:
    """Parse ``"dz,ux,dz"`` (direction letter + basis letter per ion)."""
    out = []
    for tok in text.replace(" ", "").split(","):
        if len(tok) != 2 or tok[0] not in "ud" or tok[1] not in "zx":
            raise ConfigError(f"bad prep token {tok!r}; expected e.g. 'dz' or 'ux'", code="bad_prep")
        out.append((tok[1], "up" if tok[0] == "u" else "down"))
    return out


def format_prep(prep: Iterable[tuple[str, str]]) -> str:
    return ",".join(("u" if d == "up" else "d") + b for b, d in prep)


def apply_single(psi: np.ndarray, gate: np.ndarray, ion: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [ion])), 0, ion)
    return t.reshape(-1)


def apply_all(psi: np.ndarray, gate: np.ndarray, n: int) -> np.ndarray:
    for ion in range(n):
        psi = apply_single(psi, gate, ion, n)
    return psi


def to_x_basis(psi: np.ndarray, n: int) -> np.ndarray:
    return apply_all(psi, HADAMARD, n)


def from_x_basis(psi: np.ndarray, n: int) -> np.ndarray:
    return apply_all(psi, HADAMARD, n)


def up_mask(n: int) -> np.ndarray:
    """``(2**n, n)`` boolean array: True where ion is up along z in that outcome."""
    idx = np.arange(2**n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(bool)


def outcome_label(index: int, n: int) -> str:
    return "".join("u" if b else "d" for b in up_mask(n)[index])


def probabilities(rho_or_psi: np.ndarray) -> np.ndarray:
    if rho_or_psi.ndim == 1:
        p = np.abs(rho_or_psi) ** 2
    else:
        p = np.real(np.diag(rho_or_psi)).copy()
    p[p < 0] = 0.0
    return p / p.sum()
