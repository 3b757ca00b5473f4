import math

import numpy as np
import pytest

from squeezegate import spin
from squeezegate.errors import ConfigError


def test_all_down_is_index_zero():
    psi = spin.product_state([("z", "down")] * 3)
    assert psi[0] == 1 and np.count_nonzero(psi) == 1


def test_x_states_are_sigma_x_eigenstates():
    up = spin.SINGLE_STATES[("x", "up")]
    down = spin.SINGLE_STATES[("x", "down")]
    assert np.allclose(spin.SX @ up, up)
    assert np.allclose(spin.SX @ down, -down)


def test_sz_sign_convention():
    assert np.allclose(spin.SZ @ spin.SINGLE_STATES[("z", "up")], spin.SINGLE_STATES[("z", "up")])


def test_rotation_pi_about_x():
    assert np.allclose(spin.rotation(0.0, math.pi), -1j * spin.SX)


def test_x_basis_roundtrip():
    rng = np.random.default_rng(3)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    assert np.allclose(spin.from_x_basis(spin.to_x_basis(psi, 3), 3), psi)


def test_x_basis_index_matches_configs():
    # Product of x eigenstates lands on the matching spin_configs index.
    configs = spin.spin_configs(3)
    for k, s in enumerate(configs):
        psi = spin.product_state([("x", "up" if v > 0 else "down") for v in s])
        amp = spin.to_x_basis(psi, 3)
        assert abs(abs(amp[k]) - 1) < 1e-12


def test_parse_format_prep():
    prep = spin.parse_prep("dz,ux,dz")
    assert prep == [("z", "down"), ("x", "up"), ("z", "down")]
    assert spin.format_prep(prep) == "dz,ux,dz"
    with pytest.raises(ConfigError):
        spin.parse_prep("qz")


def test_outcome_label_msb_is_ion_zero():
    assert spin.outcome_label(0b100, 3) == "udd"
    assert spin.up_mask(3)[0b101].tolist() == [True, False, True]


def test_probabilities_normalized():
    p = spin.probabilities(np.diag([0.2, 0.2, -1e-18, 0.6]).astype(complex))
    assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
