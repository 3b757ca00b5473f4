import json
import math

import numpy as np
import pytest

from squeezegate.errors import ConfigError
from squeezegate.model import (
    COM_FREQUENCY,
    PUBLISHED_PARTICIPATION,
    TARGET_FREQUENCY,
    ChainConfig,
    Displace,
    PrepX,
    PrepZ,
    PulseSequence,
    Rotate,
    Squeeze,
    dumps_sequence,
    load_chain,
    load_sequence,
    op_from_dict,
    op_to_dict,
    preset_chain,
    save_sequence,
    sequence_from_dict,
    sequence_to_dict,
    validate_sequence,
)
from squeezegate.sequences import squeezed_rectangle_4


def test_preset_three_ion_target_mode():
    chain = preset_chain(3)
    assert chain.mode_frequencies[chain.target_mode] == pytest.approx(2 * math.pi * 2.817e6)
    assert chain.check() == []


def test_raw_lamb_dicke_for_ion_two():
    # Published 3-ion participation 0.82 for the middle ion ("ion 2" counting from one).
    assert 0.08 * PUBLISHED_PARTICIPATION[3][1] == pytest.approx(0.0656, abs=1e-12)


def test_preset_eta_is_scale_times_participation():
    chain = preset_chain(3)
    b = chain.participation_matrix()
    for n in range(3):
        assert chain.eta(n) == pytest.approx(0.08 * b[n, chain.target_mode])
    # The renormalized vector stays close to the published one.
    assert abs(chain.eta(1) - 0.0656) < 5e-4


def test_preset_four_ion_participation():
    chain = preset_chain(4)
    b = chain.participation_matrix()[:, chain.target_mode]
    assert np.allclose(np.sign(b), [1, -1, 1, -1])
    assert np.allclose(np.abs(PUBLISHED_PARTICIPATION[4]), [0.21, 0.67, 0.67, 0.21])
    assert TARGET_FREQUENCY[4] == pytest.approx(2 * math.pi * 2.781e6)


def test_preset_modes_orthonormal():
    for n in (3, 4):
        b = preset_chain(n).participation_matrix()
        assert np.allclose(b.T @ b, np.eye(n), atol=1e-12)
        assert preset_chain(n).mode_frequencies[-1] == pytest.approx(COM_FREQUENCY)


def test_preset_rejects_other_sizes():
    with pytest.raises(ConfigError):
        preset_chain(5)


def test_chain_dict_roundtrip(tmp_path):
    chain = preset_chain(4)
    assert ChainConfig.from_dict(chain.to_dict()) == chain
    p = tmp_path / "chain.json"
    p.write_text(json.dumps(chain.to_dict()))
    assert load_chain(p) == chain


def test_validate_empty_ok():
    assert validate_sequence(PulseSequence(preset_chain(3), ())) == []


def test_validate_ion_out_of_range():
    seq = PulseSequence(preset_chain(3), (Displace(3, 0.1),))
    assert any("ion index out of range" in d for d in validate_sequence(seq))


def test_validate_prep_after_dynamics():
    seq = PulseSequence(preset_chain(3), (Displace(0, 0.1), PrepZ(0, "down")))
    assert any("prep after dynamics" in d for d in validate_sequence(seq))


def test_validate_squeeze_orientation():
    seq = PulseSequence(preset_chain(3), (Squeeze(1, 0.2, motional_phase=0.3),))
    assert any("squeeze orientation" in d for d in validate_sequence(seq))


def test_op_roundtrip_each_type():
    ops = [Displace(0, 0.3 - 0.2j, spin_phase=0.1, detuning=5.0, duration=1e-6),
           Squeeze(1, 0.27, sign=-1, motional_phase=math.pi, duration=2e-6),
           Rotate(2, 0.5, math.pi / 2, 1e-6), PrepZ(0, "up"), PrepX(1, "down")]
    for op in ops:
        assert op_from_dict(json.loads(json.dumps(op_to_dict(op)))) == op


def test_sequence_file_roundtrip(tmp_path):
    seq = squeezed_rectangle_4(phi0=1.0, xi=0.34, zeta=0.29)
    path = tmp_path / "s.json"
    save_sequence(seq, path)
    back = load_sequence(path)
    assert back.ops == seq.ops and back.chain == seq.chain and back.label == seq.label
    assert dumps_sequence(back) == dumps_sequence(seq)
    assert sequence_from_dict(sequence_to_dict(seq)).metadata == seq.metadata


def test_total_time_sums_durations():
    seq = PulseSequence(preset_chain(3), (Displace(0, 0.1, duration=1e-6), Rotate(0, 0, math.pi, 2e-6)))
    assert seq.total_time() == pytest.approx(3e-6)
