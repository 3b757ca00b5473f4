import math

import numpy as np
import pytest

from squeezegate import branch, spin
from squeezegate.errors import ConfigError
from squeezegate.model import Displace, PrepX, PrepZ, Rotate, Squeeze, preset_chain
from squeezegate.sequences import (
    build,
    ms_rectangle,
    pure_three_body,
    solve_pure_three_body,
    squeezed_rectangle_3,
    squeezed_rectangle_4,
    with_analysis_rotations,
    with_prep,
)


def test_ms_without_echo_has_four_displacements():
    seq = ms_rectangle(phi0=0.0, echo=False)
    assert len(seq.ops) == 4 and all(isinstance(op, Displace) for op in seq.ops)
    assert [op.ion for op in seq.ops] == [0, 2, 0, 2]


def test_ms_echo_adds_rotation_pairs():
    rots = [op for op in ms_rectangle(phi0=1.0).ops if isinstance(op, Rotate)]
    assert sorted((op.ion, op.rotation_angle) for op in rots) == [
        (0, -math.pi), (0, math.pi), (2, -math.pi), (2, math.pi)]


def test_echo_is_transparent():
    for seq_on, seq_off in [(ms_rectangle(phi0=0.9), ms_rectangle(phi0=0.9, echo=False)),
                            (squeezed_rectangle_3(phi0=0.9, xi=0.3),
                             squeezed_rectangle_3(phi0=0.9, xi=0.3, echo=False))]:
        u1 = branch.effective_unitary(seq_on).matrix()
        u0 = branch.effective_unitary(seq_off).matrix()
        k = np.argmax(np.abs(u0))
        g = u1.flat[k] / u0.flat[k]
        assert np.allclose(u1, g * u0, atol=1e-12)


def test_rect3_zero_xi_equals_ms():
    a = branch.effective_unitary(squeezed_rectangle_3(phi0=0.7, xi=0.0)).matrix()
    b = branch.effective_unitary(ms_rectangle(phi0=0.7)).matrix()
    assert np.allclose(a, b)


def test_rect3_sandwich_structure():
    ops = squeezed_rectangle_3(phi0=1.0, xi=0.2, echo=False).ops
    kinds = [(type(op).__name__, op.ion) for op in ops]
    assert kinds == [("Displace", 0), ("Squeeze", 1), ("Displace", 2), ("Squeeze", 1),
                     ("Displace", 0), ("Squeeze", 1), ("Displace", 2), ("Squeeze", 1)]
    assert [op.sign for op in ops if isinstance(op, Squeeze)] == [-1, 1, -1, 1]


def test_reverse_sandwich_flips_sinh_sign():
    poly = branch.phase_polynomial(squeezed_rectangle_3(phi0=1.0, xi=0.2, reverse_sandwich=True))
    assert poly.coefficient(0, 1, 2) == pytest.approx(-math.sinh(0.2))


def test_rect4_sandwich_order():
    ops = squeezed_rectangle_4(phi0=1.0, xi=0.34, zeta=0.29, echo=False).ops
    assert isinstance(ops[3], Displace) and ops[3].ion == 3
    assert [(op.ion, op.sign) for op in (ops[1], ops[2], ops[4], ops[5])] == [(2, -1), (1, -1), (1, 1), (2, 1)]


def test_rect4_zero_squeeze_is_pairwise():
    poly = branch.phase_polynomial(squeezed_rectangle_4(phi0=1.0))
    assert set(poly.terms) == {0b1001}


def test_builders_close_all_branches():
    for seq in [ms_rectangle(phi0=2.0), squeezed_rectangle_3(phi0=1.2, xi=0.5),
                squeezed_rectangle_4(phi0=1.0, xi=0.3, zeta=0.4), pure_three_body()]:
        assert all(r.closed for r in branch.run_all_branches(seq).values())


def test_phase_monotone_in_phi0():
    prev = -1.0
    for phi0 in np.linspace(0.0, 3.0, 13):
        mags = max(abs(v) for v in branch.geometric_phases(squeezed_rectangle_3(phi0=phi0, xi=0.27)).values())
        assert mags > prev
        prev = mags


def test_pure_three_body_solution():
    phi0, xi = solve_pure_three_body(math.pi / 4)
    assert xi == pytest.approx(math.atanh(0.25), abs=1e-12)
    assert xi == pytest.approx(0.2554, abs=1e-4)
    assert phi0 == pytest.approx(math.pi * math.sqrt(15) / 4, abs=1e-12)


def test_pure_three_body_small_limit():
    phi0, xi = solve_pure_three_body(1e-9)
    assert xi == pytest.approx(0.0, abs=1e-8) and phi0 == pytest.approx(math.pi)


def test_pure_three_body_out_of_range():
    with pytest.raises(ConfigError):
        solve_pure_three_body(math.pi)
    with pytest.raises(ConfigError):
        solve_pure_three_body(0.0)


def test_pure_three_body_polynomial():
    poly = branch.phase_polynomial(pure_three_body(phi3=math.pi / 4))
    assert poly.coefficient(0, 2) == pytest.approx(math.pi, abs=1e-12)
    assert poly.coefficient(0, 1, 2) == pytest.approx(math.pi / 4, abs=1e-12)


def test_with_prep_and_rotations():
    seq = with_prep(ms_rectangle(phi0=1.0), [("z", "down"), ("x", "up"), ("z", "down")])
    assert seq.prep_ops == (PrepZ(0, "down"), PrepX(1, "up"), PrepZ(2, "down"))
    with pytest.raises(ConfigError):
        with_prep(seq, [("z", "down")])
    rot = with_analysis_rotations(seq, 0.3)
    assert all(isinstance(op, Rotate) and op.axis_angle == 0.3 for op in rot.ops[-3:])


def test_build_dispatch():
    assert build("rect4", phi0=1, xi=0.34, zeta=0.29).metadata["zeta"] == 0.29
    assert build("xxx").metadata["family"] == "xxx"
    with pytest.raises(ConfigError):
        build("nope")


def test_builders_reject_bad_shapes():
    with pytest.raises(ConfigError):
        ms_rectangle(preset_chain(4), 1.0)
    with pytest.raises(ConfigError):
        squeezed_rectangle_3(phi0=-1.0)
    with pytest.raises(ConfigError):
        squeezed_rectangle_3(phi0=1.0, xi=-0.1)


def test_prep_all_down_is_zero_state():
    assert spin.product_state([("z", "down")] * 3)[0] == 1
