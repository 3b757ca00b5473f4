import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from squeezegate import branch, fock, spin
from squeezegate.branch import BranchState, PauliXPolynomial
from squeezegate.errors import BranchCompatibilityError, ConfigError, OpenLoopError
from squeezegate.model import Displace, PulseSequence, Rotate, Squeeze, preset_chain
from squeezegate.sequences import ms_rectangle, squeezed_rectangle_3, squeezed_rectangle_4

CH3 = preset_chain(3)


def brute_walsh(phases, n):
    """Direct ``2^-N sum_s theta_s prod_{n in T} s_n`` over every subset T."""
    out = {}
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            c = sum(th * math.prod(s[i] for i in subset) for s, th in phases.items()) / 2**n
            out[sum(1 << i for i in subset)] = c
    return out


def test_squeeze_scales_p_displacement():
    st = branch.apply_op(BranchState(0.0, 0.7j), Squeeze(1, 0.3), (1, 1, 1))
    assert st.displacement == pytest.approx(0.7j * math.exp(0.3))


def test_displace_from_vacuum():
    st = branch.apply_op(BranchState(), Displace(0, 0.4 + 0.1j), (-1, 1, 1))
    assert st.angle == 0 and st.displacement == pytest.approx(-(0.4 + 0.1j))


def test_opposite_displacements_close():
    seq = PulseSequence(CH3, (Displace(0, 0.5), Displace(0, -0.5)))
    res = branch.run_branch(seq, (1, 1, 1))
    assert res.closed and abs(res.final.phase_factor - 1) < 1e-12


def test_empty_sequence_branch():
    res = branch.run_branch(PulseSequence(CH3, ()), (1, -1, 1))
    assert res.final == BranchState() and res.closed


def test_ms_branch_phase():
    res = branch.run_branch(ms_rectangle(phi0=math.pi / 4), (1, 1, 1))
    assert res.closed
    assert res.final.angle == pytest.approx(-math.pi / 4, abs=1e-12)


@pytest.mark.parametrize("s2,scale", [(1, math.exp(0.27)), (-1, math.exp(-0.27))])
def test_squeezed_branch_phase_magnitude(s2, scale):
    phi0 = 0.8
    res = branch.run_branch(squeezed_rectangle_3(phi0=phi0, xi=0.27), (1, s2, 1))
    assert abs(res.final.angle) == pytest.approx(scale * phi0, abs=1e-12)


def test_zero_phi0_gives_zero_phases():
    assert all(abs(v) < 1e-15 for v in branch.geometric_phases(squeezed_rectangle_3(phi0=0, xi=0.3)).values())


def test_open_loop_raises_with_branch():
    seq = PulseSequence(CH3, (Displace(0, 0.5),))
    with pytest.raises(OpenLoopError, match="open"):
        branch.geometric_phases(seq)


@pytest.mark.parametrize("op", [Displace(0, 0.1, detuning=1.0), Displace(0, 0.1, spin_phase=0.2),
                                Squeeze(1, 0.1, motional_phase=0.5), Rotate(0, 0.0, math.pi / 2)])
def test_incompatible_ops_rejected(op):
    with pytest.raises(BranchCompatibilityError):
        branch.run_all_branches(PulseSequence(CH3, (op,)))


def test_extract_matches_brute_force():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 5):
        phases = {s: float(rng.normal()) for s in spin.spin_configs(n)}
        poly = branch.extract_polynomial(phases)
        ref = brute_walsh(phases, n)
        for mask, c in ref.items():
            assert poly.terms.get(mask, 0.0) == pytest.approx(c, abs=1e-13)


def test_extract_evaluate_roundtrip():
    rng = np.random.default_rng(1)
    phases = {s: float(rng.normal()) for s in spin.spin_configs(4)}
    poly = branch.extract_polynomial(phases)
    for s, th in phases.items():
        assert poly.evaluate(s) == pytest.approx(th, abs=1e-12)


def test_extract_zero_is_empty():
    assert branch.extract_polynomial({s: 0.0 for s in spin.spin_configs(3)}).terms == {}


def test_extract_missing_config():
    with pytest.raises(ConfigError):
        branch.extract_polynomial({(1, 1): 0.0})


def test_rect3_polynomial():
    poly = branch.phase_polynomial(squeezed_rectangle_3(phi0=1.0, xi=0.23))
    assert set(poly.terms) == {0b101, 0b111}
    assert poly.coefficient(0, 2) == pytest.approx(math.cosh(0.23), abs=1e-12)
    assert poly.coefficient(0, 1, 2) == pytest.approx(math.sinh(0.23), abs=1e-12)
    assert poly.label(0b101) == "X1X3"


def test_rect4_ratios():
    poly = branch.phase_polynomial(squeezed_rectangle_4(phi0=1.0, xi=0.34, zeta=0.29))
    c2 = poly.coefficient(0, 3)
    assert poly.coefficient(0, 1, 3) / c2 == pytest.approx(math.tanh(0.34), abs=1e-12)
    assert poly.coefficient(0, 1, 2, 3) / c2 == pytest.approx(math.tanh(0.34) * math.tanh(0.29), abs=1e-12)


def test_zeta_zero_reduces_to_three_body():
    poly = branch.phase_polynomial(squeezed_rectangle_4(phi0=1.0, xi=0.34, zeta=0.0))
    assert set(poly.terms) == {0b1001, 0b1011}


def test_effective_hamiltonian_scaling():
    poly = PauliXPolynomial.from_terms(3, {0b101: math.pi})
    h = branch.effective_hamiltonian(poly, 1e-4)
    assert h.coefficient(0, 2) == pytest.approx(math.pi * 1e4)
    assert branch.effective_hamiltonian(PauliXPolynomial(3, {}), 1.0).terms == {}
    with pytest.raises(ConfigError):
        branch.effective_hamiltonian(poly, 0.0)


def test_effective_hamiltonian_eq1_terms():
    seq = squeezed_rectangle_3(phi0=0.9, xi=0.3)
    h = branch.effective_hamiltonian(branch.phase_polynomial(seq), 2e-4)
    assert h.coefficient(0, 2) == pytest.approx(0.9 * math.cosh(0.3) / 2e-4)
    assert h.coefficient(0, 1, 2) == pytest.approx(0.9 * math.sinh(0.3) / 2e-4)


def test_effective_unitary_equals_expm_of_polynomial():
    seq = squeezed_rectangle_3(phi0=1.3, xi=0.4)
    u = branch.effective_unitary(seq).matrix()
    ref = expm(-1j * branch.phase_polynomial(seq).matrix())
    assert np.allclose(u, ref, atol=1e-12)


def _x(k, n=3):
    m = np.ones((1, 1))
    for i in range(n):
        m = np.kron(m, spin.SX if i == k else spin.ID2)
    return m


def test_polynomial_matrix_brute_force():
    poly = PauliXPolynomial.from_terms(3, {0b101: 0.7, 0b111: -0.2, 0b010: 0.1})
    ref = 0.7 * _x(0) @ _x(2) - 0.2 * _x(0) @ _x(1) @ _x(2) + 0.1 * _x(1)
    assert np.allclose(poly.matrix(), ref)


def test_ms_quarter_flip_pair():
    u = branch.effective_unitary(ms_rectangle(phi0=math.pi / 4))
    p = spin.probabilities(u.apply_to_state(spin.product_state([("z", "down")] * 3)))
    assert p[0b101] == pytest.approx(0.5, abs=1e-12)
    assert p[0] == pytest.approx(0.5, abs=1e-12)


def test_zero_phi0_identity():
    u = branch.effective_unitary(ms_rectangle(phi0=0.0)).matrix()
    assert np.allclose(u, np.eye(8))


def test_coherent_overlap_trivial_cases():
    b = BranchState(0.3, 0.4 - 0.2j)
    assert branch.coherent_overlap(b, b) == pytest.approx(1.0)
    assert abs(branch.coherent_overlap(BranchState(), BranchState(0.0, 2.0))) == pytest.approx(math.exp(-2))


def test_coherent_overlap_vs_fock():
    n_max = 40
    vac = np.zeros(n_max + 1, dtype=complex)
    vac[0] = 1
    for b1, b2 in [(0.3 + 0.5j, -0.7 + 0.1j), (1.1, 0.4j), (-0.2 - 0.9j, 0.6 - 0.3j)]:
        k1 = fock.displacement_matrix(b1, n_max) @ vac
        k2 = fock.displacement_matrix(b2, n_max) @ vac
        ref = np.vdot(k2, k1) * np.exp(1j * (0.2 - 0.5))
        got = branch.coherent_overlap(BranchState(0.2, b1), BranchState(0.5, b2))
        assert abs(got - ref) < 1e-8


def test_polynomial_dict_and_negation():
    poly = PauliXPolynomial.from_terms(3, {0b101: 1.0, 0b111: 1e-15})
    assert poly.to_dict() == {"X1X3": 1.0}
    assert (-poly).coefficient(0, 2) == -1.0
