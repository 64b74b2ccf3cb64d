import math

import numpy as np
import pytest
from scipy.linalg import expm

from epr_grover.grover import epr_presets, grover_operator, synthesize
from epr_grover.linalg import apply, equiv_deviation, is_unitary, max_norm, operators_phase_equal, projector
from epr_grover.nmr import (
    Delay,
    GradientCrush,
    Pulse,
    PulseSequence,
    SpinSystem,
    apply_sequence,
    compile_grover,
    compile_sign_flip_marked,
    compile_sign_flip_source,
    equilibrium_deviation,
    full_evolution,
    gradient_crush,
    j_evolution,
    pseudo_pure_angle,
    pseudo_pure_sequence,
    readout,
    refocused_coupling,
    rotation_pulse,
    sequence_dumps,
    sequence_loads,
    sequence_propagator,
)
from epr_grover.tables import RHO_0, RHO_3, RHO_3R, RHO_SR1, RHO_SR2, SIGN_FLIP_PAIR, SIGN_FLIP_UU

from .conftest import ID2, PSI, SX, SY, SZ, random_unitary

SYSTEM = SpinSystem()
G = 125.76 / 500.13
J = 215.0


def op(single, spin):
    return np.kron(single, ID2) if spin == 1 else np.kron(ID2, single)


def ref_rotation(spins, axis, angle):
    single = {"x": SX, "y": SY, "-x": -SX, "-y": -SY}[axis]
    gen = sum(op(single, k) for k in spins)
    return expm(1j * angle * gen)


def ref_full(tau):
    h = -2 * np.pi * 125.76e6 * op(SZ, 1) - 2 * np.pi * 500.13e6 * op(SZ, 2) + 2 * np.pi * J * op(SZ, 1) @ op(SZ, 2)
    return expm(-1j * h * tau)


def ref_coupling(tau):
    return expm(-1j * 2 * np.pi * J * tau * op(SZ, 1) @ op(SZ, 2))


class TestRotation:
    @pytest.mark.parametrize("spins", [(1,), (2,), (1, 2)])
    @pytest.mark.parametrize("axis", ["x", "y", "-x", "-y"])
    def test_matches_expm(self, spins, axis):
        for angle in (math.pi / 4, -3 * math.pi / 4, 1.234):
            np.testing.assert_allclose(rotation_pulse(spins, axis, angle), ref_rotation(spins, axis, angle), atol=1e-14)

    def test_two_pi_is_minus_identity(self):
        np.testing.assert_allclose(rotation_pulse(1, "x", 2 * math.pi), -np.eye(4), atol=1e-15)

    def test_zero_angle(self):
        np.testing.assert_array_equal(rotation_pulse((1, 2), "y", 0.0), np.eye(4))

    def test_sign_flip_inverts(self):
        np.testing.assert_allclose(rotation_pulse(1, "y", 0.7, sign=-1), ref_rotation((1,), "y", -0.7), atol=1e-14)

    @pytest.mark.parametrize("args", [(3, "x", 1.0), (1, "z", 1.0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            rotation_pulse(*args)


class TestEvolution:
    @pytest.mark.parametrize("tau", [0.0, 1 / (4 * J), 1 / J, 3.3e-3])
    def test_coupling_matches_expm(self, tau):
        np.testing.assert_allclose(j_evolution(tau, SYSTEM), ref_coupling(tau), atol=1e-13)

    def test_half_j_is_diagonal_phase(self):
        # exp(-i pi/2 * 2 IzIz) at tau = 1/2J
        np.testing.assert_allclose(np.diag(j_evolution(1 / (2 * J))), np.exp(-1j * np.pi / 4 * np.array([1, -1, -1, 1])), atol=1e-15)

    @pytest.mark.parametrize("tau", [1e-9, 1 / (4 * J)])
    def test_full_matches_expm(self, tau):
        assert operators_phase_equal(full_evolution(tau, SYSTEM), ref_full(tau), tol=1e-6).equal

    def test_negative_tau(self):
        with pytest.raises(ValueError):
            j_evolution(-1.0)
        with pytest.raises(ValueError):
            full_evolution(-1.0)


class TestRefocusing:
    @pytest.mark.parametrize("fraction", [0.25, 0.5, 1.0])
    def test_full_frame_equals_coupling(self, fraction):
        u = sequence_propagator(refocused_coupling(fraction), SYSTEM, "full")
        assert operators_phase_equal(u, ref_coupling(fraction / J), tol=1e-8).equal

    def test_without_refocusing_pulses_shifts_remain(self):
        # a bare full-frame delay of 1/2J is not a pure coupling evolution
        u = full_evolution(1 / (2 * J), SpinSystem(nu1=1000.0, nu2=3000.0))
        assert not operators_phase_equal(u, ref_coupling(1 / (2 * J)), tol=1e-3).equal

    def test_small_frequencies(self):
        system = SpinSystem(nu1=333.0, nu2=1250.0)
        u = sequence_propagator(refocused_coupling(0.5), system, "full")
        assert operators_phase_equal(u, ref_coupling(1 / (2 * J)), tol=1e-10).equal


class TestGradient:
    def test_zeroes_coherences(self):
        np.testing.assert_array_equal(gradient_crush(RHO_3), np.diag(np.diag(RHO_3)))

    def test_idempotent_and_trace(self, rng):
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = h + h.conj().T
        once = gradient_crush(h)
        np.testing.assert_array_equal(gradient_crush(once), once)
        assert np.trace(once) == pytest.approx(np.trace(h))

    def test_no_propagator(self):
        with pytest.raises(ValueError):
            sequence_propagator(PulseSequence((GradientCrush(),)))


class TestPseudoPure:
    def test_equilibrium_symmetric(self):
        eq = equilibrium_deviation(SpinSystem(gamma_ratio=1.0))
        np.testing.assert_allclose(eq, np.diag([1, 0, 0, -1]), atol=0)

    def test_equilibrium_carbon_proton(self):
        expected = np.diag([(G + 1) / 2, (G - 1) / 2, (1 - G) / 2, -(G + 1) / 2])
        np.testing.assert_allclose(equilibrium_deviation(SYSTEM), expected, atol=1e-15)
        assert np.trace(equilibrium_deviation(SYSTEM)) == 0

    def test_alpha(self):
        # arccos(0.12572) = 1.44474
        assert pseudo_pure_angle(SYSTEM) == pytest.approx(math.acos(0.12572), abs=1e-5)
        assert pseudo_pure_angle(SYSTEM) == pytest.approx(1.44474, abs=1e-5)
        assert math.degrees(pseudo_pure_angle(SYSTEM)) == pytest.approx(82.78, abs=0.01)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            pseudo_pure_angle(SpinSystem(gamma_ratio=3.0))

    def test_literal_element_list(self):
        seq = pseudo_pure_sequence(SYSTEM)
        kinds = [type(e).__name__ for e in seq]
        assert kinds == ["Pulse", "GradientCrush", "Pulse", "Delay", "Pulse", "Delay", "Pulse", "Pulse", "GradientCrush"]

    def test_prepares_rho0(self):
        out = apply_sequence(equilibrium_deviation(SYSTEM), pseudo_pure_sequence(SYSTEM), SYSTEM)
        np.testing.assert_allclose(out / G, np.diag([0.75, -0.25, -0.25, -0.25]), atol=1e-12)
        np.testing.assert_allclose(out / G, RHO_0, atol=1e-12)
        assert equiv_deviation(out, projector(np.eye(4)[0])).equivalent

    def test_prepares_rho0_full_frame(self):
        out = apply_sequence(equilibrium_deviation(SYSTEM), pseudo_pure_sequence(SYSTEM), SYSTEM, "full")
        np.testing.assert_allclose(out / G, RHO_0, atol=1e-9)


class TestPulsePairing:
    def test_opposite_phases_cancel_amplitude_error(self):
        eps = 0.02
        paired = PulseSequence((Pulse(1, "x", math.pi, 1 + eps), Pulse(1, "x", -math.pi, 1 + eps)))
        same = PulseSequence((Pulse(1, "x", math.pi, 1 + eps), Pulse(1, "x", math.pi, 1 + eps)))
        # identity up to the nominal 2 pi rotation sign
        d_paired = max_norm(sequence_propagator(paired) - np.eye(4))
        d_same = min(max_norm(sequence_propagator(same) - s * np.eye(4)) for s in (1, -1))
        assert d_paired < 1e-12
        assert d_same > 0.01
        assert d_paired < d_same

    def test_empty_delay_is_identity(self):
        seq = PulseSequence((Delay(0.0),))
        np.testing.assert_array_equal(apply_sequence(RHO_3, seq), RHO_3)


class TestCompiledFlips:
    @pytest.mark.parametrize("mode", ["coupled", "full"])
    def test_marked_flip(self, mode):
        u = sequence_propagator(compile_sign_flip_marked(), SYSTEM, mode)
        assert is_unitary(u, 1e-10)
        assert operators_phase_equal(u, SIGN_FLIP_PAIR, tol=1e-8).equal

    def test_marked_flip_phase(self):
        # diag(e^{-i pi/2}, e^{i pi/2}, ...) = -i diag(1,-1,-1,1)
        m = operators_phase_equal(sequence_propagator(compile_sign_flip_marked()), SIGN_FLIP_PAIR)
        assert m.phase == pytest.approx(-1j, abs=1e-12)

    @pytest.mark.parametrize("mode", ["coupled", "full"])
    def test_source_flip(self, mode):
        u = sequence_propagator(compile_sign_flip_source(0), SYSTEM, mode)
        assert is_unitary(u, 1e-10)
        assert operators_phase_equal(u, SIGN_FLIP_UU, tol=1e-8).equal

    def test_source_flip_is_published_pulse_list(self):
        text = [str(e) for e in compile_sign_flip_source(0)]
        assert text[4:] == ["[-0.5pi]_y^1,2", "[-0.5pi]_x^1,2", "[+0.5pi]_y^1,2"]

    @pytest.mark.parametrize("s", range(4))
    def test_every_source_index(self, s):
        expected = np.eye(4)
        expected[s, s] = -1
        assert operators_phase_equal(sequence_propagator(compile_sign_flip_source(s)), expected).equal

    def test_involutions(self):
        for seq in (compile_sign_flip_marked(), compile_sign_flip_source(0)):
            u = sequence_propagator(seq)
            assert operators_phase_equal(u @ u, np.eye(4)).equal


class TestCompileGrover:
    def test_rho3(self):
        np.testing.assert_allclose(apply_sequence(RHO_0, compile_grover(3, 1)), RHO_3, atol=1e-12)

    def test_rho1_equivalent_to_projector(self):
        assert equiv_deviation(apply_sequence(RHO_0, compile_grover(1, 1)), projector(PSI[1])).equivalent

    def test_period_three(self):
        np.testing.assert_allclose(apply_sequence(RHO_0, compile_grover(3, 4)), RHO_3, atol=1e-12)

    def test_phase_bookkeeping(self):
        assert compile_grover(2, 3).phase == -1
        assert compile_grover(2, 4).phase == 1

    @pytest.mark.parametrize("j", range(1, 5))
    @pytest.mark.parametrize("n", [1, 4])
    def test_pulse_vs_operator(self, j, n):
        spec = epr_presets(j)
        g = spec.unitary @ np.linalg.matrix_power(grover_operator(spec), n)
        pulses = apply_sequence(RHO_0, compile_grover(j, n))
        np.testing.assert_allclose(pulses, apply(g, RHO_0), atol=1e-9)
        assert equiv_deviation(pulses, projector(synthesize(spec, n).state)).equivalent

    @pytest.mark.parametrize("j", range(1, 5))
    def test_propagator_up_to_phase(self, j):
        spec = epr_presets(j)
        g = spec.unitary @ grover_operator(spec)
        u = sequence_propagator(compile_grover(j, 1))
        assert is_unitary(u, 1e-10)
        assert operators_phase_equal(u, g).equal

    def test_full_mode_unitary(self):
        u = sequence_propagator(compile_grover(4, 2), SYSTEM, "full")
        assert is_unitary(u, 1e-10)

    def test_negative_n(self):
        with pytest.raises(ValueError):
            compile_grover(1, -1)


class TestReadout:
    def test_rho3(self):
        assert equiv_deviation(readout(RHO_3, Pulse(1, "y", math.pi / 2)), RHO_3R).equivalent

    def test_references(self):
        np.testing.assert_allclose(readout(RHO_0, Pulse(1, "y", math.pi / 2)), RHO_SR1, atol=1e-12)
        np.testing.assert_allclose(readout(RHO_0, Pulse(2, "y", math.pi / 2)), RHO_SR2, atol=1e-12)

    def test_rejects_sequence(self):
        with pytest.raises(TypeError):
            readout(RHO_0, compile_grover(1, 1))

    def test_unitary_invariance(self, rng):
        u = random_unitary(4, rng)
        rho = apply(u, RHO_0)
        assert np.trace(rho @ rho) == pytest.approx(np.trace(RHO_0 @ RHO_0))


class TestValidation:
    def test_pulse(self):
        with pytest.raises(ValueError):
            Pulse(1, "x", math.inf)
        with pytest.raises(ValueError):
            Pulse(1, "x", 1.0, amplitude_error=0.0)
        with pytest.raises(ValueError):
            Pulse(3, "x", 1.0)

    def test_delay(self):
        with pytest.raises(ValueError):
            Delay()
        with pytest.raises(ValueError):
            Delay(0.25, 1e-3)
        with pytest.raises(ValueError):
            Delay(-0.25)
        assert Delay(0.5).duration(SYSTEM) == pytest.approx(1 / (2 * J))

    def test_system(self):
        with pytest.raises(ValueError):
            SpinSystem(j_coupling=0)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            sequence_propagator(compile_sign_flip_marked(), SYSTEM, "lab")


class TestSerialization:
    @pytest.mark.parametrize("seq", [
        compile_grover(1, 2),
        pseudo_pure_sequence(SYSTEM),
        PulseSequence((Delay(seconds=0.00116279, refocus_shifts=True), Pulse((1, 2), "-y", 0.1, 1.02))),
    ])
    def test_round_trip(self, seq):
        text = sequence_dumps(seq)
        back = sequence_loads(text)
        assert back == seq
        assert sequence_dumps(back) == text

    def test_element_layout(self):
        import json

        doc = json.loads(sequence_dumps(PulseSequence((Pulse(1, "y", math.pi / 4), Delay(0.25), GradientCrush()))))
        assert doc["elements"][0] == {"pulse": {"spins": [1], "axis": "y", "angle_rad": 0.7853981633974483, "amplitude_error": 1.0}}
        assert doc["elements"][1] == {"delay": {"fraction_of_inv_j": 0.25}}
        assert doc["elements"][2] == {"gradient": {}}
