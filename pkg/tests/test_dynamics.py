import math

import numpy as np
import pytest

import kerrcat as kc
from conftest import max_block_dev

# deterministic stand-ins for random (delta, chi, t) draws
PARAM_COMBOS = [
    (0.4573, 0.0605, 5.2116),
    (2.9098, 0.4265, 7.0042),
    (1.1996, 0.5762, 6.5271),
]


class TestScalars:
    def test_effective_detuning(self, ref_params, bare_params):
        assert kc.effective_detuning(0, ref_params) == 4.8
        assert kc.effective_detuning(1, ref_params) == pytest.approx(4.6, abs=1e-14)
        for n in (0, 3, 50):
            assert kc.effective_detuning(n, bare_params) == 0.0

    def test_rabi_frequency_vacuum_resonant(self, bare_params):
        assert kc.rabi_frequency(0, bare_params) == pytest.approx(2.0, rel=1e-14)

    def test_rabi_frequency_linear_ladder_values(self, ref_params):
        # at the critical detuning the ladder is linear: 4.8 + 0.2 (n + 2)
        assert kc.rabi_frequency(0, ref_params) == pytest.approx(5.2, abs=1e-13)
        assert kc.rabi_frequency(25, ref_params) == pytest.approx(10.2, abs=1e-13)
        # direct cross-check of the square root form at n = 25
        gam = 4.8 - 2 * 0.1 * 25
        assert kc.rabi_frequency(25, ref_params) == pytest.approx(
            math.sqrt(gam**2 + 4 * 26), rel=1e-15
        )

    def test_rejects_negative_index(self, ref_params):
        with pytest.raises(ValueError):
            kc.rabi_frequency(-1, ref_params)
        with pytest.raises(ValueError):
            kc.effective_detuning(-2, ref_params)


class TestCoefficients:
    def test_identity_at_t0(self, ref_params):
        c = kc.coefficients(7, 0.0, ref_params)
        assert c.kerr_phase == 1.0
        assert c.stay_amp == 1.0
        assert c.flip_amp == 0.0

    def test_resonant_half_flop(self, bare_params):
        c = kc.coefficients(0, math.pi / 2.0, bare_params)
        assert abs(c.stay_amp) < 1e-15
        assert abs(c.flip_amp) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("delta,chi,t", PARAM_COMBOS)
    def test_unitarity(self, delta, chi, t):
        params = kc.ModelParams(detuning=delta, kerr=chi)
        kerr_phase, stay, flip = kc.coefficient_arrays(t, params, 128)
        assert np.max(np.abs(np.abs(stay) ** 2 + np.abs(flip) ** 2 - 1.0)) < 1e-13
        assert np.max(np.abs(np.abs(kerr_phase) - 1.0)) < 1e-14


class TestEvolveField:
    def test_identity_at_t0(self, coherent5, ref_params):
        out = kc.evolve_field(coherent5, 0.0, ref_params)
        assert np.max(np.abs(out.matrix - coherent5.matrix)) < 1e-14

    def test_matches_oracle_off_resonance(self, coherent2_small):
        params = kc.ModelParams(detuning=1.3, kerr=0.07)
        closed = kc.evolve_field(coherent2_small, 3.0, params)
        dense = kc.hamiltonian_oracle(coherent2_small, 3.0, params).reduced_field()
        assert np.max(np.abs(closed.matrix - dense.matrix)) < 1e-8

    def test_revival_returns_initial_state(self, coherent5, ref_params):
        t_r = kc.revival_time(ref_params, 25.0)
        assert t_r == pytest.approx(math.pi / 0.1, rel=1e-14)
        rho_r = kc.evolve_field(coherent5, t_r, ref_params)
        assert kc.field_fidelity(coherent5, rho_r) > 0.98

    def test_revival_cross_checked_against_oracle(self, ref_params):
        # full dense cross-check at the largest desk-scale truncation
        rho0 = kc.coherent_state(5.0, 64)
        t_r = kc.revival_time(ref_params, 25.0)
        closed = kc.evolve_field(rho0, t_r, ref_params)
        dense = kc.hamiltonian_oracle(rho0, t_r, ref_params).reduced_field()
        assert np.max(np.abs(closed.matrix - dense.matrix)) < 1e-8

    def test_trace_leakage_small_at_defaults(self, coherent5, ref_params):
        t_r = kc.revival_time(ref_params, 25.0)
        for t in np.linspace(0.0, t_r, 7):
            out = kc.evolve_field(coherent5, t, ref_params)
            assert coherent5.trace - out.trace < 1e-10

    def test_hermiticity_preserved(self, coherent5, ref_params):
        out = kc.evolve_field(coherent5, 11.3, ref_params)
        m = out.matrix
        assert np.max(np.abs(m - m.conj().T)) < 1e-12


class TestEvolveAtom:
    def test_excited_at_t0(self, coherent5, ref_params):
        atom = kc.evolve_atom(coherent5, 0.0, ref_params)
        assert atom.excited_population == pytest.approx(1.0, abs=1e-12)
        assert atom.matrix[0, 1] == 0.0

    def test_mixture_keeps_atom_diagonal(self, mixture5, ref_params):
        # the mixture has no neighbouring-level coherence, so the atomic
        # coherence vanishes identically
        for t in (0.7, 5.0, 16.0):
            atom = kc.evolve_atom(mixture5, t, ref_params)
            assert atom.matrix[0, 1] == 0.0

    def test_matches_oracle(self, coherent2_small):
        params = kc.ModelParams(detuning=2.4, kerr=0.31)
        atom = kc.evolve_atom(coherent2_small, 5.0, params)
        dense = kc.hamiltonian_oracle(coherent2_small, 5.0, params).reduced_atom()
        assert np.max(np.abs(atom.matrix - dense.matrix)) < 1e-8


class TestEvolveJoint:
    def test_blocks_at_t0(self, coherent2_small, ref_params):
        joint = kc.evolve_joint(coherent2_small, 0.0, ref_params)
        assert np.max(np.abs(joint.ee - coherent2_small.matrix)) < 1e-14
        for block in (joint.eg, joint.ge, joint.gg):
            assert np.max(np.abs(block)) == 0.0

    def test_trace_conservation(self, coherent5, ref_params):
        joint = kc.evolve_joint(coherent5, 9.2, ref_params)
        assert joint.total_trace == pytest.approx(coherent5.trace, abs=1e-10)

    def test_ge_is_adjoint_of_eg(self, coherent5, ref_params):
        joint = kc.evolve_joint(coherent5, 4.4, ref_params)
        assert np.max(np.abs(joint.ge - joint.eg.conj().T)) <= 1e-12

    def test_partial_traces_consistent(self, ref_params):
        # truncation chosen so the top-level mass sits far below 1e-12
        rho0 = kc.coherent_state(2.0, 32)
        t = 6.1
        joint = kc.evolve_joint(rho0, t, ref_params)
        field = kc.evolve_field(rho0, t, ref_params)
        atom = kc.evolve_atom(rho0, t, ref_params)
        assert np.max(np.abs(joint.reduced_field().matrix - field.matrix)) < 1e-12
        assert np.max(np.abs(joint.reduced_atom().matrix - atom.matrix)) < 1e-12

    @pytest.mark.parametrize("delta,chi,t", PARAM_COMBOS)
    def test_matches_oracle(self, coherent2_small, delta, chi, t):
        params = kc.ModelParams(detuning=delta, kerr=chi)
        closed = kc.evolve_joint(coherent2_small, t, params)
        dense = kc.hamiltonian_oracle(coherent2_small, t, params)
        assert max_block_dev(closed, dense) < 1e-8


class TestOracle:
    def test_identity_at_t0(self, coherent2_small, ref_params):
        joint = kc.hamiltonian_oracle(coherent2_small, 0.0, ref_params)
        assert np.max(np.abs(joint.ee - coherent2_small.matrix)) < 1e-12
        assert np.max(np.abs(joint.gg)) < 1e-12

    def test_vacuum_rabi_oscillation(self, bare_params):
        # one-photon exchange: populations swing as cos^2/sin^2 of the
        # coupling times time
        vac = kc.fock_state(0, 4)
        for t in (0.3, 1.1, 2.6):
            joint = kc.hamiltonian_oracle(vac, t, bare_params)
            atom = joint.reduced_atom()
            assert atom.excited_population == pytest.approx(math.cos(t) ** 2, abs=1e-10)
            assert atom.ground_population == pytest.approx(math.sin(t) ** 2, abs=1e-10)

    def test_carrier_independent(self, coherent2_small):
        params = kc.ModelParams(detuning=3.3, kerr=0.21)
        a = kc.hamiltonian_oracle(coherent2_small, 2.9, params, carrier=17.0)
        b = kc.hamiltonian_oracle(coherent2_small, 2.9, params, carrier=58.5)
        assert max_block_dev(a, b) < 1e-9

    def test_rejects_large_spaces(self, ref_params):
        big = kc.coherent_state(2.0, 70)
        with pytest.raises(ValueError):
            kc.hamiltonian_oracle(big, 1.0, ref_params)


class TestLinearLadder:
    def test_uniform_spacing_at_critical_detuning(self):
        for chi, delta, _ in kc.REFERENCE_MEAN_PHOTON:
            if chi == 0.0:
                continue
            params = kc.ModelParams(detuning=delta, kerr=chi)
            freqs = np.array([kc.rabi_frequency(n, params) for n in range(129)])
            assert np.max(np.abs(np.diff(freqs) - 2.0 * chi)) < 1e-12


def test_joint_state_block_serialization(tmp_path, coherent2_small, ref_params):
    joint = kc.evolve_joint(coherent2_small, 2.3, ref_params)
    prefix = tmp_path / "snapshot"
    paths = joint.save(prefix)
    assert len(paths) == 4
    again = kc.JointState.load(prefix)
    assert max_block_dev(joint, again) == 0.0
