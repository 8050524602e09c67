import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stirapberry.geometry import dark_state
from stirapberry.lambda_system import (TWO_PI_MHZ_NS, DriveSample, LambdaParams,
                                       hamiltonian_at, lindblad_ops)
from stirapberry.quantum import IDX_A2, IDX_MINUS, IDX_PLUS, IDX_ZERO


def dissipator(ops, rho):
    out = np.zeros_like(rho)
    for op in ops:
        out += op @ rho @ op.conj().T
        anti = op.conj().T @ op
        out -= 0.5 * (anti @ rho + rho @ anti)
    return out


class TestHamiltonian:
    def test_bare_eigenvalues(self):
        params = LambdaParams(detuning_mhz=60.0)
        h = hamiltonian_at(params, DriveSample(0.0, 0.0))
        eigs = np.sort(np.linalg.eigvalsh(h))
        assert np.allclose(eigs[:3], 0.0, atol=1e-15)
        assert abs(eigs[3] - TWO_PI_MHZ_NS * 60.0) < 1e-12

    def test_single_drive_dark_pole(self):
        params = LambdaParams()
        h = hamiltonian_at(params, DriveSample(25.0, 0.0, 0.3))
        ket = np.zeros(4, dtype=complex)
        ket[IDX_PLUS] = 1.0
        assert np.max(np.abs(h @ ket)) < 1e-15

    @settings(max_examples=80, deadline=None)
    @given(om_minus=st.floats(0.0, 80.0), om_plus=st.floats(1e-3, 80.0),
           phase=st.floats(-math.pi, math.pi), delta1=st.floats(-80.0, 80.0))
    def test_dark_state_annihilated_on_two_photon_resonance(
            self, om_minus, om_plus, phase, delta1):
        params = LambdaParams(detuning_mhz=delta1, two_photon_mhz=0.0)
        drive = DriveSample(om_minus, om_plus, phase)
        h = hamiltonian_at(params, drive)
        theta = 2.0 * math.atan2(om_minus, om_plus)
        ket = dark_state(theta, phase)
        assert np.max(np.abs(h @ ket)) < 1e-12 * max(1.0, om_minus + om_plus)

    @settings(max_examples=50, deadline=None)
    @given(om_minus=st.floats(0.0, 80.0), om_plus=st.floats(0.0, 80.0),
           phase=st.floats(-10.0, 10.0), delta=st.floats(-1.0, 1.0))
    def test_hermitian(self, om_minus, om_plus, phase, delta):
        params = LambdaParams(two_photon_mhz=delta)
        h = hamiltonian_at(params, DriveSample(om_minus, om_plus, phase))
        assert np.max(np.abs(h - h.conj().T)) < 1e-15

    def test_zero_row_for_reference_level(self):
        h = hamiltonian_at(LambdaParams(two_photon_mhz=0.2),
                           DriveSample(10.0, 20.0, 1.0))
        assert np.max(np.abs(h[IDX_ZERO])) == 0.0
        assert np.max(np.abs(h[:, IDX_ZERO])) == 0.0


class TestLindbladOps:
    def test_channel_count(self):
        assert len(lindblad_ops(LambdaParams())) == 5

    def test_disabled_dissipation_empty(self):
        assert lindblad_ops(LambdaParams().without_dissipation()) == []

    def test_generator_traceless(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        out = dissipator(lindblad_ops(LambdaParams()), rho)
        assert abs(np.trace(out)) < 1e-14

    def test_qubit_coherence_rate(self):
        params = LambdaParams()
        rho = np.zeros((4, 4), dtype=complex)
        rho[IDX_MINUS, IDX_PLUS] = rho[IDX_PLUS, IDX_MINUS] = 0.5
        out = dissipator(lindblad_ops(params), rho)
        rate = -out[IDX_MINUS, IDX_PLUS].real / rho[IDX_MINUS, IDX_PLUS].real
        assert abs(rate - 1.0 / params.t_spin_ns) < 1e-12

    def test_excited_coherence_rate(self):
        params = LambdaParams()
        rho = np.zeros((4, 4), dtype=complex)
        rho[IDX_MINUS, IDX_A2] = rho[IDX_A2, IDX_MINUS] = 0.5
        out = dissipator(lindblad_ops(params), rho)
        rate = -out[IDX_MINUS, IDX_A2].real / rho[IDX_MINUS, IDX_A2].real
        expected = (0.5 * params.total_decay_rate_per_ns
                    + 1.0 / params.t_orbital_ns
                    + 0.25 / params.t_spin_ns)
        assert abs(rate - expected) < 1e-12

    def test_reference_coherence_protected_option(self):
        params = LambdaParams(dephase_zero_coherences=False)
        rho = np.zeros((4, 4), dtype=complex)
        rho[IDX_ZERO, IDX_MINUS] = rho[IDX_MINUS, IDX_ZERO] = 0.5
        spin_only = params.replace(
            t_decay_minus_ns=math.inf, t_decay_plus_ns=math.inf,
            t_decay_zero_ns=math.inf, t_orbital_ns=math.inf)
        out = dissipator(lindblad_ops(spin_only), rho)
        assert abs(out[IDX_ZERO, IDX_MINUS]) < 1e-15

    def test_reference_coherence_default_rate(self):
        params = LambdaParams()
        rho = np.zeros((4, 4), dtype=complex)
        rho[IDX_ZERO, IDX_MINUS] = rho[IDX_MINUS, IDX_ZERO] = 0.5
        spin_only = params.replace(
            t_decay_minus_ns=math.inf, t_decay_plus_ns=math.inf,
            t_decay_zero_ns=math.inf, t_orbital_ns=math.inf)
        out = dissipator(lindblad_ops(spin_only), rho)
        rate = -out[IDX_ZERO, IDX_MINUS].real / 0.5
        assert abs(rate - 0.25 / params.t_spin_ns) < 1e-15


class TestParams:
    def test_rejects_negative_rabi(self):
        with pytest.raises(ValueError):
            LambdaParams(rabi_mhz=-1.0)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            LambdaParams(t_orbital_ns=0.0)

    def test_decay_rates(self):
        params = LambdaParams()
        total = params.total_decay_rate_per_ns
        assert abs(1.0 / total - 11.9703) < 1e-3
