import math

import numpy as np
import pytest
from scipy.linalg import expm

from stirapberry.evolve import (ConvergenceError, InvariantError, pl_series,
                                propagate, propagate_drives)
from stirapberry.lambda_system import DriveSample, LambdaParams, hamiltonian_at
from stirapberry.pulses import GateSegment, LoopSegment, ProtocolSchedule, tangerine
from stirapberry.quantum import (IDX_A2, IDX_MINUS, REFERENCE_PAIR, basis_ket,
                                 density_from_pure, measured_xy)


def flat_drives(n_steps, om_minus, om_plus, phase):
    n = 2 * n_steps + 1
    return (np.full(n, om_minus), np.full(n, om_plus), np.full(n, phase))


class TestFreeEvolution:
    def test_zero_hamiltonian_is_identity(self):
        params = LambdaParams(detuning_mhz=0.0).without_dissipation()
        rng = np.random.default_rng(11)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho0 = a @ a.conj().T
        rho0 /= np.trace(rho0).real
        rho = rho0.copy()
        propagate_drives(rho, params, *flat_drives(800, 0.0, 0.0, 0.0), 1.0)
        assert np.max(np.abs(rho - rho0)) < 1e-13

    def test_excited_decay_oracle(self):
        params = LambdaParams()
        rho = density_from_pure(basis_ket(IDX_A2))
        out = propagate_drives(rho, params, *flat_drives(2400, 0.0, 0.0, 0.0), 0.05)
        total = params.total_decay_rate_per_ns
        expected = np.exp(-total * out["times"])
        assert np.max(np.abs(out["pops"][:, IDX_A2] - expected)) < 1e-10
        # lifetime from the harmonic sum of the three decay channels
        assert 1.0 / total == pytest.approx(12.0, abs=0.1)
        branch = np.array(params.decay_rates_per_ns) / total
        final = out["pops"][-1, [1, 2, 0]]
        assert np.max(np.abs(final - branch)) < 1e-4

    def test_constant_drive_against_exact_exponential(self):
        params = LambdaParams(rabi_mhz=25.0, detuning_mhz=40.0,
                              two_photon_mhz=0.3).without_dissipation()
        drive = DriveSample(20.0, 10.0, 0.7)
        h = hamiltonian_at(params, drive)
        t_final = 140.0
        u = expm(-1j * h * t_final)
        psi = (basis_ket(0) + basis_ket(IDX_MINUS)) / math.sqrt(2)
        rho = density_from_pure(psi)
        exact = u @ rho @ u.conj().T
        propagate_drives(rho, params, *flat_drives(5600, 20.0, 10.0, 0.7),
                         t_final / 5600)
        assert np.max(np.abs(rho - exact)) < 1e-9


class TestProtocolPropagation:
    def test_trajectory_invariants(self):
        params = LambdaParams()
        traj = propagate(density_from_pure(basis_ket(IDX_MINUS)),
                         tangerine(1200.0, 120.0, n_steps=2048), params)
        sums = traj.populations.sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-8
        assert np.all(traj.pl_rate >= 0.0)
        assert traj.trace_error_max < 1e-8
        assert traj.min_eigenvalue > -1e-6

    def test_unitary_adiabatic_limit(self):
        params = LambdaParams(rabi_mhz=64.0).without_dissipation()
        traj = propagate(density_from_pure(basis_ket(IDX_MINUS)),
                         tangerine(5000.0, 120.0), params)
        assert traj.bloch_magnitude[-1] >= 0.999

    def test_gate_segment_flips_phase(self):
        params = LambdaParams().without_dissipation()
        xi = 0.9
        psi = (basis_ket(0) + np.exp(1j * xi) * basis_ket(IDX_MINUS)) / math.sqrt(2)
        protocol = ProtocolSchedule((GateSegment(math.pi, 0.0, REFERENCE_PAIR),))
        traj = propagate(density_from_pure(psi), protocol, params)
        x, y = measured_xy(traj.final_rho)
        assert math.atan2(y, x) == pytest.approx(-xi, abs=1e-12)

    def test_convergence_check_passes_when_resolved(self):
        from stirapberry.pulses import IdleSegment

        params = LambdaParams()
        protocol = ProtocolSchedule((IdleSegment(1200.0, 4096),))
        psi = (basis_ket(IDX_MINUS) + basis_ket(IDX_A2)) / math.sqrt(2)
        propagate(density_from_pure(psi), protocol, params, tol=1e-6)

    def test_convergence_check_raises_when_coarse(self):
        params = LambdaParams()
        with pytest.raises(ConvergenceError):
            propagate(density_from_pure(basis_ket(IDX_MINUS)),
                      tangerine(1200.0, 120.0, n_steps=1024), params, tol=1e-12)

    def test_convergence_tolerance_range(self):
        params = LambdaParams()
        with pytest.raises(ValueError):
            propagate(density_from_pure(basis_ket(IDX_MINUS)),
                      tangerine(1200.0, 120.0, n_steps=1024), params, tol=1e-3)

    def test_rejects_invalid_initial_state(self):
        params = LambdaParams()
        bad = 1.05 * density_from_pure(basis_ket(0))
        with pytest.raises(InvariantError):
            propagate(bad, tangerine(1200.0, 90.0, n_steps=1024), params)

    def test_idle_and_loop_sequence_duration(self):
        from stirapberry.pulses import IdleSegment

        params = LambdaParams()
        loop = tangerine(600.0, 45.0, n_steps=1024)
        protocol = ProtocolSchedule((LoopSegment(loop, +1),
                                     IdleSegment(100.0, 64)))
        traj = propagate(density_from_pure(basis_ket(IDX_MINUS)), protocol, params)
        assert traj.times_ns[-1] == pytest.approx(700.0)


class TestPhotoluminescence:
    def test_zero_when_ground(self):
        params = LambdaParams()
        traj = propagate(density_from_pure(basis_ket(0)),
                         tangerine(600.0, 0.0, n_steps=1024), params)
        # the reference level is never driven, so no excited population
        assert np.max(pl_series(traj, params)) < 1e-12

    def test_unit_photon_count_for_pure_decay(self):
        params = LambdaParams()
        rho = density_from_pure(basis_ket(IDX_A2))
        out = propagate_drives(rho, params, *flat_drives(2400, 0.0, 0.0, 0.0), 0.05)
        rate = params.total_decay_rate_per_ns * out["pops"][:, IDX_A2]
        count = np.trapezoid(rate, out["times"])
        assert count == pytest.approx(1.0, abs=1e-4)
