"""Simulator of dark-state transport and geometric-phase accumulation in a
dissipative four-level lambda system, with noise-robustness experiments."""

from ._backend import available_backends, backend_name
from .evolve import ConvergenceError, InvariantError, Trajectory, pl_series, propagate
from .fitting import FitError, PhaseFit, fit_phase_model
from .geometry import (StarkResult, adiabaticity_metric, berry_integral, dark_state,
                       eq2_sigma, stark_slope, wrap_deg)
from .lambda_system import DriveSample, LambdaParams, hamiltonian_at, lindblad_ops
from .noise import (BerryRun, DistributionStats, MonteCarloResult, NoiseConfig,
                    NoiseTrace, ShotModel, estimate_intrinsic_sigma,
                    monte_carlo_berry, ou_generate, shot_readout, split_seed)
from .pulses import (ProtocolSchedule, PulseSchedule, ScheduleError, compose,
                     drive_of, drives_of, eom_bessel_map, inject_noise, tangerine)
from .quantum import (BlochVector, DensityDiagnostics, StateError, apply_instant_gate,
                      basis_ket, bloch_of, density_from_pure, gate_matrix,
                      measured_xy, validate)

__version__ = "0.1.0"

__all__ = [
    "BerryRun", "BlochVector", "ConvergenceError", "DensityDiagnostics",
    "DistributionStats", "DriveSample", "FitError", "InvariantError",
    "LambdaParams", "MonteCarloResult", "NoiseConfig", "NoiseTrace", "PhaseFit",
    "ProtocolSchedule", "PulseSchedule", "ScheduleError", "ShotModel",
    "StarkResult", "StateError", "Trajectory", "adiabaticity_metric",
    "apply_instant_gate", "available_backends", "backend_name", "basis_ket",
    "berry_integral", "bloch_of", "compose", "dark_state", "density_from_pure",
    "drive_of", "drives_of", "eom_bessel_map", "eq2_sigma",
    "estimate_intrinsic_sigma", "fit_phase_model", "gate_matrix", "hamiltonian_at",
    "inject_noise", "lindblad_ops", "measured_xy", "monte_carlo_berry",
    "ou_generate", "pl_series", "propagate", "shot_readout", "split_seed",
    "stark_slope", "tangerine", "validate", "wrap_deg",
]
