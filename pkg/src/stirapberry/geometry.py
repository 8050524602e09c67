"""Closed-form and quadrature geometry of the dark-state loop.

Angles are degrees at the API surface and radians internally.  The Berry
integral returns the unwrapped accumulated value (multi-loop totals exceed
one turn); callers that report wrapped phases use ``wrap_deg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lambda_system import DriveSample, LambdaParams, hamiltonian_at
from .pulses import LoopSegment, ProtocolSchedule, PulseSchedule, drives_of
from .quantum import DIM, IDX_MINUS, IDX_PLUS


def wrap_deg(angle_deg: float) -> float:
    """Wrap an angle into (-180, 180]."""
    wrapped = math.fmod(angle_deg + 180.0, 360.0)
    if wrapped <= 0.0:
        wrapped += 360.0
    return wrapped - 180.0


def dark_state(theta_rad: float, phi_rad: float) -> np.ndarray:
    """Zero-energy superposition of the two driven ground states.

    ``cos(theta/2)|-1g> - sin(theta/2) e^{i phi} |+1g>``; decoupled from
    the light by destructive interference.
    """
    if not 0.0 <= theta_rad <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    ket = np.zeros(DIM, dtype=complex)
    ket[IDX_MINUS] = math.cos(0.5 * theta_rad)
    ket[IDX_PLUS] = -math.sin(0.5 * theta_rad) * np.exp(1j * phi_rad)
    return ket


def berry_integral(schedule) -> float:
    """Geometric phase (degrees, unwrapped) of a closed control path.

    Evaluates ``-closed-loop integral of sin^2(theta/2) d(phi)`` by
    trapezoidal quadrature over the continuous phase samples plus the pole
    jumps at their designed weights (0 at the |-1g> pole, 1 at |+1g>).
    Accepts a single loop or a whole protocol (loop segments summed; gates
    and idles contribute nothing).
    """
    if isinstance(schedule, ProtocolSchedule):
        return sum(berry_integral(seg.schedule) for seg in schedule.segments
                   if isinstance(seg, LoopSegment))
    # noise perturbs the angles around a closed design, so closure is only
    # required of the designed path itself
    if not schedule.is_noisy and abs(schedule.theta[0] - schedule.theta[-1]) > 1e-9:
        raise ValueError("open path: theta does not return to its start value")
    weight = np.sin(0.5 * schedule.theta) ** 2
    segment_mean = 0.5 * (weight[:-1] + weight[1:])
    continuous = float(np.dot(segment_mean, np.diff(schedule.phi)))
    jumps = sum(j.weight * j.delta_rad for j in schedule.jumps)
    return -math.degrees(continuous + jumps)


@dataclass(frozen=True)
class StarkResult:
    """Dynamic-phase sensitivity of a schedule to two-photon detuning."""

    slope: float  # d(Sigma)/d(delta), dimensionless, in [0, 1]

    def shift_mhz(self, two_photon_mhz: float) -> float:
        return self.slope * two_photon_mhz


def stark_slope(schedule: PulseSchedule) -> StarkResult:
    """First-order dark-state energy sensitivity: time average of sin^2(theta/2).

    The dark state carries weight sin^2(theta/2) on the detuned level, so
    to first order the accumulated dynamic phase per unit time is that
    average times the two-photon detuning.
    """
    weight = np.sin(0.5 * schedule.theta) ** 2
    return StarkResult(slope=float(np.trapezoid(weight, dx=1.0) / (len(weight) - 1)))


def eq2_sigma(s_phi_deg: float, bandwidth_mhz: float, tau_ns: float) -> float:
    """Predicted Berry-phase standard deviation under azimuthal drive noise.

    Closed form for Ornstein-Uhlenbeck phase noise of stationary amplitude
    ``s_phi`` and Lorentzian bandwidth ``bandwidth_mhz`` on a constant-speed
    loop of duration ``tau_ns``; depends on the product of bandwidth and
    duration only.  Matches the exact covariance quadrature of the
    constant-speed profile to better than 0.1%.
    """
    if s_phi_deg < 0 or bandwidth_mhz < 0 or tau_ns < 0:
        raise ValueError("eq2_sigma arguments must be >= 0")
    x = bandwidth_mhz * 1e-3 * tau_ns
    variance = 0.5 * ((1.0 - math.exp(-2.0 * math.pi * x)) / (1.0 + x * x) ** 2
                      + math.pi * x / (1.0 + x * x))
    return s_phi_deg * math.sqrt(variance)


def adiabaticity_metric(schedule: PulseSchedule, params: LambdaParams
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Ratio of path speed to the dark/bright energy gap along the loop.

    Returns ``(times_ns, r)`` with ``r = |dtheta/dt| / gap``; values well
    below 1 indicate adiabatic following.  The gap is the smallest nonzero
    eigenvalue distance between the near-zero (dark) eigenvalue and the
    bright eigenstates of the coupled three-level block.
    """
    om_minus, om_plus, phi = drives_of(schedule, params)
    n = schedule.n_samples
    block = np.zeros((n, 3, 3), dtype=complex)
    # coupled block indices (|-1g>, |+1g>, |A2>)
    for k in range(n):
        h = hamiltonian_at(params, DriveSample(om_minus[k], om_plus[k], phi[k]))
        block[k] = h[np.ix_([IDX_MINUS, IDX_PLUS, 3], [IDX_MINUS, IDX_PLUS, 3])]
    eigs = np.linalg.eigvalsh(block)
    dark_idx = np.argmin(np.abs(eigs), axis=1)
    rows = np.arange(n)
    dark = eigs[rows, dark_idx]
    distances = np.abs(eigs - dark[:, None])
    distances[rows, dark_idx] = np.inf
    gap = distances.min(axis=1)
    dtheta_dt = np.gradient(schedule.theta, 0.5 * schedule.dt_ns)
    return schedule.times_ns(), np.abs(dtheta_dt) / gap
