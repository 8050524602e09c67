"""Rotating-frame Hamiltonian and dissipators of the four-level lambda system.

Unit convention: Rabi frequencies and detunings are cyclic MHz at every API
surface and converted to angular rad/ns inside dynamical matrices; all times
are ns.  Dimensionless observables (Stark slope, noise-variance coefficient)
are independent of this choice and pin it down in the test suite.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .quantum import DIM, IDX_A2, IDX_MINUS, IDX_PLUS, IDX_ZERO

#: cyclic MHz -> angular rad/ns
TWO_PI_MHZ_NS = 2.0e-3 * math.pi

#: Sign carried by the two-photon detuning on the |+1g> diagonal.  The
#: convention is fixed so that a positive ``two_photon_mhz`` advances the
#: measured dynamic phase, i.e. the fitted Stark shift per unit detuning is
#: positive.  Flipping it only relabels which field is red/blue of the Raman
#: resonance.
TWO_PHOTON_SIGN = -1.0


@dataclass(frozen=True)
class LambdaParams:
    """Physical constants of the driven lambda system.

    ``rabi_mhz`` is the peak Rabi frequency of the ``|-1g> <-> |A2>``
    transition; the ``|+1g>`` peak is ``rabi_ratio`` times that.  The three
    decay times empty ``|A2>`` into the ground states; ``t_orbital_ns`` is
    the coherence decay time of the excited orbital against all ground
    states, and ``t_spin_ns`` the coherence decay time of the
    ``|-1g>/|+1g>`` qubit pair.
    """

    rabi_mhz: float = 31.0
    detuning_mhz: float = 60.0
    two_photon_mhz: float = 0.0
    t_decay_minus_ns: float = 31.0
    t_decay_plus_ns: float = 24.0
    t_decay_zero_ns: float = 104.0
    t_orbital_ns: float = 7.0
    t_spin_ns: float = 2250.0
    rabi_ratio: float = 1.0
    # When True the ground-spin dephasing operator carries diagonal weights
    # (0, +1, -1) on (|0g>, |-1g>, |+1g>), so coherences against |0g| also
    # dephase (at one quarter of the qubit rate).  When False the |0g>
    # weight equals the |-1g> one, protecting the readout coherence
    # rho(0g,-1g) while keeping the qubit coherence time unchanged.
    dephase_zero_coherences: bool = True

    def __post_init__(self):
        if self.rabi_mhz < 0:
            raise ValueError("rabi_mhz must be >= 0")
        if self.rabi_ratio < 0:
            raise ValueError("rabi_ratio must be >= 0")
        for name in ("t_decay_minus_ns", "t_decay_plus_ns", "t_decay_zero_ns",
                     "t_orbital_ns", "t_spin_ns"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0 (use math.inf to disable)")

    def replace(self, **changes) -> "LambdaParams":
        return dataclasses.replace(self, **changes)

    def without_dissipation(self) -> "LambdaParams":
        """Copy with every decay and dephasing channel disabled."""
        return self.replace(
            t_decay_minus_ns=math.inf,
            t_decay_plus_ns=math.inf,
            t_decay_zero_ns=math.inf,
            t_orbital_ns=math.inf,
            t_spin_ns=math.inf,
        )

    @property
    def decay_rates_per_ns(self) -> tuple[float, float, float]:
        """(into |-1g>, into |+1g>, into |0g>) decay rates in 1/ns."""
        return (_rate(self.t_decay_minus_ns), _rate(self.t_decay_plus_ns),
                _rate(self.t_decay_zero_ns))

    @property
    def total_decay_rate_per_ns(self) -> float:
        return sum(self.decay_rates_per_ns)


def _rate(time_ns: float) -> float:
    return 0.0 if math.isinf(time_ns) else 1.0 / time_ns


@dataclass(frozen=True)
class DriveSample:
    """Instantaneous drive amplitudes (cyclic MHz) and relative phase (rad)."""

    omega_minus_mhz: float
    omega_plus_mhz: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.omega_minus_mhz < 0 or self.omega_plus_mhz < 0:
            raise ValueError("drive amplitudes must be >= 0")


DRIVE_OFF = DriveSample(0.0, 0.0, 0.0)


def hamiltonian_at(params: LambdaParams, drive: DriveSample) -> np.ndarray:
    """Rotating-frame Hamiltonian (angular units, rad/ns) for one drive sample.

    The |0g> row and column are zero; the carrier couples |-1g> to |A2> and
    the sideband couples |+1g> to |A2> with relative phase ``phase_rad``;
    the diagonal carries the two-photon detuning on |+1g> (sign per
    ``TWO_PHOTON_SIGN``) and the one-photon detuning on |A2>.
    """
    wm = TWO_PI_MHZ_NS * drive.omega_minus_mhz
    wp = TWO_PI_MHZ_NS * drive.omega_plus_mhz
    h = np.zeros((DIM, DIM), dtype=complex)
    h[IDX_MINUS, IDX_A2] = 0.5 * wm
    h[IDX_A2, IDX_MINUS] = 0.5 * wm
    phase = np.exp(1j * drive.phase_rad)
    h[IDX_PLUS, IDX_A2] = 0.5 * wp * phase
    h[IDX_A2, IDX_PLUS] = 0.5 * wp * phase.conjugate()
    h[IDX_PLUS, IDX_PLUS] = TWO_PHOTON_SIGN * TWO_PI_MHZ_NS * params.two_photon_mhz
    h[IDX_A2, IDX_A2] = TWO_PI_MHZ_NS * params.detuning_mhz
    return h


def lindblad_ops(params: LambdaParams) -> list[np.ndarray]:
    """Jump operators (angular-rate normalized, units 1/sqrt(ns)).

    Five channels when all are enabled: three decays from |A2> into each
    ground state, pure dephasing of the excited orbital, and ground-spin
    dephasing of the |-1g>/|+1g> coherence.  Channels whose time constant
    is infinite are omitted, so a fully disabled set returns ``[]`` and
    propagation is unitary.
    """
    ops: list[np.ndarray] = []
    targets = ((IDX_MINUS, params.t_decay_minus_ns),
               (IDX_PLUS, params.t_decay_plus_ns),
               (IDX_ZERO, params.t_decay_zero_ns))
    for idx, t_ns in targets:
        rate = _rate(t_ns)
        if rate > 0.0:
            op = np.zeros((DIM, DIM), dtype=complex)
            op[idx, IDX_A2] = math.sqrt(rate)
            ops.append(op)
    orbital_rate = 2.0 * _rate(params.t_orbital_ns)
    if orbital_rate > 0.0:
        # sqrt(2/T) |A2><A2| makes every A2 coherence decay with time T
        op = np.zeros((DIM, DIM), dtype=complex)
        op[IDX_A2, IDX_A2] = math.sqrt(orbital_rate)
        ops.append(op)
    spin_rate = 0.5 * _rate(params.t_spin_ns)
    if spin_rate > 0.0:
        # sqrt(1/(2T)) diag weights give the qubit coherence a decay time T
        weights = np.zeros(DIM)
        weights[IDX_MINUS] = 1.0
        weights[IDX_PLUS] = -1.0
        if not params.dephase_zero_coherences:
            weights[IDX_ZERO] = 1.0
        ops.append(math.sqrt(spin_rate) * np.diag(weights).astype(complex))
    return ops
