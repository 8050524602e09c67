"""Four-level quantum state primitives for the driven lambda system.

The basis ordering is fixed everywhere in this package:

    index 0: ``|0g>``   reference ground state (m_s = 0)
    index 1: ``|-1g>``  ground state coupled by the carrier field
    index 2: ``|+1g>``  ground state coupled by the sideband field
    index 3: ``|A2>``   optically excited state

States are plain complex numpy arrays: kets of shape ``(4,)``, density
matrices of shape ``(4, 4)``.  All operations are pure functions; nothing
here mutates its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DIM = 4
IDX_ZERO, IDX_MINUS, IDX_PLUS, IDX_A2 = range(DIM)
LEVEL_NAMES = ("0g", "-1g", "+1g", "A2")

#: qubit subspace the dark state lives on
SPIN_PAIR = (IDX_MINUS, IDX_PLUS)
#: qubit subspace used for phase readout against the reference level
REFERENCE_PAIR = (IDX_ZERO, IDX_MINUS)

NORM_TOL = 1e-6
TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-6


class StateError(ValueError):
    """Invalid quantum state or unsupported operation target."""


def basis_ket(index: int) -> np.ndarray:
    ket = np.zeros(DIM, dtype=complex)
    ket[index] = 1.0
    return ket


def density_from_pure(state) -> np.ndarray:
    """Projector ``|psi><psi|`` of a normalized four-component ket."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (DIM,):
        raise StateError(f"expected a length-{DIM} ket, got shape {psi.shape}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > NORM_TOL:
        raise StateError(f"ket is not normalized: |psi| = {norm!r}")
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class BlochVector:
    """Bloch components of a density matrix restricted to a level pair.

    The convention is the standard one: a ket
    ``cos(t/2)|a> + e^{i p} sin(t/2)|b>`` on the pair ``(a, b)`` maps to
    polar angle ``t`` and azimuth ``p``, i.e. ``y = 2 Im rho[b, a]``.
    """

    x: float
    y: float
    z: float
    pair: tuple[int, int] = SPIN_PAIR

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def azimuth_rad(self) -> float:
        return math.atan2(self.y, self.x)


def bloch_of(rho, pair: tuple[int, int] = SPIN_PAIR) -> BlochVector:
    """Bloch vector of ``rho`` on the two tagged levels."""
    a, b = pair
    rho = np.asarray(rho, dtype=complex)
    return BlochVector(
        x=2.0 * rho[a, b].real,
        y=2.0 * rho[b, a].imag,
        z=(rho[a, a] - rho[b, b]).real,
        pair=(a, b),
    )


def gate_matrix(angle_rad: float, pair: tuple[int, int] = REFERENCE_PAIR,
                axis_phase_rad: float = 0.0) -> np.ndarray:
    """Unitary for an instantaneous rotation about an equatorial axis.

    Rotates the tagged two-level subspace by ``angle_rad`` about the axis
    ``cos(a) x + sin(a) y`` with ``a = axis_phase_rad``; identity elsewhere.
    The spinor half-angle phase is stripped from the rotated block (a pi
    rotation is exactly ``sigma_x``-like), so applying a pi gate twice
    restores the density matrix exactly, including coherences to the
    unrotated levels.  The excited state cannot be addressed (microwaves
    act on ground states only).
    """
    if IDX_A2 in pair:
        raise StateError("instantaneous gates cannot address the excited state")
    a, b = pair
    if a == b:
        raise StateError("gate pair must name two distinct levels")
    half = 0.5 * angle_rad
    block_phase = np.exp(1j * half)
    c = block_phase * math.cos(half)
    s = -1j * block_phase * math.sin(half)
    u = np.eye(DIM, dtype=complex)
    u[a, a] = c
    u[b, b] = c
    u[a, b] = s * np.exp(-1j * axis_phase_rad)
    u[b, a] = s * np.exp(1j * axis_phase_rad)
    return u


def apply_instant_gate(rho, angle_rad: float, pair: tuple[int, int] = REFERENCE_PAIR,
                       axis_phase_rad: float = 0.0) -> np.ndarray:
    """Conjugate ``rho`` by the instantaneous rotation ``U rho U^dag``."""
    u = gate_matrix(angle_rad, pair, axis_phase_rad)
    rho = np.asarray(rho, dtype=complex)
    return u @ rho @ u.conj().T


@dataclass(frozen=True)
class DensityDiagnostics:
    """Validation report for a density matrix (pure report, never raises)."""

    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float

    @property
    def trace_ok(self) -> bool:
        return self.trace_error <= TRACE_TOL

    @property
    def hermitian_ok(self) -> bool:
        return self.hermiticity_error <= HERMITICITY_TOL

    @property
    def positive_ok(self) -> bool:
        return self.min_eigenvalue >= EIGENVALUE_FLOOR

    @property
    def all_ok(self) -> bool:
        return self.trace_ok and self.hermitian_ok and self.positive_ok


def validate(rho) -> DensityDiagnostics:
    """Trace, Hermiticity, and positivity diagnostics of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    trace_error = abs(float(np.trace(rho).real) - 1.0) + abs(float(np.trace(rho).imag))
    hermiticity_error = float(np.max(np.abs(rho - rho.conj().T)))
    sym = 0.5 * (rho + rho.conj().T)
    min_eigenvalue = float(np.linalg.eigvalsh(sym)[0])
    return DensityDiagnostics(trace_error, hermiticity_error, min_eigenvalue)


def measured_xy(rho, pair: tuple[int, int] = REFERENCE_PAIR) -> tuple[float, float]:
    """Tomographic (X, Y) projections of the coherence on a level pair.

    Equal to the transverse Bloch components, so the measured phase
    ``atan2(Y, X)`` is the phase of the ``|b>`` amplitude relative to
    ``|a>`` for ``pair = (a, b)``.
    """
    b = bloch_of(rho, pair)
    return b.x, b.y
