"""Tangerine-slice pulse schedules, drive mapping, protocols, noise injection.

A schedule describes one closed pole-to-pole-to-pole loop of the dark state:
the polar angle runs 0 -> pi -> 0 over the loop duration while the relative
optical phase is piecewise constant with jumps only at the poles (+wedge at
the |+1g> pole, -wedge closing the loop at the |-1g> pole).  Schedules are
sampled on a half-step grid of ``2 n_steps + 1`` points so a fixed-step
fourth-order integrator can consume them directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import j0, j1

from .lambda_system import DriveSample, LambdaParams

SHAPES = ("eom-bessel", "sine-ramp", "square-dwell")

#: Modulation-depth range of the Bessel amplitude map; 2.405 is the first
#: zero of J0 (carrier fully suppressed).
BETA_MAX = 2.405
_J1_NORM = float(j1(BETA_MAX))

#: Loop average of sin^2(theta/2) along the bare Bessel modulation ramp.
BESSEL_RAMP_MEAN = 0.43733
#: Committed shape anchor: the default schedule's loop average of
#: sin^2(theta/2), reproduced to +/- 0.001 for any dwell fraction by the
#: pole-split rule below.
STARK_FRACTION_ANCHOR = 0.55
#: Fraction of each half-period the default eom-bessel shape holds at the
#: poles.  Calibrated once, together with the anchor-preserving split,
#: so the fully dissipative reference loop (31 MHz drive, 60 MHz detuning,
#: 1200 ns, 120 deg wedge) returns 65% of its Bloch-vector magnitude.
DWELL_FRACTION_CALIBRATED = 0.75

DEFAULT_STEPS = 4096
MIN_STEPS = 1000


class ScheduleError(ValueError):
    """Invalid schedule construction or incompatible noise trace."""


@dataclass(frozen=True)
class PhaseJump:
    """Instantaneous phase step at a pole sample.

    ``weight`` is sin^2(theta/2) at the designed jump location (0 at the
    |-1g> pole, 1 at the |+1g> pole).  It is fixed at construction: the
    jumps are programmed where one drive amplitude vanishes exactly, so
    injected angle noise does not reweight them.
    """

    sample_index: int
    delta_rad: float
    weight: float


@dataclass
class PulseSchedule:
    """Sampled (theta, phi) control path for one loop.

    ``theta`` and ``phi`` hold ``2 n_steps + 1`` samples on the uniform
    half-step grid; ``phi`` is the continuous part only, with the pole
    steps kept separately in ``jumps``.  ``envelope`` is the relative drive
    magnitude (1 everywhere except along the Bessel ramp, where the summed
    field power follows the modulation map).
    """

    tau_ns: float
    wedge_deg: float
    shape: str
    dwell_fraction: float
    n_steps: int
    theta: np.ndarray
    phi: np.ndarray
    envelope: np.ndarray
    jumps: tuple[PhaseJump, ...]
    is_noisy: bool = False

    @property
    def dt_ns(self) -> float:
        return self.tau_ns / self.n_steps

    @property
    def n_samples(self) -> int:
        return 2 * self.n_steps + 1

    def times_ns(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_ns, self.n_samples)

    def phi_total(self) -> np.ndarray:
        """Path phase including all pole jumps (applied from their sample on).

        The final sample shows the closed loop (net winding zero for a
        single loop); use ``drive_phase`` for the field actually applied.
        """
        out = self.phi.copy()
        for jump in self.jumps:
            out[jump.sample_index:] += jump.delta_rad
        return out

    def drive_phase(self) -> np.ndarray:
        """Field phase during the loop.

        A jump stored at the final sample is the reset at the segment
        boundary: it happens after the last integration stage, so the
        drive keeps the pre-jump phase there.  Mid-loop jumps sit where
        the affected field amplitude vanishes, making the sample-inclusive
        convention exact.
        """
        out = self.phi.copy()
        last = self.n_samples - 1
        for jump in self.jumps:
            if jump.sample_index < last:
                out[jump.sample_index:] += jump.delta_rad
        return out

    def reversed(self) -> "PulseSchedule":
        """Time-reversed traversal of the same slice (the negative loop)."""
        last = self.n_samples - 1
        jumps = tuple(
            PhaseJump(last - j.sample_index, -j.delta_rad, j.weight)
            for j in reversed(self.jumps)
        )
        return replace(
            self,
            wedge_deg=-self.wedge_deg,
            theta=self.theta[::-1].copy(),
            phi=self.phi[::-1].copy(),
            envelope=self.envelope[::-1].copy(),
            jumps=jumps,
        )

    def with_noise(self, dtheta_rad: np.ndarray, dphi_rad: np.ndarray) -> "PulseSchedule":
        """Perturbed copy: theta clamped to [0, pi], phi shifted, jumps kept."""
        dtheta_rad = np.asarray(dtheta_rad, dtype=float)
        dphi_rad = np.asarray(dphi_rad, dtype=float)
        if dtheta_rad.shape != self.theta.shape or dphi_rad.shape != self.phi.shape:
            raise ScheduleError("noise traces do not match the schedule grid")
        return replace(
            self,
            theta=np.clip(self.theta + dtheta_rad, 0.0, math.pi),
            phi=self.phi + dphi_rad,
            is_noisy=True,
        )

    def refined(self, factor: int = 2) -> "PulseSchedule":
        """Same loop resampled with ``factor`` times more steps."""
        if self.is_noisy:
            raise ScheduleError("cannot refine a noisy schedule (noise is grid-bound)")
        return tangerine(self.tau_ns, self.wedge_deg, shape=self.shape,
                         dwell_fraction=self.dwell_fraction,
                         n_steps=factor * self.n_steps)


def _plus_pole_split(shape: str, dwell: float) -> float:
    """Fraction of the pole dwell spent at the |+1g> end of each half.

    For the eom-bessel shape the split is chosen so the loop average of
    sin^2(theta/2) equals the committed anchor for any total dwell (the
    bare ramp averages below it, so extra weight goes to the |+1g>
    hemisphere).  The other shapes split evenly, preserving their
    symmetric 0.5 average.
    """
    if shape == "eom-bessel" and dwell > 0.0:
        split = (STARK_FRACTION_ANCHOR - BESSEL_RAMP_MEAN * (1.0 - dwell)) / dwell
        return min(1.0, max(0.0, split))
    return 0.5


def _ramp_coordinate(x: np.ndarray, dwell: float, split_plus: float) -> np.ndarray:
    if dwell >= 1.0:
        return np.where(x < 0.5, 0.0, 1.0)
    lo = (1.0 - split_plus) * dwell
    return np.clip((x - lo) / (1.0 - dwell), 0.0, 1.0)


def _theta_of_x(shape: str, x: np.ndarray, dwell: float) -> np.ndarray:
    """Polar angle as a function of the mirrored loop coordinate x in [0, 1].

    x = 0 at the |-1g> pole ends of the loop, x = 1 at the |+1g> pole; the
    dwell splits between the two pole ends per ``_plus_pole_split``.
    """
    if shape not in SHAPES:
        raise ScheduleError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    xx = _ramp_coordinate(x, dwell, _plus_pole_split(shape, dwell))
    if shape == "square-dwell":
        return math.pi * xx
    if shape == "sine-ramp":
        return math.pi * np.sin(0.5 * math.pi * xx) ** 2
    beta = BETA_MAX * 0.5 * (1.0 + np.cos(math.pi * xx))
    raw = 2.0 * np.arctan2(np.abs(j0(beta)), np.abs(j1(beta)) / _J1_NORM)
    # J0 does not vanish exactly at BETA_MAX = 2.405; rescale the tiny
    # residual away so the loop closes at the poles exactly.
    raw0 = 2.0 * math.atan2(abs(float(j0(BETA_MAX))), 1.0)
    return np.clip((raw - raw0) * math.pi / (math.pi - raw0), 0.0, math.pi)


def _envelope_of_x(shape: str, x: np.ndarray, dwell: float) -> np.ndarray:
    if shape != "eom-bessel":
        return np.ones_like(x)
    xx = _ramp_coordinate(x, dwell, _plus_pole_split(shape, dwell))
    beta = BETA_MAX * 0.5 * (1.0 + np.cos(math.pi * xx))
    return np.hypot(np.abs(j0(beta)), np.abs(j1(beta)) / _J1_NORM)


def tangerine(tau_ns: float, wedge_deg: float, shape: str = "eom-bessel",
              dwell_fraction: float | None = None,
              n_steps: int = DEFAULT_STEPS) -> PulseSchedule:
    """Closed pole-to-pole-to-pole loop enclosing the given wedge angle.

    Parameters
    ----------
    tau_ns : loop duration.
    wedge_deg : longitude separation of outbound and inbound paths, in
        [-360, 360]; compose multiple loops for larger totals.
    shape : one of ``eom-bessel`` (modulation-depth ramp through the Bessel
        amplitude map), ``sine-ramp`` (smooth trigonometric ramp), or
        ``square-dwell`` (piecewise-linear ramp with pole holds; dwell 0 is
        the constant-speed profile, dwell 1 the pure pole dwell).
    dwell_fraction : fraction of each half-period spent at a pole; defaults
        to the calibrated value for eom-bessel and 0 otherwise.
    n_steps : integration steps across the loop (samples are 2*n_steps+1).
    """
    if tau_ns <= 0:
        raise ScheduleError("tau_ns must be > 0")
    if not -360.0 <= wedge_deg <= 360.0:
        raise ScheduleError("wedge_deg must lie in [-360, 360]; compose loops for more")
    if n_steps < MIN_STEPS:
        raise ScheduleError(f"n_steps must be >= {MIN_STEPS} (dt <= tau/1000)")
    if n_steps % 2:
        raise ScheduleError("n_steps must be even so tau/2 falls on a sample")
    if shape not in SHAPES:
        raise ScheduleError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    if dwell_fraction is None:
        dwell_fraction = DWELL_FRACTION_CALIBRATED if shape == "eom-bessel" else 0.0
    if not 0.0 <= dwell_fraction <= 1.0:
        raise ScheduleError("dwell_fraction must lie in [0, 1]")

    n_samples = 2 * n_steps + 1
    u = np.linspace(0.0, 1.0, n_samples)
    x = 2.0 * np.minimum(u, 1.0 - u)
    theta = _theta_of_x(shape, x, dwell_fraction)
    envelope = _envelope_of_x(shape, x, dwell_fraction)
    wedge_rad = math.radians(wedge_deg)
    jumps = (
        PhaseJump(sample_index=n_steps, delta_rad=wedge_rad, weight=1.0),
        PhaseJump(sample_index=n_samples - 1, delta_rad=-wedge_rad, weight=0.0),
    )
    return PulseSchedule(
        tau_ns=float(tau_ns),
        wedge_deg=float(wedge_deg),
        shape=shape,
        dwell_fraction=float(dwell_fraction),
        n_steps=int(n_steps),
        theta=theta,
        phi=np.zeros(n_samples),
        envelope=envelope,
        jumps=jumps,
    )


def eom_bessel_map(beta: float) -> tuple[float, float]:
    """Relative drive amplitudes produced by modulation depth ``beta``.

    Returns ``(carrier, sideband)`` amplitudes normalized so the carrier is
    1 at beta = 0 and the sideband is 1 at beta = BETA_MAX, where the
    carrier is suppressed to the J0-zero residual.
    """
    if not 0.0 <= beta <= BETA_MAX:
        raise ScheduleError(f"beta must lie in [0, {BETA_MAX}]")
    return abs(float(j0(beta))), abs(float(j1(beta))) / _J1_NORM


def drives_of(schedule: PulseSchedule, params: LambdaParams
              ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Drive amplitude (cyclic MHz) and total phase (rad) arrays on the grid.

    The amplitudes realize the schedule's polar angle through
    ``tan(theta/2) = omega_minus / omega_plus`` with peak normalization
    ``omega_minus <= rabi_mhz``; ``rabi_ratio`` scales the sideband only,
    modelling unequal peak powers (the realized angle then tilts away from
    the commanded one, which is the point of that knob).
    """
    half = 0.5 * schedule.theta
    scale = params.rabi_mhz * schedule.envelope
    om_minus = scale * np.sin(half)
    om_plus = params.rabi_ratio * scale * np.cos(half)
    return om_minus, om_plus, schedule.drive_phase()


def drive_of(schedule: PulseSchedule, params: LambdaParams, t_ns: float) -> DriveSample:
    """Drive sample at time ``t_ns`` (nearest grid sample)."""
    if not 0.0 <= t_ns <= schedule.tau_ns * (1 + 1e-12):
        raise ScheduleError(f"t_ns = {t_ns} outside [0, {schedule.tau_ns}]")
    k = int(round(t_ns / (0.5 * schedule.dt_ns)))
    k = min(k, schedule.n_samples - 1)
    om_minus, om_plus, phi = drives_of(schedule, params)
    return DriveSample(float(om_minus[k]), float(om_plus[k]), float(phi[k]))


def inject_noise(schedule: PulseSchedule, dtheta=None, dphi=None) -> PulseSchedule:
    """Apply angle-noise traces (degrees, on the schedule grid) to a schedule.

    Accepts ``NoiseTrace`` objects or ``None`` for either axis.  The traces
    must be sampled on exactly the schedule's grid.
    """
    n = schedule.n_samples
    dtheta_rad = np.zeros(n)
    dphi_rad = np.zeros(n)
    for trace, out in ((dtheta, dtheta_rad), (dphi, dphi_rad)):
        if trace is None:
            continue
        values = np.asarray(trace.values_deg, dtype=float)
        grid = np.asarray(trace.grid_ns, dtype=float)
        if values.shape != (n,) or not np.allclose(grid, schedule.times_ns(),
                                                   rtol=0.0, atol=1e-9):
            raise ScheduleError("noise trace grid does not match the schedule")
        out[:] = np.radians(values)
    return schedule.with_noise(dtheta_rad, dphi_rad)


@dataclass(frozen=True)
class LoopSegment:
    schedule: PulseSchedule
    sign: int


@dataclass(frozen=True)
class GateSegment:
    angle_rad: float
    axis_phase_rad: float
    pair: tuple[int, int]


@dataclass(frozen=True)
class IdleSegment:
    duration_ns: float
    n_steps: int


@dataclass(frozen=True)
class ProtocolSchedule:
    """Ordered loop/gate/idle segments forming one experiment sequence."""

    segments: tuple
    echo: bool = False

    @property
    def loop_count(self) -> int:
        return sum(1 for seg in self.segments if isinstance(seg, LoopSegment))

    @property
    def duration_ns(self) -> float:
        total = 0.0
        for seg in self.segments:
            if isinstance(seg, LoopSegment):
                total += seg.schedule.tau_ns
            elif isinstance(seg, IdleSegment):
                total += seg.duration_ns
        return total

    def loops(self) -> list[LoopSegment]:
        return [seg for seg in self.segments if isinstance(seg, LoopSegment)]


PI_GATE = math.pi


def compose(loops, echo: bool = False) -> ProtocolSchedule:
    """Concatenate signed loops, optionally as an echo pair of halves.

    ``loops`` is a sequence of ``(PulseSchedule, sign)``; sign -1 traverses
    the loop reversed.  With ``echo=True`` the first half must be positive
    and the second half negative; a pi rotation on the readout pair is
    inserted between the halves, flipping previously accumulated phase.
    """
    loops = list(loops)
    if not loops:
        raise ScheduleError("compose requires at least one loop")
    for _, sign in loops:
        if sign not in (+1, -1):
            raise ScheduleError("loop sign must be +1 or -1")

    def segment(item):
        sched, sign = item
        return LoopSegment(sched if sign > 0 else sched.reversed(), sign)

    if not echo:
        return ProtocolSchedule(tuple(segment(item) for item in loops))
    if len(loops) % 2:
        raise ScheduleError("echo requires an even number of loops")
    half = len(loops) // 2
    if any(sign != +1 for _, sign in loops[:half]) or \
            any(sign != -1 for _, sign in loops[half:]):
        raise ScheduleError("echo requires positive loops then negative loops")
    from .quantum import REFERENCE_PAIR

    segments = [segment(item) for item in loops[:half]]
    segments.append(GateSegment(PI_GATE, 0.0, REFERENCE_PAIR))
    segments.extend(segment(item) for item in loops[half:])
    return ProtocolSchedule(tuple(segments), echo=True)


def schedule_rows(schedule: PulseSchedule, params: LambdaParams):
    """Rows (t, theta, phi, omega_minus, omega_plus) for CSV export."""
    om_minus, om_plus, phi = drives_of(schedule, params)
    times = schedule.times_ns()
    for k in range(schedule.n_samples):
        yield (times[k], schedule.theta[k], phi[k], om_minus[k], om_plus[k])
