"""Ornstein-Uhlenbeck control noise, Monte Carlo ensembles, shot readout.

Noise convention: a trace of stationary amplitude ``s`` and Lorentzian
bandwidth ``dnu`` (MHz) has autocorrelation ``s^2 exp(-2 pi dnu |dt|)``.
Every ensemble member draws its traces from seeds derived from the master
seed by a frozen splitting rule, so results are bit-reproducible for a
fixed configuration regardless of worker count.

Echo convention: within one noisy instance the negative loop replays the
positive loop time-reversed, so the echoed phase fluctuates by twice the
single-loop geometric fluctuation; dividing the deconvolved width by two
therefore recovers the single-loop noise width exactly.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.stats import chi2

from .evolve import propagate
from .geometry import berry_integral, wrap_deg
from .lambda_system import LambdaParams
from .pulses import (GateSegment, LoopSegment, ProtocolSchedule, PulseSchedule,
                     compose, inject_noise)
from .quantum import REFERENCE_PAIR, basis_ket, density_from_pure, measured_xy

TRACE_KIND_THETA = 0
TRACE_KIND_PHI = 1
TRACE_KIND_READOUT = 2


def split_seed(master_seed: int, run_index: int, kind: int) -> int:
    """Frozen 64-bit seed-splitting rule for independent per-run streams."""
    text = f"{master_seed}:{run_index}:{kind}".encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class NoiseConfig:
    """Angle-noise amplitudes (deg), bandwidth (MHz), and ensemble size."""

    s_theta_deg: float = 0.0
    s_phi_deg: float = 0.0
    bandwidth_mhz: float = 3.0
    n_runs: int = 250
    master_seed: int = 1

    def __post_init__(self):
        if self.s_theta_deg < 0 or self.s_phi_deg < 0 or self.bandwidth_mhz < 0:
            raise ValueError("noise amplitudes and bandwidth must be >= 0")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")


@dataclass(frozen=True)
class NoiseTrace:
    """One sampled noise realization (degrees) on a uniform time grid."""

    grid_ns: np.ndarray
    values_deg: np.ndarray
    seed: int


def ou_generate(s_deg: float, bandwidth_mhz: float, grid_ns, seed: int) -> NoiseTrace:
    """Exact-discretization Ornstein-Uhlenbeck trace on a uniform grid.

    The first sample is drawn from the stationary distribution, so the
    trace is stationary from the start; the sample autocorrelation decays
    as ``exp(-2 pi dnu dt)``.
    """
    grid_ns = np.asarray(grid_ns, dtype=float)
    n = grid_ns.shape[0]
    if n < 2:
        raise ValueError("grid must hold at least two samples")
    steps = np.diff(grid_ns)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ValueError("grid must be uniform")
    if s_deg == 0.0:
        return NoiseTrace(grid_ns, np.zeros(n), seed)
    kappa = 2.0 * math.pi * bandwidth_mhz * 1e-3
    a = math.exp(-kappa * dt)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    drive = np.empty(n)
    drive[0] = s_deg * z[0]
    drive[1:] = s_deg * math.sqrt(max(0.0, 1.0 - a * a)) * z[1:]
    values = lfilter([1.0], [1.0, -a], drive)
    return NoiseTrace(grid_ns, values, seed)


def shot_readout(p: float, photons: int, rng) -> float:
    """Finite-photon estimate of a projection probability (binomial / budget)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if photons < 1:
        raise ValueError("photon budget must be >= 1")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    return float(rng.binomial(int(photons), p)) / float(photons)


@dataclass(frozen=True)
class ShotModel:
    """Photon-counting readout model; ``photon_budget=None`` reads out ideally."""

    photon_budget: int | None = 500

    @property
    def ideal(self) -> bool:
        return self.photon_budget is None

    def sample_xy(self, x: float, y: float, rng) -> tuple[float, float]:
        if self.ideal:
            return x, y
        px = 0.5 * (1.0 + min(1.0, max(-1.0, x)))
        py = 0.5 * (1.0 + min(1.0, max(-1.0, y)))
        sx = 2.0 * shot_readout(px, self.photon_budget, rng) - 1.0
        sy = 2.0 * shot_readout(py, self.photon_budget, rng) - 1.0
        # independent quadrature estimates can land outside the unit disk;
        # rescale radially (the measured phase is unaffected)
        radius = math.hypot(sx, sy)
        if radius > 1.0:
            sx, sy = sx / radius, sy / radius
        return sx, sy

    def phase_sigma_deg(self, visibility: float,
                        mean_phase_deg: float | None = None) -> float:
        """Shot broadening of the measured phase (binomial delta method).

        Evaluated at the ensemble's mean phase when given (the binomial
        variance of the two quadratures depends on where on the circle the
        distribution sits); otherwise angle-averaged.
        """
        if self.ideal:
            return 0.0
        if visibility <= 0.0:
            return float("inf")
        if mean_phase_deg is None:
            geometry_factor = 1.0 - 0.25 * visibility ** 2
        else:
            double = math.radians(2.0 * mean_phase_deg)
            geometry_factor = 1.0 - 0.5 * (visibility * math.sin(double)) ** 2
        var_rad = geometry_factor / (self.photon_budget * visibility ** 2)
        return math.degrees(math.sqrt(var_rad))


IDEAL_READOUT = ShotModel(photon_budget=None)


@dataclass(frozen=True)
class BerryRun:
    """Per-instance ensemble record."""

    run_index: int
    seed_theta: int
    seed_phi: int
    x: float
    y: float
    gamma_deg: float
    visibility: float


@dataclass(frozen=True)
class DistributionStats:
    """Width analysis of an ensemble of measured phases.

    ``sigma_raw_deg`` is the shot-broadened width; ``sigma_intrinsic_deg``
    has the shot contribution removed in quadrature and, for echo data,
    is divided by two to refer a single loop.  ``shot_limited`` flags
    ensembles whose raw width fell below the shot prediction (the
    intrinsic estimate is then clipped to zero, not an error).
    """

    n_runs: int
    mean_gamma_deg: float
    mean_gamma_ci95_deg: float
    sigma_raw_deg: float
    sigma_raw_ci95_deg: tuple[float, float]
    sigma_shot_deg: float
    sigma_intrinsic_deg: float
    sigma_intrinsic_ci95_deg: tuple[float, float]
    mean_visibility: float
    shot_limited: bool


def circular_mean_deg(angles_deg) -> float:
    angles = np.radians(np.asarray(angles_deg, dtype=float))
    return math.degrees(math.atan2(np.mean(np.sin(angles)), np.mean(np.cos(angles))))


def ensemble_stats(gammas_deg, visibilities, sigma_shot_deg: float,
                   echo: bool) -> DistributionStats:
    """Circular width statistics with quadrature shot deconvolution."""
    gammas = np.asarray(gammas_deg, dtype=float)
    n = gammas.shape[0]
    mean = circular_mean_deg(gammas)
    residuals = np.array([wrap_deg(g - mean) for g in gammas])
    sigma_raw = float(np.std(residuals, ddof=1)) if n > 1 else 0.0
    dof = max(n - 1, 1)
    lo = sigma_raw * math.sqrt(dof / chi2.ppf(0.975, dof))
    hi = sigma_raw * math.sqrt(dof / chi2.ppf(0.025, dof))
    divisor = 2.0 if echo else 1.0

    def deconvolve(sigma):
        return math.sqrt(max(sigma ** 2 - sigma_shot_deg ** 2, 0.0)) / divisor

    return DistributionStats(
        n_runs=n,
        mean_gamma_deg=mean,
        mean_gamma_ci95_deg=1.96 * sigma_raw / math.sqrt(n),
        sigma_raw_deg=sigma_raw,
        sigma_raw_ci95_deg=(lo, hi),
        sigma_shot_deg=sigma_shot_deg,
        sigma_intrinsic_deg=deconvolve(sigma_raw),
        sigma_intrinsic_ci95_deg=(deconvolve(lo), deconvolve(hi)),
        mean_visibility=float(np.mean(visibilities)),
        shot_limited=sigma_raw < sigma_shot_deg,
    )


def estimate_intrinsic_sigma(runs, readout: ShotModel,
                             echo: bool = True) -> DistributionStats:
    """Intrinsic phase-noise width from ensemble records.

    The shot contribution is evaluated from the readout model at the
    measured mean visibility and removed in quadrature; echo ensembles are
    divided by two to refer the width to a single loop.
    """
    gammas = [r.gamma_deg for r in runs]
    vis = [r.visibility for r in runs]
    sigma_shot = 0.0
    if not readout.ideal:
        sigma_shot = readout.phase_sigma_deg(float(np.mean(vis)),
                                             circular_mean_deg(gammas))
    return ensemble_stats(gammas, vis, sigma_shot, echo)


@dataclass(frozen=True)
class MonteCarloResult:
    runs: tuple[BerryRun, ...]
    stats: DistributionStats
    intended_gamma_deg: float


def _echo_protocol_ideal(loop: PulseSchedule) -> ProtocolSchedule:
    return compose([(loop, +1), (loop, -1)], echo=True)


def _measurement_protocol(loop: PulseSchedule, echo: bool) -> ProtocolSchedule:
    """Prep, loop(s), and echo gate; readout happens on the final state."""
    prep = GateSegment(math.pi / 2.0, math.pi / 2.0, REFERENCE_PAIR)
    body = _echo_protocol_ideal(loop) if echo else ProtocolSchedule(
        (LoopSegment(loop, +1),))
    return ProtocolSchedule((prep,) + body.segments, echo=echo)


def monte_carlo_berry(loop: PulseSchedule, params: LambdaParams,
                      noise: NoiseConfig, mode: str = "analytic-path",
                      echo: bool = True, readout: ShotModel = IDEAL_READOUT,
                      threads: int = 1, backend: str | None = None) -> MonteCarloResult:
    """Ensemble of noisy loop traversals with fresh noise per instance.

    ``mode='analytic-path'`` evaluates the geometric quadrature on the
    noisy path (perfect adiabatic following); ``mode='full-lindblad'``
    propagates the master equation through the noisy protocol.  With
    ``echo=True`` the instance's negative loop is the time-reversal of its
    noisy positive loop and the recorded phase is the echoed total.
    """
    if mode not in ("analytic-path", "full-lindblad"):
        raise ValueError(f"unknown mode {mode!r}")
    grid = loop.times_ns()
    ideal_gamma = berry_integral(loop)
    intended = wrap_deg(-2.0 * ideal_gamma) if echo else wrap_deg(ideal_gamma)
    rho0 = density_from_pure(basis_ket(0)) if mode == "full-lindblad" else None

    def one_run(index: int) -> BerryRun:
        seed_theta = split_seed(noise.master_seed, index, TRACE_KIND_THETA)
        seed_phi = split_seed(noise.master_seed, index, TRACE_KIND_PHI)
        dtheta = ou_generate(noise.s_theta_deg, noise.bandwidth_mhz, grid, seed_theta)
        dphi = ou_generate(noise.s_phi_deg, noise.bandwidth_mhz, grid, seed_phi)
        noisy = inject_noise(loop, dtheta, dphi)
        if mode == "analytic-path":
            gamma = berry_integral(noisy)
            xi = -2.0 * gamma if echo else gamma
            x = math.cos(math.radians(xi))
            y = math.sin(math.radians(xi))
        else:
            segments = [GateSegment(math.pi / 2.0, math.pi / 2.0, REFERENCE_PAIR),
                        LoopSegment(noisy, +1)]
            if echo:
                segments.append(GateSegment(math.pi, 0.0, REFERENCE_PAIR))
                segments.append(LoopSegment(noisy.reversed(), -1))
            traj = propagate(rho0, ProtocolSchedule(tuple(segments), echo=echo),
                             params, backend=backend)
            x, y = measured_xy(traj.final_rho)
        if not readout.ideal:
            rng = np.random.default_rng(
                split_seed(noise.master_seed, index, TRACE_KIND_READOUT))
            x, y = readout.sample_xy(x, y, rng)
        return BerryRun(index, seed_theta, seed_phi, x, y,
                        math.degrees(math.atan2(y, x)), math.hypot(x, y))

    indices = range(noise.n_runs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = tuple(pool.map(one_run, indices))
    else:
        runs = tuple(one_run(i) for i in indices)
    stats = estimate_intrinsic_sigma(runs, readout, echo=echo)
    return MonteCarloResult(runs=runs, stats=stats, intended_gamma_deg=intended)
