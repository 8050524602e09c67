"""Named experiments: trajectory tomography, PL comparison, Berry sweeps,
Stark sweeps, visibility maps, and noise-robustness campaigns.

Every experiment is a pure function of its configuration (including the
seed): reruns emit byte-identical CSV bodies regardless of thread count.
Sweep points run as independent tasks; the report writer orders output by
grid index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import ExperimentConfig
from .evolve import Trajectory, propagate, propagate_drives
from .fitting import FitError, PhaseFit, fit_phase_model
from .geometry import adiabaticity_metric, berry_integral, eq2_sigma, stark_slope, wrap_deg
from .lambda_system import LambdaParams
from .noise import (IDEAL_READOUT, TRACE_KIND_READOUT, MonteCarloResult,
                    NoiseConfig, ShotModel, monte_carlo_berry, split_seed)
from .pulses import (GateSegment, ProtocolSchedule, PulseSchedule, compose,
                     schedule_rows, tangerine)
from .quantum import (IDX_MINUS, REFERENCE_PAIR, basis_ket, density_from_pure,
                      measured_xy)
from .reporting import write_csv, write_json

#: default sweep values applied by the CLI when no config overrides them
PRESETS: dict[str, dict[str, str]] = {
    "trajectory": {},
    "pl-compare": {},
    "berry-sweep": {
        "sweep.wedge_deg": "0,30,60,90,120,150,180,210,240,270,300,330",
    },
    "stark-sweep": {
        "schedule.wedge_deg": "0",
        "sweep.two_photon_mhz": "-0.15,-0.1,-0.05,0,0.05,0.1,0.15",
        "sweep.tau_ns": "600,1200,1800,2400",
    },
    "visibility-map": {
        "schedule.echo": "true",
        "sweep.tau_ns": "150,250,400,650,1000,1600,2500,4000,6300,10000",
        "sweep.rabi_mhz": "20,31,64",
        # evenly spaced in the echoed phase 2*wedge, so a constant
        # (non-adiabatic) projection cannot alias into the fitted amplitude
        "sweep.wedge_deg": "30,75,120,165",
    },
    "noise-robustness": {
        "schedule.echo": "true",
        "schedule.shape": "square-dwell",
        "schedule.dwell_fraction": "0",
        "noise.s_phi_deg": "8",
        "sweep.s_phi_deg": "0,4,8,14,22",
        "sweep.s_theta_deg": "0,4,8,14,22",
        "sweep.tau_ns": "600,1200,2400,4800,9600",
        "sweep.intended_gamma_deg": "90,157,225,333",
    },
    "schedule-dump": {},
}

#: noise amplitude (deg) used by the traversal-time scaling section
TAU_SCALING_S_PHI_DEG = 14.0

PREP_GATE = GateSegment(math.pi / 2.0, math.pi / 2.0, REFERENCE_PAIR)


@dataclass
class RunDiagnostics:
    """Worst-case numerical-invariant record across an experiment."""

    max_trace_error: float = 0.0
    min_eigenvalue: float = 1.0

    def absorb(self, traj: Trajectory) -> Trajectory:
        self.max_trace_error = max(self.max_trace_error, traj.trace_error_max)
        self.min_eigenvalue = min(self.min_eigenvalue, traj.min_eigenvalue)
        return traj

    def as_dict(self) -> dict:
        return {"max_trace_error": self.max_trace_error,
                "min_eigenvalue": self.min_eigenvalue}


#: integration step is capped so the fast coherences stay well resolved;
#: keeps truncation comfortably inside the positivity tolerance even on
#: long multi-loop dissipationless protocols
MAX_STEP_NS = 0.5


def _loop_for(cfg: ExperimentConfig, wedge_deg: float | None = None,
              tau_ns: float | None = None) -> PulseSchedule:
    sched = cfg.schedule
    tau = tau_ns if tau_ns is not None else sched.tau_ns
    n_steps = max(sched.n_steps, 2 * math.ceil(tau / (2.0 * MAX_STEP_NS)))
    return tangerine(
        tau,
        wedge_deg if wedge_deg is not None else sched.wedge_deg,
        shape=sched.shape,
        dwell_fraction=sched.dwell_fraction,
        n_steps=n_steps,
    )


def measurement_protocol(loop: PulseSchedule, signs, echo: bool) -> ProtocolSchedule:
    """Prep on the readout pair, then the signed loops (echo gate if asked)."""
    body = compose([(loop, s) for s in signs], echo=echo)
    return ProtocolSchedule((PREP_GATE,) + body.segments, echo=echo)


def _readout_model(cfg: ExperimentConfig) -> ShotModel:
    if cfg.mode == "sampled":
        return ShotModel(photon_budget=cfg.noise.photon_budget)
    return IDEAL_READOUT


def _map_indexed(task, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(task, items))
    return [task(item) for item in items]


def _config_echo(cfg: ExperimentConfig) -> dict:
    payload = asdict(cfg)
    payload["params"] = asdict(cfg.params)
    return payload


# ---------------------------------------------------------------------------
# trajectory (state-transport tomography)
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryReport:
    trajectory: Trajectory
    loop: PulseSchedule
    final_bloch_magnitude: float
    equator_times_ns: tuple[float, float]
    dip_magnitudes: tuple[float, float]
    pole_revival_magnitude: float
    inbound_longitudes: list[dict] = field(default_factory=list)
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)


def _equator_times(loop: PulseSchedule) -> tuple[float, float]:
    """Times where the commanded polar angle crosses the equator."""
    times = loop.times_ns()
    half = len(times) // 2
    out = int(np.argmin(np.abs(loop.theta[:half] - math.pi / 2)))
    inb = half + int(np.argmin(np.abs(loop.theta[half:] - math.pi / 2)))
    return float(times[out]), float(times[inb])


def run_trajectory(cfg: ExperimentConfig, out_dir=None) -> TrajectoryReport:
    params = cfg.effective_params()
    diag = RunDiagnostics()
    loop = _loop_for(cfg)
    rho0 = density_from_pure(basis_ket(IDX_MINUS))
    traj = diag.absorb(propagate(rho0, loop, params))

    t_out, t_in = _equator_times(loop)
    mag = traj.bloch_magnitude
    times = traj.times_ns

    def mag_near(t_ns: float) -> float:
        return float(mag[np.argmin(np.abs(times - t_ns))])

    pole_revival = mag_near(0.5 * loop.tau_ns)
    report = TrajectoryReport(
        trajectory=traj,
        loop=loop,
        final_bloch_magnitude=float(mag[-1]),
        equator_times_ns=(t_out, t_in),
        dip_magnitudes=(mag_near(t_out), mag_near(t_in)),
        pole_revival_magnitude=pole_revival,
        diagnostics=diag,
    )

    for wedge in cfg.sweep.get("wedge_deg", []):
        sweep_loop = _loop_for(cfg, wedge_deg=wedge)
        sweep_traj = diag.absorb(propagate(rho0, sweep_loop, params))
        k = int(np.argmin(np.abs(sweep_traj.times_ns - t_in)))
        longitude = math.degrees(math.atan2(sweep_traj.bloch[k, 1],
                                            sweep_traj.bloch[k, 0]))
        report.inbound_longitudes.append(
            {"wedge_deg": wedge, "longitude_deg": longitude})

    if out_dir is not None:
        rows = zip(times, *traj.populations.T, *traj.bloch.T,
                   traj.bloch_magnitude, traj.pl_rate)
        write_csv(
            f"{out_dir}/trajectory.csv",
            ["t_ns", "p_0g", "p_m1g", "p_p1g", "p_A2",
             "bloch_x", "bloch_y", "bloch_z", "bloch_mag", "pl_rate_per_ns"],
            rows,
            header_comments=[
                "state transport through one loop; populations dimensionless",
                "bloch components on the -1g/+1g pair; pl_rate in photons/ns",
            ],
        )
        if report.inbound_longitudes:
            write_csv(
                f"{out_dir}/trajectory_longitudes.csv",
                ["wedge_deg", "longitude_deg"],
                [(d["wedge_deg"], d["longitude_deg"])
                 for d in report.inbound_longitudes],
                header_comments=["inbound-path longitude at the equator, per wedge"],
            )
        write_json(f"{out_dir}/summary.json", {
            "experiment": "trajectory",
            "final_bloch_magnitude": report.final_bloch_magnitude,
            "equator_times_ns": report.equator_times_ns,
            "dip_magnitudes": report.dip_magnitudes,
            "pole_revival_magnitude": report.pole_revival_magnitude,
            "inbound_longitudes": report.inbound_longitudes,
            "diagnostics": diag.as_dict(),
            "config": _config_echo(cfg),
        })
    return report


# ---------------------------------------------------------------------------
# pl-compare (adiabaticity reference against optical pumping)
# ---------------------------------------------------------------------------

@dataclass
class PLComparisonReport:
    times_ns: np.ndarray
    pl_stirap: np.ndarray
    pl_cpt: np.ndarray
    peak_cpt_rate: float
    mean_stirap_rate: float
    ratio: float
    stirap_peak_times_ns: tuple[float, float]
    equator_times_ns: tuple[float, float]
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)


def run_pl_comparison(cfg: ExperimentConfig, out_dir=None) -> PLComparisonReport:
    params = cfg.effective_params()
    diag = RunDiagnostics()
    loop = _loop_for(cfg)
    rho0 = density_from_pure(basis_ket(IDX_MINUS))
    traj = diag.absorb(propagate(rho0, loop, params))

    # optical-pumping reference: both fields at resonance, one at a time,
    # pumping the populated state out through the excited level
    n_samples = loop.n_samples
    mid = n_samples // 2
    om_minus = np.zeros(n_samples)
    om_plus = np.zeros(n_samples)
    om_minus[:mid] = params.rabi_mhz
    om_plus[mid:] = params.rabi_ratio * params.rabi_mhz
    cpt_params = params.replace(detuning_mhz=0.0, two_photon_mhz=0.0)
    rho_cpt = density_from_pure(basis_ket(IDX_MINUS))
    out = propagate_drives(rho_cpt, cpt_params, om_minus, om_plus,
                           np.zeros(n_samples), loop.dt_ns)
    pl_cpt = cpt_params.total_decay_rate_per_ns * out["pops"][:, 3]

    t_out, t_in = _equator_times(loop)
    times = traj.times_ns
    half = len(times) // 2
    peak_out = float(times[np.argmax(traj.pl_rate[:half])])
    peak_in = float(times[half + np.argmax(traj.pl_rate[half:])])

    mean_stirap = float(np.mean(traj.pl_rate))
    peak_cpt = float(np.max(pl_cpt))
    report = PLComparisonReport(
        times_ns=times,
        pl_stirap=traj.pl_rate,
        pl_cpt=pl_cpt,
        peak_cpt_rate=peak_cpt,
        mean_stirap_rate=mean_stirap,
        ratio=peak_cpt / mean_stirap if mean_stirap > 0 else math.inf,
        stirap_peak_times_ns=(peak_out, peak_in),
        equator_times_ns=(t_out, t_in),
        diagnostics=diag,
    )
    if out_dir is not None:
        write_csv(
            f"{out_dir}/pl_compare.csv",
            ["t_ns", "pl_stirap_per_ns", "pl_cpt_per_ns"],
            zip(times, traj.pl_rate, pl_cpt),
            header_comments=["photon emission rate during the loop vs the "
                             "optical-pumping reference (photons/ns)"],
        )
        write_json(f"{out_dir}/summary.json", {
            "experiment": "pl-compare",
            "peak_cpt_rate_per_ns": peak_cpt,
            "mean_stirap_rate_per_ns": mean_stirap,
            "ratio": report.ratio,
            "stirap_peak_times_ns": report.stirap_peak_times_ns,
            "equator_times_ns": report.equator_times_ns,
            "diagnostics": diag.as_dict(),
            "config": _config_echo(cfg),
        })
    return report


# ---------------------------------------------------------------------------
# berry-sweep (phase accumulation vs wedge angle, multi-loop, echo)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BerryPoint:
    wedge_deg: float
    sign: int
    n_loops: int
    x: float
    y: float
    xi_deg: float
    ideal_xi_deg: float


@dataclass
class BerrySweepReport:
    points: list[BerryPoint]
    fit: PhaseFit | None
    echo: bool
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)


def _measure_protocol_xy(protocol: ProtocolSchedule, params: LambdaParams,
                         diag: RunDiagnostics) -> tuple[float, float]:
    rho0 = density_from_pure(basis_ket(0))
    traj = diag.absorb(propagate(rho0, protocol, params))
    return measured_xy(traj.final_rho)


def run_berry_sweep(cfg: ExperimentConfig, out_dir=None) -> BerrySweepReport:
    params = cfg.effective_params()
    diag = RunDiagnostics()
    readout = _readout_model(cfg)
    echo = cfg.schedule.echo
    wedges = [float(w) for w in cfg.sweep.get("wedge_deg", [cfg.schedule.wedge_deg])]
    base_signs = cfg.schedule.signs()

    tasks = []  # (wedge, branch sign)
    for wedge in wedges:
        if echo:
            tasks.append((wedge, +1))
        else:
            tasks.append((wedge, +1))
            tasks.append((wedge, -1))

    def run_point(indexed):
        index, (wedge, branch) = indexed
        loop = _loop_for(cfg, wedge_deg=wedge)
        signs = base_signs if branch > 0 else [-s for s in base_signs]
        protocol = measurement_protocol(loop, signs, echo)
        x, y = _measure_protocol_xy(protocol, params, diag)
        if not readout.ideal:
            rng = np.random.default_rng(
                split_seed(cfg.seed, index, TRACE_KIND_READOUT))
            x, y = readout.sample_xy(x, y, rng)
        if echo:
            # second half minus first half, dynamic phase cancelled:
            # ideal echoed total is twice the positive-loop wedge sum
            ideal = 2.0 * wedge * sum(1 for s in signs if s > 0)
        else:
            ideal = berry_integral(compose([(loop, s) for s in signs]))
        return BerryPoint(wedge, branch, len(signs), x, y,
                          math.degrees(math.atan2(y, x)), wrap_deg(ideal))

    points = _map_indexed(run_point, list(enumerate(tasks)), cfg.threads)

    fit = None
    single_loop = len(base_signs) == 1
    if single_loop:
        if echo:
            # echoed points measure eta + 2*wedge: enter the fit as
            # (2*wedge, sign=-1) so slope -1 reproduces the +2*wedge phase
            fit_rows = [(2.0 * p.wedge_deg, -1, p.x, p.y) for p in points]
        else:
            fit_rows = [(p.wedge_deg, p.sign, p.x, p.y) for p in points]
        distinct = len({row[0] for row in fit_rows})
        try:
            fit = fit_phase_model(fit_rows, fix_slope=None if distinct >= 3 else -1.0)
        except FitError:
            fit = None

    report = BerrySweepReport(points=points, fit=fit, echo=echo, diagnostics=diag)
    if out_dir is not None:
        write_csv(
            f"{out_dir}/berry_sweep.csv",
            ["wedge_deg", "sign", "n_loops", "x", "y", "xi_deg", "ideal_xi_deg"],
            [(p.wedge_deg, p.sign, p.n_loops, p.x, p.y, p.xi_deg, p.ideal_xi_deg)
             for p in points],
            header_comments=[
                "tomographic projections of the accumulated phase per wedge angle",
                "xi_deg = atan2(y, x), wrapped to (-180, 180]",
            ],
        )
        payload = {
            "experiment": "berry-sweep",
            "echo": echo,
            "n_points": len(points),
            "diagnostics": diag.as_dict(),
            "config": _config_echo(cfg),
        }
        if fit is not None:
            payload["fit"] = asdict(fit)
        write_json(f"{out_dir}/summary.json", payload)
    return report


# ---------------------------------------------------------------------------
# stark-sweep (dynamic-phase sensitivity to two-photon detuning)
# ---------------------------------------------------------------------------

@dataclass
class StarkSweepReport:
    rows: list[dict]              # per (rabi, delta, tau): measured eta
    shifts: list[dict]            # per (rabi, delta): fitted shift (MHz)
    slopes: dict[float, float]    # rabi -> d(shift)/d(delta)
    predicted_slope: float
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)


def run_stark_sweep(cfg: ExperimentConfig, out_dir=None) -> StarkSweepReport:
    base = cfg.effective_params()
    diag = RunDiagnostics()
    deltas = [float(d) for d in cfg.sweep.get(
        "two_photon_mhz", [-0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15])]
    taus = [float(t) for t in cfg.sweep.get("tau_ns", [600, 1200, 1800, 2400])]
    rabis = [float(r) for r in cfg.sweep.get("rabi_mhz", [base.rabi_mhz])]
    if len(taus) < 2:
        raise FitError("stark sweep needs at least two traversal times")

    grid = [(rabi, delta, tau) for rabi in rabis for delta in deltas for tau in taus]

    def run_point(item):
        rabi, delta, tau = item
        loop = _loop_for(cfg, wedge_deg=cfg.schedule.wedge_deg, tau_ns=tau)
        params = base.replace(rabi_mhz=rabi, two_photon_mhz=delta)
        protocol = measurement_protocol(loop, [+1], echo=False)
        x, y = _measure_protocol_xy(protocol, params, diag)
        return {"rabi_mhz": rabi, "two_photon_mhz": delta, "tau_ns": tau,
                "eta_deg": math.degrees(math.atan2(y, x))}

    rows = _map_indexed(run_point, grid, cfg.threads)

    shifts: list[dict] = []
    slopes: dict[float, float] = {}
    for rabi in rabis:
        per_delta = []
        for delta in deltas:
            etas = [r["eta_deg"] for r in rows
                    if r["rabi_mhz"] == rabi and r["two_photon_mhz"] == delta]
            # measured phase grows linearly with traversal time; the shift
            # in cyclic MHz is (1/360 deg) * d(eta)/d(tau) * 1e3
            coeff = np.polyfit(taus, etas, 1)[0]
            shift_mhz = coeff / 360.0 * 1e3
            per_delta.append(shift_mhz)
            shifts.append({"rabi_mhz": rabi, "two_photon_mhz": delta,
                           "stark_shift_mhz": shift_mhz})
        slopes[rabi] = float(np.polyfit(deltas, per_delta, 1)[0])

    predicted = stark_slope(_loop_for(cfg)).slope
    report = StarkSweepReport(rows=rows, shifts=shifts, slopes=slopes,
                              predicted_slope=predicted, diagnostics=diag)
    if out_dir is not None:
        write_csv(
            f"{out_dir}/stark_sweep.csv",
            ["rabi_mhz", "two_photon_mhz", "tau_ns", "eta_deg"],
            [(r["rabi_mhz"], r["two_photon_mhz"], r["tau_ns"], r["eta_deg"])
             for r in rows],
            header_comments=["measured dynamic phase per drive strength, "
                             "two-photon detuning (MHz), and traversal time"],
        )
        write_csv(
            f"{out_dir}/stark_shifts.csv",
            ["rabi_mhz", "two_photon_mhz", "stark_shift_mhz"],
            [(s["rabi_mhz"], s["two_photon_mhz"], s["stark_shift_mhz"])
             for s in shifts],
            header_comments=["fitted dark-state energy shift (cyclic MHz)"],
        )
        write_json(f"{out_dir}/summary.json", {
            "experiment": "stark-sweep",
            "slopes": {f"{rabi:g}": slope for rabi, slope in slopes.items()},
            "predicted_slope": predicted,
            "diagnostics": diag.as_dict(),
            "config": _config_echo(cfg),
        })
    return report


# ---------------------------------------------------------------------------
# visibility-map (echoed visibility vs traversal time and drive strength)
# ---------------------------------------------------------------------------

@dataclass
class VisibilityMapReport:
    rows: list[dict]                      # per (rabi, tau): visibility, eta
    thresholds_ns: dict[float, float]     # rabi -> half-max turn-on time
    rise_then_decay: dict[float, bool]
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)


def _half_max_crossing(taus, visibilities) -> float:
    v = np.asarray(visibilities)
    t = np.asarray(taus)
    level = 0.5 * float(np.max(v))
    for k in range(len(v)):
        if v[k] >= level:
            if k == 0:
                return float(t[0])
            frac = (level - v[k - 1]) / (v[k] - v[k - 1])
            return float(t[k - 1] + frac * (t[k] - t[k - 1]))
    return float(t[-1])


def run_visibility_map(cfg: ExperimentConfig, out_dir=None) -> VisibilityMapReport:
    params = cfg.effective_params()
    diag = RunDiagnostics()
    taus = [float(t) for t in cfg.sweep.get(
        "tau_ns", [150, 250, 400, 650, 1000, 1600, 2500, 4000, 6300, 10000])]
    rabis = [float(r) for r in cfg.sweep.get("rabi_mhz", [20, 31, 64])]
    wedges = [float(w) for w in cfg.sweep.get("wedge_deg", [30, 75, 120, 165])]

    grid = [(rabi, tau) for rabi in rabis for tau in taus]

    def run_point(item):
        rabi, tau = item
        run_params = params.replace(rabi_mhz=rabi)
        fit_rows = []
        for wedge in wedges:
            loop = _loop_for(cfg, wedge_deg=wedge, tau_ns=tau)
            protocol = measurement_protocol(loop, [+1, -1], echo=True)
            x, y = _measure_protocol_xy(protocol, run_params, diag)
            fit_rows.append((2.0 * wedge, -1, x, y))
        fit = fit_phase_model(fit_rows, fix_slope=-1.0)
        return {"rabi_mhz": rabi, "tau_ns": tau,
                "visibility": fit.amplitude,
                "eta_deg": fit.eta_deg if fit.identifiable else float("nan")}

    rows = _map_indexed(run_point, grid, cfg.threads)

    thresholds: dict[float, float] = {}
    rise_decay: dict[float, bool] = {}
    for rabi in rabis:
        series = [r for r in rows if r["rabi_mhz"] == rabi]
        vis = [r["visibility"] for r in series]
        thresholds[rabi] = _half_max_crossing(taus, vis)
        peak = int(np.argmax(vis))
        rise_decay[rabi] = bool(peak > 0 and vis[-1] < vis[peak])

    report = VisibilityMapReport(rows=rows, thresholds_ns=thresholds,
                                 rise_then_decay=rise_decay, diagnostics=diag)
    if out_dir is not None:
        write_csv(
            f"{out_dir}/visibility_map.csv",
            ["rabi_mhz", "tau_ns", "visibility", "eta_deg"],
            [(r["rabi_mhz"], r["tau_ns"], r["visibility"], r["eta_deg"])
             for r in rows],
            header_comments=["echoed phase visibility per drive strength "
                             "and traversal time"],
        )
        write_json(f"{out_dir}/summary.json", {
            "experiment": "visibility-map",
            "thresholds_ns": {f"{r:g}": t for r, t in thresholds.items()},
            "rise_then_decay": {f"{r:g}": flag for r, flag in rise_decay.items()},
            "diagnostics": diag.as_dict(),
            "config": _config_echo(cfg),
        })
    return report


# ---------------------------------------------------------------------------
# noise-robustness (ensembles over noisy paths)
# ---------------------------------------------------------------------------

@dataclass
class NoiseRobustnessReport:
    amplitude_rows: list[dict]
    phase_independence_rows: list[dict]
    tau_rows: list[dict]
    phi_noise_slope: float
    tau_exponent: float
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)


def run_noise_robustness(cfg: ExperimentConfig, out_dir=None) -> NoiseRobustnessReport:
    params = cfg.effective_params()
    readout = _readout_model(cfg)
    bandwidth = cfg.noise.bandwidth_mhz
    n_runs = cfg.noise.n_runs

    def ensemble(wedge, tau, s_theta, s_phi, seed_salt) -> MonteCarloResult:
        loop = _loop_for(cfg, wedge_deg=wedge, tau_ns=tau)
        noise = NoiseConfig(s_theta_deg=s_theta, s_phi_deg=s_phi,
                            bandwidth_mhz=bandwidth, n_runs=n_runs,
                            master_seed=split_seed(cfg.seed, seed_salt, 99))
        return monte_carlo_berry(loop, params, noise, mode="analytic-path",
                                 echo=True, readout=readout, threads=cfg.threads)

    wedge0 = cfg.schedule.wedge_deg
    tau0 = cfg.schedule.tau_ns

    amplitude_rows: list[dict] = []
    salt = 0
    for kind, key in (("phi", "s_phi_deg"), ("theta", "s_theta_deg")):
        for s in cfg.sweep.get(key, [0.0, 4.0, 8.0, 14.0, 22.0]):
            s_theta, s_phi = (s, 0.0) if kind == "theta" else (0.0, s)
            result = ensemble(wedge0, tau0, s_theta, s_phi, salt)
            salt += 1
            amplitude_rows.append({
                "kind": kind, "s_deg": float(s),
                "sigma_raw_deg": result.stats.sigma_raw_deg,
                "sigma_shot_deg": result.stats.sigma_shot_deg,
                "sigma_intrinsic_deg": result.stats.sigma_intrinsic_deg,
                "sigma_ci_lo_deg": result.stats.sigma_intrinsic_ci95_deg[0],
                "sigma_ci_hi_deg": result.stats.sigma_intrinsic_ci95_deg[1],
                "mean_visibility": result.stats.mean_visibility,
                "predicted_sigma_deg":
                    eq2_sigma(s, bandwidth, tau0) if kind == "phi" else 0.0,
            })

    phase_rows: list[dict] = []
    for gamma in cfg.sweep.get("intended_gamma_deg", [90.0, 157.0, 225.0, 333.0]):
        result = ensemble(0.5 * float(gamma), tau0, 0.0, cfg.noise.s_phi_deg, salt)
        salt += 1
        phase_rows.append({
            "intended_gamma_deg": float(gamma),
            "mean_gamma_deg": result.stats.mean_gamma_deg,
            "sigma_intrinsic_deg": result.stats.sigma_intrinsic_deg,
            "sigma_ci_lo_deg": result.stats.sigma_intrinsic_ci95_deg[0],
            "sigma_ci_hi_deg": result.stats.sigma_intrinsic_ci95_deg[1],
        })

    tau_rows: list[dict] = []
    for tau in cfg.sweep.get("tau_ns", [600.0, 1200.0, 2400.0, 4800.0, 9600.0]):
        result = ensemble(wedge0, float(tau), 0.0, TAU_SCALING_S_PHI_DEG, salt)
        salt += 1
        tau_rows.append({
            "tau_ns": float(tau),
            "sigma_intrinsic_deg": result.stats.sigma_intrinsic_deg,
            "predicted_sigma_deg": eq2_sigma(TAU_SCALING_S_PHI_DEG, bandwidth, tau),
        })

    phi_rows = [r for r in amplitude_rows if r["kind"] == "phi" and r["s_deg"] > 0]
    slope = float(np.polyfit([r["s_deg"] for r in phi_rows],
                             [r["sigma_intrinsic_deg"] for r in phi_rows], 1)[0]) \
        if len(phi_rows) >= 2 else float("nan")
    usable = [(r["tau_ns"], r["sigma_intrinsic_deg"]) for r in tau_rows
              if r["sigma_intrinsic_deg"] > 0]
    exponent = float(np.polyfit(np.log([t for t, _ in usable]),
                                np.log([s for _, s in usable]), 1)[0]) \
        if len(usable) >= 2 else float("nan")

    report = NoiseRobustnessReport(
        amplitude_rows=amplitude_rows,
        phase_independence_rows=phase_rows,
        tau_rows=tau_rows,
        phi_noise_slope=slope,
        tau_exponent=exponent,
    )
    if out_dir is not None:
        write_csv(
            f"{out_dir}/noise_sweep.csv",
            ["kind", "s_deg", "sigma_raw_deg", "sigma_shot_deg",
             "sigma_intrinsic_deg", "sigma_ci_lo_deg", "sigma_ci_hi_deg",
             "mean_visibility", "predicted_sigma_deg"],
            [tuple(r[c] for c in ("kind", "s_deg", "sigma_raw_deg",
                                  "sigma_shot_deg", "sigma_intrinsic_deg",
                                  "sigma_ci_lo_deg", "sigma_ci_hi_deg",
                                  "mean_visibility", "predicted_sigma_deg"))
             for r in amplitude_rows],
            header_comments=["intrinsic phase-noise width vs injected noise "
                             "amplitude (degrees)"],
        )
        write_csv(
            f"{out_dir}/noise_phase_independence.csv",
            ["intended_gamma_deg", "mean_gamma_deg", "sigma_intrinsic_deg",
             "sigma_ci_lo_deg", "sigma_ci_hi_deg"],
            [tuple(r[c] for c in ("intended_gamma_deg", "mean_gamma_deg",
                                  "sigma_intrinsic_deg", "sigma_ci_lo_deg",
                                  "sigma_ci_hi_deg")) for r in phase_rows],
            header_comments=["noise width vs intended echoed phase"],
        )
        write_csv(
            f"{out_dir}/noise_tau_scaling.csv",
            ["tau_ns", "sigma_intrinsic_deg", "predicted_sigma_deg"],
            [tuple(r[c] for c in ("tau_ns", "sigma_intrinsic_deg",
                                  "predicted_sigma_deg")) for r in tau_rows],
            header_comments=[f"width vs traversal time at s_phi = "
                             f"{TAU_SCALING_S_PHI_DEG:g} deg"],
        )
        write_json(f"{out_dir}/summary.json", {
            "experiment": "noise-robustness",
            "phi_noise_slope": slope,
            "tau_exponent": exponent,
            "config": _config_echo(cfg),
        })
    return report


# ---------------------------------------------------------------------------
# schedule-dump
# ---------------------------------------------------------------------------

def run_schedule_dump(cfg: ExperimentConfig, out_dir=None) -> dict:
    params = cfg.effective_params()
    loop = _loop_for(cfg)
    times, metric = adiabaticity_metric(loop, params)
    summary = {
        "experiment": "schedule-dump",
        "berry_deg": berry_integral(loop),
        "stark_slope": stark_slope(loop).slope,
        "max_adiabaticity_ratio": float(np.max(metric)),
        "config": _config_echo(cfg),
    }
    if out_dir is not None:
        write_csv(
            f"{out_dir}/schedule.csv",
            ["t_ns", "theta_rad", "phi_rad", "omega_minus_mhz", "omega_plus_mhz"],
            schedule_rows(loop, params),
            header_comments=["control path samples; amplitudes cyclic MHz"],
        )
        write_json(f"{out_dir}/summary.json", summary)
    return summary


RUNNERS = {
    "trajectory": run_trajectory,
    "pl-compare": run_pl_comparison,
    "berry-sweep": run_berry_sweep,
    "stark-sweep": run_stark_sweep,
    "visibility-map": run_visibility_map,
    "noise-robustness": run_noise_robustness,
    "schedule-dump": run_schedule_dump,
}
