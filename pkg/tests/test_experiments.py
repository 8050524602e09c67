import math

import numpy as np
import pytest

from stirapberry.config import config_from_mapping
from stirapberry.experiments import (run_berry_sweep, run_noise_robustness,
                                     run_pl_comparison, run_stark_sweep,
                                     run_trajectory, run_visibility_map)


def make_cfg(experiment, **entries):
    mapping = {"experiment": experiment}
    mapping.update(entries)
    return config_from_mapping(mapping)


class TestTrajectoryExperiment:
    def test_dissipationless_slow_loop_keeps_magnitude(self):
        cfg = make_cfg("trajectory", dissipation="off",
                       **{"schedule.tau_ns": "5000",
                          "lambda.rabi_mhz": "64",
                          "schedule.n_steps": "2048"})
        report = run_trajectory(cfg)
        assert report.final_bloch_magnitude >= 0.999

    def test_longitude_sweep_spacing(self):
        cfg = make_cfg("trajectory", dissipation="off",
                       **{"schedule.tau_ns": "4000",
                          "lambda.rabi_mhz": "64",
                          "lambda.detuning_mhz": "0",
                          "schedule.n_steps": "1024",
                          "sweep.wedge_deg": "0,30,60,90"})
        report = run_trajectory(cfg)
        longs = [d["longitude_deg"] for d in report.inbound_longitudes]
        steps = [(b - a + 180.0) % 360.0 - 180.0 for a, b in zip(longs, longs[1:])]
        assert np.allclose(steps, 30.0, atol=2.0)

    def test_reference_run_writes_reports(self, tmp_path):
        cfg = make_cfg("trajectory", **{"schedule.n_steps": "1024"})
        run_trajectory(cfg, out_dir=tmp_path)
        body = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert body[2].startswith("t_ns")


class TestPLComparison:
    def test_pumping_reference_is_much_brighter(self):
        cfg = make_cfg("pl-compare", **{"schedule.n_steps": "2048"})
        report = run_pl_comparison(cfg)
        assert report.ratio > 3.0

    def test_emission_peaks_track_equator(self):
        cfg = make_cfg("pl-compare", **{"schedule.n_steps": "2048"})
        report = run_pl_comparison(cfg)
        tau = cfg.schedule.tau_ns
        for peak, equator in zip(report.stirap_peak_times_ns,
                                 report.equator_times_ns):
            assert abs(peak - equator) < 0.05 * tau

    def test_adiabatic_limit_is_dark(self):
        cfg = make_cfg("pl-compare",
                       **{"schedule.tau_ns": "6000",
                          "lambda.rabi_mhz": "64",
                          "schedule.n_steps": "2048"})
        slow = run_pl_comparison(cfg)
        fast = run_pl_comparison(make_cfg("pl-compare",
                                          **{"schedule.n_steps": "2048"}))
        assert slow.mean_stirap_rate < 0.3 * fast.mean_stirap_rate


class TestBerrySweep:
    def test_phase_law_fit(self):
        cfg = make_cfg("berry-sweep", dissipation="off",
                       **{"lambda.rabi_mhz": "64",
                          "lambda.detuning_mhz": "0",
                          "schedule.tau_ns": "3000",
                          "schedule.n_steps": "1024",
                          "sweep.wedge_deg": "0,40,80,120,160,200,240,280,320"})
        report = run_berry_sweep(cfg)
        assert report.fit is not None
        assert report.fit.slope == pytest.approx(-1.0, abs=0.01)
        assert abs(report.fit.eta_deg) < 0.5
        assert report.fit.amplitude > 0.99

    def test_projections_in_unit_disk(self):
        cfg = make_cfg("berry-sweep", mode="sampled",
                       **{"schedule.n_steps": "1024",
                          "noise.photon_budget": "200",
                          "sweep.wedge_deg": "0,60,120"})
        report = run_berry_sweep(cfg)
        for p in report.points:
            assert p.x ** 2 + p.y ** 2 <= 1.0 + 1e-6

    def test_multi_loop_ideal_phase(self):
        cfg = make_cfg("berry-sweep", dissipation="off",
                       **{"lambda.rabi_mhz": "64",
                          "lambda.detuning_mhz": "0",
                          "schedule.tau_ns": "3000",
                          "schedule.n_steps": "1024",
                          "schedule.loops": "2",
                          "sweep.wedge_deg": "40"})
        report = run_berry_sweep(cfg)
        plus = [p for p in report.points if p.sign > 0][0]
        assert plus.ideal_xi_deg == pytest.approx(-80.0)
        assert plus.xi_deg == pytest.approx(-80.0, abs=0.5)


class TestStarkSweep:
    def test_small_sweep_slope(self):
        cfg = make_cfg("stark-sweep",
                       **{"schedule.wedge_deg": "0",
                          "schedule.n_steps": "2048",
                          "sweep.two_photon_mhz": "-0.1,0.1",
                          "sweep.tau_ns": "2400,4800"})
        report = run_stark_sweep(cfg)
        slope = report.slopes[31.0]
        assert slope == pytest.approx(0.55, abs=0.05)
        assert report.predicted_slope == pytest.approx(0.55, abs=0.01)


class TestVisibilityMap:
    def test_dissipationless_visibility_does_not_decay(self):
        # default step resolution: the violent short-loop transit needs it
        cfg = make_cfg("visibility-map", dissipation="off",
                       **{"schedule.echo": "true",
                          "sweep.rabi_mhz": "64",
                          "sweep.tau_ns": "400,1000,2500",
                          "sweep.wedge_deg": "30,75,120,165"})
        report = run_visibility_map(cfg)
        vis = [r["visibility"] for r in report.rows]
        assert all(b >= a - 1e-3 for a, b in zip(vis, vis[1:]))


class TestNoiseRobustness:
    def test_sections_and_slope(self, tmp_path):
        cfg = make_cfg("noise-robustness", **{
            "schedule.echo": "true",
            "schedule.shape": "square-dwell",
            "schedule.dwell_fraction": "0",
            "schedule.n_steps": "2048",
            "noise.n_runs": "300",
            "noise.s_phi_deg": "8",
            "sweep.s_phi_deg": "4,8,14",
            "sweep.s_theta_deg": "22",
            "sweep.tau_ns": "600,2400,9600",
            "sweep.intended_gamma_deg": "90,225",
        })
        report = run_noise_robustness(cfg, out_dir=tmp_path)
        assert report.phi_noise_slope == pytest.approx(0.64, abs=0.06)
        assert report.tau_exponent == pytest.approx(-0.5, abs=0.12)
        theta_rows = [r for r in report.amplitude_rows if r["kind"] == "theta"]
        assert all(r["sigma_intrinsic_deg"] < 0.5 for r in theta_rows)
        assert (tmp_path / "noise_sweep.csv").exists()
        assert (tmp_path / "noise_tau_scaling.csv").exists()
        assert (tmp_path / "noise_phase_independence.csv").exists()
