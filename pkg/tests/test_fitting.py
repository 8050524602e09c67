import math

import numpy as np
import pytest

from stirapberry.fitting import FitError, fit_phase_model


def synthetic_points(amplitude, eta_deg, slope, wedges, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    points = []
    for wedge in wedges:
        for sign in (+1, -1):
            phase = math.radians(eta_deg + sign * slope * wedge)
            points.append((wedge, sign,
                           amplitude * math.cos(phase) + rng.normal(0, noise),
                           amplitude * math.sin(phase) + rng.normal(0, noise)))
    return points


class TestRoundTrip:
    def test_recovers_known_parameters(self):
        points = synthetic_points(0.22, 30.0, -1.0, np.arange(0.0, 360.0, 30.0),
                                  noise=0.004, seed=1)
        fit = fit_phase_model(points)
        assert abs(fit.amplitude - 0.22) <= max(fit.amplitude_ci95, 0.01)
        assert abs(fit.eta_deg - 30.0) <= max(fit.eta_ci95_deg, 1.0)
        assert abs(fit.slope + 1.0) <= max(fit.slope_ci95, 0.01)
        assert fit.identifiable

    def test_noiseless_is_exact(self):
        points = synthetic_points(0.8, -40.0, -1.0, [0.0, 45.0, 90.0, 135.0])
        fit = fit_phase_model(points)
        assert fit.amplitude == pytest.approx(0.8, abs=1e-9)
        assert fit.eta_deg == pytest.approx(-40.0, abs=1e-7)
        assert fit.slope == pytest.approx(-1.0, abs=1e-9)
        assert fit.residual_rms < 1e-9

    def test_wrap_crossing_data(self):
        # phases sweep through +/-180 several times; (x, y)-space fitting
        # never unwraps
        points = synthetic_points(0.5, 170.0, -1.0, np.arange(0.0, 360.0, 20.0),
                                  noise=0.002, seed=2)
        fit = fit_phase_model(points)
        assert abs(fit.slope + 1.0) < 0.01
        assert abs((fit.eta_deg - 170.0 + 180.0) % 360.0 - 180.0) < 1.0

    def test_fixed_slope(self):
        points = synthetic_points(0.6, 12.0, -1.0, [50.0])
        fit = fit_phase_model(points, fix_slope=-1.0)
        assert fit.slope_fixed
        assert fit.slope == -1.0
        assert fit.eta_deg == pytest.approx(12.0, abs=1e-6)


class TestDegenerateData:
    def test_zero_amplitude_flagged(self):
        points = [(w, s, 0.0, 0.0) for w in (0.0, 60.0, 120.0, 180.0)
                  for s in (+1, -1)]
        fit = fit_phase_model(points)
        assert not fit.identifiable
        assert math.isnan(fit.eta_deg)

    def test_too_few_wedges_for_free_slope(self):
        points = synthetic_points(0.5, 0.0, -1.0, [30.0, 60.0])
        with pytest.raises(FitError):
            fit_phase_model(points)

    def test_empty_rejected(self):
        with pytest.raises(FitError):
            fit_phase_model([])
