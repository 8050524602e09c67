import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stirapberry.geometry import (adiabaticity_metric, berry_integral,
                                  dark_state, eq2_sigma, stark_slope, wrap_deg)
from stirapberry.lambda_system import LambdaParams
from stirapberry.pulses import compose, tangerine
from stirapberry.quantum import IDX_MINUS, IDX_PLUS


class TestDarkState:
    def test_poles(self):
        assert np.allclose(dark_state(0.0, 0.0), [0, 1, 0, 0])
        assert np.allclose(dark_state(math.pi, 0.0), [0, 0, -1, 0])

    def test_equator_with_quarter_phase(self):
        ket = dark_state(math.pi / 2, math.pi / 2)
        assert abs(ket[IDX_MINUS] - 1 / math.sqrt(2)) < 1e-12
        assert abs(ket[IDX_PLUS] - (-1j / math.sqrt(2))) < 1e-12

    def test_range_check(self):
        with pytest.raises(ValueError):
            dark_state(-0.1, 0.0)


class TestBerryIntegral:
    def test_ideal_wedge(self):
        assert berry_integral(tangerine(1200.0, 120.0, n_steps=1024)) == \
            pytest.approx(-120.0, abs=1e-10)

    def test_zero_wedge(self):
        assert berry_integral(tangerine(1200.0, 0.0, n_steps=1024)) == 0.0

    def test_multi_loop_additivity(self):
        loop = tangerine(900.0, 70.0, n_steps=1024)
        for n in (1, 2, 3):
            protocol = compose([(loop, +1)] * n)
            assert berry_integral(protocol) == pytest.approx(-70.0 * n, abs=0.05)

    def test_cancellation(self):
        loop = tangerine(900.0, 70.0, n_steps=1024)
        protocol = compose([(loop, +1), (loop, -1)])
        assert berry_integral(protocol) == pytest.approx(0.0, abs=1e-10)

    def test_unwrapped_totals(self):
        loop = tangerine(900.0, 200.0, n_steps=1024)
        protocol = compose([(loop, +1)] * 3)
        assert berry_integral(protocol) == pytest.approx(-600.0, abs=0.05)

    def test_open_path_rejected(self):
        loop = tangerine(900.0, 70.0, n_steps=1024)
        broken = loop.with_noise(np.zeros(loop.n_samples), np.zeros(loop.n_samples))
        broken.is_noisy = False
        broken.theta[-1] = 0.3
        with pytest.raises(ValueError):
            berry_integral(broken)


class TestStarkSlope:
    def test_calibrated_default(self):
        assert stark_slope(tangerine(1200.0, 120.0)).slope == \
            pytest.approx(0.55, abs=0.01)

    def test_symmetric_profile(self):
        sched = tangerine(1200.0, 90.0, shape="square-dwell", dwell_fraction=0.0,
                          n_steps=2048)
        assert stark_slope(sched).slope == pytest.approx(0.5, abs=1e-4)

    def test_pinned_at_pole(self):
        sched = tangerine(1200.0, 90.0, n_steps=1024)
        pinned = sched.with_noise(-sched.theta, np.zeros(sched.n_samples))
        assert stark_slope(pinned).slope == 0.0

    def test_bounds(self):
        for shape in ("eom-bessel", "sine-ramp", "square-dwell"):
            slope = stark_slope(tangerine(600.0, 45.0, shape=shape,
                                          n_steps=1024)).slope
            assert 0.0 <= slope <= 1.0

    def test_shift_scaling(self):
        result = stark_slope(tangerine(1200.0, 0.0))
        assert result.shift_mhz(0.2) == pytest.approx(0.2 * result.slope)


class TestEq2Sigma:
    def test_reference_point(self):
        assert eq2_sigma(8.0, 3.0, 1200.0) == pytest.approx(5.1077, abs=1e-3)

    def test_zero_amplitude(self):
        assert eq2_sigma(0.0, 3.0, 1200.0) == 0.0

    def test_long_loop_and_asymptote(self):
        value = eq2_sigma(14.0, 3.0, 12000.0)
        assert value == pytest.approx(2.923, abs=5e-3)
        x = 3.0e-3 * 12000.0
        asymptote = 14.0 * math.sqrt(math.pi / (2.0 * x))
        assert abs(value / asymptote - 1.0) < 0.01

    @settings(max_examples=40, deadline=None)
    @given(x=st.floats(30.0, 500.0))
    def test_asymptotic_regime(self, x):
        tau = 1200.0
        bandwidth = x / (1e-3 * tau)
        asymptote = math.sqrt(math.pi / (2.0 * x))
        assert abs(eq2_sigma(1.0, bandwidth, tau) / asymptote - 1.0) < 0.01

    def test_monotone_in_amplitude(self):
        values = [eq2_sigma(s, 3.0, 1200.0) for s in (0.0, 2.0, 5.0, 9.0, 20.0)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            eq2_sigma(-1.0, 3.0, 1200.0)


class TestAdiabaticity:
    def test_doubling_tau_halves_peak(self):
        params = LambdaParams()
        _, r1 = adiabaticity_metric(tangerine(1200.0, 120.0, n_steps=1024), params)
        _, r2 = adiabaticity_metric(tangerine(2400.0, 120.0, n_steps=1024), params)
        assert np.max(r2) == pytest.approx(0.5 * np.max(r1), rel=1e-2)

    def test_peaks_near_equator(self):
        params = LambdaParams()
        sched = tangerine(1200.0, 120.0, n_steps=1024)
        times, r = adiabaticity_metric(sched, params)
        half = len(times) // 2
        t_eq_out = times[np.argmin(np.abs(sched.theta[:half] - math.pi / 2))]
        t_eq_in = times[half + np.argmin(np.abs(sched.theta[half:] - math.pi / 2))]
        t_peak_out = times[np.argmax(r[:half])]
        t_peak_in = times[half + np.argmax(r[half:])]
        assert abs(t_peak_out - t_eq_out) < 0.05 * 1200.0
        assert abs(t_peak_in - t_eq_in) < 0.05 * 1200.0

    def test_stronger_drive_more_adiabatic(self):
        sched = tangerine(1200.0, 120.0, n_steps=1024)
        _, weak = adiabaticity_metric(sched, LambdaParams(rabi_mhz=31.0))
        _, strong = adiabaticity_metric(sched, LambdaParams(rabi_mhz=124.0))
        assert np.max(strong) < 0.3 * np.max(weak)


class TestWrap:
    @pytest.mark.parametrize("angle,expected", [
        (0.0, 0.0), (180.0, 180.0), (-180.0, 180.0), (360.0, 0.0),
        (190.0, -170.0), (-190.0, 170.0), (540.0, 180.0),
    ])
    def test_wrap(self, angle, expected):
        assert wrap_deg(angle) == pytest.approx(expected, abs=1e-12)
