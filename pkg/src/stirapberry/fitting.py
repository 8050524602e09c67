"""Least-squares phase-model fitting for Berry-sweep projections.

The model is ``X = A cos(eta + sign * slope * wedge)`` and
``Y = A sin(eta + sign * slope * wedge)``: one visibility, one dynamic
phase common to all loops, and a phase slope against the wedge angle.
Fitting happens in (X, Y) space, so wrap-around of the measured phase
never enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares


class FitError(RuntimeError):
    """Fit could not run (insufficient or degenerate data) or did not converge."""


@dataclass(frozen=True)
class PhaseFit:
    amplitude: float
    amplitude_ci95: float
    eta_deg: float
    eta_ci95_deg: float
    slope: float
    slope_ci95: float
    residual_rms: float
    identifiable: bool
    slope_fixed: bool


def fit_phase_model(points, fix_slope: float | None = None) -> PhaseFit:
    """Fit (A, eta, slope) to tomographic projections.

    Parameters
    ----------
    points : iterable of ``(wedge_deg, sign, x, y)`` rows.
    fix_slope : hold the phase slope at this value and fit (A, eta) only.

    Raises ``FitError`` when the slope is free and fewer than three
    distinct wedge angles are present, or on solver failure.  A fit whose
    amplitude is consistent with zero is flagged unidentifiable (the phase
    is then meaningless) rather than rejected.
    """
    rows = [(float(w), int(s), float(x), float(y)) for (w, s, x, y) in points]
    if not rows:
        raise FitError("no data points")
    wedge = np.array([r[0] for r in rows])
    sign = np.array([r[1] for r in rows], dtype=float)
    x = np.array([r[2] for r in rows])
    y = np.array([r[3] for r in rows])
    if fix_slope is None and np.unique(wedge).size < 3:
        raise FitError("free-slope fit needs at least 3 distinct wedge angles")

    slope0 = -1.0 if fix_slope is None else float(fix_slope)
    phase0 = np.radians(sign * slope0 * wedge)
    eta0 = math.atan2(float(np.mean(y * np.cos(phase0) - x * np.sin(phase0))),
                      float(np.mean(x * np.cos(phase0) + y * np.sin(phase0))))
    amp0 = max(float(np.mean(np.hypot(x, y))), 1e-6)

    def unpack(p):
        if fix_slope is None:
            return p[0], p[1], p[2]
        return p[0], p[1], float(fix_slope)

    def residuals(p):
        amp, eta, slope = unpack(p)
        phase = eta + np.radians(sign * slope * wedge)
        return np.concatenate((amp * np.cos(phase) - x, amp * np.sin(phase) - y))

    p0 = [amp0, eta0] if fix_slope is not None else [amp0, eta0, slope0]
    result = least_squares(residuals, p0, method="lm", max_nfev=20000)
    if not result.success:
        raise FitError(f"phase-model fit did not converge: {result.message}")

    amp, eta, slope = unpack(result.x)
    m = result.fun.size
    n_par = len(p0)
    dof = max(m - n_par, 1)
    variance = 2.0 * result.cost / dof
    jtj = result.jac.T @ result.jac
    cov = variance * np.linalg.pinv(jtj)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    se_amp, se_eta = float(se[0]), float(se[1])
    se_slope = float(se[2]) if fix_slope is None else 0.0

    identifiable = amp > max(0.02, 3.0 * se_amp)
    return PhaseFit(
        amplitude=float(abs(amp)),
        amplitude_ci95=1.96 * se_amp,
        eta_deg=math.degrees(eta) if identifiable else float("nan"),
        eta_ci95_deg=math.degrees(1.96 * se_eta),
        slope=float(slope),
        slope_ci95=1.96 * se_slope,
        residual_rms=float(np.sqrt(np.mean(result.fun ** 2))),
        identifiable=bool(identifiable),
        slope_fixed=fix_slope is not None,
    )
