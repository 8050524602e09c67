"""Fixed-step propagation of the master equation along a protocol.

The integrator walks a protocol segment by segment: loop and idle segments
run through the selected stepper kernel, instantaneous microwave gates are
applied as exact unitaries in between.  The trace is never renormalized;
its drift is a reported diagnostic and a hard bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import get_kernel
from .lambda_system import (DRIVE_OFF, TWO_PI_MHZ_NS, LambdaParams,
                            hamiltonian_at, lindblad_ops)
from .pulses import (GateSegment, IdleSegment, LoopSegment, ProtocolSchedule,
                     PulseSchedule, drives_of)
from .quantum import (EIGENVALUE_FLOOR, IDX_A2, IDX_MINUS, IDX_PLUS,
                      TRACE_TOL, apply_instant_gate, validate)

DEFAULT_STATE_STRIDE_NS = 4.0


class ConvergenceError(RuntimeError):
    """Step-halving changed a reported observable by more than the tolerance."""


class InvariantError(RuntimeError):
    """Trace, Hermiticity, or positivity violated beyond tolerance."""


@dataclass
class Trajectory:
    """Observable time series of one propagation.

    ``populations`` has one row per sample over the four levels;
    ``bloch`` holds the (x, y, z) components on the ``|-1g>/|+1g>`` pair;
    ``pl_rate`` is the instantaneous photon emission rate (photons/ns,
    every excited-state decay counted as one photon).  ``states`` are
    decimated density-matrix snapshots at ``state_times_ns``.
    """

    times_ns: np.ndarray
    populations: np.ndarray
    bloch: np.ndarray
    bloch_magnitude: np.ndarray
    pl_rate: np.ndarray
    state_times_ns: np.ndarray
    states: np.ndarray
    trace_error_max: float
    min_eigenvalue: float
    final_rho: np.ndarray


def as_protocol(protocol) -> ProtocolSchedule:
    if isinstance(protocol, PulseSchedule):
        return ProtocolSchedule((LoopSegment(protocol, +1),))
    return protocol


def propagate_drives(rho, params: LambdaParams, om_minus_mhz, om_plus_mhz,
                     phi_rad, dt_ns: float, *, state_stride_steps: int | None = None,
                     backend: str | None = None) -> dict:
    """Run the stepper kernel over raw drive arrays (half-step grid).

    ``rho`` is advanced in place.  Returns the per-step observable arrays;
    used directly for drive programs that are not tangerine loops (optical
    pumping references, custom waveforms).
    """
    om_minus_mhz = np.ascontiguousarray(om_minus_mhz, dtype=float)
    om_plus_mhz = np.ascontiguousarray(om_plus_mhz, dtype=float)
    phi_rad = np.ascontiguousarray(phi_rad, dtype=float)
    n_samples = om_minus_mhz.shape[0]
    if n_samples < 3 or n_samples % 2 == 0:
        raise ValueError("drive arrays must hold 2*n_steps + 1 samples")
    if om_plus_mhz.shape != (n_samples,) or phi_rad.shape != (n_samples,):
        raise ValueError("drive arrays must share one grid")
    n_steps = (n_samples - 1) // 2

    diag = hamiltonian_at(params, DRIVE_OFF)
    h22 = float(diag[IDX_PLUS, IDX_PLUS].real)
    h33 = float(diag[IDX_A2, IDX_A2].real)

    ops_list = lindblad_ops(params)
    if ops_list:
        ops = np.ascontiguousarray(np.stack(ops_list))
        ops_dag = np.ascontiguousarray(ops.conj().transpose(0, 2, 1))
        msum = np.ascontiguousarray(
            np.tensordot(ops_dag, ops, axes=([0, 2], [0, 1])))
    else:
        ops = np.zeros((0, 4, 4), dtype=complex)
        ops_dag = np.zeros((0, 4, 4), dtype=complex)
        msum = np.zeros((4, 4), dtype=complex)

    stride = state_stride_steps or max(1, round(DEFAULT_STATE_STRIDE_NS / dt_ns))
    stride = max(1, int(stride))
    n_store = n_steps // stride + 1

    pops = np.empty((n_steps + 1, 4))
    re12 = np.empty(n_steps + 1)
    im12 = np.empty(n_steps + 1)
    tr = np.empty(n_steps + 1)
    states = np.empty((n_store, 4, 4), dtype=complex)

    kernel = get_kernel(backend)
    kernel.lindblad_rk4(
        rho, TWO_PI_MHZ_NS * om_minus_mhz, TWO_PI_MHZ_NS * om_plus_mhz,
        np.cos(phi_rad), np.sin(phi_rad), float(dt_ns), h22, h33,
        ops, ops_dag, msum, stride, pops, re12, im12, tr, states)

    return {
        "times": dt_ns * np.arange(n_steps + 1),
        "pops": pops,
        "re12": re12,
        "im12": im12,
        "trace": tr,
        "state_steps": stride * np.arange(n_store),
        "states": states,
    }


def _walk(rho0, protocol: ProtocolSchedule, params: LambdaParams,
          state_stride_ns: float, backend: str | None, refine: int) -> Trajectory:
    rho = np.array(rho0, dtype=complex)
    times: list[np.ndarray] = [np.zeros(1)]
    pops: list[np.ndarray] = [np.diag(rho).real.reshape(1, 4).copy()]
    re12: list[np.ndarray] = [np.array([rho[IDX_MINUS, IDX_PLUS].real])]
    im12: list[np.ndarray] = [np.array([rho[IDX_MINUS, IDX_PLUS].imag])]
    trace: list[np.ndarray] = [np.array([np.trace(rho).real])]
    state_times: list[float] = [0.0]
    states: list[np.ndarray] = [rho.copy()]

    t_offset = 0.0
    for seg in protocol.segments:
        if isinstance(seg, GateSegment):
            rho = apply_instant_gate(rho, seg.angle_rad, seg.pair, seg.axis_phase_rad)
            times.append(np.array([t_offset]))
            pops.append(np.diag(rho).real.reshape(1, 4).copy())
            re12.append(np.array([rho[IDX_MINUS, IDX_PLUS].real]))
            im12.append(np.array([rho[IDX_MINUS, IDX_PLUS].imag]))
            trace.append(np.array([np.trace(rho).real]))
            state_times.append(t_offset)
            states.append(rho.copy())
            continue
        if isinstance(seg, LoopSegment):
            sched = seg.schedule if refine == 1 else seg.schedule.refined(refine)
            om_minus, om_plus, phi = drives_of(sched, params)
            dt = sched.dt_ns
            duration = sched.tau_ns
        elif isinstance(seg, IdleSegment):
            n_steps = refine * max(2, seg.n_steps)
            zeros = np.zeros(2 * n_steps + 1)
            om_minus = om_plus = phi = zeros
            dt = seg.duration_ns / n_steps
            duration = seg.duration_ns
        else:
            raise TypeError(f"unknown protocol segment {seg!r}")
        stride = max(1, round(state_stride_ns / dt))
        out = propagate_drives(rho, params, om_minus, om_plus, phi, dt,
                               state_stride_steps=stride, backend=backend)
        keep = slice(refine, None, refine)  # drop the duplicated boundary sample
        times.append(t_offset + out["times"][keep])
        pops.append(out["pops"][keep])
        re12.append(out["re12"][keep])
        im12.append(out["im12"][keep])
        trace.append(out["trace"][keep])
        state_times.extend((t_offset + dt * out["state_steps"][1:]).tolist())
        states.extend(out["states"][1:])
        t_offset += duration

    populations = np.concatenate(pops)
    re = np.concatenate(re12)
    im = np.concatenate(im12)
    bloch = np.column_stack((2.0 * re, -2.0 * im,
                             populations[:, IDX_MINUS] - populations[:, IDX_PLUS]))
    state_stack = np.stack(states + [rho])
    state_t = np.array(state_times + [t_offset])
    tr_all = np.concatenate(trace)
    min_eig = float(np.min(np.linalg.eigvalsh(
        0.5 * (state_stack + state_stack.conj().transpose(0, 2, 1)))))
    return Trajectory(
        times_ns=np.concatenate(times),
        populations=populations,
        bloch=bloch,
        bloch_magnitude=np.linalg.norm(bloch, axis=1),
        pl_rate=params.total_decay_rate_per_ns * populations[:, IDX_A2],
        state_times_ns=state_t,
        states=state_stack,
        trace_error_max=float(np.max(np.abs(tr_all - 1.0))),
        min_eigenvalue=min_eig,
        final_rho=rho,
    )


def propagate(rho0, protocol, params: LambdaParams, *, tol: float | None = None,
              state_stride_ns: float = DEFAULT_STATE_STRIDE_NS,
              backend: str | None = None, check_invariants: bool = True) -> Trajectory:
    """Propagate a density matrix through a protocol.

    Parameters
    ----------
    rho0 : valid 4x4 density matrix (validated on entry).
    protocol : ``ProtocolSchedule`` or a bare ``PulseSchedule``.
    params : physical constants; dissipation follows the configured times.
    tol : optional step-convergence demand in [1e-12, 1e-6].  When given,
        the protocol is re-integrated at half the step and every recorded
        observable must agree within ``tol``; otherwise a
        ``ConvergenceError`` is raised.
    """
    entry = validate(rho0)
    if not entry.all_ok:
        raise InvariantError(f"initial state rejected: {entry}")
    protocol = as_protocol(protocol)
    traj = _walk(rho0, protocol, params, state_stride_ns, backend, refine=1)
    if tol is not None:
        if not 1e-12 <= tol <= 1e-6:
            raise ValueError("tol must lie in [1e-12, 1e-6]")
        fine = _walk(rho0, protocol, params, state_stride_ns, backend, refine=2)
        drift = max(
            float(np.max(np.abs(traj.populations - fine.populations))),
            float(np.max(np.abs(traj.bloch - fine.bloch))),
        )
        if drift > tol:
            raise ConvergenceError(
                f"step halving moved observables by {drift:.3e} > tol {tol:.1e}")
    if check_invariants:
        if traj.trace_error_max > TRACE_TOL:
            raise InvariantError(
                f"trace drifted by {traj.trace_error_max:.3e} > {TRACE_TOL}")
        if traj.min_eigenvalue < EIGENVALUE_FLOOR:
            raise InvariantError(
                f"negative eigenvalue {traj.min_eigenvalue:.3e} < {EIGENVALUE_FLOOR}")
    return traj


def pl_series(traj: Trajectory, params: LambdaParams) -> np.ndarray:
    """Photon emission rate (photons/ns): total decay rate times excited population."""
    return params.total_decay_rate_per_ns * traj.populations[:, IDX_A2]
