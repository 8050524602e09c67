"""Pure-numpy fallback for the master-equation stepper.

Propagates vec(rho) with the classical fourth-order scheme.  The generator
is assembled once as 16x16 superoperators: a constant part (static
Hamiltonian diagonal plus all dissipators) and three drive-proportional
commutator parts, so each stage is a scaled sum and one matvec.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_I4 = np.eye(4, dtype=complex)


def _commutator_superop(x: np.ndarray) -> np.ndarray:
    return -1j * (np.kron(x, _I4) - np.kron(_I4, x.T))


def _dissipator_superop(ops: np.ndarray, msum: np.ndarray) -> np.ndarray:
    d = np.zeros((16, 16), dtype=complex)
    for op in ops:
        d += np.kron(op, op.conj())
    d -= 0.5 * (np.kron(msum, _I4) + np.kron(_I4, msum.T))
    return d


def lindblad_rk4(rho, wm, wp, cph, sph, dt, h22, h33, ops, ops_dag, msum,
                 stride, pops, re12, im12, tr, states):
    """Advance ``rho`` in place across the half-step drive grid.

    ``wm``/``wp`` are angular drive amplitudes (rad/ns) and ``cph``/``sph``
    the cosine/sine of the total drive phase, all sampled at
    ``2 n_steps + 1`` points.  Observables are recorded at every step
    boundary into the ``pops``/``re12``/``im12``/``tr`` arrays; full
    snapshots go into ``states`` every ``stride`` steps.
    """
    n_steps = (wm.shape[0] - 1) // 2

    h_const = np.zeros((4, 4), dtype=complex)
    h_const[2, 2] = h22
    h_const[3, 3] = h33
    x_minus = np.zeros((4, 4), dtype=complex)
    x_minus[1, 3] = x_minus[3, 1] = 0.5
    x_cos = np.zeros((4, 4), dtype=complex)
    x_cos[2, 3] = x_cos[3, 2] = 0.5
    x_sin = np.zeros((4, 4), dtype=complex)
    x_sin[2, 3] = 0.5j
    x_sin[3, 2] = -0.5j

    s0 = _commutator_superop(h_const) + _dissipator_superop(ops, msum)
    s1 = _commutator_superop(x_minus)
    s2 = _commutator_superop(x_cos)
    s3 = _commutator_superop(x_sin)

    c1 = wm
    c2 = wp * cph
    c3 = wp * sph

    def generator(k):
        return s0 + c1[k] * s1 + c2[k] * s2 + c3[k] * s3

    def record(step, vec):
        r = vec.reshape(4, 4)
        pops[step, 0] = r[0, 0].real
        pops[step, 1] = r[1, 1].real
        pops[step, 2] = r[2, 2].real
        pops[step, 3] = r[3, 3].real
        re12[step] = r[1, 2].real
        im12[step] = r[1, 2].imag
        tr[step] = r[0, 0].real + r[1, 1].real + r[2, 2].real + r[3, 3].real
        if step % stride == 0:
            states[step // stride] = r

    v = np.asarray(rho, dtype=complex).reshape(16).copy()
    record(0, v)
    m_left = generator(0)
    sixth = dt / 6.0
    half = 0.5 * dt
    for i in range(n_steps):
        m_mid = generator(2 * i + 1)
        m_right = generator(2 * i + 2)
        k1 = m_left @ v
        k2 = m_mid @ (v + half * k1)
        k3 = m_mid @ (v + half * k2)
        k4 = m_right @ (v + dt * k3)
        v = v + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        record(i + 1, v)
        m_left = m_right
    rho[:, :] = v.reshape(4, 4)
