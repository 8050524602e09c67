# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepper for the four-level master equation.

Same contract as ``_kernels_py.lindblad_rk4``, implemented with explicit
4x4 complex arithmetic so the hot loop runs without the GIL.
"""

import numpy as np

cimport cython

ctypedef double complex cplx

BACKEND_NAME = "compiled"


cdef inline void _matmul(const cplx* a, const cplx* b, cplx* out) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc = acc + a[4 * i + k] * b[4 * k + j]
            out[4 * i + j] = acc


cdef void _rhs(double wm, double wp, double cph, double sph,
               double h22, double h33,
               const cplx* ops, const cplx* ops_dag, int n_ops,
               const cplx* msum,
               const cplx* rho, cplx* out,
               cplx* t1, cplx* t2) noexcept nogil:
    cdef cplx h[16]
    cdef int i, k
    for i in range(16):
        h[i] = 0
    h[1 * 4 + 3] = 0.5 * wm
    h[3 * 4 + 1] = 0.5 * wm
    h[2 * 4 + 3] = 0.5 * wp * (cph + 1j * sph)
    h[3 * 4 + 2] = 0.5 * wp * (cph - 1j * sph)
    h[2 * 4 + 2] = h22
    h[3 * 4 + 3] = h33

    _matmul(h, rho, t1)
    _matmul(rho, h, t2)
    for i in range(16):
        out[i] = -1j * (t1[i] - t2[i])

    if n_ops > 0:
        for k in range(n_ops):
            _matmul(ops + 16 * k, rho, t1)
            _matmul(t1, ops_dag + 16 * k, t2)
            for i in range(16):
                out[i] = out[i] + t2[i]
        _matmul(msum, rho, t1)
        _matmul(rho, msum, t2)
        for i in range(16):
            out[i] = out[i] - 0.5 * (t1[i] + t2[i])


def lindblad_rk4(cplx[:, ::1] rho,
                 const double[::1] wm, const double[::1] wp,
                 const double[::1] cph, const double[::1] sph,
                 double dt, double h22, double h33,
                 const cplx[:, :, ::1] ops, const cplx[:, :, ::1] ops_dag,
                 const cplx[:, ::1] msum,
                 Py_ssize_t stride,
                 double[:, ::1] pops,
                 double[::1] re12, double[::1] im12, double[::1] tr,
                 cplx[:, :, ::1] states):
    """Advance ``rho`` in place across the half-step drive grid."""
    cdef Py_ssize_t n_steps = (wm.shape[0] - 1) // 2
    cdef int n_ops = <int> ops.shape[0]
    cdef cplx y[16]
    cdef cplx k1[16]
    cdef cplx k2[16]
    cdef cplx k3[16]
    cdef cplx k4[16]
    cdef cplx stage[16]
    cdef cplx t1[16]
    cdef cplx t2[16]
    cdef cplx m_flat[16]
    cdef const cplx* ops_ptr
    cdef const cplx* dag_ptr
    cdef Py_ssize_t i, j, base, row
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    ops_buf = np.ascontiguousarray(ops).reshape(-1) if n_ops else np.zeros(1, dtype=complex)
    dag_buf = np.ascontiguousarray(ops_dag).reshape(-1) if n_ops else np.zeros(1, dtype=complex)
    cdef cplx[::1] ops_view = ops_buf
    cdef cplx[::1] dag_view = dag_buf

    with nogil:
        ops_ptr = &ops_view[0]
        dag_ptr = &dag_view[0]
        for i in range(4):
            for j in range(4):
                y[4 * i + j] = rho[i, j]
                m_flat[4 * i + j] = msum[i, j]

        _record(0, y, stride, pops, re12, im12, tr, states)
        for i in range(n_steps):
            base = 2 * i
            _rhs(wm[base], wp[base], cph[base], sph[base], h22, h33,
                 ops_ptr, dag_ptr, n_ops, m_flat, y, k1, t1, t2)
            for j in range(16):
                stage[j] = y[j] + half * k1[j]
            _rhs(wm[base + 1], wp[base + 1], cph[base + 1], sph[base + 1], h22, h33,
                 ops_ptr, dag_ptr, n_ops, m_flat, stage, k2, t1, t2)
            for j in range(16):
                stage[j] = y[j] + half * k2[j]
            _rhs(wm[base + 1], wp[base + 1], cph[base + 1], sph[base + 1], h22, h33,
                 ops_ptr, dag_ptr, n_ops, m_flat, stage, k3, t1, t2)
            for j in range(16):
                stage[j] = y[j] + dt * k3[j]
            _rhs(wm[base + 2], wp[base + 2], cph[base + 2], sph[base + 2], h22, h33,
                 ops_ptr, dag_ptr, n_ops, m_flat, stage, k4, t1, t2)
            for j in range(16):
                y[j] = y[j] + sixth * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            _record(i + 1, y, stride, pops, re12, im12, tr, states)

        for i in range(4):
            for j in range(4):
                rho[i, j] = y[4 * i + j]


cdef inline void _record(Py_ssize_t step, const cplx* y, Py_ssize_t stride,
                         double[:, ::1] pops,
                         double[::1] re12, double[::1] im12, double[::1] tr,
                         cplx[:, :, ::1] states) noexcept nogil:
    cdef Py_ssize_t i, j, row
    pops[step, 0] = y[0].real
    pops[step, 1] = y[5].real
    pops[step, 2] = y[10].real
    pops[step, 3] = y[15].real
    re12[step] = y[1 * 4 + 2].real
    im12[step] = y[1 * 4 + 2].imag
    tr[step] = y[0].real + y[5].real + y[10].real + y[15].real
    if step % stride == 0:
        row = step // stride
        for i in range(4):
            for j in range(4):
                states[row, i, j] = y[4 * i + j]
