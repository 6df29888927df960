# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``; same signatures and results."""
import numpy as np

from cython.parallel cimport prange
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx _conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


cdef void _rhs(const cplx* rho, cplx* out, const cplx* g, const cplx* ops,
               Py_ssize_t n_ops, Py_ssize_t d, cplx* tmp) noexcept nogil:
    cdef Py_ssize_t a, b, c, k
    cdef cplx acc
    cdef const cplx* op
    # out = G rho
    for a in range(d):
        for b in range(d):
            acc = 0
            for c in range(d):
                acc = acc + g[a * d + c] * rho[c * d + b]
            out[a * d + b] = acc
    # out += (G rho)^dagger = rho G^dagger
    for a in range(d):
        for b in range(a, d):
            acc = out[a * d + b] + _conj(out[b * d + a])
            out[a * d + b] = acc
            out[b * d + a] = _conj(acc)
    for k in range(n_ops):
        op = ops + k * d * d
        # tmp = L rho
        for a in range(d):
            for b in range(d):
                acc = 0
                for c in range(d):
                    acc = acc + op[a * d + c] * rho[c * d + b]
                tmp[a * d + b] = acc
        # out += tmp L^dagger
        for a in range(d):
            for b in range(d):
                acc = 0
                for c in range(d):
                    acc = acc + tmp[a * d + c] * _conj(op[b * d + c])
                out[a * d + b] = out[a * d + b] + acc


cdef void _rk4_one(cplx* rho, const cplx* g, const cplx* ops, Py_ssize_t n_ops,
                   Py_ssize_t d, double dt, Py_ssize_t n_full, double dt_last,
                   cplx* work) noexcept nogil:
    cdef Py_ssize_t dd = d * d
    cdef cplx* k1 = work
    cdef cplx* k2 = work + dd
    cdef cplx* k3 = work + 2 * dd
    cdef cplx* k4 = work + 3 * dd
    cdef cplx* y = work + 4 * dd
    cdef cplx* tmp = work + 5 * dd
    cdef Py_ssize_t step, i, a, b
    cdef double h
    cdef cplx avg
    cdef Py_ssize_t n_steps = n_full + (1 if dt_last > 0.0 else 0)
    for step in range(n_steps):
        h = dt if step < n_full else dt_last
        _rhs(rho, k1, g, ops, n_ops, d, tmp)
        for i in range(dd):
            y[i] = rho[i] + 0.5 * h * k1[i]
        _rhs(y, k2, g, ops, n_ops, d, tmp)
        for i in range(dd):
            y[i] = rho[i] + 0.5 * h * k2[i]
        _rhs(y, k3, g, ops, n_ops, d, tmp)
        for i in range(dd):
            y[i] = rho[i] + h * k3[i]
        _rhs(y, k4, g, ops, n_ops, d, tmp)
        for i in range(dd):
            rho[i] = rho[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for a in range(d):
            for b in range(a, d):
                avg = 0.5 * (rho[a * d + b] + _conj(rho[b * d + a]))
                rho[a * d + b] = avg
                rho[b * d + a] = _conj(avg)


def rk4_lindblad(rhos, g, ops, double dt, Py_ssize_t n_full, double dt_last, int num_threads=1):
    cdef cplx[:, :, ::1] out = np.array(rhos, dtype=complex, order="C")
    cdef cplx[:, ::1] gv = np.ascontiguousarray(g, dtype=complex)
    ops_arr = np.ascontiguousarray(ops, dtype=complex)
    cdef Py_ssize_t d = out.shape[1]
    cdef Py_ssize_t n_ops = ops_arr.shape[0]
    if n_ops == 0:
        ops_arr = np.zeros((1, d, d), dtype=complex)
    cdef cplx[:, :, ::1] opv = ops_arr
    cdef Py_ssize_t batch = out.shape[0]
    cdef Py_ssize_t j
    cdef cplx* work
    for j in prange(batch, nogil=True, num_threads=num_threads, schedule="static"):
        work = <cplx*> malloc(6 * d * d * sizeof(cplx))
        _rk4_one(&out[j, 0, 0], &gv[0, 0], &opv[0, 0, 0], n_ops, d, dt, n_full, dt_last, work)
        free(work)
    return np.asarray(out)


cdef double _one_trajectory(cplx* psi, const cplx* props, const cplx* ops, Py_ssize_t n_ops,
                            Py_ssize_t d, double dt, double dt_last, Py_ssize_t n_full,
                            const double* unif, Py_ssize_t n_steps, cplx* work) noexcept nogil:
    cdef cplx* lk = work
    cdef cplx* tmp = work + n_ops * d
    cdef double* pk = <double*> (work + n_ops * d + d)
    cdef Py_ssize_t s, k, a, c, chosen
    cdef double h, total, r, acc, nrm, max_p = 0.0
    cdef cplx z
    cdef const cplx* u
    cdef const cplx* op
    for s in range(n_steps):
        if s < n_full:
            h = dt
            u = props
        else:
            h = dt_last
            u = props + d * d
        total = 0.0
        for k in range(n_ops):
            op = ops + k * d * d
            nrm = 0.0
            for a in range(d):
                z = 0
                for c in range(d):
                    z = z + op[a * d + c] * psi[c]
                lk[k * d + a] = z
                nrm = nrm + _abs2(z)
            pk[k] = h * nrm
            total = total + pk[k]
            if pk[k] > max_p:
                max_p = pk[k]
        if n_ops > 0 and unif[2 * s] < total:
            r = unif[2 * s + 1] * total
            acc = 0.0
            chosen = n_ops - 1
            for k in range(n_ops):
                acc = acc + pk[k]
                if r < acc:
                    chosen = k
                    break
            nrm = sqrt(pk[chosen] / h)
            if nrm > 0.0:
                for a in range(d):
                    psi[a] = lk[chosen * d + a] / nrm
        else:
            nrm = 0.0
            for a in range(d):
                z = 0
                for c in range(d):
                    z = z + u[a * d + c] * psi[c]
                tmp[a] = z
                nrm = nrm + _abs2(z)
            nrm = sqrt(nrm)
            for a in range(d):
                psi[a] = tmp[a] / nrm
    return max_p


def jump_trajectories(psi0, props, ops, double dt, double dt_last, Py_ssize_t n_full,
                      uniforms, int num_threads=1):
    cdef double[:, :, ::1] unif = np.ascontiguousarray(uniforms, dtype=float)
    cdef Py_ssize_t batch = unif.shape[0]
    cdef Py_ssize_t n_steps = unif.shape[1]
    cdef cplx[:, ::1] psi = np.tile(np.asarray(psi0, dtype=complex), (batch, 1))
    cdef cplx[:, :, ::1] pv = np.ascontiguousarray(props, dtype=complex)
    ops_arr = np.ascontiguousarray(ops, dtype=complex)
    cdef Py_ssize_t d = psi.shape[1]
    cdef Py_ssize_t n_ops = ops_arr.shape[0]
    if n_ops == 0:
        ops_arr = np.zeros((1, d, d), dtype=complex)
    cdef cplx[:, :, ::1] opv = ops_arr
    cdef double[::1] maxes = np.zeros(batch)
    cdef Py_ssize_t j
    cdef cplx* work
    for j in prange(batch, nogil=True, num_threads=num_threads, schedule="static"):
        # lk (n_ops*d) + tmp (d) + pk (n_ops doubles, padded as complex slots)
        work = <cplx*> malloc((n_ops * d + d + n_ops + 1) * sizeof(cplx))
        maxes[j] = _one_trajectory(&psi[j, 0], &pv[0, 0, 0], &opv[0, 0, 0], n_ops, d,
                                   dt, dt_last, n_full, &unif[j, 0, 0], n_steps, work)
        free(work)
    return np.asarray(psi), float(np.max(maxes)) if batch else 0.0
