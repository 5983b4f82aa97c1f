# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step RK4 for linear systems ``dY/dt = L @ Y``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _matmul(const double complex[:, ::1] L, const double complex[:, ::1] y,
                  double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = L.shape[0], m = y.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double complex lik
    for i in range(n):
        for j in range(m):
            out[i, j] = 0
        for k in range(n):
            lik = L[i, k]
            if lik == 0:
                continue
            for j in range(m):
                out[i, j] = out[i, j] + lik * y[k, j]


def rk4_linear(L, y0, double h, Py_ssize_t substeps, Py_ssize_t n_samples):
    """Integrate ``dY/dt = L Y`` with classical RK4.

    Returns an array of shape ``(n_samples, n, m)``; sample ``s`` is the state
    after ``s * substeps`` steps of size ``h``.
    """
    cdef const double complex[:, ::1] Lv = np.ascontiguousarray(L, dtype=np.complex128)
    y_arr = np.array(y0, dtype=np.complex128, order="C", copy=True)
    if y_arr.ndim == 1:
        y_arr = y_arr[:, None]
    cdef Py_ssize_t n = y_arr.shape[0], m = y_arr.shape[1]
    if Lv.shape[0] != n or Lv.shape[1] != n:
        raise ValueError("generator and state dimensions disagree")
    out_arr = np.empty((n_samples, n, m), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef double complex[:, ::1] y = y_arr
    cdef double complex[:, ::1] k1 = np.empty((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] k2 = np.empty((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] k3 = np.empty((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] k4 = np.empty((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] tmp = np.empty((n, m), dtype=np.complex128)
    cdef Py_ssize_t s, step, i, j
    cdef double half = 0.5 * h, sixth = h / 6.0

    with nogil:
        out[0, :, :] = y
        for s in range(1, n_samples):
            for step in range(substeps):
                _matmul(Lv, y, k1)
                for i in range(n):
                    for j in range(m):
                        tmp[i, j] = y[i, j] + half * k1[i, j]
                _matmul(Lv, tmp, k2)
                for i in range(n):
                    for j in range(m):
                        tmp[i, j] = y[i, j] + half * k2[i, j]
                _matmul(Lv, tmp, k3)
                for i in range(n):
                    for j in range(m):
                        tmp[i, j] = y[i, j] + h * k3[i, j]
                _matmul(Lv, tmp, k4)
                for i in range(n):
                    for j in range(m):
                        y[i, j] = y[i, j] + sixth * (k1[i, j] + 2 * k2[i, j] + 2 * k3[i, j] + k4[i, j])
            out[s, :, :] = y
    return out_arr
