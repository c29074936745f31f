# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the covariance-ratio detector.

Every kernel returns a status instead of raising so the GIL can stay released
for the whole sliding loop. The Python wrappers in ``nlglrt._backend`` turn
non-zero statuses into library exceptions.
"""
import numpy as np

from libc.math cimport sqrt

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx _mul_conj(cplx a, cplx b) noexcept nogil:
    # a * conj(b) without a temporary
    cdef cplx out
    out.real = a.real * b.real + a.imag * b.imag
    out.imag = a.imag * b.real - a.real * b.imag
    return out


cdef Py_ssize_t _cholesky_lower(cplx[:, ::1] a, Py_ssize_t m) noexcept nogil:
    """In-place lower Cholesky on the lower triangle of ``a``.

    Returns 0 on success, otherwise 1 + the failing pivot.
    """
    cdef Py_ssize_t i, j, p
    cdef double s, d
    cdef cplx acc
    for j in range(m):
        s = a[j, j].real
        for p in range(j):
            s -= _abs2(a[j, p])
        if not (s > 0.0):
            return j + 1
        d = sqrt(s)
        a[j, j] = d
        for i in range(j + 1, m):
            acc = a[i, j]
            for p in range(j):
                acc = acc - _mul_conj(a[i, p], a[j, p])
            a[i, j] = acc / d
    return 0


cdef void _window_gram(const cplx[:, :] z, Py_ssize_t start, Py_ssize_t k,
                       cplx[:, ::1] out, Py_ssize_t m) noexcept nogil:
    # Lower triangle only; the factorization never reads the upper part.
    cdef Py_ssize_t i, j, t
    cdef cplx acc
    for i in range(m):
        for j in range(i + 1):
            acc = 0
            for t in range(start, start + k):
                acc = acc + _mul_conj(z[i, t], z[j, t])
            out[i, j] = acc


cdef double _loading(cplx[:, ::1] r, Py_ssize_t m, double eps, bint relative) noexcept nogil:
    cdef Py_ssize_t i
    cdef double mean_diag = 0.0
    if not relative:
        return eps
    for i in range(m):
        mean_diag += r[i, i].real
    return eps * mean_diag / m


def gram(const cplx[:, :] a):
    """Return ``a @ a^H`` as a Hermitian ``(M, M)`` array."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t i, j, t
    cdef cplx acc
    result = np.empty((m, m), dtype=np.complex128)
    cdef cplx[:, ::1] out = result
    with nogil:
        for i in range(m):
            for j in range(i + 1):
                acc = 0
                for t in range(n):
                    acc = acc + _mul_conj(a[i, t], a[j, t])
                if i == j:
                    out[i, i] = acc.real
                else:
                    out[i, j] = acc
                    out[j, i] = acc.conjugate()
    return result


def hpd_inverse(const cplx[:, :] r, double eps, bint relative):
    """Return ``((R + eps I)^-1, status)``; status is 0 or 1 + failing pivot."""
    cdef Py_ssize_t m = r.shape[0]
    cdef Py_ssize_t i, j, p, status
    cdef double load
    cdef cplx acc
    work = np.zeros((m, m), dtype=np.complex128)
    linv = np.zeros((m, m), dtype=np.complex128)
    result = np.empty((m, m), dtype=np.complex128)
    cdef cplx[:, ::1] a = work
    cdef cplx[:, ::1] w = linv
    cdef cplx[:, ::1] out = result
    with nogil:
        for i in range(m):
            for j in range(i + 1):
                a[i, j] = r[i, j]
        load = _loading(a, m, eps, relative)
        for i in range(m):
            a[i, i] = a[i, i].real + load
        status = _cholesky_lower(a, m)
        if status == 0:
            # Forward substitution of the identity gives L^-1, lower triangular.
            for j in range(m):
                w[j, j] = 1.0 / a[j, j].real
                for i in range(j + 1, m):
                    acc = 0
                    for p in range(j, i):
                        acc = acc + a[i, p] * w[p, j]
                    w[i, j] = -acc / a[i, i].real
            # (L L^H)^-1 = L^-H L^-1
            for i in range(m):
                for j in range(i + 1):
                    acc = 0
                    for p in range(i, m):
                        acc = acc + _mul_conj(w[p, j], w[p, i])
                    if i == j:
                        out[i, i] = acc.real
                    else:
                        out[i, j] = acc
                        out[j, i] = acc.conjugate()
    return result, status


def sliding_trace(const cplx[:, :] z, Py_ssize_t k, double eps, bint relative):
    """Covariance-ratio trace over adjacent disjoint windows shifted by one sample.

    Uses tr((Z_o Z_o^H)^-1 Z_n Z_n^H) = ||L^-1 Z_n||_F^2 with L the Cholesky
    factor of the (loaded) old-window Gram matrix. Returns ``(stats, fail)``
    where ``fail`` is the first window start whose factorization failed, or -1.
    """
    cdef Py_ssize_t m = z.shape[0], length = z.shape[1]
    cdef Py_ssize_t n = length - 2 * k + 1
    cdef Py_ssize_t s, i, p, t, fail = -1
    cdef double load, total
    cdef cplx acc
    stats = np.zeros(max(n, 0), dtype=np.float64)
    work = np.zeros((m, m), dtype=np.complex128)
    ybuf = np.zeros(m, dtype=np.complex128)
    cdef double[::1] out = stats
    cdef cplx[:, ::1] r = work
    cdef cplx[::1] y = ybuf
    with nogil:
        for s in range(n):
            _window_gram(z, s, k, r, m)
            load = _loading(r, m, eps, relative)
            for i in range(m):
                r[i, i] = r[i, i].real + load
            if _cholesky_lower(r, m) != 0:
                fail = s
                break
            total = 0.0
            for t in range(s + k, s + 2 * k):
                for i in range(m):
                    acc = z[i, t]
                    for p in range(i):
                        acc = acc - r[i, p] * y[p]
                    y[i] = acc / r[i, i].real
                    total += _abs2(y[i])
            out[s] = total
    return stats, fail
