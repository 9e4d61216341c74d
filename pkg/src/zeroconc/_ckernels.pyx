# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a twin with the same name and signature in
``_pykernels``; ``zeroconc.kernels`` picks one of the two at import.
"""

import numpy as np

from libc.math cimport sin, cos, expm1, atan2, fabs, M_PI


cdef inline int _underflow_flip(double a, double b) noexcept nogil:
    # a * b can underflow to 0 for a genuine flip; callers test a * b < 0
    # first and come here only when the product is exactly zero
    return (a < 0.0 and b > 0.0) or (a > 0.0 and b < 0.0)


def count_flips(const double[::1] v):
    """Number of strict sign flips and number of exact grid zeros."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef Py_ssize_t flips = 0, zeros = 0
    cdef double p
    with nogil:
        for i in range(n - 1):
            p = v[i] * v[i + 1]
            flips += p < 0.0
            if p == 0.0:
                flips += _underflow_flip(v[i], v[i + 1])
        for i in range(n):
            if v[i] == 0.0:
                zeros += 1
    return flips, zeros


def count_flips_columns(const double[:, ::1] x):
    """Sign flips down each column of a C-ordered (n_t, n_paths) block."""
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double p
    out = np.zeros(m, dtype=np.int64)
    cdef long long[::1] o = out
    with nogil:
        for i in range(n - 1):
            for j in range(m):
                # no branch on the sign itself: random signs defeat prediction
                p = x[i, j] * x[i + 1, j]
                o[j] += p < 0.0
                if p == 0.0:
                    o[j] += _underflow_flip(x[i, j], x[i + 1, j])
    return out


cdef inline double _trig_sum(const double[::1] lam, const double[::1] a,
                             const double[::1] b, double t) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0, u
    for j in range(lam.shape[0]):
        u = lam[j] * t
        s += a[j] * cos(u) + b[j] * sin(u)
    return s


def trig_sum(const double[::1] lam, const double[::1] a, const double[::1] b,
             const double[::1] t):
    """sum_j a_j cos(lam_j t) + b_j sin(lam_j t) at each t."""
    cdef Py_ssize_t k, n = t.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for k in range(n):
            o[k] = _trig_sum(lam, a, b, t[k])
    return out


def refine_roots(const double[::1] lam, const double[::1] a, const double[::1] b,
                 const double[::1] left, const double[::1] right, int iters):
    """Bisect each bracketing cell ``iters`` times; returns cell midpoints."""
    cdef Py_ssize_t k, n = left.shape[0]
    cdef int it
    cdef double lo, hi, mid, flo, fmid
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for k in range(n):
            lo = left[k]
            hi = right[k]
            flo = _trig_sum(lam, a, b, lo)
            for it in range(iters):
                mid = 0.5 * (lo + hi)
                fmid = _trig_sum(lam, a, b, mid)
                if fmid == 0.0:
                    lo = mid
                    hi = mid
                    break
                if (fmid < 0.0) == (flo < 0.0):
                    lo = mid
                    flo = fmid
                else:
                    hi = mid
            o[k] = 0.5 * (lo + hi)
    return out


def eval_field(const double[::1] lam, const double[::1] a, const double[::1] b,
               const double[::1] x, const double[::1] y):
    """Entire extension sum_j a_j cos(lam_j z) + b_j sin(lam_j z), z = x + iy.

    The imaginary part is built from sinh(lam |y|) with the sign of y applied
    afterwards, so f(conj z) == conj f(z) holds bit for bit.
    """
    cdef Py_ssize_t k, j, n = x.shape[0], m = lam.shape[0]
    cdef double re, im, u, em, e, c, s, ch, sh, sgn
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for k in range(n):
            re = 0.0
            im = 0.0
            sgn = -1.0 if y[k] < 0.0 else 1.0
            for j in range(m):
                u = lam[j] * x[k]
                # one expm1 gives both cosh and an accurate sinh near 0
                em = expm1(lam[j] * fabs(y[k]))
                e = em + 1.0
                c = cos(u)
                s = sin(u)
                ch = 0.5 * (e + 1.0 / e)
                sh = 0.5 * em * (1.0 + 1.0 / e)
                re += ch * (a[j] * c + b[j] * s)
                im += sh * (b[j] * c - a[j] * s)
            o[k] = re + 1j * (sgn * im)
    return out


def winding(const double complex[::1] f):
    """Accumulated argument of a closed contour sample, in turns.

    Returns (turns, largest single argument step in radians).
    """
    cdef Py_ssize_t k, n = f.shape[0]
    cdef double total = 0.0, step, biggest = 0.0
    cdef double complex p, q
    with nogil:
        for k in range(n):
            p = f[k]
            q = f[k + 1] if k + 1 < n else f[0]
            # arg(q / p) without the division
            step = atan2(q.imag * p.real - q.real * p.imag,
                         q.real * p.real + q.imag * p.imag)
            total += step
            if fabs(step) > biggest:
                biggest = fabs(step)
    return total / (2.0 * M_PI), biggest


def permanent(const double complex[:, ::1] A):
    """Ryser's formula walked in Gray-code order, O(2^n n)."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j
    cdef unsigned long long k, gray, prev = 0, diff, limit
    cdef int sign
    cdef double complex total = 0.0, prod
    if n == 0:
        return 1.0 + 0.0j
    rs_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] rs = rs_arr
    limit = (<unsigned long long> 1) << n
    with nogil:
        for k in range(1, limit):
            gray = k ^ (k >> 1)
            diff = gray ^ prev
            j = 0
            while (diff >> j) & 1 == 0:
                j += 1
            if gray & diff:
                for i in range(n):
                    rs[i] = rs[i] + A[i, j]
            else:
                for i in range(n):
                    rs[i] = rs[i] - A[i, j]
            prev = gray
            prod = 1.0
            for i in range(n):
                prod = prod * rs[i]
            # parity of |S|
            sign = 1
            diff = gray
            while diff:
                sign = -sign
                diff &= diff - 1
            if sign > 0:
                total = total + prod
            else:
                total = total - prod
    if n % 2 == 1:
        total = -total
    return complex(total)


def hafnian(const double complex[:, ::1] A):
    """Sum over perfect matchings, by dynamic programming on vertex subsets."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j
    cdef unsigned long long mask, rest, full
    if n % 2 == 1:
        return 0.0 + 0.0j
    if n == 0:
        return 1.0 + 0.0j
    full = (<unsigned long long> 1) << n
    dp_arr = np.zeros(full, dtype=np.complex128)
    cdef double complex[::1] dp = dp_arr
    dp[0] = 1.0
    with nogil:
        for mask in range(1, full):
            # lowest vertex must be matched to some other member of the set
            i = 0
            while (mask >> i) & 1 == 0:
                i += 1
            rest = mask ^ ((<unsigned long long> 1) << i)
            if rest == 0:
                continue
            for j in range(i + 1, n):
                if (rest >> j) & 1:
                    dp[mask] = dp[mask] + A[i, j] * dp[rest ^ ((<unsigned long long> 1) << j)]
    return complex(dp[full - 1])
