"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``.

Signatures and return conventions match the compiled module exactly.
"""

import math

import numpy as np


def strict_flips(a, b):
    """Elementwise strict sign change between a and b (no product, no underflow)."""
    return ((a < 0.0) & (b > 0.0)) | ((a > 0.0) & (b < 0.0))


def count_flips(v):
    v = np.asarray(v, dtype=float)
    flips = int(np.count_nonzero(strict_flips(v[:-1], v[1:])))
    zeros = int(np.count_nonzero(v == 0.0))
    return flips, zeros


def count_flips_columns(x):
    x = np.asarray(x, dtype=float)
    return np.count_nonzero(strict_flips(x[:-1], x[1:]), axis=0).astype(np.int64)


def trig_sum(lam, a, b, t):
    u = np.multiply.outer(np.asarray(t, dtype=float), lam)
    return np.cos(u) @ a + np.sin(u) @ b


def refine_roots(lam, a, b, left, right, iters):
    lo = np.array(left, dtype=float)
    hi = np.array(right, dtype=float)
    flo = trig_sum(lam, a, b, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = trig_sum(lam, a, b, mid)
        exact = fmid == 0.0
        same = (fmid < 0.0) == (flo < 0.0)
        move_lo = same & ~exact
        lo = np.where(move_lo | exact, mid, lo)
        flo = np.where(move_lo, fmid, flo)
        hi = np.where(~move_lo, mid, hi)
    return 0.5 * (lo + hi)


def eval_field(lam, a, b, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.multiply.outer(x, lam)
    v = np.multiply.outer(np.abs(y), lam)
    c, s = np.cos(u), np.sin(u)
    re = (np.cosh(v) * (c * a + s * b)).sum(axis=1)
    im = (np.sinh(v) * (c * b - s * a)).sum(axis=1)
    sgn = np.where(y < 0.0, -1.0, 1.0)
    return re + 1j * (sgn * im)


def winding(f):
    f = np.asarray(f, dtype=complex)
    q = np.roll(f, -1)
    steps = np.arctan2(q.imag * f.real - q.real * f.imag,
                       q.real * f.real + q.imag * f.imag)
    return float(steps.sum() / (2.0 * math.pi)), float(np.abs(steps).max())


def permanent(A):
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    cols = [A[:, j].copy() for j in range(n)]
    rs = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        diff = gray ^ prev
        j = diff.bit_length() - 1
        if gray & diff:
            rs += cols[j]
        else:
            rs -= cols[j]
        prev = gray
        prod = complex(np.prod(rs))
        if bin(gray).count("1") % 2:
            total -= prod
        else:
            total += prod
    return -total if n % 2 else total


def hafnian(A):
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n % 2:
        return 0.0 + 0.0j
    if n == 0:
        return 1.0 + 0.0j
    dp = {0: 1.0 + 0.0j}

    def solve(mask):
        if mask in dp:
            return dp[mask]
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        acc = 0.0 + 0.0j
        j = i + 1
        while rest >> j:
            if (rest >> j) & 1:
                acc += A[i, j] * solve(rest ^ (1 << j))
            j += 1
        dp[mask] = acc
        return acc

    return complex(solve((1 << n) - 1))
