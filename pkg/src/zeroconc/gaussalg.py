"""Gaussian linear algebra for the field on horizontal lines of the strip.

On the line Im z = y the field is written G = sqrt(v_R) X + i |y| sqrt(v_I) Y
with X, Y standard real Gaussians. This module computes their correlations
along the lattice x_star * j, assembles joint covariance matrices, conditions
on blocks, and estimates product moments.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import kernels
from .spectral import (
    DivergenceError,
    QuadratureError,
    characteristic,
    covariance,
    phi,
    r1_prime,
    r2_second,
    spectral_transform,
    y_grid_points,
)

PSD_TOL = 1e-10
PERMANENT_CAP = 12
HAFNIAN_CAP = 10


class NotPSDError(np.linalg.LinAlgError):
    """Assembled covariance has an eigenvalue below -PSD_TOL."""


def _check_half_strip(model, *ys):
    for y in ys:
        if np.any(np.abs(y) >= model.kappa / 2.0):
            raise DivergenceError(f"need |Im z| < kappa/2 = {model.kappa / 2}")


def complex_cov(model, z, w):
    """(E f(z) conj f(w), E f(z) f(w)) = (r(z - conj w), r(z - w))."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_half_strip(model, z.imag, w.imag)
    k = characteristic(model, z - np.conj(w))
    p = characteristic(model, z - w)
    if k.ndim == 0:
        return complex(k), complex(p)
    return k, p


@dataclass
class ReImCov:
    """block[a, b] = Cov(part_a f(iy), part_b f(x+iy)), parts ordered (Re, Im).

    ``closed`` holds the same block from r(x) and r(x+2iy); ``gap`` is the
    largest difference between the two routes.
    """

    x: float
    y: float
    block: np.ndarray
    closed: np.ndarray
    gap: float


def reim_cov(model, x, y, check=1e-8):
    """Re/Im cross-covariances between f(iy) and f(x+iy), by two routes."""
    _check_half_strip(model, y)
    x = float(x)
    y = float(y)

    def amp_cos(lam):
        c = np.cosh(lam * y)
        s = np.sinh(lam * y)
        return np.stack([c * c, s * s], axis=1)

    def amp_sin(lam):
        return (np.cosh(lam * y) * np.sinh(lam * y))[:, None]

    rr, ii = spectral_transform(model, np.array([x]), amp_cos, "cos", growth=2 * abs(y))[0]
    cs = spectral_transform(model, np.array([x]), amp_sin, "sin", growth=2 * abs(y))[0, 0]
    block = np.array([[rr, -cs], [cs, ii]])
    r_x = covariance(model, x)
    r_shift = complex(characteristic(model, x + 2j * y))
    closed = np.array([
        [0.5 * (r_shift.real + r_x), 0.5 * r_shift.imag],
        [-0.5 * r_shift.imag, 0.5 * (r_shift.real - r_x)],
    ])
    gap = float(np.max(np.abs(block - closed)))
    if check is not None and gap > check:
        raise QuadratureError(f"Re/Im covariance routes differ by {gap:.2e}", gap)
    return ReImCov(x, y, block, closed, gap)


def v_moments(model, y):
    """(v_R, v_I) = (int cosh^2(lam y) d rho, int lam^2 phi^2(lam y) d rho)."""
    _check_half_strip(model, y)
    y = float(y)

    def amp(lam):
        c = np.cosh(lam * y)
        return np.stack([c * c, (lam * phi(lam * y)) ** 2], axis=1)

    vr, vi = spectral_transform(model, np.array([0.0]), amp, "cos", growth=2 * abs(y))[0]
    return float(vr), float(vi)


def beta_y(model, y):
    """2 r(0) / (r(2iy) + r(0))."""
    r2 = complex(characteristic(model, 2j * y)).real
    return 2.0 / (r2 + 1.0)


@dataclass
class CorrVector:
    """Correlations between (X, Y) at iy and at x+iy.

    rr = Corr(X_0, X_x), ii = Corr(Y_0, Y_x), ir = Corr(X_0, Y_x),
    ri = Corr(Y_0, X_x) = -ir.
    """

    rr: np.ndarray | float
    ii: np.ndarray | float
    ri: np.ndarray | float
    ir: np.ndarray | float

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.rr, self.ii, self.ri, self.ir), axis=-1)

    def norm(self, kind="euclid"):
        a = self.as_array()
        if kind == "euclid":
            return np.sqrt(np.sum(a * a, axis=-1))
        if kind == "l1":
            return np.sum(np.abs(a), axis=-1)
        raise ValueError(f"unknown norm {kind!r}")


def corr_vector(model, x, y):
    """Correlation vector at horizontal offset x on the line Im z = y.

    The Im-Re cross term carries the sign of y (taken as +1 at y = 0), which
    is what the standardization by |y| produces.
    """
    if abs(y) >= model.kappa / 2.0:
        raise DivergenceError(f"need |y| < kappa/2 = {model.kappa / 2}")
    x_arr = np.asarray(x, dtype=float)
    vr, vi = v_moments(model, y)
    sgn = -1.0 if y < 0 else 1.0
    ii = -np.asarray(r2_second(model, x_arr, y)) / vi
    ir = sgn * np.asarray(r1_prime(model, x_arr, 2.0 * y)) / math.sqrt(vr * vi)
    b = beta_y(model, y)
    rr = (1.0 - b) * ii + b * np.asarray(covariance(model, x_arr))
    if x_arr.ndim == 0:
        return CorrVector(float(rr), float(ii), float(-ir), float(ir))
    return CorrVector(rr, ii, -ir, ir)


def _corr_tables(model, xs, ys):
    """Correlation components on the grid xs x ys, each shape (len(xs), len(ys))."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    growth = 2.0 * float(np.max(np.abs(ys)))

    def amp1(lam):
        return -lam[:, None] * phi(2.0 * np.multiply.outer(lam, ys))

    def amp2(lam):
        return -(lam[:, None] * phi(np.multiply.outer(lam, ys))) ** 2

    r1 = spectral_transform(model, xs, amp1, "sin", growth=growth, check=False)
    r2 = spectral_transform(model, xs, amp2, "cos", growth=growth, check=False)
    v = np.array([v_moments(model, y) for y in ys])
    vr, vi = v[:, 0], v[:, 1]
    sgn = np.where(ys < 0, -1.0, 1.0)
    b = np.array([beta_y(model, y) for y in ys])
    ii = -r2 / vi
    ir = sgn * r1 / np.sqrt(vr * vi)
    rr = (1.0 - b) * ii + b * np.asarray(covariance(model, xs))[:, None]
    return rr, ii, ir


@dataclass
class OmegaTable:
    """omega(k) for k = 1..horizon and the y grid used for the supremum."""

    ks: np.ndarray
    values: np.ndarray
    ys: np.ndarray
    j_max: int
    last_increment: float
    norm: str

    def at(self, k):
        return float(self.values[int(k) - 1])

    def smallest_k(self, level):
        """Least k with omega(k) <= level, or None."""
        hit = np.flatnonzero(self.values <= level)
        return int(self.ks[hit[0]]) if hit.size else None


def omega_table(model, x_star, kappa_prime, horizon=50, y_grid=21, norm="euclid", j_max=None):
    """4 sup_y sum_{j=k}^{j_max} ||corr(j x_star + iy)|| for k = 1..horizon.

    ``y_grid`` is a point count for an interior grid of (-kappa', kappa') or
    an explicit array of y values. ``j_max`` defaults to 10 * horizon.
    """
    if not 0 < kappa_prime < model.kappa / 2:
        raise ValueError(f"need 0 < kappa' < kappa/2 = {model.kappa / 2}")
    if not x_star > 0:
        raise ValueError("x_star must be positive")
    j_max = 10 * horizon if j_max is None else int(j_max)
    ys = y_grid_points(kappa_prime, y_grid) if np.ndim(y_grid) == 0 else np.asarray(y_grid, dtype=float)
    if np.any(np.abs(ys) >= kappa_prime):
        raise ValueError("y grid must lie inside (-kappa', kappa')")
    xs = x_star * np.arange(1, j_max + 1)
    rr, ii, ir = _corr_tables(model, xs, ys)
    if norm == "euclid":
        mag = np.sqrt(rr * rr + ii * ii + 2.0 * ir * ir)
    elif norm == "l1":
        mag = np.abs(rr) + np.abs(ii) + 2.0 * np.abs(ir)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    tails = np.cumsum(mag[::-1], axis=0)[::-1]
    ks = np.arange(1, horizon + 1)
    values = 4.0 * np.max(tails[ks - 1], axis=1)
    return OmegaTable(ks, values, ys, j_max, float(np.max(mag[-1])), norm)


def omega(model, k, x_star, kappa_prime, horizon=50, y_grid=21, norm="euclid"):
    """omega(k); see omega_table."""
    if not 1 <= k <= horizon:
        raise ValueError("need 1 <= k <= horizon")
    return omega_table(model, x_star, kappa_prime, horizon, y_grid, norm).at(k)


@dataclass
class CovBlocks:
    """Joint covariance of standardized (X_j, Y_j) at lattice indices.

    ``labels`` names each coordinate, e.g. ('X', 0), ('Y', 0), ('X', 5).
    """

    sigma: np.ndarray
    labels: list
    indices: list
    y: float
    x_star: float
    min_eigenvalue: float

    @property
    def defect(self):
        return np.eye(self.sigma.shape[0]) - self.sigma

    @property
    def s_norm(self):
        return float(np.max(np.sum(np.abs(self.defect), axis=1))) if self.sigma.size else 0.0

    @property
    def dim(self):
        return self.sigma.shape[0]

    def origin_coordinates(self):
        return [i for i, (_, j) in enumerate(self.labels) if j == self.indices[0]]

    def to_csv(self, path):
        names = [f"{p}{j}" for p, j in self.labels]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([""] + names)
            for name, row in zip(names, self.sigma):
                w.writerow([name] + [repr(float(v)) for v in row])


def _is_lattice_set(J):
    return all(isinstance(j, (int, np.integer)) and j >= 0 for j in J)


def assemble_joint_cov(model, y, J, x_star=1.0, include_origin=True):
    """Covariance of (X_0, Y_0, {X_j, Y_j}_{j in J}) on the line Im z = y.

    At y = 0 only the X coordinates are kept.
    """
    J = [int(j) for j in J]
    if not _is_lattice_set(J) or len(set(J)) != len(J):
        raise ValueError("J must be distinct nonnegative integers")
    idx = ([0] if include_origin else []) + [j for j in J if not (include_origin and j == 0)]
    with_im = y != 0.0
    parts = ("X", "Y") if with_im else ("X",)
    labels = [(p, j) for j in idx for p in parts]
    n = len(labels)
    if n == 0:
        return CovBlocks(np.zeros((0, 0)), [], [], float(y), float(x_star), 0.0)
    gaps = sorted({abs(b - a) for a in idx for b in idx if b != a})
    table = {}
    if gaps:
        cv = corr_vector(model, x_star * np.array(gaps, dtype=float), y)
        for g, rr, ii, ir in zip(gaps, cv.rr, cv.ii, cv.ir):
            table[g] = (rr, ii, ir)
    sigma = np.eye(n)
    pos = {lab: i for i, lab in enumerate(labels)}
    for a in idx:
        for b in idx:
            if a == b:
                continue
            rr, ii, ir = table[abs(b - a)]
            sign = 1.0 if b > a else -1.0
            sigma[pos[("X", a)], pos[("X", b)]] = rr
            if with_im:
                sigma[pos[("Y", a)], pos[("Y", b)]] = ii
                xa, yb = pos[("X", a)], pos[("Y", b)]
                sigma[xa, yb] = sigma[yb, xa] = sign * ir
    low = float(np.linalg.eigvalsh(sigma)[0])
    if low < -PSD_TOL:
        raise NotPSDError(f"joint covariance has eigenvalue {low:.3e}")
    return CovBlocks(sigma, labels, idx, float(y), float(x_star), low)


def psd_factor(sigma):
    """Matrix L with L L^T = sigma, clipping eigenvalues in (-PSD_TOL, 0)."""
    w, v = np.linalg.eigh(sigma)
    if w[0] < -PSD_TOL:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below tolerance")
    if w[0] > 1e-12 * max(1.0, w[-1]):
        return np.linalg.cholesky(sigma)
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass
class ConditionalGaussian:
    """E[Z_1 | Z_2] = mean_map @ Z_2 and Cov(Z_1 | Z_2) = cond_cov."""

    mean_map: np.ndarray
    cond_cov: np.ndarray
    first: list
    second: list
    condition_number: float


def _split_indices(n, split):
    if isinstance(split, (int, np.integer)):
        first = list(range(int(split)))
    else:
        first = [int(i) for i in split]
    second = [i for i in range(n) if i not in set(first)]
    return first, second


def schur_condition(cov, split):
    """Condition the first block on the rest via the Schur complement.

    ``split`` is the size of the leading block or an explicit index list.
    """
    sigma = cov.sigma if isinstance(cov, CovBlocks) else np.asarray(cov, dtype=float)
    first, second = _split_indices(sigma.shape[0], split)
    s11 = sigma[np.ix_(first, first)]
    s12 = sigma[np.ix_(first, second)]
    s22 = sigma[np.ix_(second, second)]
    cond = float(np.linalg.cond(s22)) if second else 1.0
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"conditioning block is singular (cond {cond:.2e})")
    if second:
        mean_map = np.linalg.solve(s22, s12.T).T
    else:
        mean_map = np.zeros((len(first), 0))
    cond_cov = s11 - mean_map @ s12.T
    return ConditionalGaussian(mean_map, 0.5 * (cond_cov + cond_cov.T), first, second, cond)


@dataclass
class DiagDominanceReport:
    omega: float
    entry_max: float
    entry_bound: float
    mean_sup: float
    mean_bound: float
    density: float
    density_bound: float

    @property
    def entries_ok(self):
        return self.entry_max <= self.entry_bound + 1e-12

    @property
    def mean_ok(self):
        return self.mean_sup <= self.mean_bound * (1 + 1e-12) + 1e-15

    @property
    def density_ok(self):
        return self.density <= self.density_bound * (1 + 1e-12)

    @property
    def all_ok(self):
        return self.entries_ok and self.mean_ok and self.density_ok


def check_diag_dominant(cov, z, split=None):
    """Evaluate the three consequences of ||I - Sigma||_inf < 1.

    Parameters
    ----------
    cov : CovBlocks or ndarray
    z : ndarray
        Either a full vector (length n; the trailing block is the
        conditioning value) or just the conditioning block.
    split : int or list, optional
        Leading block; defaults to the origin coordinates for CovBlocks and
        the first coordinate otherwise.
    """
    if isinstance(cov, CovBlocks):
        sigma = cov.sigma
        split = cov.origin_coordinates() if split is None else split
    else:
        sigma = np.asarray(cov, dtype=float)
        split = 1 if split is None else split
    n = sigma.shape[0]
    w = float(np.max(np.sum(np.abs(np.eye(n) - sigma), axis=1)))
    if w >= 1.0:
        raise ValueError(f"||I - Sigma||_inf = {w:.3f} is not below 1")
    hat = [w ** i / (1.0 - w) for i in range(3)]
    cg = schur_condition(sigma, split)
    z = np.asarray(z, dtype=float)
    if z.size == n:
        z_full, z2 = z, z[cg.second]
    elif z.size == len(cg.second):
        z2 = z
        z_full = np.zeros(n)
        z_full[cg.second] = z2
    else:
        raise ValueError("z has the wrong length")
    s11 = sigma[np.ix_(cg.first, cg.first)]
    entry_max = float(np.max(np.abs(s11 - cg.cond_cov)))
    mean = cg.mean_map @ z2
    mean_sup = float(np.max(np.abs(mean))) if mean.size else 0.0
    z2_sup = float(np.max(np.abs(z2))) if z2.size else 0.0
    prec = np.linalg.inv(sigma)
    _, logdet = np.linalg.slogdet(sigma)
    quad = float(z_full @ (z_full - prec @ z_full))
    density = math.exp(-0.5 * logdet + 0.5 * quad)
    density_bound = hat[0] ** (n / 2.0) * math.exp(hat[1] * float(z_full @ z_full) / 2.0)
    return DiagDominanceReport(w, entry_max, hat[2], mean_sup, hat[1] * z2_sup,
                               density, density_bound)


# -- product moments ------------------------------------------------------

@dataclass
class WickMoment:
    """E prod |Z_l|^2 with the row-sum bound prod_l sum_l' |K_{l l'}|."""

    value: float
    bound: float
    method: str


def wick_second_moment(cov, pseudo=None):
    """E prod_l |Z_l|^2 for a centered complex Gaussian vector.

    With ``pseudo`` omitted (circular vector) this is the permanent of the
    covariance K_{l l'} = E Z_l conj Z_l'. When a pseudo-covariance
    P_{l l'} = E Z_l Z_l' is supplied the moment is the hafnian of the
    covariance matrix of (Z, conj Z).
    """
    K = np.atleast_2d(np.asarray(cov, dtype=complex))
    n = K.shape[0]
    if K.shape != (n, n):
        raise ValueError("covariance must be square")
    bound = float(np.prod(np.sum(np.abs(K), axis=1)))
    if pseudo is None:
        if n > PERMANENT_CAP:
            raise ValueError(f"permanent limited to n <= {PERMANENT_CAP}")
        value = kernels.permanent(K).real
        if value > bound + 1e-9:
            raise ArithmeticError(f"permanent {value} exceeds row-sum bound {bound}")
        return WickMoment(float(value), bound, "permanent")
    P = np.atleast_2d(np.asarray(pseudo, dtype=complex))
    if n > HAFNIAN_CAP:
        raise ValueError(f"hafnian limited to n <= {HAFNIAN_CAP}")
    big = np.block([[P, K], [K.T, np.conj(P)]])
    return WickMoment(float(kernels.hafnian(big).real), bound, "hafnian")


def lattice_complex_cov(model, y, J, x_star=1.0):
    """(K, P) for G_j = f(j x_star + iy), j in J."""
    z = x_star * np.asarray(J, dtype=float) + 1j * y
    zz = z[:, None]
    return complex_cov(model, zz, z[None, :])


def abs_moment(v_re, v_im, p):
    """E |U + iV|^p for independent centered U, V with variances v_re, v_im."""
    if p == 0:
        return 1.0
    a, b = float(v_re), float(v_im)
    if b == 0.0 or a == 0.0:
        s = math.sqrt(a + b)
        if p <= -1:
            return math.inf
        return s ** p * 2.0 ** (p / 2.0) * special.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)
    ang, _ = integrate.quad(
        lambda t: (a * math.cos(t) ** 2 + b * math.sin(t) ** 2) ** (p / 2.0),
        0.0, 0.5 * math.pi, epsabs=1e-13, epsrel=1e-12)
    radial = 2.0 ** (p / 2.0) * special.gamma(1.0 + p / 2.0)
    return radial * ang * 2.0 / math.pi


@dataclass
class FracMoment:
    eps: float
    m: int
    k: int
    y: float
    pos: float
    pos_se: float
    neg: float
    neg_se: float
    reference_pos: float
    reference_neg: float
    independent_pos: float
    independent_neg: float
    reps: int

    @property
    def ratio_pos(self):
        return self.pos / self.reference_pos

    @property
    def ratio_neg(self):
        return self.neg / self.reference_neg


def _line_variances(model, y):
    vr, vi = v_moments(model, y)
    return vr, y * y * vi


def frac_moment_mc(model, y, k, m, eps, reps=100_000, seed=0, x_star=1.0):
    """Monte Carlo of E prod_{j=1..m} |G_{jk}(y)|^{+-eps}.

    The reference is (E|G_0(y)|^{+-2 eps})^{m/2}; the product of marginal
    moments (E|G_0(y)|^{+-eps})^m is reported too. Negative moments need
    eps <= 0.25 for a finite variance of the estimator; beyond that they are
    returned as NaN with a warning, and eps >= 0.5 is rejected.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    if eps >= 0.5:
        raise ValueError("negative fractional moments need eps < 1/2")
    if m < 1 or k < 1:
        raise ValueError("m and k must be positive")
    if abs(y) >= model.kappa / 2:
        raise DivergenceError(f"need |y| < kappa/2 = {model.kappa / 2}")
    vr, vi_line = _line_variances(model, y)
    ref_pos = abs_moment(vr, vi_line, 2 * eps) ** (m / 2.0)
    ref_neg = abs_moment(vr, vi_line, -2 * eps) ** (m / 2.0)
    ind_pos = abs_moment(vr, vi_line, eps) ** m
    ind_neg = abs_moment(vr, vi_line, -eps) ** m
    if eps == 0:
        return FracMoment(0.0, m, k, y, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, int(reps))
    J = [k * j for j in range(1, m + 1)]
    blocks = assemble_joint_cov(model, y, J, x_star, include_origin=False)
    L = psd_factor(blocks.sigma)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    log_mod = np.zeros(reps)
    done = 0
    chunk = 1 << 15
    scale_x = math.sqrt(vr)
    scale_y = math.sqrt(vi_line)
    while done < reps:
        n = min(chunk, reps - done)
        z = rng.standard_normal((n, blocks.dim)) @ L.T
        if y != 0.0:
            g2 = (scale_x * z[:, 0::2]) ** 2 + (scale_y * z[:, 1::2]) ** 2
        else:
            g2 = (scale_x * z) ** 2
        log_mod[done:done + n] = 0.5 * np.sum(np.log(g2), axis=1)
        done += n
    pos = np.exp(eps * log_mod)
    out_neg, neg_se = math.nan, math.nan
    if eps <= 0.25:
        neg = np.exp(-eps * log_mod)
        out_neg = float(neg.mean())
        neg_se = float(neg.std(ddof=1) / math.sqrt(reps))
    else:
        warnings.warn("negative moment estimator has infinite variance for eps > 0.25",
                      RuntimeWarning, stacklevel=2)
    return FracMoment(float(eps), int(m), int(k), float(y),
                      float(pos.mean()), float(pos.std(ddof=1) / math.sqrt(reps)),
                      out_neg, neg_se, ref_pos, ref_neg, ind_pos, ind_neg, int(reps))


def gaussian_neg_moment_2d(mean, cov, q, n_theta=128, n_r=64):
    """E |W|^{-q} for W ~ N(mean, cov) in R^2, 0 < q < 2.

    Polar coordinates with r = u^2 remove the origin singularity.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    prec = np.linalg.inv(cov)
    norm = 1.0 / (2.0 * math.pi * math.sqrt(np.linalg.det(cov)))
    top = float(np.linalg.eigvalsh(cov)[-1])
    r_max = float(np.hypot(*mean)) + 12.0 * math.sqrt(top)
    u_max = math.sqrt(r_max)
    x, w = np.polynomial.legendre.leggauss(n_r)
    u = 0.5 * u_max * (x + 1.0)
    wu = 0.5 * u_max * w
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    r = u * u
    px = np.multiply.outer(r, np.cos(theta)) - mean[0]
    py = np.multiply.outer(r, np.sin(theta)) - mean[1]
    expo = -0.5 * (prec[0, 0] * px * px + 2 * prec[0, 1] * px * py + prec[1, 1] * py * py)
    radial = 2.0 * u ** (3.0 - 2.0 * q) * wu
    return float(norm * (2.0 * math.pi / n_theta) * np.sum(radial[:, None] * np.exp(expo)))


@dataclass
class ConditionalMomentCheck:
    values: np.ndarray = field(repr=False)
    maximum: float
    unconditional: float


def conditional_neg_moment(model, y, k, m, eps, n_cond=100, seed=0, x_star=1.0):
    """E[|G_0|^{-4 eps} | G_k, ..., G_mk] over random conditioning values.

    Conditioning values are drawn from the joint law itself.
    """
    if y == 0.0:
        raise ValueError("needs y != 0 so that G_0 is two-dimensional")
    J = [k * j for j in range(1, m + 1)]
    blocks = assemble_joint_cov(model, y, J, x_star, include_origin=True)
    cg = schur_condition(blocks, blocks.origin_coordinates())
    vr, vi_line = _line_variances(model, y)
    scale = np.diag([math.sqrt(vr), math.sqrt(vi_line)])
    cov = scale @ cg.cond_cov @ scale
    L = psd_factor(blocks.sigma)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    draws = rng.standard_normal((n_cond, blocks.dim)) @ L.T
    vals = np.array([
        gaussian_neg_moment_2d(scale @ (cg.mean_map @ d[cg.second]), cov, 4.0 * eps)
        for d in draws
    ])
    base = gaussian_neg_moment_2d(np.zeros(2), np.diag([vr, vi_line]), 4.0 * eps)
    return ConditionalMomentCheck(vals, float(vals.max()), base)
