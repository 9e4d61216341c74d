"""Gaussian paths, their entire extensions, and lattice processes.

Paths come from a finite spectral synthesis

    X(t) = sum_j sqrt(2 w_j) (xi_j cos(lam_j t) + eta_j sin(lam_j t)),

whose covariance is the quadrature sum r~(t) = sum_j 2 w_j cos(lam_j t).
Replacing t by a complex z gives an entire function that uses the same
(xi, eta) draw, so path and strip field are one realization.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .spectral import QuadratureError, SpectralModel, covariance

# frequency-tail mass left out of a synthesis before renormalization
_TAIL_MASS = 1e-12
_MAX_NODES = 1 << 14
_PANEL_NODES = 2048


def replicate_seed(master, index, stream=0):
    """Independent seed for replicate ``index`` of ``stream``."""
    return np.random.SeedSequence(int(master), spawn_key=(int(stream), int(index)))


def _as_seed(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def seed_label(seed):
    seed = _as_seed(seed)
    return f"{seed.entropy}:{'/'.join(str(k) for k in seed.spawn_key)}"


@dataclass(frozen=True, eq=False)
class SynthesisScheme:
    """Positive frequencies and weights with sum(2 * weights) == 1."""

    nodes: np.ndarray
    weights: np.ndarray
    model: SpectralModel | None = None
    design_horizon: float = 0.0
    sup_error: float = 0.0

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if np.any(self.nodes <= 0) or np.any(self.weights <= 0):
            raise ValueError("nodes and weights must be positive")
        if abs(2.0 * self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must satisfy sum(2 w) = 1")

    @classmethod
    def single(cls, lam=1.0):
        """One frequency: the covariance is exactly cos(lam t)."""
        return cls(np.array([float(lam)]), np.array([0.5]))

    @property
    def size(self):
        return self.nodes.size

    @property
    def lambda_max(self):
        return float(self.nodes.max())

    @property
    def max_dt(self):
        """Coarsest grid step allowed by the Nyquist guard."""
        return math.pi / (4.0 * self.lambda_max)

    @property
    def kappa(self):
        return math.inf if self.model is None else self.model.kappa

    @property
    def amplitudes(self):
        return np.sqrt(2.0 * self.weights)

    def covariance(self, t):
        """Synthetic covariance sum_j 2 w_j cos(lam_j t)."""
        t = np.asarray(t, dtype=float)
        out = kernels.trig_sum(self.nodes, 2.0 * self.weights,
                               np.zeros_like(self.weights), t.ravel())
        return out.reshape(t.shape)

    def alpha(self):
        """Zero intensity of the synthetic process."""
        return math.sqrt(float(np.sum(2.0 * self.weights * self.nodes ** 2))) / math.pi

    def describe(self):
        return {
            "n_nodes": int(self.size),
            "lambda_max": self.lambda_max,
            "design_horizon": self.design_horizon,
            "sup_error": self.sup_error,
            "model": None if self.model is None else self.model.describe(),
        }


def _spectral_cutoff(model):
    """Frequency beyond which the spectral mass is below the tail budget."""
    if model.family in ("band", "tabulated"):
        return float(model.K if model.family == "band" else model.grid[-1])
    if model.family == "gaussian":
        from scipy import special
        return float(-special.ndtri(0.5 * _TAIL_MASS))
    return -math.log(_TAIL_MASS)


def _half_line_rule(model, n):
    L = _spectral_cutoff(model)
    if model.family == "tabulated":
        # one rule per grid cell keeps every panel on a linear piece
        cells = model.grid.size - 1
        per = max(2, math.ceil(n / cells))
        x, w = np.polynomial.legendre.leggauss(per)
        a, b = model.grid[:-1, None], model.grid[1:, None]
        nodes = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
        weights = (0.5 * (b - a) * w).ravel()
    else:
        panels = max(1, math.ceil(n / _PANEL_NODES))
        per = math.ceil(n / panels)
        x, w = np.polynomial.legendre.leggauss(per)
        edges = np.linspace(0.0, L, panels + 1)
        a, b = edges[:-1, None], edges[1:, None]
        nodes = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
        weights = (0.5 * (b - a) * w).ravel()
    weights = weights * model.density(nodes)
    keep = weights > 0
    nodes, weights = nodes[keep], weights[keep]
    return nodes, weights / (2.0 * weights.sum())


def synthesis_error(scheme, model, horizon, points=10_000):
    """sup |r~ - r| on an equispaced grid over [0, horizon]."""
    t = np.linspace(0.0, horizon, points)
    return float(np.max(np.abs(scheme.covariance(t) - covariance(model, t))))


def build_synthesis(model, n_nodes=None, design_horizon=100.0, tol=1e-7):
    """Quadrature of the spectral measure on (0, inf) as a synthesis scheme.

    Parameters
    ----------
    model : SpectralModel
    n_nodes : int, optional
        Number of frequencies. When omitted the count doubles from 256 until
        the covariance sup-error over [0, design_horizon] is below ``tol``.
    design_horizon : float
        Largest lag on which the synthetic covariance is checked.

    Returns
    -------
    SynthesisScheme
        With ``sup_error`` set to the measured sup-error.
    """
    if n_nodes is not None and n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    if design_horizon <= 0:
        raise ValueError("design_horizon must be positive")
    if n_nodes is not None:
        nodes, weights = _half_line_rule(model, n_nodes)
        trial = SynthesisScheme(nodes, weights, model, design_horizon)
        err = synthesis_error(trial, model, design_horizon)
        return SynthesisScheme(nodes, weights, model, float(design_horizon), err)
    n = 256
    while True:
        nodes, weights = _half_line_rule(model, n)
        trial = SynthesisScheme(nodes, weights, model, design_horizon)
        err = synthesis_error(trial, model, design_horizon)
        if err < tol or n >= _MAX_NODES:
            if err >= tol:
                raise QuadratureError(
                    f"synthesis sup-error {err:.2e} above {tol:.0e} at {n} nodes", err
                )
            return SynthesisScheme(nodes, weights, model, float(design_horizon), err)
        n *= 2


def default_dt(scheme):
    """Grid step used by the studies: min(Nyquist guard, 0.05)."""
    return min(scheme.max_dt, 0.05)


def time_grid(T, dt):
    """Equispaced grid on [0, T] with step T/ceil(T/dt), endpoints included."""
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    steps = max(1, math.ceil(T / dt - 1e-9))
    return np.linspace(0.0, T, steps + 1), T / steps


class GaussianField:
    """One realization of the synthesis, usable on the line and in the strip.

    Calling the object on complex points evaluates the entire extension.
    """

    def __init__(self, scheme, seed):
        self.scheme = scheme
        self.seed = _as_seed(seed)
        rng = np.random.default_rng(self.seed)
        xi = rng.standard_normal(scheme.size)
        eta = rng.standard_normal(scheme.size)
        amp = scheme.amplitudes
        self.cos_coef = amp * xi
        self.sin_coef = amp * eta

    @property
    def label(self):
        return seed_label(self.seed)

    def real(self, t):
        """Path values at real times."""
        t = np.asarray(t, dtype=float)
        out = kernels.trig_sum(self.scheme.nodes, self.cos_coef, self.sin_coef, t.ravel())
        return out.reshape(t.shape)

    def _check_strip(self, y):
        half = self.scheme.kappa / 2.0
        if np.any(np.abs(y) >= half):
            raise ValueError(f"points must satisfy |Im z| < kappa/2 = {half}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_strip(z.imag)
        out = kernels.eval_field(self.scheme.nodes, self.cos_coef, self.sin_coef,
                                 z.real.ravel(), z.imag.ravel())
        return out.reshape(z.shape)

    def refine(self, left, right, iters):
        """Bisection for a root of the path inside each bracketing cell."""
        return kernels.refine_roots(self.scheme.nodes, self.cos_coef, self.sin_coef,
                                    left, right, iters)


@dataclass
class PathGrid:
    """Sampled path on t0 + dt * arange(len(values))."""

    t0: float
    dt: float
    values: np.ndarray
    seed: str = ""
    source: GaussianField | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.values.size)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "value"])
            for t, v in zip(self.times, self.values):
                w.writerow([repr(float(t)), repr(float(v))])


@dataclass
class StripField:
    """Complex evaluations of one realization's entire extension."""

    points: np.ndarray
    values: np.ndarray
    seed: str = ""

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re_z", "im_z", "re_f", "im_f"])
            for z, f in zip(self.points, self.values):
                w.writerow([repr(float(z.real)), repr(float(z.imag)),
                            repr(float(f.real)), repr(float(f.imag))])


def check_nyquist(scheme, dt):
    if dt > scheme.max_dt * (1 + 1e-12):
        raise ValueError(
            f"dt = {dt} too coarse; need dt <= pi/(4 lambda_max) = {scheme.max_dt:.6g}"
        )


def sample_real_path(scheme, T, dt, seed):
    """Path of the synthesis on [0, T]; deterministic given ``seed``."""
    check_nyquist(scheme, dt)
    f = GaussianField(scheme, seed)
    t, step = time_grid(T, dt)
    return PathGrid(0.0, step, f.real(t), f.label, source=f)


def sample_strip_field(scheme, points, seed):
    """Entire extension of the same realization as ``sample_real_path``."""
    f = GaussianField(scheme, seed)
    points = np.asarray(points, dtype=complex).ravel()
    return StripField(points, f(points), f.label)


def trig_matrices(scheme, t):
    """cos/sin(lam_j t_i) scaled by the synthesis amplitudes, shape (n_t, n)."""
    u = np.multiply.outer(np.asarray(t, dtype=float), scheme.nodes)
    amp = scheme.amplitudes
    return np.cos(u) * amp, np.sin(u) * amp


def sample_path_block(scheme, t, seeds, mats=None):
    """Paths for several seeds at once, columns ordered like ``seeds``.

    Noise per seed is drawn exactly as in GaussianField, so each column
    matches ``GaussianField(scheme, seed).real(t)`` up to rounding in the
    matrix product.
    """
    c, s = trig_matrices(scheme, t) if mats is None else mats
    xi = np.empty((scheme.size, len(seeds)))
    eta = np.empty_like(xi)
    for i, sd in enumerate(seeds):
        rng = np.random.default_rng(_as_seed(sd))
        xi[:, i] = rng.standard_normal(scheme.size)
        eta[:, i] = rng.standard_normal(scheme.size)
    return c @ xi + s @ eta


# -- delta-averaged lattice ------------------------------------------------

@dataclass
class AveragedLattice:
    delta: float
    gamma: np.ndarray
    sign_change_prob: float
    error: float


def average_discretize(model, delta, k_max, order=64):
    """Covariances of block averages Y_k = delta^-1 int_{k delta}^{(k+1) delta} X.

    gamma_k is the triangle-kernel average of r over [delta k - delta,
    delta k + delta], integrated by Gauss-Legendre on each half.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")

    def rule(q):
        x, w = np.polynomial.legendre.leggauss(q)
        u = 0.5 * delta * (x + 1.0)          # in (0, delta)
        kern = (delta - u) / delta ** 2 * 0.5 * delta * w
        return u, kern

    def gammas(q):
        u, kern = rule(q)
        k = np.arange(k_max + 1)[:, None] * delta
        return (covariance(model, k + u) @ kern) + (covariance(model, k - u) @ kern)

    hi = gammas(order)
    lo = gammas(order // 2)
    err = float(np.max(np.abs(hi - lo)))
    if err > 1e-10 * max(1.0, float(np.max(np.abs(hi)))):
        raise QuadratureError(f"lattice covariance error {err:.2e}", err)
    rho = float(np.clip(hi[1] / hi[0], -1.0, 1.0))
    return AveragedLattice(float(delta), hi, math.acos(rho) / math.pi, err)


# -- discrete processes from a density on [-pi, pi] --------------------------

_FOURIER_POINTS = 1 << 14


def _density_samples(p_Y, n=_FOURIER_POINTS):
    lam = -math.pi + 2.0 * math.pi * np.arange(n) / n
    if callable(p_Y):
        vals = np.asarray(p_Y(lam), dtype=float) * np.ones_like(lam)
    else:
        grid, dens = (np.asarray(a, dtype=float) for a in p_Y)
        vals = np.interp(np.abs(lam), np.abs(grid), dens) if grid[0] >= 0 else np.interp(lam, grid, dens)
    if not np.all(np.isfinite(vals)):
        raise ValueError("density must be finite on [-pi, pi]")
    if np.any(vals < 0):
        raise ValueError("density must be nonnegative")
    return lam, vals


def fourier_sqrt_coefficients(p_Y, horizon=512):
    """a_k, |k| <= horizon, of sqrt(p_Y) in the orthonormal basis e^{ik lam}/sqrt(2 pi).

    With this normalization Cov(Y_0, Y_n) = sum_k a_k a_{k+n} and
    sum_k a_k^2 = integral of p_Y.
    Returns (a as array indexed -horizon..horizon, integral of p_Y).
    """
    lam, vals = _density_samples(p_Y)
    n = lam.size
    root = np.sqrt(vals)
    # trapezoid on a periodic grid = plain Riemann sum
    spec = np.fft.fft(root) * (2.0 * math.pi / n) / math.sqrt(2.0 * math.pi)
    k = np.arange(-horizon, horizon + 1)
    # grid starts at -pi, so shift by e^{i k pi}
    coef = spec[k % n] * np.where(k % 2, -1.0, 1.0)
    mass = float(vals.sum() * 2.0 * math.pi / n)
    return coef.real.copy(), mass


@dataclass
class DiscreteSample:
    values: np.ndarray
    coefficients: np.ndarray
    truncation_error: float
    seed: str = ""


def sample_discrete(p_Y, T, seed, truncation=512):
    """Y_0..Y_T as a truncated moving average of i.i.d. normals.

    Parameters
    ----------
    p_Y : callable or (grid, values)
        Spectral density on [-pi, pi].
    truncation : int
        Moving-average half-length; the dropped mass sum_{|k|>trunc} a_k^2 is
        reported as ``truncation_error``.
    """
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    if T < 1:
        raise ValueError("T must be at least 1")
    a, mass = fourier_sqrt_coefficients(p_Y, truncation)
    rng = np.random.default_rng(_as_seed(seed))
    noise = rng.standard_normal(int(T) + 1 + 2 * truncation)
    y = np.convolve(noise, a[::-1], mode="valid")
    return DiscreteSample(y, a, max(0.0, mass - float(np.sum(a * a))), seed_label(seed))


def sample_discrete_block(coef, T, seeds):
    """Columns of moving-average samples for many seeds, like sample_discrete."""
    trunc = (coef.size - 1) // 2
    out = np.empty((int(T) + 1, len(seeds)))
    for i, sd in enumerate(seeds):
        rng = np.random.default_rng(_as_seed(sd))
        noise = rng.standard_normal(int(T) + 1 + 2 * trunc)
        out[:, i] = np.convolve(noise, coef[::-1], mode="valid")
    return out


@dataclass
class MDependentSplit:
    """Y = W + Z with W finitely dependent and Z of small spectral density."""

    m: int
    lags: np.ndarray
    a: np.ndarray
    a_m: np.ndarray
    eps_m: float
    lam: np.ndarray = field(repr=False)
    p_y: np.ndarray = field(repr=False)
    p_w: np.ndarray = field(repr=False)
    p_z: np.ndarray = field(repr=False)
    cross: np.ndarray = field(repr=False)
    w_cov: np.ndarray = field(repr=False)
    dependence_range: int = 0
    taper: str = "half"

    def identity_residual(self):
        """max |p_W + p_Z + cross - p_Y| over the grid."""
        return float(np.max(np.abs(self.p_w + self.p_z + self.cross - self.p_y)))


def taper_weights(k, m, paper_taper=False):
    """Fejer weights for the split of order m.

    The default window (1 - |k|/h)_+ with h = floor((m+1)/2) keeps
    |k| <= floor((m-1)/2), so W has no correlation past lag m - 1.
    ``paper_taper`` uses h = m - 1 instead (correlation up to lag 2m - 4).
    """
    h = m - 1 if paper_taper else (m + 1) // 2
    return np.clip(1.0 - np.abs(k) / h, 0.0, None)


def m_dependent_split(p_Y, m, coeff_horizon=512, paper_taper=False):
    """Taper the Fourier coefficients of sqrt(p_Y) to get an m-dependent part.

    g_W = sum_k a_k^(m) e^{ik lam}/sqrt(2 pi); p_W = g_W^2 and
    p_Z = (sqrt(p_Y) - g_W)^2, so p_W + p_Z + 2 g_W (sqrt(p_Y) - g_W) = p_Y.
    eps_m is the supremum of p_Z over the Fourier grid.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    a, _ = fourier_sqrt_coefficients(p_Y, coeff_horizon)
    k = np.arange(-coeff_horizon, coeff_horizon + 1)
    a_m = taper_weights(k, m, paper_taper) * a
    lam, p_y = _density_samples(p_Y)
    root = np.sqrt(p_y)
    support = k[a_m != 0]
    ks = support if support.size else np.array([0])
    g_w = np.cos(np.multiply.outer(lam, ks)) @ a_m[ks + coeff_horizon] / math.sqrt(2.0 * math.pi)
    p_w = g_w * g_w
    diff = root - g_w
    p_z = diff * diff
    w_cov = np.correlate(a_m, a_m, mode="full")[a_m.size - 1:]
    reach = int(np.max(np.abs(support))) if support.size else 0
    return MDependentSplit(
        m=int(m),
        lags=k,
        a=a,
        a_m=a_m,
        eps_m=float(np.max(p_z)),
        lam=lam,
        p_y=p_y,
        p_w=p_w,
        p_z=p_z,
        cross=2.0 * g_w * diff,
        w_cov=w_cov,
        dependence_range=2 * reach,
        taper="paper" if paper_taper else "half",
    )
