"""Spectral measures and the covariance integrals built on them.

A :class:`SpectralModel` is a symmetric probability density on the real line.
Every covariance-type quantity in the package is an integral against it,
evaluated in closed form for the three named families and otherwise by
composite Gauss-Legendre quadrature on the half line (all integrands used
here are even in the frequency, so the negative half is folded in).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

FAMILIES = ("band", "gaussian", "bilateral_exponential", "tabulated")

# log of the integrand level below which the spectral tail is dropped
_LOG_TAIL = math.log(1e-16)
# radians of oscillation allowed across one quadrature panel
_PANEL_PHASE = 20.0


class QuadratureError(ArithmeticError):
    """Quadrature did not reach tolerance; ``estimate`` is the error estimate."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class DivergenceError(ValueError):
    """A spectral integral is infinite for the requested argument."""


def phi(u):
    """sinh(u)/u, equal to 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 + u2 / 6.0 + u2 * u2 / 120.0, np.sinh(safe) / safe)


@lru_cache(maxsize=None)
def _gauss_legendre(q):
    x, w = np.polynomial.legendre.leggauss(q)
    return x, w


def _panel_rule(edges, q):
    """Composite q-point Gauss-Legendre nodes/weights on consecutive panels."""
    x, w = _gauss_legendre(q)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class Quadrature:
    """Half-line rule with an embedded coarser rule on the same panels.

    ``weights`` already carry the factor ``2 p(lambda)``, so for an even
    integrand ``g``, ``sum(weights * g(nodes))`` approximates the integral of
    ``g`` against the spectral measure.
    """

    nodes: np.ndarray
    weights: np.ndarray
    nodes_lo: np.ndarray
    weights_lo: np.ndarray

    def integrate(self, g, tol=None):
        """Integrate even ``g``; returns (value, error estimate).

        ``g`` maps a node vector of shape (N,) to an array of shape (N, ...).
        Raises QuadratureError when ``tol`` is given and the estimate exceeds
        ``tol * max(1, |value|)``.
        """
        hi = np.tensordot(self.weights, g(self.nodes), axes=(0, 0))
        lo = np.tensordot(self.weights_lo, g(self.nodes_lo), axes=(0, 0))
        err = np.abs(hi - lo)
        if tol is not None:
            scale = np.maximum(1.0, np.abs(hi))
            worst = float(np.max(err / scale)) if np.size(err) else 0.0
            if worst > tol:
                raise QuadratureError(
                    f"quadrature error estimate {worst:.3e} exceeds {tol:.1e}", worst
                )
        return hi, err

    @property
    def size(self):
        return self.nodes.size


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Symmetric spectral probability measure with a density.

    Attributes
    ----------
    family : str
        One of ``band``, ``gaussian``, ``bilateral_exponential``, ``tabulated``.
    K : float
        Half-width of the band family's support.
    grid, values : ndarray or None
        Half grid (starting at 0) and normalized density for ``tabulated``.
    panel_order : int
        Gauss-Legendre order per panel; the error estimate uses half of it.
    quad_tol : float
        Relative tolerance for checked quadratures.
    """

    family: str
    K: float = 1.0
    grid: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)
    panel_order: int = 32
    quad_tol: float = 1e-9

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown spectral family {self.family!r}")
        if self.family == "band" and not self.K > 0:
            raise ValueError("band half-width K must be positive")
        if self.family == "tabulated" and (self.grid is None or self.values is None):
            raise ValueError("tabulated model needs grid and values")

    # -- constructors -----------------------------------------------------
    @classmethod
    def band(cls, K=1.0):
        return cls("band", K=float(K))

    @classmethod
    def gaussian(cls):
        return cls("gaussian")

    @classmethod
    def bilateral_exponential(cls):
        return cls("bilateral_exponential")

    @classmethod
    def tabulated(cls, lam, density):
        """Piecewise-linear density from samples, mirrored to be even.

        Negative abscissae are folded onto the positive half by averaging
        the two sides; the result is renormalized to unit mass.
        """
        lam = np.asarray(lam, dtype=float)
        density = np.asarray(density, dtype=float)
        if lam.ndim != 1 or lam.shape != density.shape or lam.size < 2:
            raise ValueError("need matching 1-d arrays with at least two points")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise ValueError("density values must be finite and nonnegative")
        if lam[0] >= 0:
            half, vals = lam, density
            if half[0] > 0:
                half = np.concatenate([[0.0], half])
                vals = np.concatenate([[density[0]], vals])
        else:
            half = np.unique(np.abs(lam))
            if half[0] > 0:
                half = np.concatenate([[0.0], half])
            vals = 0.5 * (
                np.interp(half, lam, density, left=0.0, right=0.0)
                + np.interp(-half, lam, density, left=0.0, right=0.0)
            )
        mass = 2.0 * np.trapezoid(vals, half)
        if not mass > 0:
            raise ValueError("density has zero mass")
        vals = vals / mass
        return cls("tabulated", grid=half, values=vals)

    @classmethod
    def from_csv(cls, path):
        """Two-column CSV (frequency, density); a header row is skipped."""
        lam, dens = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    a, b = float(row[0]), float(row[1])
                except ValueError:
                    if lam:
                        raise
                    continue
                lam.append(a)
                dens.append(b)
        return cls.tabulated(lam, dens)

    @classmethod
    def from_name(cls, name, K=1.0, csv_path=None):
        name = name.lower().replace("-", "_")
        if name in ("band", "sinc"):
            return cls.band(K)
        if name == "gaussian":
            return cls.gaussian()
        if name in ("bilateral_exponential", "bilateral", "exponential", "cauchy"):
            return cls.bilateral_exponential()
        if name == "tabulated":
            if csv_path is None:
                raise ValueError("tabulated model needs a CSV path")
            return cls.from_csv(csv_path)
        raise ValueError(f"unknown spectral family {name!r}")

    # -- basic properties -------------------------------------------------
    @property
    def kappa(self):
        """Supremum of exponential-moment radii (inf when all are finite)."""
        if self.family == "bilateral_exponential":
            return 1.0
        return math.inf

    @property
    def name(self):
        if self.family == "band":
            return f"band({self.K:g})"
        return self.family

    def describe(self):
        out = {"family": self.family, "kappa": self.kappa}
        if self.family == "band":
            out["K"] = self.K
        if self.family == "tabulated":
            out["grid_points"] = int(self.grid.size)
        return out

    def density(self, lam):
        lam = np.abs(np.asarray(lam, dtype=float))
        if self.family == "band":
            return np.where(lam <= self.K, 0.5 / self.K, 0.0)
        if self.family == "gaussian":
            return np.exp(-0.5 * lam * lam) / math.sqrt(2.0 * math.pi)
        if self.family == "bilateral_exponential":
            return 0.5 * np.exp(-lam)
        return np.interp(lam, self.grid, self.values, right=0.0)

    def truncation(self, growth=0.0):
        """Radius beyond which density * e^{growth*lam} * (1+lam^2) < 1e-16."""
        if growth >= self.kappa:
            raise DivergenceError(
                f"exponential growth {growth} not integrable (kappa = {self.kappa})"
            )
        if self.family == "band":
            return self.K
        if self.family == "tabulated":
            return float(self.grid[-1])
        if self.family == "gaussian":
            def excess(L):
                return (-0.5 * L * L - 0.5 * math.log(2 * math.pi) + growth * L
                        + math.log1p(L * L) - _LOG_TAIL)
            return optimize.brentq(excess, growth + 1.0, growth + 60.0)

        def excess(L):
            return math.log(0.5) - (1.0 - growth) * L + math.log1p(L * L) - _LOG_TAIL
        lo = 2.0 / (1.0 - growth) + 1.0
        return optimize.brentq(excess, lo, 1e3 / (1.0 - growth) + 100.0)

    def quadrature(self, x_max=0.0, growth=0.0):
        """Cached half-line rule resolving cos/sin(lam*x) up to |x| = x_max."""
        x_max = abs(float(x_max))
        xb = 0.0 if x_max < 1.0 else 2.0 ** math.ceil(math.log2(x_max))
        gb = math.ceil(abs(growth) * 1000.0) / 1000.0
        if gb >= self.kappa:
            gb = abs(growth)
        return _build_quadrature(self, xb, gb)


@lru_cache(maxsize=256)
def _build_quadrature(model, x_max, growth):
    q = model.panel_order
    L = model.truncation(growth)
    if model.family == "tabulated":
        seg = model.grid
    elif model.family == "band":
        seg = np.array([0.0, L])
    else:
        seg = np.array([0.0, L])
    if model.family == "tabulated":
        base_width = np.inf
    elif model.family == "band":
        base_width = model.K / 4.0
    else:
        base_width = 1.0
    edges = [seg[:1]]
    for a, b in zip(seg[:-1], seg[1:]):
        width = b - a
        n = max(1, math.ceil(width / base_width), math.ceil(width * max(x_max, 1.0) / _PANEL_PHASE))
        edges.append(np.linspace(a, b, n + 1)[1:])
    edges = np.concatenate(edges)
    nodes, w = _panel_rule(edges, q)
    nodes_lo, w_lo = _panel_rule(edges, q // 2)
    return Quadrature(
        nodes=nodes,
        weights=2.0 * w * model.density(nodes),
        nodes_lo=nodes_lo,
        weights_lo=2.0 * w_lo * model.density(nodes_lo),
    )


def _chunked(xs, chunk=512):
    for i in range(0, xs.size, chunk):
        yield slice(i, min(i + chunk, xs.size))


def spectral_transform(model, x, amplitude, kind="cos", growth=0.0, check=True):
    """Integral of amplitude(lam) * trig(lam x) against the spectral measure.

    ``amplitude`` maps nodes (N,) to (N,) or (N, m) and must make the full
    integrand even in lam (so ``cos`` pairs with even amplitudes and ``sin``
    with odd ones). Returns an array of shape x.shape (+ (m,)).
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    q = model.quadrature(np.max(np.abs(flat)) if flat.size else 0.0, growth)
    trig = np.cos if kind == "cos" else np.sin
    amp_hi = amplitude(q.nodes)
    amp_lo = amplitude(q.nodes_lo) if check else None
    wa_hi = (q.weights.reshape((-1,) + (1,) * (amp_hi.ndim - 1)) * amp_hi)
    out = np.empty((flat.size,) + amp_hi.shape[1:])
    worst = 0.0
    for sl in _chunked(flat):
        hi = trig(np.multiply.outer(flat[sl], q.nodes)) @ wa_hi
        out[sl] = hi
        if check:
            wa_lo = q.weights_lo.reshape((-1,) + (1,) * (amp_lo.ndim - 1)) * amp_lo
            lo = trig(np.multiply.outer(flat[sl], q.nodes_lo)) @ wa_lo
            err = np.abs(hi - lo) / np.maximum(1.0, np.abs(hi))
            worst = max(worst, float(err.max()) if err.size else 0.0)
    if check and worst > model.quad_tol:
        raise QuadratureError(
            f"quadrature error estimate {worst:.3e} exceeds {model.quad_tol:.1e}", worst
        )
    return out.reshape(x.shape + amp_hi.shape[1:])


# -- analytic covariance --------------------------------------------------

def characteristic(model, z, method="auto"):
    """r(z) = integral of e^{-i lam z} d rho, continued to |Im z| < kappa.

    ``method`` is ``closed`` (named families only), ``quad`` or ``auto``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.imag) >= model.kappa):
        raise DivergenceError(f"|Im z| must stay below kappa = {model.kappa}")
    if method == "auto":
        method = "quad" if model.family == "tabulated" else "closed"
    if method == "closed":
        return _closed_characteristic(model, z)
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    x = z.real
    y = z.imag
    growth = float(np.max(np.abs(y))) if y.size else 0.0
    flat_x, flat_y = x.ravel(), y.ravel()
    out = np.empty(flat_x.size, dtype=complex)
    q = model.quadrature(np.max(np.abs(flat_x)) if flat_x.size else 0.0, growth)
    for sl in _chunked(flat_x):
        xs, ys = flat_x[sl], flat_y[sl]

        def g(lam):
            u = np.multiply.outer(lam, xs)
            v = np.multiply.outer(lam, ys)
            return np.cos(u) * np.cosh(v) - 1j * np.sin(u) * np.sinh(v)

        out[sl], _ = q.integrate(g, tol=model.quad_tol)
    return out.reshape(z.shape)


def _closed_characteristic(model, z):
    if model.family == "gaussian":
        return np.exp(-0.5 * z * z)
    if model.family == "bilateral_exponential":
        return 1.0 / (1.0 + z * z)
    if model.family == "band":
        u = model.K * z
        small = np.abs(u) < 1e-5
        safe = np.where(small, 1.0, u)
        return np.where(small, 1.0 - u * u / 6.0, np.sin(safe) / safe)
    raise ValueError("no closed form for tabulated models")


def covariance(model, t, method="auto"):
    """r(t) for real t (scalar or array)."""
    t = np.asarray(t, dtype=float)
    r = characteristic(model, t, method=method).real
    return float(r) if r.ndim == 0 else r


def covariance_kappa(model, t, kappa_o, method="auto"):
    """Integral of cos(t lam) cosh(2 kappa_o lam) d rho."""
    if kappa_o < 0:
        raise ValueError("kappa_o must be nonnegative")
    if 2.0 * kappa_o >= model.kappa:
        raise DivergenceError(
            f"exponential moment at 2*kappa_o = {2 * kappa_o} diverges"
        )
    t = np.asarray(t, dtype=float)
    r = characteristic(model, t + 2j * kappa_o, method=method).real
    return float(r) if r.ndim == 0 else r


def spectral_moment(model, order=2):
    """Integral of lam^order d rho (even order)."""
    if order % 2:
        return 0.0
    if model.family == "gaussian":
        return float(special.factorial2(order - 1)) if order else 1.0
    if model.family == "bilateral_exponential":
        return float(math.factorial(order))
    if model.family == "band":
        return model.K ** order / (order + 1.0)
    q = model.quadrature()
    val, _ = q.integrate(lambda lam: lam ** order, tol=model.quad_tol)
    return float(val)


def curvature_at_zero(model, h=1e-3):
    """-r''(0) by a second central difference with step h."""
    r = covariance(model, np.array([-h, 0.0, h]))
    return float(-(r[0] - 2.0 * r[1] + r[2]) / (h * h))


def kac_rice_alpha(model):
    """Expected number of zeros per unit length."""
    m2 = spectral_moment(model, 2)
    if not math.isfinite(m2):
        raise DivergenceError("second spectral moment is infinite")
    return math.sqrt(m2) / math.pi


def exp_moment(model, kappa):
    """Integral of e^{kappa |lam|} d rho; ``math.inf`` when divergent."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if kappa == 0:
        return 1.0
    if kappa >= model.kappa:
        return math.inf
    if model.family == "band":
        u = kappa * model.K
        return math.expm1(u) / u
    if model.family == "gaussian":
        return 2.0 * math.exp(0.5 * kappa * kappa) * special.ndtr(kappa)
    if model.family == "bilateral_exponential":
        return 1.0 / (1.0 - kappa)
    q = model.quadrature(0.0, kappa)
    val, _ = q.integrate(lambda lam: np.exp(kappa * lam), tol=model.quad_tol)
    return float(val)


def _check_strip(model, y, ell):
    if np.any(ell * np.abs(np.asarray(y)) >= model.kappa):
        raise DivergenceError(
            f"need {ell}|y| < kappa = {model.kappa} for the integral to converge"
        )


def r_ell(model, x, y, ell):
    """Integral of e^{-i lam x} phi(lam y)^ell d rho, returned as complex.

    The odd part integrates to zero by symmetry; it is evaluated anyway on
    the mirrored nodes so the imaginary part is an honest quadrature output.
    """
    if ell not in (1, 2):
        raise ValueError("ell must be 1 or 2")
    _check_strip(model, y, ell)
    x = np.asarray(x, dtype=float)

    def amp(lam):
        return phi(lam * y) ** ell

    re = spectral_transform(model, x, amp, "cos", growth=ell * abs(y))
    # odd part: 0.5*(sin(lam x) + sin(-lam x)) * amp, identically zero pairwise
    q = model.quadrature(np.max(np.abs(x)) if x.size else 0.0, ell * abs(y))
    u = np.multiply.outer(np.atleast_1d(x), q.nodes)
    odd = 0.5 * (np.sin(u) + np.sin(-u)) @ (q.weights * amp(q.nodes))
    out = re - 1j * odd.reshape(x.shape)
    return complex(out) if out.ndim == 0 else out


def r1_prime(model, x, y):
    """x-derivative of r_1: -integral of lam sin(lam x) phi(lam y) d rho."""
    _check_strip(model, y, 1)
    out = spectral_transform(model, x, lambda lam: -lam * phi(lam * y), "sin", growth=abs(y))
    return float(out) if np.ndim(out) == 0 else out


def r2_second(model, x, y):
    """Second x-derivative of r_2: -integral of lam^2 cos(lam x) phi(lam y)^2 d rho."""
    _check_strip(model, y, 2)
    out = spectral_transform(
        model, x, lambda lam: -(lam * phi(lam * y)) ** 2, "cos", growth=2 * abs(y)
    )
    return float(out) if np.ndim(out) == 0 else out


def y_grid_points(kappa_prime, n):
    """n equispaced points strictly inside (-kappa', kappa')."""
    return np.linspace(-kappa_prime, kappa_prime, n + 2)[1:-1]


def derivative_tables(model, xs, ys):
    """|r1'(x; 2y)| and |r2''(x; y)| on the product grid, shape (len(xs), len(ys))."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    _check_strip(model, ys, 2)
    growth = 2.0 * float(np.max(np.abs(ys)))

    def amp1(lam):
        return -lam[:, None] * phi(2.0 * np.multiply.outer(lam, ys))

    def amp2(lam):
        return -(lam[:, None] * phi(np.multiply.outer(lam, ys))) ** 2

    a = spectral_transform(model, xs, amp1, "sin", growth=growth, check=False)
    b = spectral_transform(model, xs, amp2, "cos", growth=growth, check=False)
    return np.abs(a), np.abs(b)


TERMS = ("r", "r1prime", "r2second")


@dataclass
class AssumptionAReport:
    """Numerical certificate for the summability condition on covariances."""

    x_star: float
    kappa_prime: float
    horizon: int
    j_max: int
    threshold: float
    omega_star_table: list
    term_breakdown: dict
    last_increment: dict
    verdict: str

    def to_dict(self):
        return {
            "x_star": self.x_star,
            "kappa_prime": self.kappa_prime,
            "horizon": self.horizon,
            "j_max": self.j_max,
            "threshold": self.threshold,
            "omega_star_table": [[int(k), float(v)] for k, v in self.omega_star_table],
            "term_breakdown": {k: [float(v) for v in vals] for k, vals in self.term_breakdown.items()},
            "last_increment": {k: float(v) for k, v in self.last_increment.items()},
            "verdict": self.verdict,
        }


def omega_star(model, x_star, kappa_prime, horizon=50, y_grid=21, threshold=0.05):
    """Tail sums of |r|, |r1'(.;2y)| and |r2''(.;y)| along the lattice x_star*j.

    Sums over j are truncated at ``10 * horizon``; the supremum over y runs
    over ``y_grid`` interior points of (-kappa', kappa').
    """
    if not 0 < kappa_prime < model.kappa / 2:
        raise ValueError(f"need 0 < kappa' < kappa/2 = {model.kappa / 2}")
    if not x_star > 0:
        raise ValueError("x_star must be positive")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    j_max = 10 * horizon
    xs = x_star * np.arange(1, j_max + 1)
    ys = y_grid_points(kappa_prime, y_grid)
    r_abs = np.abs(covariance(model, xs))
    a_abs, b_abs = derivative_tables(model, xs, ys)

    def tails(v):
        return np.cumsum(v[::-1], axis=0)[::-1]

    tr = tails(r_abs)
    ta = tails(a_abs)
    tb = tails(b_abs)
    ks = np.arange(1, horizon + 1)
    idx = ks - 1
    om = tr[idx] + np.max(ta[idx] + tb[idx], axis=1)
    breakdown = {
        "r": tr[idx],
        "r1prime": np.max(ta[idx], axis=1),
        "r2second": np.max(tb[idx], axis=1),
    }
    increments = {
        "r": r_abs[-1],
        "r1prime": float(np.max(a_abs[-1])),
        "r2second": float(np.max(b_abs[-1])),
    }
    verdict = "satisfied"
    for term in TERMS:
        if not np.any(breakdown[term] < threshold):
            verdict = f"fails({term})"
            break
    if verdict == "satisfied":
        for term in TERMS:
            total = breakdown[term][0]
            inc = increments[term]
            if inc > 1e-14 and inc > 0.01 * total:
                verdict = "inconclusive(truncation)"
                break
    return AssumptionAReport(
        x_star=float(x_star),
        kappa_prime=float(kappa_prime),
        horizon=int(horizon),
        j_max=int(j_max),
        threshold=float(threshold),
        omega_star_table=list(zip(ks.tolist(), om.tolist())),
        term_breakdown=breakdown,
        last_increment=increments,
        verdict=verdict,
    )
