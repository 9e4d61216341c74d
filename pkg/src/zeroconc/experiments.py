"""Monte Carlo studies of zero counts and their persistence on disk.

Replicates are processed in fixed blocks of BLOCK seeds. Each block builds
its paths with one matrix product against trig tables shared by the whole
study, so results depend only on the configuration and master seed, never
on how many worker threads run the blocks.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import __version__, kernels
from .sampler import (
    SynthesisScheme,
    build_synthesis,
    default_dt,
    fourier_sqrt_coefficients,
    replicate_seed,
    sample_discrete_block,
    sample_path_block,
    time_grid,
    trig_matrices,
    check_nyquist,
)
from .spectral import SpectralModel, kac_rice_alpha

BLOCK = 64
SIDES = ("two_sided", "lower", "upper", "upper_3eta")


def model_from_spec(spec):
    """SpectralModel from {'family': ..., 'K': ..., 'csv': ...}."""
    if isinstance(spec, SpectralModel):
        return spec
    if isinstance(spec, str):
        spec = {"family": spec}
    return SpectralModel.from_name(spec["family"], K=spec.get("K", 1.0), csv_path=spec.get("csv"))


@dataclass
class TailConfig:
    """Parameters of a concentration study; serializable as JSON."""

    model: dict
    T: list
    eta: list
    replicates: int = 1000
    dt: float | None = None
    seed: int = 0
    workers: int = 1
    n_nodes: int | None = None

    def __post_init__(self):
        if isinstance(self.model, str):
            self.model = {"family": self.model}
        self.T = [float(t) for t in self.T]
        self.eta = [float(e) for e in self.eta]
        if self.replicates < 100:
            raise ValueError("replicates must be at least 100")
        if not self.T or min(self.T) <= 0:
            raise ValueError("T values must be positive")
        if not self.eta or min(self.eta) <= 0:
            raise ValueError("eta values must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def to_dict(self):
        return asdict(self)


@dataclass
class TailResult:
    """Hits of one tail event at one (T, eta) over ``reps`` replicates."""

    T: float
    eta: float
    side: str
    hits: int
    reps: int
    p_hat: float
    ci_low: float
    ci_high: float
    center: float

    HEADER = ("T", "eta", "side", "hits", "reps", "p_hat", "ci_low", "ci_high", "center")

    def row(self):
        return [repr(float(self.T)), repr(float(self.eta)), self.side, str(self.hits),
                str(self.reps), repr(float(self.p_hat)), repr(float(self.ci_low)),
                repr(float(self.ci_high)), repr(float(self.center))]


@dataclass
class RateFit:
    """Least squares of -log p_hat against T over cells with hits."""

    eta: float
    side: str
    slope: float
    intercept: float
    r_squared: float
    T_used: list
    censored: list


@dataclass
class StudyResult:
    config: dict
    results: list
    fits: list
    meta: dict = field(default_factory=dict)

    def cell(self, T, eta, side="two_sided"):
        for r in self.results:
            if r.T == T and r.eta == eta and r.side == side:
                return r
        raise KeyError((T, eta, side))


def binomial_ci(hits, n, level=0.95):
    """Exact Clopper-Pearson interval."""
    ci = stats.binomtest(int(hits), int(n)).proportion_ci(level, method="exact")
    return float(ci.low), float(ci.high)


def tail_hits(counts, center, T, eta):
    """Hit counts of each tail event for a vector of zero counts."""
    dev = counts - center
    low = int(np.count_nonzero(dev <= -eta * T))
    up = int(np.count_nonzero(dev >= eta * T))
    return {
        "two_sided": int(np.count_nonzero(np.abs(dev) >= eta * T)),
        "lower": low,
        "upper": up,
        "upper_3eta": int(np.count_nonzero(dev >= 3.0 * eta * T)),
    }


def tabulate(counts_by_T, centers, etas, reps):
    out = []
    for T, counts in counts_by_T.items():
        for eta in etas:
            hits = tail_hits(counts, centers[T], T, eta)
            for side in SIDES:
                lo, hi = binomial_ci(hits[side], reps)
                out.append(TailResult(T, eta, side, hits[side], reps,
                                      hits[side] / reps, lo, hi, float(centers[T])))
    return out


def fit_rates(results, side="two_sided"):
    fits = []
    for eta in sorted({r.eta for r in results}):
        cells = sorted((r for r in results if r.eta == eta and r.side == side), key=lambda r: r.T)
        used = [r for r in cells if r.hits > 0]
        censored = [r.T for r in cells if r.hits == 0]
        if len(used) < 3:
            fits.append(RateFit(eta, side, math.nan, math.nan, math.nan,
                                [r.T for r in used], censored))
            continue
        T = np.array([r.T for r in used])
        y = -np.log([r.p_hat for r in used])
        lr = stats.linregress(T, y)
        fits.append(RateFit(eta, side, float(lr.slope), float(lr.intercept),
                            float(lr.rvalue ** 2), T.tolist(), censored))
    return fits


def _map_blocks(fn, n_blocks, workers):
    if workers == 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_blocks)))


def _stream_id(T):
    return int(round(float(T) * 1_000_000))


def path_zero_counts(scheme, T, dt, reps, seed, workers=1):
    """Sign-change counts of ``reps`` independent paths on [0, T]."""
    check_nyquist(scheme, dt)
    t, _ = time_grid(T, dt)
    mats = trig_matrices(scheme, t)
    stream = _stream_id(T)
    n_blocks = math.ceil(reps / BLOCK)

    def block(b):
        idx = range(b * BLOCK, min(reps, (b + 1) * BLOCK))
        seeds = [replicate_seed(seed, i, stream) for i in idx]
        return kernels.count_flips_columns(sample_path_block(scheme, t, seeds, mats))

    return np.concatenate(_map_blocks(block, n_blocks, workers))


def prepare_scheme(model, horizon, n_nodes=None):
    return build_synthesis(model, n_nodes=n_nodes, design_horizon=horizon, tol=1e-7)


def run_tail_study(config, scheme=None):
    """P(|N - alpha T| >= eta T) and one-sided variants for every (T, eta).

    The centre alpha comes from the exact model; the synthetic alpha of the
    scheme actually simulated is recorded in ``meta`` alongside the
    covariance sup-error.
    """
    model = model_from_spec(config.model)
    if scheme is None:
        scheme = prepare_scheme(model, max(config.T), config.n_nodes)
    if scheme.sup_error >= 1e-6:
        raise ValueError(f"synthesis sup-error {scheme.sup_error:.2e} is not below 1e-6")
    alpha = kac_rice_alpha(model)
    dt = config.dt if config.dt is not None else default_dt(scheme)
    counts = {T: path_zero_counts(scheme, T, dt, config.replicates, config.seed, config.workers)
              for T in config.T}
    centers = {T: alpha * T for T in config.T}
    results = tabulate(counts, centers, config.eta, config.replicates)
    meta = {
        "alpha": alpha,
        "alpha_synthetic": scheme.alpha(),
        "sup_error": scheme.sup_error,
        "n_nodes": int(scheme.size),
        "dt": dt,
        "mean_count": {repr(T): float(np.mean(c)) for T, c in counts.items()},
    }
    return StudyResult(config.to_dict(), results, fit_rates(results), meta)


# -- discrete sign changes ---------------------------------------------------

def flat_density(lam):
    return np.full_like(np.asarray(lam, dtype=float), 1.0 / (2.0 * math.pi))


@dataclass
class SignChangeConfig:
    """Sign-change study for a discrete process with density on [-pi, pi].

    ``density`` is 'flat' or a two-column CSV path (frequency, density).
    """

    density: str
    T: list
    eta: list
    replicates: int = 1000
    seed: int = 0
    workers: int = 1
    truncation: int = 64

    def __post_init__(self):
        self.T = [int(t) for t in self.T]
        self.eta = [float(e) for e in self.eta]
        if self.replicates < 100:
            raise ValueError("replicates must be at least 100")
        if not self.T or min(self.T) < 1:
            raise ValueError("T values must be positive integers")

    def density_fn(self):
        if self.density == "flat":
            return flat_density
        data = np.loadtxt(self.density, delimiter=",", ndmin=2)
        return (data[:, 0], data[:, 1])

    def to_dict(self):
        return asdict(self)


def run_sign_change_study(config):
    """Tails of N*_Y(T) around its mean T * P(Y_0 Y_1 < 0)."""
    coef, mass = fourier_sqrt_coefficients(config.density_fn(), config.truncation)
    lag1 = float(np.dot(coef[:-1], coef[1:]))
    lag0 = float(np.dot(coef, coef))
    p_flip = math.acos(max(-1.0, min(1.0, lag1 / lag0))) / math.pi
    counts, centers = {}, {}
    for T in config.T:
        n_blocks = math.ceil(config.replicates / BLOCK)

        def block(b, T=T):
            idx = range(b * BLOCK, min(config.replicates, (b + 1) * BLOCK))
            seeds = [replicate_seed(config.seed, i, T) for i in idx]
            return kernels.count_flips_columns(sample_discrete_block(coef, T, seeds))

        counts[float(T)] = np.concatenate(_map_blocks(block, n_blocks, config.workers))
        centers[float(T)] = T * p_flip
    results = tabulate(counts, centers, config.eta, config.replicates)
    meta = {
        "p_flip": p_flip,
        "truncation_error": max(0.0, mass - lag0),
        "hoeffding": {repr(float(T)): {repr(e): 2 * math.exp(-2 * e * e * T) for e in config.eta}
                      for T in config.T},
    }
    return StudyResult(config.to_dict(), results, fit_rates(results), meta)


# -- mean zero density -----------------------------------------------------

@dataclass
class MeanResult:
    mean: float
    se: float
    alpha: float
    alpha_synthetic: float
    T: float
    reps: int
    dt: float
    counts: np.ndarray = field(repr=False)

    HEADER = ("T", "reps", "dt", "mean", "se", "alpha", "alpha_synthetic")

    def row(self):
        return [repr(float(self.T)), str(self.reps), repr(float(self.dt)),
                repr(float(self.mean)), repr(float(self.se)), repr(float(self.alpha)),
                repr(float(self.alpha_synthetic))]

    @property
    def z_score(self):
        return (self.mean - self.alpha) / self.se if self.se > 0 else (0.0 if self.mean == self.alpha else math.inf)


def run_mean_study(model, T, reps, seed, dt=None, workers=1, n_nodes=None):
    """Mean of N_X([0, T]) / T with its standard error.

    ``model`` may be a SpectralModel, a model spec, or a SynthesisScheme
    (then alpha is that of the scheme itself).
    """
    if isinstance(model, SynthesisScheme):
        scheme = model
        alpha = scheme.alpha() if scheme.model is None else kac_rice_alpha(scheme.model)
    else:
        model = model_from_spec(model)
        scheme = prepare_scheme(model, T, n_nodes)
        alpha = kac_rice_alpha(model)
    dt = default_dt(scheme) if dt is None else dt
    counts = path_zero_counts(scheme, T, dt, reps, seed, workers)
    dens = counts / T
    se = float(dens.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
    return MeanResult(float(dens.mean()), se, alpha, scheme.alpha(), float(T), int(reps),
                      float(dt), counts)


# -- persistence -------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def persist(results, path, kind="tail", config=None):
    """Write ``<path>/<kind>.csv`` and ``<path>/manifest.json``.

    ``results`` is a StudyResult (tail or sign-change study), a MeanResult,
    or a list of TailResult.
    ``config`` is stored for replay when the result does not carry one.
    Returns the dict of written file paths.
    """
    os.makedirs(path, exist_ok=True)
    csv_path = os.path.join(path, f"{kind}.csv")
    manifest = {"kind": kind, "version": __version__, "backend": kernels.BACKEND}
    if config is not None:
        manifest["config"] = config
    if isinstance(results, MeanResult):
        _write_csv(csv_path, MeanResult.HEADER, [results.row()])
        manifest["result"] = {k: v for k, v in asdict(results).items() if k != "counts"}
    else:
        if isinstance(results, StudyResult):
            manifest["config"] = results.config
            manifest["meta"] = results.meta
            manifest["fits"] = [asdict(f) for f in results.fits]
            rows = results.results
        else:
            rows = list(results)
        _write_csv(csv_path, TailResult.HEADER, [r.row() for r in rows])
    man_path = os.path.join(path, "manifest.json")
    with open(man_path, "w") as fh:
        json.dump(clean_json(manifest), fh, indent=2, sort_keys=True, allow_nan=False,
                  default=_json_default)
        fh.write("\n")
    return {"csv": csv_path, "manifest": man_path}


def clean_json(o):
    """Recursively replace non-finite floats: nan -> None, +-inf -> "inf"/"-inf"."""
    if isinstance(o, dict):
        return {str(k): clean_json(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [clean_json(v) for v in o]
    if isinstance(o, np.ndarray):
        return clean_json(o.tolist())
    if isinstance(o, (float, np.floating)):
        o = float(o)
        if math.isnan(o):
            return None
        if math.isinf(o):
            return "inf" if o > 0 else "-inf"
        return o
    if isinstance(o, np.integer):
        return int(o)
    return o


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def load_tail_csv(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(TailResult(float(row["T"]), float(row["eta"]), row["side"],
                                  int(row["hits"]), int(row["reps"]), float(row["p_hat"]),
                                  float(row["ci_low"]), float(row["ci_high"]),
                                  float(row["center"])))
    return out


def load(path):
    """Read back a persisted directory: (manifest, list of TailResult or row dict)."""
    with open(os.path.join(path, "manifest.json")) as fh:
        manifest = json.load(fh)
    csv_path = os.path.join(path, f"{manifest['kind']}.csv")
    if manifest["kind"] == "mean":
        with open(csv_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return manifest, rows
    return manifest, load_tail_csv(csv_path)


def replay(manifest, workers=None):
    """Re-run the study described by a manifest (dict or path)."""
    if isinstance(manifest, str):
        with open(manifest) as fh:
            manifest = json.load(fh)
    cfg = dict(manifest["config"])
    if workers is not None:
        cfg["workers"] = workers
    if manifest["kind"] == "tail":
        return run_tail_study(TailConfig(**cfg))
    if manifest["kind"] == "mean":
        cfg.pop("workers", None)
        return run_mean_study(cfg.pop("model"), workers=workers or 1, **cfg)
    if manifest["kind"] == "sign_changes":
        return run_sign_change_study(SignChangeConfig(**cfg))
    raise ValueError(f"cannot replay study of kind {manifest['kind']!r}")
