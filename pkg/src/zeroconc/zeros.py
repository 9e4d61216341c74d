"""Zero counting on the line and in disks of the complex plane.

Real zeros come from sign changes on a grid, refined by bisection on the
underlying trig sum. Complex zeros in a disk come from the winding number of
the field around the boundary circle; Jensen integrals are trapezoid means of
log|f| over circles.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from ._pykernels import strict_flips
from .sampler import check_nyquist

GRID_ZERO = 1e-12
RETRY_FACTOR = 1.0 + 1e-3
RETRY_ATTEMPTS = 5


class ContourTooClose(ArithmeticError):
    """A zero sits on or next to the contour; retry with a perturbed radius."""


class WindingError(ArithmeticError):
    """Accumulated argument is not close to an integer number of turns."""


def count_sign_changes(values):
    """Number of adjacent pairs with strictly opposite signs."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0
    return kernels.count_flips(values)[0]


@dataclass
class ZeroReport:
    """Real zeros found on a sampled path.

    ``flags`` lists grid indices whose value is within GRID_ZERO of 0; those
    points produce no sign flip and are not counted.
    """

    count: int
    locations: np.ndarray
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {"count": int(self.count),
                "locations": [float(x) for x in self.locations],
                "flags": [int(i) for i in self.flags]}

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["zero"])
            for x in self.locations:
                w.writerow([repr(float(x))])


def count_zeros_real(path, refine_iters=40):
    """One zero per sign-change cell of ``path``.

    Locations are bisected on the path's own trig sum when the path carries
    its source field (cell width ends below dt * 2**-refine_iters), and
    linearly interpolated otherwise.
    """
    v = np.asarray(path.values, dtype=float)
    if path.source is not None:
        check_nyquist(path.source.scheme, path.dt)
    if v.size < 2:
        return ZeroReport(0, np.empty(0), [])
    cells = np.flatnonzero(strict_flips(v[:-1], v[1:]))
    flags = np.flatnonzero(np.abs(v) < GRID_ZERO).tolist()
    left = path.t0 + path.dt * cells
    if cells.size == 0:
        locs = np.empty(0)
    elif path.source is not None:
        locs = path.source.refine(left, left + path.dt, refine_iters)
    else:
        va, vb = v[cells], v[cells + 1]
        locs = left + path.dt * va / (va - vb)
    return ZeroReport(int(cells.size), locs, flags)


def _circle(center, radius, n):
    theta = 2.0 * math.pi * np.arange(n) / n
    return center + radius * np.exp(1j * theta)


def count_zeros_disk(field_evaluator, center, radius, nodes=None,
                     min_nodes=64, max_nodes=1 << 16, tol=0.1):
    """Zeros of ``field_evaluator`` in the open disk, by the argument principle.

    With ``nodes`` fixed the contour is sampled exactly that many times;
    otherwise the count doubles from ``min_nodes`` until no argument step
    exceeds pi/3.

    Raises
    ------
    ContourTooClose
        If |f| on the contour drops below 1e-9 of its rms or the sampling
        cap is reached; the caller should perturb the radius.
    WindingError
        If the accumulated turns are further than ``tol`` from an integer.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    n = int(nodes) if nodes else int(min_nodes)
    while True:
        vals = np.asarray(field_evaluator(_circle(center, radius, n)), dtype=complex)
        mag = np.abs(vals)
        rms = math.sqrt(float(np.mean(mag * mag)))
        if not np.all(np.isfinite(vals)) or mag.min() <= 1e-9 * rms or rms == 0.0:
            raise ContourTooClose(f"|f| vanishes near the circle of radius {radius}")
        turns, step = kernels.winding(vals)
        if nodes or step < math.pi / 3:
            break
        if n >= max_nodes:
            raise ContourTooClose(f"argument not resolved with {n} contour nodes")
        n *= 2
    k = round(turns)
    if abs(turns - k) > tol:
        raise WindingError(f"winding {turns:.4f} is not an integer")
    return int(k)


def with_retry(fn, radius, attempts=RETRY_ATTEMPTS, factor=RETRY_FACTOR):
    """Call fn(radius), growing the radius by ``factor`` on ContourTooClose.

    Returns (result, radius used, attempts made).
    """
    for attempt in range(1, attempts + 1):
        try:
            return fn(radius), radius, attempt
        except ContourTooClose:
            if attempt == attempts:
                raise
            radius *= factor
    raise AssertionError("unreachable")


def circle_log_mean(field_evaluator, center, radius, start=256, cap=1 << 14, tol=1e-6):
    """Trapezoid mean of log|f| on a circle with node doubling.

    Returns (value, error estimate, nodes used). The error estimate is the
    last change between successive doublings, floored at roundoff level.
    """
    n = start
    prev = None
    while True:
        vals = np.abs(np.asarray(field_evaluator(_circle(center, radius, n)), dtype=complex))
        if np.any(vals < 1e-300):
            raise ContourTooClose(f"|f| underflows on the circle of radius {radius}")
        cur = float(np.mean(np.log(vals)))
        if prev is not None:
            # successive differences can vanish exactly; keep a roundoff floor
            err = max(abs(cur - prev), 1e-13 * (1.0 + abs(cur)))
            if err < tol or n >= cap:
                return cur, err, n
        prev = cur
        n *= 2


def jensen_gamma(field_evaluator, center, delta, beta, nodes=None):
    """Mean of log|f| over the circle of radius delta * e^beta around ``center``.

    With ``nodes`` given a single trapezoid rule of that size is used.
    """
    radius = delta * math.exp(beta)
    if nodes:
        vals = np.abs(np.asarray(field_evaluator(_circle(center, radius, int(nodes)))))
        if np.any(vals < 1e-300):
            raise ContourTooClose(f"|f| underflows on the circle of radius {radius}")
        return float(np.mean(np.log(vals)))
    return circle_log_mean(field_evaluator, center, radius)[0]


@dataclass
class JensenTriple:
    """Zero counts at radii delta and delta e^beta around the Jensen average."""

    lower: int
    mid: float
    upper: int
    quadrature_nodes: int
    tol: float
    delta: float
    beta: float
    attempts: int = 1

    @property
    def holds(self):
        return self.lower <= self.mid + self.tol and self.mid <= self.upper + self.tol

    def to_dict(self):
        out = asdict(self)
        out["holds"] = self.holds
        return out


def jensen_sandwich(field_evaluator, x_j, delta, beta, attempts=RETRY_ATTEMPTS):
    """Zero count at radius delta <= Jensen average <= count at delta e^beta.

    All three quantities share one radius; when any contour is too close to
    a zero the radius grows by RETRY_FACTOR and everything is recomputed.
    """
    if not (delta > 0 and beta > 0):
        raise ValueError("delta and beta must be positive")

    def attempt(d):
        lower = count_zeros_disk(field_evaluator, x_j, d)
        upper = count_zeros_disk(field_evaluator, x_j, d * math.exp(beta))
        g1, e1, n1 = circle_log_mean(field_evaluator, x_j, d * math.exp(beta))
        g0, e0, n0 = circle_log_mean(field_evaluator, x_j, d)
        return lower, (g1 - g0) / beta, upper, max(n0, n1), (e1 + e0) / beta

    (lower, mid, upper, n, tol), used, k = with_retry(attempt, delta, attempts)
    return JensenTriple(lower, mid, upper, n, tol, used, beta, k)


@dataclass
class CoverCount:
    total: int
    per_ball: list
    centers: np.ndarray
    radius: float


def cover_count(field_evaluator, T, delta):
    """Zeros in the n = ceil(T/(2 delta)) disks of radius delta centred at (2j-1) delta."""
    if not (T > 0 and delta > 0):
        raise ValueError("T and delta must be positive")
    n = math.ceil(T / (2.0 * delta) - 1e-12)
    centers = (2.0 * np.arange(1, n + 1) - 1.0) * delta
    counts = []
    radius = delta
    for c in centers:
        k, r, _ = with_retry(lambda r: count_zeros_disk(field_evaluator, complex(c), r), delta)
        radius = max(radius, r)
        counts.append(k)
    return CoverCount(int(sum(counts)), counts, centers, radius)
