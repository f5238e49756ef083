"""Hellinger affinity of shifted planar noise laws and Kakutani products.

For a noise density ``P`` on the plane the affinity between ``P(z - a)``
and ``P(z - b)`` depends only on the shift ``d = a - b``.  The product of
the affinities along a sampling plan decides whether the two infinite
product laws are equivalent (product > 0) or mutually singular.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .function_models import AnalyticModel
from .sampling_design import SamplingPlan

TWO_PI = 2.0 * math.pi

__all__ = [
    "NoiseModel",
    "Gaussian2D",
    "UniformDisk",
    "GridDensity",
    "NoNoise",
    "KakutaniReport",
    "hellinger_affinity",
    "affinity_gap_constant",
    "kakutani_from_gaps",
    "kakutani_product",
]


class NoiseModel:
    """Zero-mean planar noise law with density ``P``."""

    kind = "abstract"

    def density(self, x, y):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> complex:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        """Typical size used to size quadrature boxes and shift ladders."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "NoiseModel":
        kind = data.get("kind")
        if kind == "gaussian":
            return Gaussian2D(float(data["sigma"]))
        if kind == "uniform_disk":
            return UniformDisk(float(data["radius"]))
        if kind == "grid":
            return GridDensity(float(data["cell_width"]), data["weights"])
        if kind == "none":
            return NoNoise()
        raise ValueError(f"unknown noise kind {kind!r}")


@dataclass(frozen=True)
class Gaussian2D(NoiseModel):
    """Circular Gaussian ``(1/(2 pi s^2)) exp(-|z|^2 / (2 s^2))``."""

    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be a positive finite number")

    def density(self, x, y):
        s2 = self.sigma**2
        return np.exp(-(np.square(x) + np.square(y)) / (2.0 * s2)) / (2.0 * math.pi * s2)

    def sample(self, rng):
        a, b = rng.standard_normal(2)
        return complex(self.sigma * a, self.sigma * b)

    @property
    def scale(self):
        return self.sigma

    def to_dict(self):
        return {"kind": self.kind, "sigma": self.sigma}


@dataclass(frozen=True)
class UniformDisk(NoiseModel):
    """Uniform law on the disk ``|z| <= radius``."""

    radius: float
    kind = "uniform_disk"

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be a positive finite number")

    def density(self, x, y):
        inside = np.square(x) + np.square(y) <= self.radius**2
        return np.where(inside, 1.0 / (math.pi * self.radius**2), 0.0)

    def sample(self, rng):
        u, v = rng.random(2)
        return self.radius * math.sqrt(u) * complex(math.cos(TWO_PI * v), math.sin(TWO_PI * v))

    @property
    def scale(self):
        return self.radius

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius}



class GridDensity(NoiseModel):
    """Piecewise-constant density on square cells centred on the origin.

    ``weights`` is a square array of cell probabilities; cell ``(i, j)`` has
    centre ``((j - c) w, (i - c) w)`` with ``c = (n - 1)/2``.
    """

    kind = "grid"

    def __init__(self, cell_width: float, weights):
        w = np.asarray(weights, dtype=float)
        if not (cell_width > 0 and math.isfinite(cell_width)):
            raise ValueError("cell_width must be a positive finite number")
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError("weights must be a square 2-D array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-8:
            raise ValueError(f"weights must sum to 1 (got {w.sum():.12g})")
        self.cell_width = float(cell_width)
        self.weights = w
        c = (w.shape[0] - 1) / 2.0
        self.centers = (np.arange(w.shape[0]) - c) * self.cell_width
        mx = float(np.sum(w.sum(axis=0) * self.centers))
        my = float(np.sum(w.sum(axis=1) * self.centers))
        if abs(mx) > 1e-8 or abs(my) > 1e-8:
            raise ValueError(f"grid density must have zero mean (got {mx:.3g} + {my:.3g}i)")

    def density(self, x, y):
        n = self.weights.shape[0]
        half = n * self.cell_width / 2.0
        j = np.floor((np.asarray(x) + half) / self.cell_width).astype(int)
        i = np.floor((np.asarray(y) + half) / self.cell_width).astype(int)
        ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
        out = np.zeros(np.broadcast(i, j).shape)
        out[ok] = self.weights[i[ok], j[ok]] / self.cell_width**2
        return out

    def sample(self, rng):
        n = self.weights.shape[0]
        k = int(rng.choice(n * n, p=self.weights.ravel()))
        i, j = divmod(k, n)
        dx, dy = rng.random(2) - 0.5
        return complex(self.centers[j] + dx * self.cell_width, self.centers[i] + dy * self.cell_width)

    @property
    def scale(self):
        return self.cell_width * self.weights.shape[0] / 2.0

    def to_dict(self):
        return {"kind": self.kind, "cell_width": self.cell_width, "weights": self.weights.tolist()}

    def __repr__(self):
        return f"GridDensity(cell_width={self.cell_width!r}, n={self.weights.shape[0]})"


@dataclass(frozen=True)
class NoNoise(NoiseModel):
    """Degenerate zero noise (the ``sigma -> 0`` limit)."""

    kind = "none"

    def density(self, x, y):
        raise ValueError("NoNoise has no density")

    def sample(self, rng):
        return 0j

    @property
    def scale(self):
        return 0.0

    def to_dict(self):
        return {"kind": self.kind}


# ---------------------------------------------------------------------------
# Affinity


def _gauss_legendre_box(func, x0, x1, y0, y1, panels: int, order: int = 16) -> float:
    xg, wg = special.roots_legendre(order)
    ex = np.linspace(x0, x1, panels + 1)
    ey = np.linspace(y0, y1, panels + 1)
    hx = 0.5 * np.diff(ex)
    hy = 0.5 * np.diff(ey)
    xs = ((ex[:-1] + ex[1:]) / 2.0)[:, None] + hx[:, None] * xg[None, :]
    ys = ((ey[:-1] + ey[1:]) / 2.0)[:, None] + hy[:, None] * xg[None, :]
    wx = (hx[:, None] * wg[None, :]).ravel()
    wy = (hy[:, None] * wg[None, :]).ravel()
    X, Y = np.meshgrid(xs.ravel(), ys.ravel(), indexing="ij")
    vals = func(X, Y)
    return float(wx @ vals @ wy)


def _tensor_affinity(P: NoiseModel, d: complex, tol: float = 1e-12) -> float:
    """Composite Gauss-Legendre on a box around the overlap, doubled until stable."""
    half = 12.0 * P.scale
    cx, cy = d.real / 2.0, d.imag / 2.0
    box = (cx - half - abs(d.real) / 2, cx + half + abs(d.real) / 2,
           cy - half - abs(d.imag) / 2, cy + half + abs(d.imag) / 2)

    def integrand(x, y):
        return np.sqrt(P.density(x, y) * P.density(x - d.real, y - d.imag))

    prev = _gauss_legendre_box(integrand, *box, panels=4)
    for panels in (8, 16, 32):
        cur = _gauss_legendre_box(integrand, *box, panels=panels)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    return prev


def _uniform_disk_affinity(P: UniformDisk, d: complex) -> float:
    """Overlap area of two disks by adaptive 1-D quadrature of the chord overlap."""
    R = P.radius
    s = abs(d)
    if s >= 2.0 * R:
        return 0.0
    if s == 0.0:
        return 1.0
    # disks centred at 0 and s on the real axis; the lens spans x in [s - R, R]

    def chord(x):
        return 2.0 * math.sqrt(max(R * R - max(x * x, (x - s) ** 2), 0.0))

    area, _ = integrate.quad(chord, s - R, R, points=[s / 2.0], epsabs=1e-14, epsrel=1e-13, limit=200)
    return min(1.0, area / (math.pi * R * R))


def _grid_affinity(P: GridDensity, d: complex) -> float:
    """Exact affinity of a piecewise-constant density with its shift."""
    w = P.cell_width
    n = P.weights.shape[0]
    root = np.sqrt(P.weights)

    def axis_terms(shift):
        k = math.floor(shift / w)
        frac = shift / w - k
        return [(k, 1.0 - frac), (k + 1, frac)]

    total = 0.0
    for kx, ox in axis_terms(d.real):
        for ky, oy in axis_terms(d.imag):
            if ox == 0.0 or oy == 0.0 or abs(kx) >= n or abs(ky) >= n:
                continue
            # cell (i, j) of P against the shifted cell (i - ky, j - kx)
            a = root[max(ky, 0): n + min(ky, 0), max(kx, 0): n + min(kx, 0)]
            b = root[max(-ky, 0): n + min(-ky, 0), max(-kx, 0): n + min(-kx, 0)]
            total += ox * oy * float(np.sum(a * b))
    return min(1.0, total)


def hellinger_affinity(P: NoiseModel, d: complex, method: str = "auto") -> float:
    """``int int sqrt(P(z) P(z - d)) dx dy``, in ``[0, 1]``.

    Gaussian laws use ``exp(-|d|^2 / (8 sigma^2))`` unless
    ``method="quadrature"``; the other laws are always integrated.
    """
    d = complex(d)
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(P, NoNoise):
        return 1.0 if d == 0 else 0.0
    if isinstance(P, Gaussian2D):
        if method == "quadrature":
            return min(1.0, _tensor_affinity(P, d))
        return math.exp(-abs(d) ** 2 / (8.0 * P.sigma**2))
    if method == "closed":
        raise ValueError(f"no closed form for {P.kind} noise")
    if isinstance(P, UniformDisk):
        return _uniform_disk_affinity(P, d)
    if isinstance(P, GridDensity):
        return _grid_affinity(P, d)
    return min(1.0, _tensor_affinity(P, d))


def _one_minus_affinity(P: NoiseModel, d: complex) -> float:
    if isinstance(P, Gaussian2D):
        return -math.expm1(-abs(d) ** 2 / (8.0 * P.sigma**2))
    return 1.0 - hellinger_affinity(P, d)


def affinity_gap_constant(P: NoiseModel, shift_ladder) -> float:
    """``min_d (1 - rho(d)) / |d|^2`` over the given nonzero shifts.

    A nonpositive result means the quadratic lower bound on the affinity
    gap fails for this law at these shifts.
    """
    shifts = [complex(d) for d in shift_ladder]
    if not shifts or any(d == 0 for d in shifts):
        raise ValueError("shift ladder must be nonempty and exclude 0")
    return min(_one_minus_affinity(P, d) / abs(d) ** 2 for d in shifts)


# ---------------------------------------------------------------------------
# Kakutani products


@dataclass(frozen=True, eq=False)
class KakutaniReport:
    ladder: tuple
    log_products: tuple
    products: tuple
    log_affinities: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    classification: str = "inconclusive"

    def to_dict(self) -> dict:
        return {
            "ladder": list(self.ladder),
            "log_products": list(self.log_products),
            "products": list(self.products),
            "total_log": math.fsum(self.log_affinities),
            "classification": self.classification,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "gap_re", "gap_im", "affinity", "log_affinity"])
            for k, (g, la) in enumerate(zip(self.gaps, self.log_affinities), start=1):
                w.writerow([k, f"{g.real:.17g}", f"{g.imag:.17g}", f"{math.exp(la):.17g}", f"{la:.17g}"])


def _log_affinity(P: NoiseModel, d: complex) -> float:
    if isinstance(P, Gaussian2D):
        return -abs(d) ** 2 / (8.0 * P.sigma**2)
    rho = hellinger_affinity(P, d)
    return -math.inf if rho <= 0.0 else math.log(rho)


def _prefix_fsums(values: np.ndarray, ladder) -> list:
    """Correctly rounded prefix sums at the ladder points."""
    return [math.fsum(values[:n]) for n in ladder]


def _log_slope(running: np.ndarray) -> float:
    """Slope of the running log product against ``log N`` over the last half."""
    n = running.size
    if n < 4:
        return 0.0
    idx = np.arange(n // 2, n)
    return float(np.polyfit(np.log(idx + 1.0), running[idx], 1)[0])


def kakutani_from_gaps(gaps, P: NoiseModel, ladder, orthogonal_log: float = -30.0,
                       equivalence_tol: float = 1e-3, min_decline: float = 0.05) -> KakutaniReport:
    """Partial products of affinities ``rho(P, d_k)`` at the ladder points.

    Classification: ``orthogonal-evidence`` when the final log product is
    below ``orthogonal_log`` and still falling by at least ``min_decline``
    per unit of ``log N`` over the last half of the run; ``equivalent-evidence`` when the last two
    ladder values differ by less than ``equivalence_tol`` in log; otherwise
    ``inconclusive``.  A finite run only accumulates evidence.
    """
    gaps = np.asarray(gaps, dtype=complex).ravel()
    ladder = [int(n) for n in ladder]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < 1:
        raise ValueError("ladder must be a strictly increasing list of positive integers")
    if ladder[-1] > gaps.size:
        raise ValueError(f"ladder reaches {ladder[-1]} but only {gaps.size} factors are available")
    n = ladder[-1]
    if isinstance(P, Gaussian2D):
        logs = -np.abs(gaps[:n]) ** 2 / (8.0 * P.sigma**2)
    else:
        logs = np.array([_log_affinity(P, d) for d in gaps[:n]])
    if np.any(np.isneginf(logs)):
        # a single orthogonal factor makes the products orthogonal
        first = int(np.argmax(np.isneginf(logs))) + 1
        log_products = [math.fsum(logs[:m]) if m < first else -math.inf for m in ladder]
    else:
        log_products = _prefix_fsums(logs, ladder)
    classification = "inconclusive"
    final = log_products[-1]
    if final < orthogonal_log:
        if math.isinf(final):
            classification = "orthogonal-evidence"
        elif _log_slope(np.cumsum(logs)) <= -min_decline:
            classification = "orthogonal-evidence"
    elif len(log_products) >= 2 and abs(log_products[-1] - log_products[-2]) < equivalence_tol:
        classification = "equivalent-evidence"
    elif len(log_products) == 1 and final == 0.0:
        classification = "equivalent-evidence"
    return KakutaniReport(
        tuple(ladder),
        tuple(log_products),
        tuple(math.exp(v) for v in log_products),
        logs,
        gaps[:n],
        classification,
    )


def kakutani_product(f: AnalyticModel, g: AnalyticModel, plan: SamplingPlan, P: NoiseModel, ladder,
                     **options) -> KakutaniReport:
    """Affinity products of the observation laws under ``f`` and ``g`` along ``plan``."""
    ladder = list(ladder)
    if ladder and ladder[-1] > len(plan):
        raise ValueError(f"ladder reaches {ladder[-1]} but the plan has {len(plan)} points")
    z = plan.points[: ladder[-1] if ladder else 0]
    return kakutani_from_gaps(f(z) - g(z), P, ladder, **options)
