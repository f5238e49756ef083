"""Sampling plans in the disk and their coverage/separation diagnostics."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .disk_geometry import TWO_PI, stolz_half_angle, wrap_angle
from .function_models import AnalyticModel
from .geometric_measure import ArcUnion, BoundarySet

__all__ = [
    "SamplingPlan",
    "CoverageReport",
    "BlaschkeSumReport",
    "SeparationResult",
    "MAX_PLAN_POINTS",
    "generate_dyadic",
    "generate_radial_ray",
    "custom_plan",
    "validate_coverage",
    "blaschke_sum",
    "separation_sum",
    "trend_slope",
    "trend_verdict",
]

MAX_PLAN_POINTS = 10**7


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    points: np.ndarray
    target: BoundarySet
    scheme: dict = field(default_factory=lambda: {"kind": "custom"})

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if pts.size and (not np.all(np.isfinite(pts)) or np.any(np.abs(pts) >= 1.0)):
            raise ValueError("plan points must lie in the open unit disk")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size

    def prefix(self, n: int) -> "SamplingPlan":
        if not 0 <= n <= len(self):
            raise ValueError(f"prefix {n} outside plan of length {len(self)}")
        return SamplingPlan(self.points[:n], self.target, dict(self.scheme, prefix=n))

    @property
    def levels(self) -> np.ndarray:
        """Dyadic level ``floor(-log2(1 - |z|))`` of each point."""
        depth = -np.log2(1.0 - np.abs(self.points))
        return np.floor(depth + 1e-9).astype(int)

    def tail_condition(self) -> bool:
        """Finite check that ``|z_n| -> 1``: last-quarter max of ``1 - |z|`` below first-quarter max."""
        n = len(self)
        if n < 4:
            return False
        q = n // 4
        slack = 1.0 - np.abs(self.points)
        return bool(slack[-q:].max() < slack[:q].max())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "re", "im"])
            for i, z in enumerate(self.points):
                w.writerow([i, f"{z.real:.17g}", f"{z.imag:.17g}"])

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "target": self.target.to_dict(),
            "points": [[float(z.real), float(z.imag)] for z in self.points],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "SamplingPlan":
        pts = np.array([complex(re, im) for re, im in data["points"]], dtype=complex)
        return cls(pts, BoundarySet.from_dict(data["target"]), data.get("scheme", {"kind": "custom"}))

    @classmethod
    def from_csv(cls, path, target: BoundarySet | None = None) -> "SamplingPlan":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        pts = np.array([complex(float(r["re"]), float(r["im"])) for r in rows], dtype=complex)
        return cls(pts, target or ArcUnion.full_circle(), {"kind": "custom"})


def _vdc_order(n: int) -> np.ndarray:
    """Bit-reversal (van der Corput) ordering of ``0..n-1``; prefixes stay spread out."""
    if n <= 1:
        return np.arange(n)
    bits = int(math.ceil(math.log2(n)))
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return np.argsort(rev, kind="stable")


def _distance_to_set(theta: np.ndarray, E: BoundarySet) -> np.ndarray:
    d = np.full(theta.shape, math.inf)
    for a in E.arcs():
        if a.is_full_circle:
            return np.zeros(theta.shape)
        off = np.mod(theta - a.start, TWO_PI)
        inside = off <= a.length
        gap = np.minimum(off - a.length, TWO_PI - off)
        d = np.minimum(d, np.where(inside, 0.0, gap))
    return d


def generate_dyadic(E: BoundarySet, levels: int, density_factor: int = 1) -> SamplingPlan:
    """Points at radii ``1 - 2^-m`` forming a ``2^-m/density_factor`` angular net of ``E``.

    Angles are multiples of the net step (measured from ``-pi``) within one
    step of ``E``.  Levels are emitted coarse to fine; inside a level the
    angles follow bit-reversal order so that any prefix is spread over ``E``.
    """
    if not 1 <= levels <= 24:
        raise ValueError("levels must lie in 1..24")
    if density_factor < 1:
        raise ValueError("density_factor must be a positive integer")
    arcs = E.arcs()
    estimate = sum((E.measure + 2 * len(arcs) * 2.0**-m / density_factor) * 2.0**m * density_factor + 1
                   for m in range(1, levels + 1))
    if estimate > MAX_PLAN_POINTS:
        raise ValueError(f"plan would hold about {estimate:.3g} points (limit {MAX_PLAN_POINTS})")
    chunks = []
    for m in range(1, levels + 1):
        step = 2.0**-m / density_factor
        count = int(math.ceil(TWO_PI / step))
        angles = -math.pi + step * np.arange(count)
        angles = angles[_distance_to_set(angles, E) <= step]
        angles = angles[_vdc_order(angles.size)]
        chunks.append((1.0 - 2.0**-m) * np.exp(1j * angles))
    pts = np.concatenate(chunks) if chunks else np.zeros(0, dtype=complex)
    scheme = {"kind": "dyadic", "levels": levels, "density_factor": density_factor}
    return SamplingPlan(pts, E, scheme)


def generate_radial_ray(angles, radii, target: BoundarySet | None = None) -> SamplingPlan:
    """Points ``r e^{i a}`` for every radius (outer loop) and anchor angle."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    pts = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    scheme = {"kind": "radial_ray", "angles": angles.tolist(), "radii": radii.tolist()}
    return SamplingPlan(pts, target or ArcUnion.full_circle(), scheme)


def custom_plan(points, target: BoundarySet | None = None) -> SamplingPlan:
    return SamplingPlan(np.asarray(points, dtype=complex), target or ArcUnion.full_circle(), {"kind": "custom"})


# ---------------------------------------------------------------------------
# Coverage


@dataclass(frozen=True, eq=False)
class CoverageReport:
    grid: int
    theta: np.ndarray
    counts: np.ndarray
    threshold: int
    min_count: int
    uncovered_fraction: float

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "probe_points": int(self.theta.size),
            "threshold": self.threshold,
            "min_count": self.min_count,
            "uncovered_fraction": self.uncovered_fraction,
        }


def _cone_counts(points: np.ndarray, grid: int) -> np.ndarray:
    """Per-gridpoint number of plan points whose approach cone contains it."""
    delta = TWO_PI / grid
    diff = np.zeros(grid + 1, dtype=np.int64)
    r = np.abs(points)
    centre = r == 0
    diff[0] += int(centre.sum())
    diff[grid] -= int(centre.sum())
    phi = np.angle(points[~centre])
    half = stolz_half_angle(r[~centre])
    # strict inequality |theta_k - phi| < half
    lo = np.floor((phi - half + math.pi) / delta).astype(np.int64) + 1
    hi = np.ceil((phi + half + math.pi) / delta).astype(np.int64) - 1
    full = hi - lo + 1 >= grid
    diff[0] += int(full.sum())
    diff[grid] -= int(full.sum())
    lo, hi = lo[~full], hi[~full]
    ok = hi >= lo
    lo, hi = lo[ok], hi[ok]
    lo_m = np.mod(lo, grid)
    hi_m = lo_m + (hi - lo)
    plain = hi_m < grid
    np.add.at(diff, lo_m[plain], 1)
    np.add.at(diff, hi_m[plain] + 1, -1)
    wrap = ~plain
    np.add.at(diff, lo_m[wrap], 1)
    diff[grid] -= int(wrap.sum())
    diff[0] += int(wrap.sum())
    np.add.at(diff, hi_m[wrap] - grid + 1, -1)
    return np.cumsum(diff[:grid])


def validate_coverage(plan: SamplingPlan, grid: int = 4096, region: BoundarySet | None = None,
                      threshold: int | None = None) -> CoverageReport:
    """Count, for each boundary gridpoint of ``region``, the plan points covering it.

    ``region`` defaults to the plan's target.  A gridpoint is uncovered when
    its count is below ``threshold``, which defaults to ``ceil(levels/2)``
    for dyadic plans and 1 otherwise (a finite stand-in for "a subsequence").
    """
    if grid < 64:
        raise ValueError("grid must be >= 64")
    region = region if region is not None else plan.target
    theta = -math.pi + TWO_PI * np.arange(grid) / grid
    mask = region.contains(theta)
    counts_all = _cone_counts(plan.points, grid)
    if np.any(mask):
        theta_r, counts = theta[mask], counts_all[mask]
    else:
        # region thinner than the grid: probe arc midpoints directly
        theta_r = np.array([a.center for a in region.arcs()])
        counts = np.array([_count_at(plan.points, t) for t in theta_r], dtype=np.int64)
    if threshold is None:
        if plan.scheme.get("kind") == "dyadic":
            threshold = max(1, int(math.ceil(plan.scheme["levels"] / 2)))
        else:
            threshold = 1
    if counts.size == 0:
        return CoverageReport(grid, theta_r, counts, threshold, 0, 1.0)
    uncovered = float(np.mean(counts < threshold))
    return CoverageReport(grid, theta_r, counts, threshold, int(counts.min()), uncovered)


def _count_at(points: np.ndarray, theta: float) -> int:
    r = np.abs(points)
    d = np.abs(wrap_angle(np.angle(points) - theta))
    return int(np.sum((r == 0) | (d < stolz_half_angle(r))))


# ---------------------------------------------------------------------------
# Trend classification


def trend_slope(series) -> float:
    """Least-squares slope of ``log S_N`` against ``log N`` over the last half."""
    s = np.asarray(series, dtype=float)
    n = s.size
    idx = np.arange(1, n + 1)
    tail = slice(n // 2, n)
    x, y = idx[tail], s[tail]
    keep = y > 0
    if keep.sum() < 3:
        return math.nan
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def trend_verdict(series, divergent: float = 0.2, convergent: float = 0.05) -> str:
    """``divergent-trend``, ``convergent-trend`` or ``inconclusive`` for nondecreasing partial sums."""
    s = np.asarray(series, dtype=float)
    if s.size >= 2 and np.all(s == 0):
        return "convergent-trend"
    slope = trend_slope(s)
    if math.isnan(slope):
        return "inconclusive"
    if slope > divergent:
        return "divergent-trend"
    if slope < convergent:
        return "convergent-trend"
    return "inconclusive"


@dataclass(frozen=True)
class BlaschkeSumReport:
    total: float
    per_level: dict
    verdict: str

    def to_dict(self) -> dict:
        return {"total": self.total, "per_level": {str(k): v for k, v in self.per_level.items()},
                "verdict": self.verdict}


def blaschke_sum(plan: SamplingPlan, **thresholds) -> BlaschkeSumReport:
    """``sum (1 - |z_n|)`` with per-level sums and a divergence verdict.

    The verdict classifies the partial sums over consecutive dyadic levels.
    """
    if len(plan) == 0:
        return BlaschkeSumReport(0.0, {}, "inconclusive")
    slack = 1.0 - np.abs(plan.points)
    levels = plan.levels
    per_level = {}
    for m in range(int(levels.min()), int(levels.max()) + 1):
        per_level[m] = math.fsum(slack[levels == m])
    partial = np.cumsum(list(per_level.values()))
    return BlaschkeSumReport(math.fsum(slack), per_level, trend_verdict(partial, **thresholds))


@dataclass(frozen=True, eq=False)
class SeparationResult:
    partial_sums: np.ndarray
    slope: float
    verdict: str

    def to_dict(self) -> dict:
        return {"n": int(self.partial_sums.size), "final": float(self.partial_sums[-1]) if self.partial_sums.size else 0.0,
                "slope": self.slope, "verdict": self.verdict}


def separation_sum(f: AnalyticModel, g: AnalyticModel, plan: SamplingPlan, prefix: int | None = None,
                   **thresholds) -> SeparationResult:
    """Partial sums ``S_N = sum_{k<=N} |f(z_k) - g(z_k)|^2`` for ``N = 1..prefix``."""
    prefix = len(plan) if prefix is None else prefix
    if not 1 <= prefix <= len(plan):
        raise ValueError(f"prefix must lie in 1..{len(plan)}")
    z = plan.points[:prefix]
    d = np.abs(f(z) - g(z)) ** 2
    partial = np.cumsum(d)
    return SeparationResult(partial, trend_slope(partial), trend_verdict(partial, **thresholds))
