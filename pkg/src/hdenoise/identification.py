"""Noisy observation of analytic models and their recovery by penalized least squares.

The estimator fits a Taylor polynomial ``M`` to observations ``X_n`` at
plan points ``z_n`` by minimizing

    sum_n |M(z_n) - X_n|^2 + lam * sum_j w_j(alpha) |c_j|^2,

where ``w_j(alpha) = 2 pi j^2 B(2j, alpha + 1)`` so the penalty is exactly
``lam`` times the weighted Dirichlet energy of ``M``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .function_models import AnalyticModel, TaylorPolynomial, monomial_energy_weights
from .measure_equivalence import NoiseModel
from .sampling_design import SamplingPlan

log = logging.getLogger(__name__)

__all__ = [
    "ObservationSeries",
    "FitConfig",
    "FitResult",
    "RankDeficientError",
    "noise_draws",
    "simulate_observations",
    "fit_model",
    "evaluation_grid",
    "consistency_experiment",
    "ExperimentReport",
    "discrimination_report",
    "SELECTION_DEGREES",
]

SELECTION_DEGREES = (2, 4, 8, 16, 32)
_KEY_MASK = (1 << 64) - 1


class RankDeficientError(ValueError):
    """Unregularized least squares with a singular Vandermonde system."""


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    points: np.ndarray
    values: np.ndarray
    noise: dict
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        vals = np.asarray(self.values, dtype=complex).ravel()
        if pts.size < 1 or pts.size != vals.size:
            raise ValueError("observation series needs matching, nonempty points and values")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.points.size

    def prefix(self, n: int) -> "ObservationSeries":
        return ObservationSeries(self.points[:n], self.values[:n], self.noise, self.seed)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "re_z", "im_z", "re_x", "im_x"])
            for i, (z, x) in enumerate(zip(self.points, self.values)):
                w.writerow([i, f"{z.real:.17g}", f"{z.imag:.17g}", f"{x.real:.17g}", f"{x.imag:.17g}"])

    @classmethod
    def from_csv(cls, path, noise: dict | None = None, seed: int = 0) -> "ObservationSeries":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        pts = [complex(float(r["re_z"]), float(r["im_z"])) for r in rows]
        vals = [complex(float(r["re_x"]), float(r["im_x"])) for r in rows]
        return cls(np.array(pts), np.array(vals), noise or {"kind": "unknown"}, seed)


def noise_draws(P: NoiseModel, seed: int, indices) -> np.ndarray:
    """Noise values for the given observation indices.

    Each draw comes from a Philox stream keyed by ``seed`` with the index in
    the counter, so a draw depends only on ``(seed, n)``: longer series
    extend shorter ones.
    """
    key = int(seed) & _KEY_MASK
    out = np.empty(len(indices), dtype=complex)
    for k, n in enumerate(indices):
        bitgen = np.random.Philox(key=[key, 0x5EED], counter=[0, 0, 0, int(n)])
        out[k] = P.sample(np.random.Generator(bitgen))
    return out


def simulate_observations(S: AnalyticModel, plan: SamplingPlan, P: NoiseModel, seed: int) -> ObservationSeries:
    """``X_n = S(z_n) + xi_n`` with reproducible i.i.d. noise."""
    if len(plan) == 0:
        raise ValueError("cannot simulate on an empty plan")
    z = plan.points
    noise = noise_draws(P, seed, range(z.size))
    return ObservationSeries(z, S(z) + noise, P.to_dict(), int(seed))


@dataclass(frozen=True)
class FitConfig:
    degree: int = 15
    lam: float = 1e-3
    alpha: float = 0.5
    validation_fraction: float = 0.0

    def __post_init__(self):
        if not 0 <= self.degree <= 256:
            raise ValueError("degree must lie in 0..256")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError("lambda must be a finite nonnegative number")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {"degree": self.degree, "lambda": self.lam, "alpha": self.alpha,
                "validation_fraction": self.validation_fraction}


@dataclass(frozen=True, eq=False)
class FitResult:
    model: TaylorPolynomial
    residual_norm: float
    penalty: float
    degree: int
    validation_curve: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "degree": self.degree,
            "coefficients": [[float(c.real), float(c.imag)] for c in self.model.coefficients],
            "residual_norm": self.residual_norm,
            "penalty": self.penalty,
        }
        if self.validation_curve is not None:
            out["validation_curve"] = {str(k): v for k, v in self.validation_curve.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _solve(z: np.ndarray, x: np.ndarray, degree: int, lam: float, alpha: float) -> np.ndarray:
    """Penalized least squares via pivoted QR of the stacked system ``[V; sqrt(lam W)]``."""
    V = np.vander(z, degree + 1, increasing=True)
    w = monomial_energy_weights(degree, alpha)
    if lam > 0:
        A = np.vstack([V, np.diag(np.sqrt(lam * w)).astype(complex)])
        b = np.concatenate([x, np.zeros(degree + 1, dtype=complex)])
    else:
        A, b = V, x
    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank_tol = max(A.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    if A.shape[0] < degree + 1 or np.any(diag <= rank_tol):
        raise RankDeficientError(
            f"least-squares system is rank deficient (degree {degree}, {z.size} points, lambda {lam:g})"
        )
    y = linalg.solve_triangular(R, Q.conj().T @ b)
    c = np.empty(degree + 1, dtype=complex)
    c[piv] = y
    return c


def _holdout_mask(n: int, fraction: float) -> np.ndarray:
    """Deterministic interleaved hold-out of about ``fraction * n`` observations."""
    i = np.arange(n)
    return np.floor((i + 1) * fraction) > np.floor(i * fraction)


def fit_model(obs: ObservationSeries, cfg: FitConfig) -> FitResult:
    """Penalized least-squares Taylor fit of the observations.

    With ``validation_fraction > 0`` the degree is picked from
    ``SELECTION_DEGREES`` (capped at ``cfg.degree``) by hold-out residual,
    ties going to the smaller degree, and the final fit uses all data.
    """
    z, x = obs.points, obs.values
    degree = cfg.degree
    curve = None
    if cfg.validation_fraction > 0:
        hold = _holdout_mask(z.size, cfg.validation_fraction)
        train = ~hold
        curve = {}
        for d in SELECTION_DEGREES:
            if d > cfg.degree or (cfg.lam == 0 and d + 1 > train.sum()):
                continue
            try:
                c = _solve(z[train], x[train], d, cfg.lam, cfg.alpha)
            except RankDeficientError:
                continue
            resid = np.polynomial.polynomial.polyval(z[hold], c) - x[hold]
            curve[d] = float(np.sqrt(np.sum(np.abs(resid) ** 2)))
        if curve:
            best = min(curve.values())
            degree = min(d for d, v in curve.items() if v == best)
    if cfg.lam == 0 and degree + 1 > z.size:
        raise RankDeficientError(f"degree {degree} needs at least {degree + 1} observations, got {z.size}")
    c = _solve(z, x, degree, cfg.lam, cfg.alpha)
    model = TaylorPolynomial(c)
    resid = model(z) - x
    w = monomial_energy_weights(degree, cfg.alpha)
    penalty = cfg.lam * math.fsum(w * np.abs(c) ** 2)
    return FitResult(model, float(np.sqrt(np.sum(np.abs(resid) ** 2))), penalty, degree, curve)


def evaluation_grid(radius: float = 0.7, rings: int = 8, per_ring: int = 64) -> np.ndarray:
    """Fixed polar grid of ``rings * per_ring`` points with outer ring at ``radius``."""
    r = radius * np.arange(1, rings + 1) / rings
    t = 2.0 * math.pi * np.arange(per_ring) / per_ring
    return (r[:, None] * np.exp(1j * t)[None, :]).ravel()


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    ladder: tuple
    seeds: tuple
    cells: list  # dicts keyed by (n, seed)
    median_sup_error: dict
    median_coef_error: dict
    slope: float
    boundary_sup_error: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ladder": list(self.ladder),
            "seeds": list(self.seeds),
            "median_sup_error": {str(k): v for k, v in self.median_sup_error.items()},
            "median_coef_error": {str(k): v for k, v in self.median_coef_error.items()},
            "median_boundary_sup_error": {str(k): v for k, v in self.boundary_sup_error.items()},
            "loglog_slope": self.slope,
            "cells": self.cells,
        }

    def summary_rows(self) -> list:
        return [
            {"n": n, "median_sup_error": self.median_sup_error[n], "median_coef_error": self.median_coef_error[n],
             "median_boundary_sup_error": self.boundary_sup_error.get(n, math.nan)}
            for n in self.ladder
        ]


def _median(values) -> float:
    """Median over the finite entries; NaN when there are none."""
    v = np.array([x for x in values if not math.isnan(x)])
    return float(np.median(v)) if v.size else math.nan


def consistency_experiment(S: AnalyticModel, plan: SamplingPlan, ladder, P: NoiseModel, cfg: FitConfig,
                           seeds, workers: int = 1, grid: np.ndarray | None = None) -> ExperimentReport:
    """Fit prefixes of ``plan`` for every (N, seed) cell and track the error against ``S``.

    Each cell is pure given its key; results are merged in (N, seed) order
    so the report does not depend on ``workers``.
    """
    ladder = [int(n) for n in ladder]
    seeds = [int(s) for s in seeds]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly increasing")
    if ladder[-1] > len(plan):
        raise ValueError(f"ladder reaches {ladder[-1]} but the plan has {len(plan)} points")
    grid = evaluation_grid() if grid is None else grid
    ring = 0.95 * np.exp(2j * math.pi * np.arange(256) / 256)
    truth = S(grid)
    truth_ring = S(ring)
    full = {s: simulate_observations(S, plan.prefix(ladder[-1]), P, s) for s in seeds}

    def run(key):
        n, s = key
        cell = {"n": n, "seed": s}
        try:
            fit = fit_model(full[s].prefix(n), cfg)
        except (ValueError, np.linalg.LinAlgError) as exc:
            cell.update(error=str(exc), sup_error=math.nan, coef_error=math.nan, boundary_sup_error=math.nan)
            return cell
        coeffs = fit.model.coefficients
        target = S.taylor_coefficients(coeffs.size)
        cell.update(
            sup_error=float(np.max(np.abs(fit.model(grid) - truth))),
            coef_error=float(np.linalg.norm(coeffs - target)),
            boundary_sup_error=float(np.max(np.abs(fit.model(ring) - truth_ring))),
            degree=fit.degree,
        )
        return cell

    keys = [(n, s) for n in ladder for s in seeds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(run, keys))
    else:
        cells = [run(k) for k in keys]
    med_sup, med_coef, med_ring = {}, {}, {}
    for n in ladder:
        row = [c for c in cells if c["n"] == n]
        med_sup[n] = _median(c["sup_error"] for c in row)
        med_coef[n] = _median(c["coef_error"] for c in row)
        med_ring[n] = _median(c["boundary_sup_error"] for c in row)
    xs = np.log(np.array(ladder, dtype=float))
    ys = np.log(np.array([med_sup[n] for n in ladder]))
    ok = np.isfinite(ys)
    slope = float(np.polyfit(xs[ok], ys[ok], 1)[0]) if ok.sum() >= 2 else math.nan
    return ExperimentReport(tuple(ladder), tuple(seeds), cells, med_sup, med_coef, slope, med_ring)


def discrimination_report(candidates: dict, obs: ObservationSeries, sigma: float,
                          decisive_log_ratio: float = math.log(100.0)) -> dict:
    """Residual sums of candidate models against one observation series.

    Under circular Gaussian noise the log-likelihood ratio of two candidates
    is ``(RSS_b - RSS_a) / (2 sigma^2)``.  The data separate the candidates
    when the best one beats every other by more than ``decisive_log_ratio``.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rss = {name: float(np.sum(np.abs(m(obs.points) - obs.values) ** 2)) for name, m in candidates.items()}
    best = min(rss, key=rss.get)
    margins = {name: (v - rss[best]) / (2.0 * sigma**2) for name, v in rss.items() if name != best}
    separated = bool(margins) and min(margins.values()) > decisive_log_ratio
    return {"rss": rss, "best": best, "log_likelihood_margins": margins, "separating": separated}
