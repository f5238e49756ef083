"""Bounded analytic models on the disk and boundary-function functionals.

Models are vectorized: ``model(z)`` and ``model.derivative(z)`` accept
complex scalars or arrays anywhere their formula is defined, while the
module-level :func:`evaluate` enforces ``|z| < 1``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import special

from .disk_geometry import TWO_PI, DiskPoint, ZeroSequence, _disk_values, stolz_half_angle, wrap_angle

__all__ = [
    "AnalyticModel",
    "TaylorPolynomial",
    "RationalFunction",
    "FiniteBlaschke",
    "BoundaryFunction",
    "QuadratureSpec",
    "evaluate",
    "derivative",
    "monomial_energy_weights",
    "dirichlet_energy",
    "besov_norm",
    "besov_refinement",
    "maximal_function",
    "poisson_extend",
    "nontangential_holder_ratios",
    "stock_family",
]


def _complex_coeffs(values) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=complex)).ravel()
    if arr.size == 0:
        raise ValueError("coefficient list must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    return arr


class AnalyticModel:
    """Common interface of the evaluable models."""

    kind: str = "abstract"

    def __call__(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def taylor_coefficients(self, n: int) -> np.ndarray:
        """First ``n`` Taylor coefficients at the origin."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "AnalyticModel":
        kind = data.get("kind")
        if kind == "taylor":
            return TaylorPolynomial(_decode_complex_list(data["coefficients"]))
        if kind == "rational":
            return RationalFunction(
                _decode_complex_list(data["numerator"]),
                _decode_complex_list(data["denominator"]),
                margin=float(data.get("margin", 1e-6)),
            )
        if kind == "blaschke":
            const = data.get("constant", 1.0)
            return FiniteBlaschke(
                ZeroSequence.of(_decode_complex_list(data["zeros"])),
                _decode_complex(const),
            )
        raise ValueError(f"unknown model kind {kind!r}")


def _decode_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex values are encoded as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _decode_complex_list(values) -> list:
    return [_decode_complex(v) for v in values]


def _encode_complex_list(values) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(values, dtype=complex)]


def _series_divide(num: np.ndarray, den: np.ndarray, n: int) -> np.ndarray:
    """Power-series coefficients of ``num/den`` (ascending order) up to ``z^(n-1)``."""
    num = np.concatenate([num, np.zeros(max(0, n - num.size), dtype=complex)])[:n]
    out = np.zeros(n, dtype=complex)
    d0 = den[0]
    for k in range(n):
        acc = num[k]
        for j in range(1, min(k, den.size - 1) + 1):
            acc -= den[j] * out[k - j]
        out[k] = acc / d0
    return out


@dataclass(frozen=True, eq=False)
class TaylorPolynomial(AnalyticModel):
    """``sum_j c_j z^j`` with coefficients in ascending order."""

    coefficients: np.ndarray
    kind = "taylor"

    def __init__(self, coefficients):
        object.__setattr__(self, "coefficients", _complex_coeffs(coefficients))

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, z):
        return P.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def derivative(self, z):
        return P.polyval(np.asarray(z, dtype=complex), P.polyder(self.coefficients))

    def taylor_coefficients(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        m = min(n, self.coefficients.size)
        out[:m] = self.coefficients[:m]
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coefficients": _encode_complex_list(self.coefficients)}


@dataclass(frozen=True, eq=False)
class RationalFunction(AnalyticModel):
    """``p(z)/q(z)`` with every root of ``q`` outside the closed disk.

    Roots are located at construction; ``|root| <= 1 + margin`` is rejected
    so that the model is bounded on the closed disk.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    margin: float
    kind = "rational"

    def __init__(self, numerator, denominator, margin: float = 1e-6):
        num = _complex_coeffs(numerator)
        den = _complex_coeffs(denominator)
        nz = np.nonzero(den)[0]
        if nz.size == 0:
            raise ValueError("denominator is identically zero")
        den = den[: nz[-1] + 1]
        if den.size > 1:
            roots = np.roots(den[::-1])
            if np.any(np.abs(roots) <= 1.0 + margin):
                closest = float(np.min(np.abs(roots)))
                raise ValueError(
                    f"denominator has a root of modulus {closest:.6g} <= 1 + margin ({1.0 + margin:.6g})"
                )
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "margin", float(margin))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return P.polyval(z, self.numerator) / P.polyval(z, self.denominator)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        p = P.polyval(z, self.numerator)
        q = P.polyval(z, self.denominator)
        dp = P.polyval(z, P.polyder(self.numerator)) if self.numerator.size > 1 else 0.0
        dq = P.polyval(z, P.polyder(self.denominator)) if self.denominator.size > 1 else 0.0
        return (dp * q - p * dq) / (q * q)

    def taylor_coefficients(self, n: int) -> np.ndarray:
        return _series_divide(self.numerator, self.denominator, n)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "numerator": _encode_complex_list(self.numerator),
            "denominator": _encode_complex_list(self.denominator),
            "margin": self.margin,
        }


@dataclass(frozen=True, eq=False)
class FiniteBlaschke(AnalyticModel):
    """``c * prod (|a|/a)(a - z)/(1 - conj(a) z)`` with ``|c| = 1``."""

    zeros: ZeroSequence
    unimodular_constant: complex
    kind = "blaschke"

    def __init__(self, zeros, unimodular_constant: complex = 1.0):
        if not isinstance(zeros, ZeroSequence):
            zeros = ZeroSequence.of(zeros)
        c = complex(unimodular_constant)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ValueError(f"unimodular constant must have modulus 1, got {abs(c)!r}")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "unimodular_constant", c)

    def _factors(self, z):
        z = np.asarray(z, dtype=complex)
        a = self.zeros.as_array()
        vals, ders = [], []
        for ak in a:
            if ak == 0:
                vals.append(z)
                ders.append(np.ones_like(z))
            else:
                u = abs(ak) / ak
                den = 1.0 - np.conj(ak) * z
                vals.append(u * (ak - z) / den)
                ders.append(u * (abs(ak) ** 2 - 1.0) / den**2)
        return z, vals, ders

    def __call__(self, z):
        z, vals, _ = self._factors(z)
        out = np.full_like(z, self.unimodular_constant)
        for v in vals:
            out = out * v
        return out

    def derivative(self, z):
        z, vals, ders = self._factors(z)
        total = np.zeros_like(z)
        for k in range(len(vals)):
            term = ders[k]
            for j, v in enumerate(vals):
                if j != k:
                    term = term * v
            total = total + term
        return self.unimodular_constant * total

    def as_rational(self) -> RationalFunction:
        num = np.array([self.unimodular_constant], dtype=complex)
        den = np.array([1.0], dtype=complex)
        for ak in self.zeros.as_array():
            if ak == 0:
                num = P.polymul(num, [0.0, 1.0])
            else:
                u = abs(ak) / ak
                num = P.polymul(num, [u * ak, -u])
                den = P.polymul(den, [1.0, -np.conj(ak)])
        return RationalFunction(num, den, margin=0.0)

    def taylor_coefficients(self, n: int) -> np.ndarray:
        r = self.as_rational()
        return _series_divide(r.numerator, r.denominator, n)

    def to_dict(self) -> dict:
        c = self.unimodular_constant
        return {
            "kind": self.kind,
            "zeros": _encode_complex_list(self.zeros.as_array()),
            "constant": [c.real, c.imag],
        }


def evaluate(m: AnalyticModel, z):
    """Value of ``m`` at point(s) of the open disk."""
    out = m(_disk_values(z))
    return complex(out) if np.ndim(out) == 0 else out


def derivative(m: AnalyticModel, z):
    out = m.derivative(_disk_values(z))
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Boundary functions


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Samples ``f(theta_j)`` at ``theta_j = -pi + 2 pi j / N``, ``N`` a power of two >= 16."""

    samples: np.ndarray

    def __init__(self, samples):
        s = np.asarray(samples, dtype=complex).ravel()
        n = s.size
        if n < 16 or n & (n - 1):
            raise ValueError(f"BoundaryFunction needs N >= 16 samples with N a power of two, got {n}")
        if not np.all(np.isfinite(s)):
            raise ValueError("BoundaryFunction samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def step(self) -> float:
        return TWO_PI / self.n

    @property
    def theta(self) -> np.ndarray:
        return -math.pi + self.step * np.arange(self.n)

    @classmethod
    def from_callable(cls, f: Callable, n: int) -> "BoundaryFunction":
        theta = -math.pi + TWO_PI * np.arange(n) / n
        return cls(np.asarray(f(theta), dtype=complex) * np.ones(n))

    @classmethod
    def trace_of(cls, m: AnalyticModel, n: int) -> "BoundaryFunction":
        """Boundary values of a model that extends continuously to the circle."""
        return cls.from_callable(lambda t: m(np.exp(1j * t)), n)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "re", "im"])
            for t, v in zip(self.theta, self.samples):
                w.writerow([f"{t:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "BoundaryFunction":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        theta = np.array([float(r["theta"]) for r in rows])
        vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        expected = -math.pi + TWO_PI * np.arange(len(rows)) / max(len(rows), 1)
        if theta.size and np.max(np.abs(theta - expected)) > 1e-9:
            raise ValueError("CSV angles are not the equispaced grid -pi + 2 pi j / N")
        return cls(vals)


@dataclass(frozen=True)
class QuadratureSpec:
    radial_nodes: int = 32
    angular_nodes: int = 256
    singularity_refinement_depth: int = 8

    def __post_init__(self):
        if self.radial_nodes < 8 or self.angular_nodes < 8:
            raise ValueError("quadrature node counts must be >= 8")
        if not 0 <= self.singularity_refinement_depth <= 20:
            raise ValueError("singularity_refinement_depth must lie in [0, 20]")


def monomial_energy_weights(degree: int, alpha: float) -> np.ndarray:
    """``w_j = 2 pi j^2 B(2j, alpha + 1)``, the weighted energy of ``z^j`` (``w_0 = 0``)."""
    j = np.arange(degree + 1, dtype=float)
    w = np.zeros(degree + 1)
    if degree >= 1:
        w[1:] = TWO_PI * j[1:] ** 2 * special.beta(2.0 * j[1:], alpha + 1.0)
    return w


def _radial_rule(alpha: float, q: QuadratureSpec):
    """Nodes/weights for ``int_0^1 phi(r) (1 - r)^alpha dr``.

    Panels shrink geometrically toward ``r = 1``; the last panel carries the
    endpoint weight through Gauss-Jacobi, the others through Gauss-Legendre.
    """
    n = q.radial_nodes
    depth = q.singularity_refinement_depth
    edges = [0.0] + [1.0 - 2.0 ** (-k) for k in range(1, depth + 1)]
    xg, wg = special.roots_legendre(n)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r = a + (b - a) * (xg + 1.0) / 2.0
        nodes.append(r)
        weights.append(wg * (b - a) / 2.0 * (1.0 - r) ** alpha)
    a = edges[-1]
    xj, wj = special.roots_jacobi(n, alpha, 0.0)
    half = (1.0 - a) / 2.0
    nodes.append(a + half * (xj + 1.0))
    weights.append(wj * half ** (alpha + 1.0))
    return np.concatenate(nodes), np.concatenate(weights)


def dirichlet_energy(m: AnalyticModel, alpha: float, q: QuadratureSpec | None = None, method: str = "auto") -> float:
    """Weighted energy ``int_D |m'(z)|^2 (1 - |z|)^alpha dA``.

    ``method="exact"`` (Taylor models only) uses the diagonal monomial form;
    ``"quadrature"`` integrates in polar coordinates; ``"auto"`` picks the
    exact form whenever it is available.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    if method not in ("auto", "exact", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exact" and not isinstance(m, TaylorPolynomial):
        raise ValueError("exact energy is only available for TaylorPolynomial")
    if isinstance(m, TaylorPolynomial) and method != "quadrature":
        w = monomial_energy_weights(m.degree, alpha)
        return math.fsum(w * np.abs(m.coefficients) ** 2)
    q = q or QuadratureSpec()
    r, wr = _radial_rule(alpha, q)
    theta = TWO_PI * np.arange(q.angular_nodes) / q.angular_nodes
    z = r[:, None] * np.exp(1j * theta)[None, :]
    ring = np.abs(m.derivative(z)) ** 2
    ring_mean = ring.mean(axis=1) * TWO_PI
    return float(np.sum(wr * r * ring_mean))


# ---------------------------------------------------------------------------
# Besov norm


def _besov_value(samples: np.ndarray, alpha: float) -> float:
    n = samples.size
    h = TWO_PI / n
    x = -math.pi + h * np.arange(n)
    l2 = h * float(np.sum(np.abs(samples) ** 2))
    p = 1.0 - 2.0 * alpha
    k = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    dist = h * np.maximum(k, 1)
    diff2 = np.abs(samples[:, None] - samples[None, :]) ** 2
    # cell pairs at offset k: the midpoint weight |kh|^p is replaced by the exact
    # cell-square average of |x-y|^p, which is exact for locally linear f
    phi = lambda u: np.abs(u) ** (p + 2.0) / ((p + 1.0) * (p + 2.0))
    kk = np.arange(1, n, dtype=float)
    corr = np.ones(n)
    corr[1:] = (phi(kk + 1) - 2.0 * phi(kk) + phi(kk - 1)) / kk**p
    quot = diff2 / dist ** (1.0 + 2.0 * alpha) * corr[k]
    np.fill_diagonal(quot, 0.0)
    off = h * h * float(np.sum(quot))
    # diagonal cells: |f(x)-f(y)|^2 ~ |f'|^2 |x-y|^2, integrated exactly over the cell square
    slope = (np.roll(samples, -1) - np.roll(samples, 1)) / (2.0 * h)
    cell = 2.0 * h ** (p + 2.0) * phi(1.0)
    diag = float(np.sum(np.abs(slope) ** 2)) * cell
    return l2 + off + diag


def besov_refinement(f: BoundaryFunction, alpha: float, levels: int = 4) -> list:
    """Discrete norms at resolutions ``N, N/2, ...`` (coarsest first)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    vals = []
    for k in range(levels - 1, -1, -1):
        stride = 2**k
        if f.n // stride < 8:
            continue
        vals.append((f.n // stride, _besov_value(f.samples[::stride], alpha)))
    return vals


def besov_norm(f: BoundaryFunction, alpha: float, rtol: float = 1e-9, growth_ratio: float = 0.9) -> float:
    """Squared Besov norm ``||f||_alpha^2`` of sampled boundary data.

    The value is computed at the sample resolution and at successively
    halved resolutions.  If the increments under refinement fail to shrink
    (ratio of successive increments >= ``growth_ratio``) the double
    integral is treated as divergent and ``inf`` is returned.
    """
    ladder = besov_refinement(f, alpha)
    values = [v for _, v in ladder]
    final = values[-1]
    if len(values) < 3:
        return final
    d_prev = abs(values[-2] - values[-3])
    d_last = abs(values[-1] - values[-2])
    if d_last <= rtol * abs(final):
        return final
    if d_last >= growth_ratio * d_prev:
        return math.inf
    return final


# ---------------------------------------------------------------------------
# Maximal function and Poisson extension


def _primitive(abs_vals: np.ndarray, h: float, x):
    """Periodic primitive of the piecewise-constant interpolant (cells centred on samples)."""
    n = abs_vals.size
    cum = np.concatenate([[0.0], np.cumsum(abs_vals) * h])
    u = (np.asarray(x, dtype=float) + math.pi + 0.5 * h) / h
    q, rem = np.divmod(u, n)
    i = np.minimum(np.floor(rem).astype(int), n - 1)
    return q * cum[-1] + cum[i] + (rem - i) * abs_vals[i] * h


def maximal_function(g: BoundaryFunction, t: float) -> float:
    """Dyadic-window maximal average of ``|g|`` around ``t``.

    Windows ``delta = 2 pi 2^-j`` for ``j = 0..log2 N``; the samples are read
    as a piecewise-constant periodic function.  The result is a lower bound
    of the full supremum, tight to within the sample resolution.
    """
    vals = np.abs(g.samples)
    h = g.step
    j = np.arange(int(round(math.log2(g.n))) + 1)
    delta = TWO_PI * 2.0 ** (-j)
    upper = _primitive(vals, h, t + delta)
    lower = _primitive(vals, h, t - delta)
    return float(np.max((upper - lower) / (2.0 * delta)))


def poisson_extend(f: BoundaryFunction, z, boundary_margin: float = 1e-6):
    """Harmonic extension of ``f`` by trapezoid quadrature of the Poisson integral."""
    zz = np.asarray(z.z if isinstance(z, DiskPoint) else z, dtype=complex)
    if np.any(np.abs(zz) > 1.0 - boundary_margin):
        raise ValueError(f"poisson_extend requires |z| <= 1 - {boundary_margin:g}")
    w = np.exp(1j * f.theta)
    kern = (1.0 - np.abs(zz[..., None]) ** 2) / np.abs(zz[..., None] - w) ** 2
    out = kern @ f.samples / f.n
    return complex(out) if np.ndim(out) == 0 else out


def nontangential_holder_ratios(f: BoundaryFunction, x: float, exponent: float,
                                levels: int = 6, angular_samples: int = 5) -> np.ndarray:
    """``|F(z1) - F(z2)| / |z1 - z2|^exponent`` over probe pairs near ``e^{ix}``.

    ``F`` is the Poisson extension of ``f``; pairs are drawn from the
    lattice ``|e^{ix} - z| < 2(1 - |z|)`` with radii ``1 - 2^-m``.
    """
    pts = []
    for m in range(1, levels + 1):
        r = 1.0 - 2.0 ** (-m)
        # unnormalized region: half-angle from |e^{ix} - r e^{i phi}| < 2(1-r)
        c = (1.0 + r * r - 4.0 * (1.0 - r) ** 2) / (2.0 * r)
        half = 0.95 * (math.acos(max(min(c, 1.0), -1.0)))
        pts.append(r * np.exp(1j * (x + np.linspace(-half, half, angular_samples))))
    pts = np.concatenate(pts)
    vals = poisson_extend(f, pts)
    i, j = np.triu_indices(pts.size, k=1)
    return np.abs(vals[i] - vals[j]) / np.abs(pts[i] - pts[j]) ** exponent


def stock_family() -> dict:
    """Seven distinct bounded analytic models used for separation checks."""
    return {
        "const": TaylorPolynomial([0.5]),
        "identity": TaylorPolynomial([0.0, 1.0]),
        "cubic": TaylorPolynomial([0.1, 0.2, 0.0, 0.3]),
        "sextic": TaylorPolynomial([0.0, 0.1, -0.1, 0.05, 0.0, 0.02, 0.2j]),
        "pole_half": RationalFunction([1.0], [1.0, -0.5]),
        "mobius": RationalFunction([1.0, 0.2], [1.0, 0.4]),
        "blaschke": FiniteBlaschke(ZeroSequence.of([0.5, -0.5])),
    }
