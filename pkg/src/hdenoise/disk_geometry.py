"""Geometry of the open unit disk and its boundary circle.

Points inside the disk are represented either by :class:`DiskPoint` or by
plain Python/numpy complex values; every public function accepts both and
validates ``|z| < 1``.  Boundary points are angles in ``[-pi, pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

TWO_PI = 2.0 * math.pi

__all__ = [
    "DiskPoint",
    "BoundaryPoint",
    "Arc",
    "ZeroSequence",
    "wrap_angle",
    "poisson_kernel",
    "stolz_contains",
    "stolz_contains_unnormalized",
    "stolz_half_angle",
    "boundary_arc",
    "blaschke_product",
    "rho_sigma",
    "v_function",
    "nontangential_probes",
    "nontangential_sup",
]


def wrap_angle(theta):
    """Map angle(s) into ``[-pi, pi)``."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk."""

    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("DiskPoint coordinates must be finite")
        if math.hypot(self.re, self.im) >= 1.0:
            raise ValueError(f"DiskPoint requires |z| < 1, got |z| = {math.hypot(self.re, self.im)!r}")

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    @classmethod
    def polar(cls, r: float, theta: float) -> "DiskPoint":
        return cls.from_complex(r * complex(math.cos(theta), math.sin(theta)))

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return self.z

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)


@dataclass(frozen=True)
class BoundaryPoint:
    """The point ``exp(i*theta)`` of the unit circle, ``theta`` in ``[-pi, pi)``."""

    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("BoundaryPoint angle must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def w(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))

    def __complex__(self) -> complex:
        return self.w


@dataclass(frozen=True)
class Arc:
    """Closed arc of the unit circle running counterclockwise from ``start``."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length <= TWO_PI + 1e-12):
            raise ValueError(f"Arc length must lie in (0, 2*pi], got {self.length!r}")
        object.__setattr__(self, "length", min(float(self.length), TWO_PI))
        object.__setattr__(self, "start", wrap_angle(self.start))

    @property
    def end(self) -> float:
        """Unwrapped end angle, ``start + length``."""
        return self.start + self.length

    @property
    def center(self) -> float:
        return wrap_angle(self.start + 0.5 * self.length)

    @property
    def is_full_circle(self) -> bool:
        return self.length >= TWO_PI

    def contains(self, theta):
        """True where ``theta`` lies on the arc (endpoints included)."""
        offset = np.mod(np.asarray(theta, dtype=float) - self.start, TWO_PI)
        inside = offset <= self.length + 1e-15
        if self.is_full_circle:
            inside = np.ones_like(offset, dtype=bool)
        if np.ndim(inside) == 0:
            return bool(inside)
        return inside


@dataclass(frozen=True)
class ZeroSequence:
    """Finite ordered list of points of the disk (a zero set)."""

    zeros: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pts = tuple(p if isinstance(p, DiskPoint) else DiskPoint.from_complex(p) for p in self.zeros)
        object.__setattr__(self, "zeros", pts)

    @classmethod
    def of(cls, values: Iterable[complex]) -> "ZeroSequence":
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def as_array(self) -> np.ndarray:
        return np.array([p.z for p in self.zeros], dtype=complex)

    def append(self, z) -> "ZeroSequence":
        return ZeroSequence(self.zeros + (z,))

    def blaschke_sum(self) -> float:
        return math.fsum(1.0 - abs(p) for p in self.zeros)


PointLike = Union[DiskPoint, complex, float, np.ndarray]


def _disk_values(z) -> np.ndarray | complex:
    """Coerce to complex scalar/array and enforce the open-disk constraint."""
    if isinstance(z, DiskPoint):
        return z.z
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    if np.any(np.abs(arr) >= 1.0):
        raise ValueError("points must satisfy |z| < 1")
    return complex(arr) if arr.ndim == 0 else arr


def _boundary_angle(y) -> float | np.ndarray:
    if isinstance(y, BoundaryPoint):
        return y.theta
    return wrap_angle(y)


def _zero_array(zeros) -> np.ndarray:
    if isinstance(zeros, ZeroSequence):
        return zeros.as_array()
    return np.asarray(_disk_values(np.asarray(zeros, dtype=complex).ravel()), dtype=complex).ravel()


def poisson_kernel(z: PointLike, t):
    """Poisson kernel ``(1 - |z|^2) / |z - e^{it}|^2`` of the unit disk."""
    z = _disk_values(z)
    w = np.exp(1j * np.asarray(t, dtype=float))
    out = (1.0 - np.abs(z) ** 2) / np.abs(z - w) ** 2
    return float(out) if np.ndim(out) == 0 else out


def stolz_contains(y, z: PointLike):
    """Whether ``z`` lies in the approach region of the boundary point ``y``.

    Tests ``|e^{i theta_y} - z/|z|| < 2(1 - |z|)``.  The centre ``z = 0`` is
    taken to lie in every region.
    """
    theta = _boundary_angle(y)
    z = _disk_values(z)
    r = np.abs(z)
    direction = np.where(r > 0, z / np.where(r > 0, r, 1.0), 1.0)
    inside = np.abs(np.exp(1j * np.asarray(theta)) - direction) < 2.0 * (1.0 - r)
    inside = np.where(r == 0, True, inside)
    return bool(inside) if np.ndim(inside) == 0 else inside


def stolz_contains_unnormalized(y, z: PointLike):
    """Alternate form ``|e^{i theta_y} - z| < 2(1 - |z|)``."""
    theta = _boundary_angle(y)
    z = _disk_values(z)
    inside = np.abs(np.exp(1j * np.asarray(theta)) - z) < 2.0 * (1.0 - np.abs(z))
    return bool(inside) if np.ndim(inside) == 0 else inside


def stolz_half_angle(r):
    """Angular half-width of the set of ``y`` whose region contains a point of modulus ``r``.

    For ``r > 0`` the normalized condition is ``2 sin(|d|/2) < 2(1 - r)``,
    i.e. ``|d| < 2 arcsin(1 - r)``; ``r = 0`` gives ``pi`` (the whole circle).
    """
    r = np.asarray(r, dtype=float)
    out = np.where(r > 0, 2.0 * np.arcsin(np.clip(1.0 - r, 0.0, 1.0)), math.pi)
    return float(out) if out.ndim == 0 else out


def boundary_arc(z: PointLike) -> Arc:
    """The arc ``{w : |w| = 1, |w - z| <= 2(1 - |z|)}``.

    For ``|z| <= 1/3`` the chord bound exceeds the diameter and the whole
    circle is returned.  ``z = 0`` is rejected.
    """
    z = complex(_disk_values(z))
    r = abs(z)
    if r == 0.0:
        raise ValueError("boundary_arc is undefined at the centre z = 0")
    # |e^{i phi} - r e^{i psi}|^2 = 1 + r^2 - 2 r cos(phi - psi) <= 4 (1 - r)^2
    c = (1.0 + r * r - 4.0 * (1.0 - r) ** 2) / (2.0 * r)
    if c <= -1.0:
        return Arc(math.atan2(z.imag, z.real) - math.pi, TWO_PI)
    half = math.acos(min(c, 1.0))
    if half == 0.0:
        half = 1e-300
    return Arc(math.atan2(z.imag, z.real) - half, 2.0 * half)


def blaschke_product(zeros, z: PointLike):
    """Finite Blaschke product ``prod (|a|/a) (a - z)/(1 - conj(a) z)``.

    A zero at the origin contributes the factor ``z``.
    """
    a = _zero_array(zeros)
    z = _disk_values(z)
    zz = np.asarray(z, dtype=complex)
    out = np.ones_like(zz)
    for ak in a:
        if ak == 0:
            out = out * zz
        else:
            out = out * (abs(ak) / ak) * (ak - zz) / (1.0 - np.conj(ak) * zz)
    return complex(out) if out.ndim == 0 else out


def rho_sigma(xi, zeros, sigma: float) -> float:
    """``min_k |xi - z_k| / (1 - |z_k|)^sigma`` over a finite zero list."""
    a = _zero_array(zeros)
    if a.size == 0:
        raise ValueError("rho_sigma needs a nonempty zero sequence")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    w = np.exp(1j * _boundary_angle(xi))
    return float(np.min(np.abs(w - a) / (1.0 - np.abs(a)) ** sigma))


def v_function(zeros, z: PointLike, exponent: float = 2.0):
    """``sum_n (1 - |z|^2)(1 - |w_n|) / |z - w_n/|w_n||^exponent``.

    ``exponent`` is 2 by default (the Poisson-kernel comparison); 1 is the
    other admissible choice.  Zeros at the origin have no direction and are
    rejected.
    """
    a = _zero_array(zeros)
    if a.size == 0:
        raise ValueError("v_function needs a nonempty zero sequence")
    if np.any(a == 0):
        raise ValueError("v_function is singular for a zero at the origin (direction undefined)")
    if exponent not in (1, 2, 1.0, 2.0):
        raise ValueError("exponent must be 1 or 2")
    z = _disk_values(z)
    zz = np.asarray(z, dtype=complex)[..., None]
    dirs = a / np.abs(a)
    terms = (1.0 - np.abs(zz) ** 2) * (1.0 - np.abs(a)) / np.abs(zz - dirs) ** exponent
    out = terms.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def nontangential_probes(y, radial_levels: int, angular_samples: int = 9) -> np.ndarray:
    """Deterministic probe lattice inside the approach region of ``y``.

    Radii ``1 - 2^-m`` for ``m = 1..radial_levels``; at each radius
    ``angular_samples`` offsets spread over 95% of the admissible half-angle.
    """
    if radial_levels < 1:
        raise ValueError("radial_levels must be a positive integer")
    theta = _boundary_angle(y)
    pts = []
    for m in range(1, radial_levels + 1):
        r = 1.0 - 2.0 ** (-m)
        half = 0.95 * stolz_half_angle(r)
        if angular_samples == 1:
            offsets = np.zeros(1)
        else:
            offsets = np.linspace(-half, half, angular_samples)
        pts.append(r * np.exp(1j * (theta + offsets)))
    return np.concatenate(pts)


def nontangential_sup(u: Callable, g: Callable, y, radial_levels: int, angular_samples: int = 9) -> float:
    """Largest ``u(z) / g(1 - |z|)`` over the probe lattice of ``y``.

    This is a lower bound for the supremum over the whole approach region;
    it only serves as a finiteness diagnostic.
    """
    probes = nontangential_probes(y, radial_levels, angular_samples)
    best = -math.inf
    for z in probes:
        best = max(best, float(u(z)) / float(g(1.0 - abs(z))))
    return best
