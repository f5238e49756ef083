import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdenoise.disk_geometry import (
    Arc,
    BoundaryPoint,
    DiskPoint,
    ZeroSequence,
    blaschke_product,
    boundary_arc,
    nontangential_sup,
    poisson_kernel,
    rho_sigma,
    stolz_contains,
    stolz_contains_unnormalized,
    v_function,
    wrap_angle,
)

radii = st.floats(min_value=0.0, max_value=0.999, allow_nan=False)
angles = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


# -- types ------------------------------------------------------------------


def test_disk_point_rejects_boundary():
    with pytest.raises(ValueError):
        DiskPoint(1.0, 0.0)
    with pytest.raises(ValueError):
        DiskPoint.from_complex(0.8 + 0.7j)
    assert DiskPoint.polar(0.5, math.pi / 2).z == pytest.approx(0.5j)


@given(angles)
def test_boundary_point_normalized(t):
    b = BoundaryPoint(t)
    assert -math.pi <= b.theta < math.pi
    assert abs(b.w - np.exp(1j * t)) < 1e-9


def test_arc_contains_wraps():
    a = Arc(3.0, 0.5)
    assert a.contains(3.2)
    assert a.contains(-2.9)  # 3.38 - 2 pi
    assert not a.contains(0.0)
    with pytest.raises(ValueError):
        Arc(0.0, 0.0)


# -- Poisson kernel ---------------------------------------------------------


def test_poisson_kernel_examples():
    assert poisson_kernel(0.0, 1.234) == pytest.approx(1.0)
    assert poisson_kernel(0.5, 0.0) == pytest.approx(3.0)


@given(radii, angles)
@settings(max_examples=50)
def test_poisson_kernel_mean_and_bounds(r, phi):
    z = r * np.exp(1j * phi)
    t = -math.pi + 2 * math.pi * np.arange(4096) / 4096
    k = poisson_kernel(z, t)
    if r < 0.99:
        # trapezoid rule on a periodic analytic integrand
        assert k.mean() == pytest.approx(1.0, rel=1e-9)
    assert np.all(k >= (1 - r) / 4 - 1e-12)
    assert np.all(k <= 2 / (1 - r) + 1e-9)


# -- Stolz regions ----------------------------------------------------------


def test_stolz_examples():
    assert stolz_contains(0.0, 0.9)
    assert not stolz_contains(math.pi, 0.9)
    assert stolz_contains(2.0, 0.0)


def test_boundary_arc_example():
    a = boundary_arc(0.9)
    assert a.center == pytest.approx(0.0, abs=1e-12)
    # brute-force grid solution of |e^{i phi} - 0.9| = 0.2
    phi = np.linspace(-0.5, 0.5, 200001)
    inside = np.abs(np.exp(1j * phi) - 0.9) < 0.2
    assert a.length / 2 == pytest.approx(phi[inside].max(), abs=1e-5)
    assert math.sin(a.length / 2) <= 0.2
    b = boundary_arc(0.9j)
    assert b.center == pytest.approx(math.pi / 2)
    assert b.length == pytest.approx(a.length)
    assert boundary_arc(0.999999).length < 1e-5
    assert boundary_arc(0.2).is_full_circle
    with pytest.raises(ValueError):
        boundary_arc(0.0)


@given(st.floats(min_value=0.01, max_value=0.999), angles, angles)
def test_stolz_implies_chordal_closeness(r, phi, y):
    z = r * np.exp(1j * phi)
    if stolz_contains(y, z):
        assert abs(np.exp(1j * y) - z) <= 4 * (1 - r) + 1e-12
        assert boundary_arc(z).contains(y) or boundary_arc(z).is_full_circle


@given(st.floats(min_value=0.05, max_value=0.99), angles, angles)
def test_unnormalized_region_inside_dilated_normalized(r, phi, y):
    # |e^{iy} - z| < 2(1-r) gives |e^{iy} - z/|z|| < 3(1-r)
    z = r * np.exp(1j * phi)
    if stolz_contains_unnormalized(y, z):
        assert abs(np.exp(1j * y) - np.exp(1j * phi)) < 3 * (1 - r) + 1e-12


# -- Blaschke products ------------------------------------------------------


def test_blaschke_examples():
    zs = ZeroSequence.of([0.5, -0.5])
    assert blaschke_product(zs, 0.0) == pytest.approx(0.25)
    assert abs(blaschke_product(zs, 0.5)) < 1e-15
    assert abs(blaschke_product([0.3 + 0.4j], 0.3 + 0.4j)) < 1e-15


def test_blaschke_modulus_bound_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        k = rng.integers(1, 12)
        zeros = 0.99 * np.sqrt(rng.random(k)) * np.exp(2j * np.pi * rng.random(k))
        pts = np.sqrt(rng.random(1000)) * 0.9999 * np.exp(2j * np.pi * rng.random(1000))
        assert np.all(np.abs(blaschke_product(zeros, pts)) <= 1 + 1e-12)


def test_rho_sigma_examples():
    assert rho_sigma(0.7, [0.0], 1.0) == pytest.approx(1.0)
    assert rho_sigma(0.0, [0.9], 1.0) == pytest.approx(1.0)
    assert rho_sigma(math.pi, [0.9], 1.0) == pytest.approx(19.0)


@given(st.lists(st.tuples(st.floats(0.0, 0.95), angles), min_size=2, max_size=8), angles,
       st.floats(0.1, 3.0))
def test_rho_sigma_monotone_under_append(zeros, xi, sigma):
    zs = [r * np.exp(1j * t) for r, t in zeros]
    vals = [rho_sigma(xi, zs[:k], sigma) for k in range(1, len(zs) + 1)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_v_function_examples():
    for e in (1, 2):
        assert v_function([0.5], 0.0, exponent=e) == pytest.approx(0.5)
    assert v_function([0.9], 0.5, exponent=2) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        v_function([0.0], 0.1)


def test_blaschke_lower_bound_fitted_constant():
    # zeros kept far from y = 1 so that |y - w/|w|| >= 4(1 - |w|)
    rng = np.random.default_rng(3)
    r = 1 - 2.0 ** -rng.integers(2, 7, size=60)
    t = rng.uniform(0.6, 2 * math.pi - 0.6, size=60)
    zeros = r * np.exp(1j * t)
    zeros = zeros[np.abs(1 - zeros / np.abs(zeros)) >= 4 * (1 - np.abs(zeros))]
    assert zeros.size >= 10
    assert np.all(np.abs(1 - zeros / np.abs(zeros)) >= 4 * (1 - np.abs(zeros)))
    probes = []
    for m in range(1, 9):
        rr = 1 - 2.0 ** -m
        half = 0.9 * 2 * math.asin(min(1.0, 1 - rr))
        probes.extend(rr * np.exp(1j * np.linspace(-half, half, 7)))
    probes = np.array(probes)
    ratio = -np.log(np.abs(blaschke_product(zeros, probes))) / v_function(zeros, probes, exponent=2)
    fit, check = ratio[::2], ratio[1::2]
    C = fit.max()
    assert np.isfinite(C)
    assert np.all(check <= 2 * C)


# -- nontangential maximal ratios -------------------------------------------


def test_nontangential_sup_examples():
    one = lambda z: 1.0
    assert nontangential_sup(one, one, 0.3, 6) == pytest.approx(1.0)
    zero = lambda z: 0.0
    assert nontangential_sup(zero, one, 0.3, 6) == 0.0


def test_nontangential_sup_poisson_bounded():
    y = 0.4
    u = lambda z: poisson_kernel(z, y)
    g = lambda t: 1.0 / t
    vals = [nontangential_sup(u, g, y, m) for m in (4, 8, 12)]
    assert max(vals) <= 2.0 + 1e-9


def test_wrap_angle_range():
    x = np.linspace(-20, 20, 1001)
    w = wrap_angle(x)
    assert np.all((w >= -math.pi) & (w < math.pi))
    assert np.allclose(np.exp(1j * w), np.exp(1j * x))


def test_zero_sequence_blaschke_sum():
    zs = ZeroSequence.of([0.5, 0.75j])
    assert zs.blaschke_sum() == pytest.approx(0.75)
    assert len(zs.append(0.1)) == 3
