import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hdenoise.function_models import TaylorPolynomial
from hdenoise.geometric_measure import ArcUnion
from hdenoise.measure_equivalence import (
    Gaussian2D,
    GridDensity,
    NoiseModel,
    NoNoise,
    UniformDisk,
    affinity_gap_constant,
    hellinger_affinity,
    kakutani_from_gaps,
    kakutani_product,
)
from hdenoise.sampling_design import generate_dyadic


def grid_law():
    w = np.array([[1, 2, 1], [2, 4, 2], [1, 2, 1]], dtype=float)
    return GridDensity(0.2, w / w.sum())


def test_noise_validation():
    with pytest.raises(ValueError):
        Gaussian2D(-0.1)
    with pytest.raises(ValueError):
        UniformDisk(0.0)
    with pytest.raises(ValueError):
        GridDensity(0.1, [[0.5, 0.5], [0.0, 0.0]])  # nonzero mean
    with pytest.raises(ValueError):
        GridDensity(0.1, [[0.3]])


def test_noise_dict_round_trip():
    for P in (Gaussian2D(0.3), UniformDisk(0.2), grid_law(), NoNoise()):
        Q = NoiseModel.from_dict(P.to_dict())
        assert Q.to_dict() == P.to_dict()


def test_grid_density_normalized_and_centred():
    P = grid_law()
    half = 0.3
    mass = integrate.dblquad(lambda y, x: P.density(np.array(x), np.array(y)), -half, half, -half, half,
                             epsabs=1e-12)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_affinity_examples():
    for P in (Gaussian2D(0.5), UniformDisk(0.3), grid_law()):
        assert hellinger_affinity(P, 0) == pytest.approx(1.0, abs=1e-12)
    assert hellinger_affinity(Gaussian2D(1.0), 2.0) == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert abs(hellinger_affinity(Gaussian2D(1.0), 2.0, method="quadrature") - math.exp(-0.5)) <= 1e-8
    assert hellinger_affinity(UniformDisk(0.3), 0.6) == 0.0
    assert hellinger_affinity(UniformDisk(0.3), 0.7j) == 0.0


def test_uniform_disk_lens_formula():
    R = 0.4
    for s in (0.05, 0.3, 0.79):
        lens = 2 * R * R * math.acos(s / (2 * R)) - (s / 2) * math.sqrt(4 * R * R - s * s)
        assert hellinger_affinity(UniformDisk(R), s) == pytest.approx(lens / (math.pi * R * R), abs=1e-12)


def test_grid_affinity_against_quadrature():
    P = grid_law()
    for d in (0.05, 0.13 + 0.07j, -0.21j):
        f = lambda y, x: np.sqrt(P.density(np.array(x), np.array(y)) * P.density(np.array(x - d.real), np.array(y - d.imag)))
        pts = [-0.3, -0.1, 0.1, 0.3]
        total = 0.0
        # integrate cell by cell so the discontinuities sit on panel edges
        xs = sorted(set(pts + [p + d.real for p in pts]))
        ys = sorted(set(pts + [p + d.imag for p in pts]))
        for x0, x1 in zip(xs, xs[1:]):
            for y0, y1 in zip(ys, ys[1:]):
                total += integrate.dblquad(f, x0, x1, y0, y1, epsabs=1e-12)[0]
        assert hellinger_affinity(P, d) == pytest.approx(total, abs=1e-9)


@given(st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False))
def test_affinity_bounds_and_symmetry(d):
    for P in (Gaussian2D(0.3), UniformDisk(0.3), grid_law()):
        a = hellinger_affinity(P, d)
        assert 0.0 <= a <= 1.0
        assert a == pytest.approx(hellinger_affinity(P, -d), abs=1e-12)
        if d != 0 and not isinstance(P, UniformDisk):
            if abs(d) > 1e-6:
                assert a < 1.0


def test_gap_constant_gaussian():
    ladder = [1e-3, 2e-3, 5e-3]
    A1 = affinity_gap_constant(Gaussian2D(1.0), ladder)
    assert A1 == pytest.approx(1 / 8, rel=1e-3)
    A2 = affinity_gap_constant(Gaussian2D(2.0), ladder)
    assert A2 == pytest.approx(A1 / 4, rel=0.05)
    sym = affinity_gap_constant(Gaussian2D(1.0), [-d for d in ladder])
    assert sym == A1
    with pytest.raises(ValueError):
        affinity_gap_constant(Gaussian2D(1.0), [0.0])


def test_gap_constant_grid_reported():
    # piecewise-constant law: 1 - rho is linear in |d| near 0, so the ratio grows as d shrinks
    P = grid_law()
    vals = [affinity_gap_constant(P, [d]) for d in (0.1, 0.01, 0.001)]
    assert vals[0] < vals[1] < vals[2]


# -- Kakutani ---------------------------------------------------------------


def test_kakutani_identical():
    plan = generate_dyadic(ArcUnion.full_circle(), 6)
    f = TaylorPolynomial([0.1, 0.4])
    rep = kakutani_product(f, f, plan, Gaussian2D(0.1), [10, 100, 200])
    assert rep.products == (1.0, 1.0, 1.0)
    assert rep.classification == "equivalent-evidence"


def test_kakutani_square_summable_gaps():
    k = np.arange(1, 100001)
    rep = kakutani_from_gaps(1.0 / k, Gaussian2D(1.0), [1000, 10000, 100000])
    assert rep.products[-1] == pytest.approx(math.exp(-math.pi**2 / 48), abs=1e-3)
    assert rep.classification == "equivalent-evidence"


def test_kakutani_divergent_gaps():
    k = np.arange(1, 1001)
    rep = kakutani_from_gaps(1.0 / np.sqrt(k), Gaussian2D(0.1), [10, 100, 1000])
    harmonic = math.fsum(1.0 / k)
    assert rep.log_products[-1] == pytest.approx(-harmonic / 0.08, rel=1e-12)
    assert rep.log_products[-1] <= -90
    assert rep.classification == "orthogonal-evidence"


def test_kakutani_log_additivity():
    rng = np.random.default_rng(0)
    gaps = rng.normal(size=500) * 0.3 + 1j * rng.normal(size=500) * 0.3
    for P in (Gaussian2D(0.2), grid_law()):
        rep = kakutani_from_gaps(gaps, P, [100, 500])
        assert rep.log_products[-1] == pytest.approx(float(np.sum(rep.log_affinities)), abs=1e-10)


def test_kakutani_disjoint_support():
    rep = kakutani_from_gaps(np.full(10, 1.0), UniformDisk(0.2), [5, 10])
    assert rep.log_products[-1] == -math.inf
    assert rep.classification == "orthogonal-evidence"


def test_kakutani_ladder_validation():
    with pytest.raises(ValueError):
        kakutani_from_gaps(np.ones(5), Gaussian2D(1.0), [3, 2])
    with pytest.raises(ValueError):
        kakutani_from_gaps(np.ones(5), Gaussian2D(1.0), [10])


def test_kakutani_csv(tmp_path):
    rep = kakutani_from_gaps(np.array([0.1, 0.2j]), Gaussian2D(1.0), [1, 2])
    rep.to_csv(tmp_path / "k.csv")
    rows = list(csv.DictReader(open(tmp_path / "k.csv")))
    assert float(rows[1]["gap_im"]) == 0.2
    assert float(rows[0]["log_affinity"]) == rep.log_affinities[0]
