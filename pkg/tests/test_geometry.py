import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergkit.geometry import (
    Annulus,
    GeometryError,
    boundary_point,
    carleson_square,
    delta_lattice,
    dyadic_rectangles,
    interval_of,
    mobius,
    pseudo_disc,
    pseudo_distance,
)

disc_points = st.builds(
    lambda r, t: r * complex(math.cos(t), math.sin(t)),
    st.floats(0.0, 0.97),
    st.floats(0.0, 2.0 * math.pi),
)


def test_pseudo_distance_examples():
    assert pseudo_distance(0.3 + 0.1j, 0.3 + 0.1j) == 0.0
    assert pseudo_distance(0.0, 0.4j) == pytest.approx(0.4)
    assert pseudo_distance(0.5, 0.8) == pytest.approx(0.5)  # 0.3/0.6


@given(a=disc_points, z=disc_points)
@settings(max_examples=200, deadline=None)
def test_pseudo_distance_symmetric_and_bounded(a, z):
    d = pseudo_distance(a, z)
    assert 0.0 <= d < 1.0
    assert d == pytest.approx(pseudo_distance(z, a), abs=1e-14)


@given(a=disc_points, z=disc_points, c=disc_points)
@settings(max_examples=200, deadline=None)
def test_mobius_invariance_and_triangle(a, z, c):
    d = pseudo_distance(a, z)
    assert pseudo_distance(mobius(c, a), mobius(c, z)) == pytest.approx(d, abs=1e-12)
    assert d <= pseudo_distance(a, c) + pseudo_distance(c, z) + 1e-12


def test_pseudo_disc_euclidean_parameters():
    d = pseudo_disc(0.5, 0.5)
    assert d.euclid_center == pytest.approx(0.4)
    assert d.euclid_radius == pytest.approx(0.4)
    d0 = pseudo_disc(0.0, 0.3)
    assert d0.euclid_center == 0.0
    assert d0.euclid_radius == pytest.approx(0.3)


@given(
    r=st.floats(0.05, 0.9),
    a=st.builds(
        lambda m, t: m * complex(math.cos(t), math.sin(t)),
        st.floats(0.0, 0.99),
        st.floats(0.0, 2.0 * math.pi),
    ),
)
@settings(max_examples=150, deadline=None)
def test_pseudo_disc_boundary_oracle(a, r):
    disc = pseudo_disc(a, r)
    z = disc.boundary_points(64)
    assert np.max(np.abs(pseudo_distance(disc.center, z) - r)) < 1e-12


def test_pseudo_disc_area_comparability():
    # euclidean area / (1-|a|)^2 bounded above and below for fixed r
    vals = []
    for m in np.linspace(0.0, 0.999, 50):
        d = pseudo_disc(m, 0.4)
        vals.append(d.euclid_radius ** 2 / (1.0 - m) ** 2)
    vals = np.asarray(vals)
    assert vals.max() / vals.min() < 20.0


def test_carleson_square_examples():
    sq = carleson_square(0.5)
    assert sq.arc.width == pytest.approx(0.5)
    assert sq.inner_radius == pytest.approx(0.5)
    sq2 = carleson_square(0.9 * np.exp(1j * np.pi))
    assert sq2.arc.width == pytest.approx(0.1)
    assert sq2.arc.center_angle == pytest.approx(np.pi)
    with pytest.raises(GeometryError):
        carleson_square(0.0)
    with pytest.raises(GeometryError):
        interval_of(0.0)


def test_boundary_point():
    assert boundary_point(0.5, 1.0) == pytest.approx(0.5)
    assert boundary_point(0.5, 0.5) == pytest.approx(0.75)
    a = 0.3 * np.exp(0.7j)
    assert abs(boundary_point(a, 1e-6)) == pytest.approx(1.0, abs=1e-5)
    assert np.angle(boundary_point(a, 0.2)) == pytest.approx(0.7)
    # a_delta always stays in the square of a
    sq = carleson_square(a)
    for d in (1.0, 0.5, 0.01):
        assert sq.contains(boundary_point(a, d))
    with pytest.raises(GeometryError):
        boundary_point(0.0, 0.5)


def test_dyadic_rectangles_level1():
    cells = dyadic_rectangles(1)
    assert len(cells) == 3
    lvl1 = cells[1]
    assert lvl1.level == 1 and lvl1.index == 0
    assert lvl1.r_inner == pytest.approx(0.5)
    assert lvl1.r_outer == pytest.approx(0.75)
    assert lvl1.center == pytest.approx(0.5j)
    assert cells[0].center == pytest.approx(0.5)  # level-0 convention


def test_dyadic_cover_partition():
    cells = dyadic_rectangles(6)
    assert len(cells) == 2 ** 7 - 1
    rng = np.random.default_rng(5)
    z = rng.uniform(0, 1, 100_000) ** 0.5 * np.exp(1j * rng.uniform(0, 2 * np.pi, 100_000))
    z = z[np.abs(z) < 1.0 - 2.0 ** -7]
    hits = np.zeros(z.size, dtype=int)
    for cell in cells:
        hits += cell.contains(z)
    assert np.all(hits == 1)


def test_dyadic_area_additivity():
    # total normalized area of levels <= n equals the covered disc area
    cells = dyadic_rectangles(4)
    total = sum(
        (c.r_outer ** 2 - c.r_inner ** 2) * (1.0 if c.level == 0 else 2.0 ** -c.level)
        for c in cells
    )
    assert total == pytest.approx((1.0 - 2.0 ** -5) ** 2, rel=1e-12)


def test_delta_lattice_invariants():
    lat = delta_lattice(0.25, depth=8)
    pts = lat.points
    # separation >= delta/5 (exact pairwise on a subsample)
    sub = pts[:: max(1, pts.size // 1200)]
    d = pseudo_distance(sub[None, :], sub[:, None])
    np.fill_diagonal(d, 1.0)
    assert d.min() >= lat.separation_bound
    # covering: random points within 5 delta of some lattice point
    rng = np.random.default_rng(6)
    probes = rng.uniform(0, 1, 10_000) ** 0.5 * np.exp(1j * rng.uniform(0, 2 * np.pi, 10_000))
    probes = probes[np.abs(probes) <= 1.0 - 2.0 ** -8]
    dmin = np.min(pseudo_distance(probes[:, None], pts[None, :]), axis=1)
    assert dmin.max() <= lat.covering_bound


def test_delta_lattice_counting_growth():
    lat = delta_lattice(0.2, depth=10)
    counts = [
        int(np.sum(np.abs(lat.points) < 1.0 - 2.0 ** -j)) for j in (5, 6, 7, 8, 9)
    ]
    # hyperbolic area doubles per level: counts roughly double
    ratios = [counts[i + 1] / counts[i] for i in range(4)]
    assert all(1.4 < r < 3.2 for r in ratios)


def test_delta_lattice_budget_error():
    with pytest.raises(GeometryError):
        delta_lattice(0.01, depth=14, max_points=1000)


def test_annulus_validation():
    with pytest.raises(GeometryError):
        Annulus(0.7, 0.5)
