from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latgamma.field import (
    Ball,
    Complement,
    HalfSpace,
    PeriodicLattice,
    Perforated,
    Polytope,
    SpinField,
    Whole,
    interpolate,
    l1_distance,
    sample,
    voronoi_volume_estimate,
    window_average,
    window_fraction,
)


def test_halfspace_sample_1d():
    # sites -2eps, -eps, 0, eps
    f = sample(HalfSpace((1.0,), 0.0), 1, 0.5, 4, "restricted", origin=(-2,))
    assert f.array.tolist() == [0, 0, 1, 1]


def test_perforated_sample_2d():
    f = sample(Perforated(2), 2, 1.0, 4, origin=(0, 0))
    a = f.array
    assert int(a.sum()) == 12
    assert [tuple(x) for x in np.argwhere(a == 0)] == [(0, 0), (0, 2), (2, 0), (2, 2)]


def test_whole_and_complement():
    assert sample(Whole(), 3, 0.1, 5).values.all()
    assert not sample(Complement(Whole()), 2, 0.1, 5).values.any()


def test_polytope_box_and_ball():
    f = sample(Polytope.box((0, 0), (1, 1)), 2, 0.25, 12, origin=(-4, -4))
    # closed box: sites 0, 0.25, ..., 1 on each axis
    assert int(f.values.sum()) == 25
    g = sample(Ball((0.0, 0.0), 1.0), 2, 0.5, 8)
    # open ball radius 2 cells: |i|^2 < 4
    assert int(g.values.sum()) == 9


def test_two_offset_lattice_sampling():
    lat = PeriodicLattice([[0, 0], [0.5, 0.5]])
    f = sample(HalfSpace((1.0, 0.0), 0.25), lat, 1.0, 2, origin=(0, 0))
    # offset 0 at x = 0, 1 ; offset 1 at x = 0.5, 1.5
    assert f.values[:, :, 0].tolist() == [[0, 0], [1, 1]]
    assert f.values[:, :, 1].tolist() == [[1, 1], [1, 1]]


def test_lattice_validation():
    with pytest.raises(ValueError):
        PeriodicLattice([[0.0, 1.0]])
    with pytest.raises(ValueError):
        PeriodicLattice([[0.0, 0.0], [0.0, 0.0]])
    assert PeriodicLattice.cubic(2).is_cubic


def test_field_validation():
    with pytest.raises(ValueError):
        SpinField.from_array([0, 2, 1])
    with pytest.raises(ValueError):
        SpinField.from_array([0, 1], eps=0.0)
    f = SpinField.from_array(np.zeros((2, 3)), boundary=["periodic", "restricted"])
    assert f.periodic == (True, False) and f.boundary == "mixed"


def test_interpolate_examples():
    f = SpinField.from_array([0, 1], eps=1.0, origin=(0,), boundary="restricted")
    assert interpolate(f, [0.49]) == 0
    assert interpolate(f, [0.5]) == 0
    assert interpolate(f, [0.51]) == 1
    assert interpolate(f, [1.0]) == 1
    with pytest.raises(ValueError):
        interpolate(f, [3.0])


def test_interpolate_periodic_wraps():
    f = SpinField.from_array([1, 0, 0, 0], eps=0.5, origin=(0,))
    assert interpolate(f, [2.0]) == 1  # cell 4 == cell 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 16 - 1), st.integers(0, 3), st.integers(0, 3))
def test_interpolate_on_sites(bits, i, j):
    a = np.array([(bits >> k) & 1 for k in range(16)]).reshape(4, 4)
    f = SpinField.from_array(a, eps=0.25, origin=(0, 0))
    assert interpolate(f, [0.25 * i, 0.25 * j]) == a[i, j]


def test_window_fraction_examples():
    assert window_fraction(sample(Whole(), 2, 0.1, 4)) == 1
    f = sample(Perforated(2), 2, 1.0, 4, origin=(0, 0))
    assert window_fraction(f) == Fraction(3, 4)
    assert window_average(f) == 0.75
    g = sample(Perforated(3), 1, 1.0, 9)
    assert window_fraction(g) == Fraction(2, 3)


def test_window_fraction_region():
    f = SpinField.from_array([0, 0, 1, 1, 1, 1], eps=1.0, origin=(0,))
    assert window_fraction(f, ([0.5], [3.5])) == Fraction(2, 3)
    with pytest.raises(ValueError):
        window_fraction(f, ([10.0], [11.0]))


def test_l1_distance_examples():
    A = HalfSpace((0.0, 1.0))
    f = sample(A, 2, 0.25, 8)
    assert l1_distance(f, A) == 0
    g = sample(Complement(A), 2, 0.25, 8)
    assert l1_distance(g, A) == pytest.approx(0.25 ** 2 * 64)
    v = f.values.copy()
    v[3, 5, 0] ^= 1
    assert l1_distance(f.with_values(v), A) == pytest.approx(0.25 ** 2)


def test_voronoi_cubic():
    p, err = voronoi_volume_estimate(PeriodicLattice.cubic(2), 0, samples=10_000)
    assert p == 1.0 and err == 0.0


def test_voronoi_two_offsets():
    lat = PeriodicLattice([[0, 0], [0.5, 0.5]])
    p0, e0 = voronoi_volume_estimate(lat, 0, samples=100_000, seed=1)
    p1, e1 = voronoi_volume_estimate(lat, 1, samples=100_000, seed=1)
    assert abs(p0 - 0.5) < 5 * e0 and abs(p1 - 0.5) < 5 * e1
    assert p0 + p1 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        voronoi_volume_estimate(lat, 0, samples=100)


def test_sample_translation_consistency():
    A = Ball((0.1, -0.2), 0.7)
    big = sample(A, 2, 0.1, 20, origin=(-10, -10))
    small = sample(A, 2, 0.1, 10, origin=(-5, -7))
    assert np.array_equal(big.values[5:15, 3:13], small.values)
