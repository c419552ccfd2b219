import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latgamma.coarsegrain import (
    CoarseGrainParams,
    Label,
    boundary_measure,
    classify,
    k_sets,
    majority_statistic,
)
from latgamma.energy import EnergyParams
from latgamma.field import HalfSpace, SpinField, Whole, sample
from latgamma.kernel import Kernel


def params(delta=0.5, side=4):
    return CoarseGrainParams(delta=delta, side=side)


def test_majority_statistic_examples():
    # side 2: cube k covers cells 2k - 1 and 2k
    f = SpinField.from_array(np.ones((4, 4)), origin=(-1, -1))
    assert majority_statistic(f, (0, 0), params(side=2)) == 1.0
    assert majority_statistic(f, (1, 1), params(side=2)) == 1.0
    g = SpinField.from_array(np.array([[1, 0], [0, 1]]), origin=(-1, -1))
    assert majority_statistic(g, (0, 0), params(side=2)) == 0.0
    h = SpinField.from_array(np.array([[1, 1], [0, 1]]), origin=(-1, -1))
    assert majority_statistic(h, (0, 0), params(side=2)) == 0.5
    with pytest.raises(ValueError):
        majority_statistic(h, (1, 0), params(side=2))


def test_cube_geometry_is_centred():
    # side 4: cube k covers cells 4k - 2 .. 4k + 1
    a = np.zeros(12, dtype=np.uint8)
    a[2:6] = 1  # absolute cells -4 .. -1 with origin -6
    f = SpinField.from_array(a, origin=(-6,), boundary="restricted")
    r = classify(f, params(side=4))
    assert r.k_origin == (-1,)
    assert r.labels.tolist() == [Label.MIXED, Label.MIXED, Label.PHASE0]
    assert r.ones.tolist() == [2, 2, 0]
    assert r.excluded_sites == 0


def test_partial_cubes_excluded():
    f = SpinField.from_array(np.ones(10), origin=(-5,), boundary="restricted")
    r = classify(f, params(side=4))
    # cubes [-6, -3] and [6, 9] stick out; cubes 0 ([-2, 1]) and 1 ([2, 5]) are kept
    assert r.k_origin == (0,)
    assert r.labels.size == 1
    assert r.excluded_sites == 6


def test_constant_field():
    for field, lab in ((sample(Whole(), 2, 0.01, 16), Label.PHASE1),
                       (sample(Whole(), 2, 0.01, 16).flipped(), Label.PHASE0)):
        r = classify(field, params())
        assert np.all(r.labels == lab)
        assert r.n_mixed == 0 and r.mixed_measure == 0.0
    K1, K0 = k_sets(classify(sample(Whole(), 2, 0.01, 16), params()))
    assert K1.all() and not K0.any()


@pytest.mark.parametrize("side", [2, 4, 6])
@pytest.mark.parametrize("delta", [0.01, 0.5, 0.99])
def test_checkerboard_is_mixed(side, delta):
    n = 6 * side
    idx = np.indices((n, n)).sum(axis=0) % 2
    f = SpinField.from_array(idx, origin=(0, 0))
    r = classify(f, params(delta, side))
    assert np.all(r.D == 0.0)
    assert r.n_mixed == r.labels.size
    K1, K0 = k_sets(r)
    assert not K1.any() and not K0.any()


def test_halfspace_labels():
    eps = 1 / 64
    f = sample(HalfSpace((0.0, 1.0), 0.013), 2, eps, 48, "restricted", origin=(-24, -24))
    r = classify(f, params(0.5, 4))
    lo = np.array(r.k_origin)
    for k in np.ndindex(r.labels.shape):
        kk = lo + np.array(k)
        cells = 4 * kk[1] - 2 + np.arange(4)
        inside = cells * eps >= 0.013
        if inside.all():
            assert r.labels[k] == Label.PHASE1
        elif not inside.any():
            assert r.labels[k] == Label.PHASE0
    # per-cube counting oracle
    for k in np.ndindex(r.labels.shape):
        kk = tuple(lo + np.array(k))
        assert r.D[k] == majority_statistic(f, kk, params(0.5, 4))


def test_boundary_measure_examples():
    g = np.zeros((5, 5), dtype=bool)
    assert boundary_measure(g, 0.5) == 0.0
    g[2, 2] = True
    assert boundary_measure(g, 0.5) == 4 * 0.5
    g[2, 3] = True
    assert boundary_measure(g, 0.5) == 6 * 0.5
    edge = np.zeros((3, 3), dtype=bool)
    edge[0, 0] = True
    assert boundary_measure(edge, 1.0) == 4.0
    assert boundary_measure(edge, 1.0, window_faces=False) == 2.0
    assert boundary_measure(edge, 1.0, periodic=(True, True)) == 4.0
    band = np.zeros((4, 4), dtype=bool)
    band[:, :2] = True
    assert boundary_measure(band, 1.0, periodic=(True, True)) == 8.0
    assert boundary_measure(np.ones((2, 2, 2), dtype=bool), 2.0) == 24 * 4.0


@pytest.mark.filterwarnings("ignore:eta/eps")
def test_from_energy_side_and_warning():
    p = EnergyParams(1 / 1024, 32 / 1024, Kernel.ball(2))
    c = CoarseGrainParams.from_energy(p, 0.5)
    assert c.side == 8 and c.rounding_error == 0.0
    with pytest.warns(UserWarning, match="cube side"):
        q = CoarseGrainParams.from_energy(EnergyParams(0.1, 0.24, Kernel.ball(1)), 0.5)
    assert q.side == 1
    with pytest.raises(ValueError):
        CoarseGrainParams(delta=1.0, side=2)
    with pytest.raises(ValueError):
        CoarseGrainParams(delta=0.5, side=0)


def test_result_serialization():
    f = sample(HalfSpace((1.0, 0.0)), 2, 1 / 64, 32, "restricted")
    r = classify(f, params())
    d = json.loads(r.to_json())
    assert sum(n for _, n in d["labels_rle"]) == r.labels.size
    flat = np.concatenate([[lab] * n for lab, n in d["labels_rle"]])
    assert np.array_equal(flat, r.labels.ravel())
    assert sum(d["D_histogram"]["counts"]) == r.labels.size
    assert d["n_mixed"] == r.n_mixed


def test_adjacency_count():
    a = np.zeros((8, 4), dtype=np.uint8)
    a[:4] = 1
    f = SpinField.from_array(a, origin=(-3, -1), boundary="restricted")
    r = classify(f, params(0.5, 2))
    # Phase1 row of cubes directly followed by a Phase0 row: two adjacent pairs
    assert r.n_mixed == 0
    assert r.adjacent_count == 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_delta_monotonicity(seed, d1, d2):
    d1, d2 = sorted((d1, d2))
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.2, 0.8)
    f = SpinField.from_array((rng.random((24, 24)) < p).astype(np.uint8))
    r1, r2 = classify(f, params(d1, 4)), classify(f, params(d2, 4))
    m1, m2 = r1.labels == Label.MIXED, r2.labels == Label.MIXED
    a1, a2 = r1.labels == Label.PHASE1, r2.labels == Label.PHASE1
    assert not np.any(m2 & ~m1)
    assert not np.any(a1 & ~a2)
