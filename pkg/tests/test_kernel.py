import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latgamma.kernel import Kernel, QuadratureSpec, eval_kernel, first_moment, load_table, phi, sigma_radial

import oracles


def unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


@pytest.mark.parametrize(
    "dim, xi, expected",
    [(2, (0.5, 0.0), 1.0), (2, (2.0, 0.0), 0.0), (1, (1.0,), 0.0), (1, (0.999,), 1.0), (3, (0, 0, 0), 1.0)],
)
def test_ball_values(dim, xi, expected):
    assert eval_kernel(Kernel.ball(dim), xi) == expected


def test_kernel_vectorized_shapes():
    k = Kernel.ball(2)
    pts = np.zeros((4, 5, 2))
    pts[..., 0] = np.linspace(0, 2, 5)
    out = k(pts)
    assert out.shape == (4, 5)
    assert out[0].tolist() == [1.0, 1.0, 0.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        k(np.zeros((3, 3)))


def test_phi_ball_1d():
    assert phi(Kernel.ball(1), [1.0]) == pytest.approx(1.0, abs=1e-12)


def test_phi_ball_2d_isotropic():
    k = Kernel.ball(2)
    vals = [phi(k, unit(2 * math.pi * j / 16)) for j in range(16)]
    assert np.allclose(vals, 4 / 3, rtol=1e-3)
    assert (max(vals) - min(vals)) / np.mean(vals) < 0.01


def test_phi_ball_3d():
    ref = oracles.ball_3d_phi_by_slices()
    assert ref == pytest.approx(math.pi / 2, rel=1e-8)
    assert phi(Kernel.ball(3), [1.0, 0.0, 0.0]) == pytest.approx(ref, rel=5e-3)


def test_phi_exponential_1d():
    k = Kernel.exponential(1, rate=2.0, cutoff=1.5)
    assert phi(k, [1.0]) == pytest.approx(oracles.exp_phi_1d(2.0, 1.5), rel=1e-4)


def test_phi_symmetric_in_nu():
    k = Kernel.from_function(2, lambda x: 1.0 + x[..., 0] ** 2 + 0.5 * x[..., 0] * x[..., 1], 1.0)
    nu = unit(0.7)
    assert phi(k, nu) == pytest.approx(phi(k, -nu), rel=1e-12)


def test_phi_anisotropic_kernel_depends_on_direction():
    # supported on a thin horizontal band: cheap to cross vertically
    k = Kernel.from_function(2, lambda x: (np.abs(x[..., 1]) < 0.2).astype(float), 1.0)
    assert phi(k, [0.0, 1.0]) < phi(k, [1.0, 0.0])


def test_phi_rejects_bad_direction():
    with pytest.raises(ValueError):
        phi(Kernel.ball(2), [1.0, 1.0])
    with pytest.raises(ValueError):
        phi(Kernel.ball(2), [1.0])


def test_quadrature_box_must_cover_support():
    with pytest.raises(ValueError):
        phi(Kernel.ball(1, 2.0), [1.0], QuadratureSpec(half_width=1.0))


def test_quadrature_refinement_first_order():
    # 1D ball on a grid that does not align with the jump at |xi| = 1
    k = Kernel.ball(1)
    errs = [abs(phi(k, [1.0], QuadratureSpec(h=3 / 2 ** (j + 2), half_width=1.5)) - 1.0) for j in range(2, 8)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 1.5)
    assert abs(np.mean(ratios[-3:]) - 2.0) < 0.25


def test_sigma_radial():
    assert sigma_radial(Kernel.ball(2)) == pytest.approx(4 / 3, rel=1e-3)
    assert sigma_radial(Kernel.ball(1)) == pytest.approx(1.0, abs=1e-12)
    assert sigma_radial(Kernel.tabulated(2, [0.0, 1.0], [0.0, 0.0])) == 0.0
    with pytest.raises(ValueError):
        sigma_radial(Kernel.from_function(2, lambda x: np.ones(x.shape[:-1]), 1.0))


def test_first_moment():
    assert first_moment(Kernel.ball(1)) == pytest.approx(1.0, abs=1e-12)
    assert first_moment(Kernel.ball(2)) == pytest.approx(oracles.polar_first_moment_2d(), rel=1e-3)
    assert Kernel.ball(2).closed_form_first_moment() == pytest.approx(2 * math.pi / 3)
    assert first_moment(Kernel.tabulated(1, [0.0, 2.0], [0.0, 0.0])) == 0.0


def test_tabulated_interpolation_and_support():
    k = Kernel.tabulated(1, [0.0, 1.0, 2.0], [2.0, 1.0, 0.0])
    assert eval_kernel(k, 0.5) == pytest.approx(1.5)
    assert eval_kernel(k, 1.5) == pytest.approx(0.5)
    assert eval_kernel(k, 2.5) == 0.0
    assert k.support_radius == 2.0
    # int_{-2}^{2} (2 - |x|) |x| dx = 2 * (4 - 8/3)
    assert phi(k, [1.0]) == pytest.approx(8 / 3, rel=1e-4)


def test_tabulated_validation():
    with pytest.raises(ValueError):
        Kernel.tabulated(1, [1.0, 0.5], [1.0, 1.0])
    with pytest.raises(ValueError):
        Kernel.tabulated(1, [0.0, 1.0], [1.0, -1.0])


def test_load_table(tmp_path):
    p = tmp_path / "profile.txt"
    p.write_text("0 1\n0.5 1\n1 0\n")
    r, v = load_table(p)
    assert r.tolist() == [0.0, 0.5, 1.0] and v.tolist() == [1.0, 1.0, 0.0]
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 2\n")
    with pytest.raises(ValueError):
        load_table(bad)


def test_lower_bound_certificate():
    c0, r0 = Kernel.ball(2).lower_bound_certificate
    assert c0 > 0 and r0 > 0
    assert Kernel.tabulated(1, [0.0, 1.0], [0.0, 1.0]).lower_bound_certificate is None


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.floats(0.1, 4.0))
def test_phi_linear_in_scale(theta, t):
    k = Kernel.ball(2)
    q = QuadratureSpec(h=1 / 64)
    assert phi(k.scaled(t), unit(theta), q) == pytest.approx(t * phi(k, unit(theta), q), rel=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 2.0))
def test_ball_radius_scaling(r):
    # phi of the radius-r ball is r^(d+1) times the unit value
    assert phi(Kernel.ball(1, r), [1.0]) == pytest.approx(r ** 2, rel=1e-9)
    assert Kernel.ball(2, r).closed_form_sigma() == pytest.approx(4 / 3 * r ** 3)
