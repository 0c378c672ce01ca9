import numpy as np
import pytest

import statembed as se
from statembed.structures import lowered_gamma


def perturbed_antisym(fx, amplitude=1e-2):
    """Structure with an antisymmetric bump of the given size in the connection."""
    chart = fx.chart
    pts = chart.points()
    n = chart.dim
    bump = 0.5 * amplitude * np.cos(np.pi * pts[..., 0])
    gamma = fx.structure.gamma.data.copy()
    gamma[..., 0, 1, 0] += bump
    gamma[..., 1, 0, 0] -= bump
    return se.StatisticalStructure(
        chart, fx.structure.g, se.Field(chart, (n, n, n), gamma))


class TestCheckStatistical:
    def test_euclidean_exact(self):
        fx = se.fixture("euclidean", shape=17)
        rep = se.check_statistical(fx.structure)
        assert rep.torsion_residual == 0.0
        assert rep.nabla_g_residual <= 1e-13
        assert rep.min_metric_eigenvalue == pytest.approx(1.0)

    def test_hessian_fixture(self, exp33):
        rep = se.check_statistical(exp33.structure)
        assert rep.torsion_residual == 0.0
        assert rep.nabla_g_residual <= 1e-6

    def test_antisymmetric_perturbation_detected(self, exp33):
        s = perturbed_antisym(exp33)
        rep = se.check_statistical(s)
        assert rep.torsion_residual == pytest.approx(1e-2, rel=0.05)

    def test_reports_worst_point(self):
        chart = se.Chart(((0.0, 1.0),) * 2, (9, 9))
        g = np.broadcast_to(np.eye(2), (9, 9, 2, 2)).copy()
        g[4, 4] = [[1.0, 0.0], [0.0, -0.5]]
        s = se.StatisticalStructure(
            chart, se.Field(chart, (2, 2), g), se.Field.zeros(chart, (2, 2, 2)))
        rep = se.check_statistical(s)
        assert rep.min_metric_eigenvalue == pytest.approx(-0.5)
        assert rep.worst_metric_point == (4, 4)


class TestDualConnection:
    def test_euclidean_zero(self):
        fx = se.fixture("euclidean", shape=9)
        assert np.abs(se.dual_connection(fx.structure).data).max() <= 1e-12

    def test_exp_unit_coefficient(self):
        # one-dimensional exponential potential: the dual coefficient is 1
        fx = se.fixture("exp_potential", dim=1, shape=33)
        star = se.dual_connection(fx.structure)
        assert np.abs(star.data - 1.0).max() <= 1e-8

    def test_involution(self, sphere65, exp33, gaussian65):
        for fx in (sphere65, exp33, gaussian65):
            star = se.dual_connection(fx.structure)
            s2 = se.StatisticalStructure(fx.chart, fx.structure.g, star)
            back = se.dual_connection(s2)
            assert np.abs(back.data - fx.structure.gamma.data).max() <= 1e-8

    def test_singular_metric_raises(self):
        chart = se.Chart(((0.0, 1.0),), (9,))
        g = np.zeros((9, 1, 1))
        with pytest.raises(se.SingularMetricError):
            se.dual_connection(se.StatisticalStructure(
                chart, se.Field(chart, (1, 1), g),
                se.Field.zeros(chart, (1, 1, 1))))


class TestAlphaConnection:
    def test_endpoints(self, sphere65):
        s = sphere65.structure
        assert se.alpha_connection(s, 1.0) is s.gamma
        star = se.dual_connection(s)
        assert np.abs(se.alpha_connection(s, -1.0).data - star.data).max() == 0.0

    def test_alpha_zero_on_exp1d(self):
        fx = se.fixture("exp_potential", dim=1, shape=33)
        a0 = se.alpha_connection(fx.structure, 0.0)
        assert np.abs(a0.data - 0.5).max() <= 1e-8

    @pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.0, 0.5, 1.0])
    def test_dual_of_alpha_is_minus_alpha(self, sphere65, alpha):
        s = sphere65.structure
        ga = se.alpha_connection(s, alpha)
        dual = se.dual_connection(
            se.StatisticalStructure(s.chart, s.g, ga))
        target = se.alpha_connection(s, -alpha)
        assert np.abs(dual.data - target.data).max() <= 1e-8

    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.75])
    def test_alpha_structure_stays_statistical(self, sphere65, alpha):
        s = sphere65.structure
        base = se.check_statistical(s)
        ga = se.alpha_connection(s, alpha)
        rep = se.check_statistical(
            se.StatisticalStructure(s.chart, s.g, ga))
        bound = 10 * max(base.nabla_g_residual, base.torsion_residual, 1e-9)
        assert rep.torsion_residual <= bound
        assert rep.nabla_g_residual <= bound

    def test_levi_civita_matches_alpha_zero(self, exp33, gaussian65, sphere65):
        for fx, tol in ((exp33, 1e-7), (gaussian65, 1e-7), (sphere65, 1e-6)):
            lc = se.levi_civita(fx.structure.g)
            a0 = se.alpha_connection(fx.structure, 0.0)
            assert np.abs(lc.data - a0.data).max() <= tol


class TestCurvature:
    def test_flat_connection_zero(self):
        fx = se.fixture("exp_potential", shape=17)
        cur = se.curvature(fx.structure.gamma, fx.structure.g)
        assert np.abs(cur.R.data).max() == 0.0

    def test_sphere_sectional_value(self, sphere65):
        cur = se.curvature(sphere65.structure.gamma, sphere65.structure.g)
        th = sphere65.chart.points()[..., 0]
        expect = np.sin(th) ** 2
        err = np.abs(cur.R_low.data[..., 0, 1, 0, 1] - expect)
        assert err.max() <= 1e-6
        mid = tuple(m // 2 for m in sphere65.chart.shape)
        assert cur.R_low.data[mid + (0, 1, 0, 1)] == pytest.approx(1.0, abs=1e-6)

    def test_antisymmetry_exact(self, sphere65):
        r = se.curvature(sphere65.structure.gamma).R.data
        assert np.abs(r + np.swapaxes(r, -4, -3)).max() == 0.0


class TestCurvatureDuality:
    def test_euclidean(self):
        fx = se.fixture("euclidean", shape=9)
        assert se.curvature_duality_residual(fx.structure) <= 1e-13

    def test_sphere_self_dual(self, sphere65):
        assert se.curvature_duality_residual(sphere65.structure) <= 1e-6

    def test_hessian_fixture(self, exp33):
        assert se.curvature_duality_residual(exp33.structure) <= 1e-6


class TestFlatness:
    def test_zero_connection(self):
        fx = se.fixture("euclidean", shape=9)
        assert se.flatness_residual(fx.structure.gamma) == 0.0

    def test_sphere_band_curved(self):
        fx = se.fixture(
            "sphere2", shape=33,
            ranges=((np.pi / 4, 3 * np.pi / 4), (0.0, np.pi / 2)))
        assert se.flatness_residual(fx.structure.gamma) > 0.5

    def test_dual_of_flat_is_flat(self, exp33, gaussian65):
        for fx in (exp33, gaussian65):
            star = se.dual_connection(fx.structure)
            assert se.flatness_residual(star) <= 1e-5
