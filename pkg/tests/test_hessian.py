import numpy as np
import pytest

import statembed as se
from statembed.hessian import fd_hessian


class TestHessianMetric:
    def test_quadratic_gives_identity(self):
        chart = se.Chart(((-1.0, 1.0),) * 2, (17, 17))
        pts = chart.points()
        p = se.HessePotential(
            chart, se.Field(chart, (), 0.5 * (pts ** 2).sum(axis=-1)))
        s = se.hessian_metric(p)
        assert np.abs(s.g.data - np.eye(2)).max() <= 1e-9
        assert np.abs(s.gamma.data).max() == 0.0
        assert se.check_statistical(s).passes(1e-8)

    def test_exp_potential(self, exp33):
        s = se.hessian_metric(exp33.potential)
        expect = exp33.structure.g.data
        assert np.abs(s.g.data - expect).max() <= 1e-6

    def test_quartic_rejected(self):
        chart = se.Chart(((-1.0, 1.0),), (33,))
        pts = chart.points()
        p = se.HessePotential(chart, se.Field(chart, (), pts[..., 0] ** 4))
        with pytest.raises(se.SingularMetricError):
            se.hessian_metric(p)


class TestLegendre:
    def test_quadratic_self_dual(self):
        chart = se.Chart(((-0.5, 0.5),), (33,))
        pts = chart.points()
        p = se.HessePotential(chart, se.Field(chart, (), 0.5 * pts[..., 0] ** 2))
        res = se.legendre_transform(p, regrid=False)
        assert np.abs(res.eta.data[..., 0] - pts[..., 0]).max() <= 1e-12
        assert np.abs(res.psi_star - 0.5 * pts[..., 0] ** 2).max() <= 1e-12

    def test_exp1d_at_origin(self):
        fx = se.fixture("exp_potential", dim=1, shape=33)
        res = se.legendre_transform(fx.potential, regrid=False)
        mid = fx.chart.shape[0] // 2
        assert res.eta.data[mid, 0] == pytest.approx(1.0, abs=1e-8)
        assert res.psi_star[mid] == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("name", ["exp_potential", "gaussian1d"])
    def test_analytic_route(self, name):
        fx = se.fixture(name, shape=65)
        res = se.legendre_transform(fx.potential)
        assert res.diagnostics["route"] == "analytic"
        assert res.diagnostics["grad_residual"] <= 1e-7
        assert res.diagnostics["hessian_inverse_residual"] <= 1e-5

    @pytest.mark.parametrize("name", ["exp_potential", "gaussian1d"])
    def test_interpolated_route(self, name):
        fx = se.fixture(name, shape=65)
        plain = se.HessePotential(fx.chart, fx.potential.psi)
        res = se.legendre_transform(plain)
        assert res.diagnostics["route"] == "interpolated"
        assert res.diagnostics["grad_residual"] <= 1e-4
        assert res.diagnostics["hessian_inverse_residual"] <= 1e-4

    @pytest.mark.parametrize("name", ["exp_potential", "gaussian1d"])
    def test_double_legendre_returns_psi(self, name):
        fx = se.fixture(name, shape=65)
        first = se.legendre_transform(fx.potential)
        conj = fx.conjugate_potential(first.eta_chart)
        second = se.legendre_transform(conj)
        xi_pts = conj.grad_fn(conj.chart.points())
        diff = second.psi_star - fx.potential.psi_fn(xi_pts)
        assert np.abs(diff - diff.mean()).max() <= 1e-7

    @pytest.mark.parametrize("name", ["exp_potential", "gaussian1d"])
    def test_eta_side_metric_is_inverse(self, name):
        # Hessian metric of the analytic conjugate equals g^{-1} at matched points
        fx = se.fixture(name, shape=65)
        first = se.legendre_transform(fx.potential)
        conj = fx.conjugate_potential(first.eta_chart)
        s_eta = se.hessian_metric(conj)
        xi_pts = conj.grad_fn(conj.chart.points())
        g_inv = np.linalg.inv(fx.potential.hess_fn(xi_pts))
        assert np.abs(s_eta.g.data - g_inv).max() <= 1e-7

    def test_fold_detection(self):
        chart = se.Chart(((-1.2, 1.2),), (33,))
        pts = chart.points()
        # double-well: Hessian changes sign inside the chart
        p = se.HessePotential(
            chart, se.Field(chart, (), pts[..., 0] ** 4 - pts[..., 0] ** 2))
        with pytest.raises(se.InjectivityError):
            se.legendre_transform(p)

    def test_flatness_of_dual_connection(self, exp33):
        star = se.dual_connection(exp33.structure)
        assert se.flatness_residual(star) <= 1e-5
        assert se.flatness_residual(exp33.structure.gamma) == 0.0


class TestFdHessian:
    def test_symmetric_by_construction(self, gaussian65):
        h = fd_hessian(gaussian65.potential.psi)
        assert np.abs(h - np.swapaxes(h, -1, -2)).max() == 0.0
