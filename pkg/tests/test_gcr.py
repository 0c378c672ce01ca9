import numpy as np
import pytest

import statembed as se
from statembed.gcr import bundle_curvature_star, codazzi_hstar_dual_form


def smooth_bump(chart, amplitude):
    pts = chart.points()
    out = np.ones(chart.shape)
    for a in range(chart.dim):
        lo, hi = chart.ranges[a]
        out = out * np.sin(np.pi * (pts[..., a] - lo) / (hi - lo))
    return amplitude * out


def perturb_h(fx, amplitude=1e-2):
    bump = smooth_bump(fx.chart, amplitude)
    h = fx.extrinsic.h.data + bump[..., None, None, None] * fx.structure.g.data
    return se.ExtrinsicData(
        fx.extrinsic.r, se.Field(fx.chart, fx.extrinsic.h.value_shape, h),
        fx.extrinsic.h_star, fx.extrinsic.tau)


def synthetic_extrinsic(fx, r=1):
    """Smooth non-trivial extrinsic candidate fields (no GCR assumed)."""
    chart = fx.chart
    pts = chart.points()
    n = chart.dim
    u = np.cos(pts[..., 0]) + 0.3 * np.sin(pts[..., -1])
    h = np.zeros(chart.shape + (r, n, n))
    hs = np.zeros(chart.shape + (r, n, n))
    for a in range(r):
        for i in range(n):
            for j in range(i, n):
                val = (1 + a) * u * (0.5 + 0.1 * (i + j))
                h[..., a, i, j] = h[..., a, j, i] = val
                hs[..., a, i, j] = hs[..., a, j, i] = val - 0.2 * u
    tau = np.zeros(chart.shape + (r, r, n))
    for a in range(r):
        for b in range(r):
            tau[..., a, b, 0] = 0.1 * (a - b) * u
    return se.ExtrinsicData(r, se.Field(chart, (r, n, n), h),
                            se.Field(chart, (r, n, n), hs),
                            se.Field(chart, (r, r, n), tau))


class TestExtrinsicData:
    def test_symmetry_enforced(self):
        chart = se.Chart(((0.0, 1.0),) * 2, (9, 9))
        h = np.zeros((9, 9, 1, 2, 2))
        h[..., 0, 0, 1] = 1.0
        with pytest.raises(se.ChartError):
            se.ExtrinsicData(1, se.Field(chart, (1, 2, 2), h),
                             se.Field.zeros(chart, (1, 2, 2)),
                             se.Field.zeros(chart, (1, 1, 2)))


class TestGcrResiduals:
    def test_euclidean_zero(self):
        fx = se.fixture("euclidean", shape=9)
        rep = se.gcr_residuals(fx.structure, fx.extrinsic)
        assert rep.max == 0.0

    def test_sphere_unit_extrinsic(self, sphere65):
        rep = se.gcr_residuals(sphere65.structure, sphere65.extrinsic)
        assert rep.gauss.max <= 1e-5
        assert rep.codazzi_h.max <= 1e-5
        assert rep.codazzi_hstar.max <= 1e-5
        assert rep.ricci.max <= 1e-5

    def test_scaled_h_gauss_response(self, sphere65):
        s, e = sphere65.structure, sphere65.extrinsic
        scaled = se.ExtrinsicData(
            1, se.Field(s.chart, (1, 2, 2), 1.1 * e.h.data),
            se.Field(s.chart, (1, 2, 2), 1.1 * e.h_star.data), e.tau)
        rep = se.gcr_residuals(s, scaled)
        g = s.g.data
        kulkarni = np.einsum("...ik,...jl->...ijkl", g, g) \
            - np.einsum("...jk,...il->...ijkl", g, g)
        expect = (1.1 ** 2 - 1.0) * np.abs(kulkarni).max()
        assert rep.gauss.max == pytest.approx(expect, rel=1e-3)
        # the other residuals scale by 1.1 but stay at discretization level
        assert rep.codazzi_h.max <= 2e-5
        assert rep.ricci.max <= 1e-9

    def test_gauss_field_antisymmetric(self, sphere65):
        rep = se.gcr_residuals(sphere65.structure, sphere65.extrinsic)
        gauss = rep.fields["gauss"]
        assert np.abs(gauss + np.swapaxes(gauss, -4, -3)).max() == 0.0

    def test_codimension_zero(self, exp33):
        chart = exp33.chart
        e0 = se.ExtrinsicData(0, se.Field.zeros(chart, (0, 2, 2)),
                              se.Field.zeros(chart, (0, 2, 2)),
                              se.Field.zeros(chart, (0, 0, 2)))
        rep = se.gcr_residuals(exp33.structure, e0)
        assert rep.max == 0.0


class TestCodazziCrossCheck:
    def test_euclidean_synthetic_exact(self):
        fx = se.fixture("euclidean", shape=17)
        e = synthetic_extrinsic(fx, r=2)
        rep = se.gcr_residuals(fx.structure, e)
        dual_form = codazzi_hstar_dual_form(fx.structure, e)
        assert np.abs(rep.fields["codazzi_hstar"] - dual_form).max() <= 1e-8

    def test_sphere_within_fd_floor(self, sphere65):
        rep = se.gcr_residuals(sphere65.structure, sphere65.extrinsic)
        dual_form = codazzi_hstar_dual_form(sphere65.structure,
                                            sphere65.extrinsic)
        assert np.abs(rep.fields["codazzi_hstar"] - dual_form).max() <= 1e-5


class TestBundleConnection:
    def test_zero_extrinsic_block_diagonal(self, exp33):
        chart = exp33.chart
        e0 = se.ExtrinsicData(1, se.Field.zeros(chart, (1, 2, 2)),
                              se.Field.zeros(chart, (1, 2, 2)),
                              se.Field.zeros(chart, (1, 1, 2)))
        conn = se.bundle_connection(exp33.structure, e0)
        assert np.abs(conn.A[..., :2, 2:]).max() == 0.0
        assert np.abs(conn.A[..., 2:, :2]).max() == 0.0
        expect = np.moveaxis(exp33.structure.gamma.data, -1, -2)
        assert np.abs(conn.A[..., :2, :2] - expect).max() == 0.0

    def test_sphere_offdiagonal_blocks(self, sphere65):
        conn = se.bundle_connection(sphere65.structure, sphere65.extrinsic)
        # raised h* equals the identity, so the tangent-fiber block is delta
        for i in range(2):
            col = conn.A[..., i, :2, 2]
            assert np.abs(col - np.eye(2)[i]).max() <= 1e-12
        assert np.abs(conn.A[..., 0, 2, :2]
                      + sphere65.structure.g.data[..., 0, :]).max() <= 1e-12

    def test_duality_identity(self, sphere65, exp33, gaussian65):
        for fx in (sphere65, exp33, gaussian65):
            e = fx.extrinsic or synthetic_extrinsic(fx)
            conn = se.bundle_connection(fx.structure, e)
            assert se.duality_residual(conn) <= 1e-10


class TestBundleCurvature:
    def test_euclidean_zero(self):
        fx = se.fixture("euclidean", shape=9)
        _, fmax = se.bundle_curvature(
            se.bundle_connection(fx.structure, fx.extrinsic))
        assert fmax == 0.0

    def test_sphere_flat(self, sphere65):
        conn = se.bundle_connection(sphere65.structure, sphere65.extrinsic)
        _, fmax = se.bundle_curvature(conn)
        assert fmax <= 1e-5

    def test_perturbation_links_both_directions(self, sphere65):
        s = sphere65.structure
        pert = perturb_h(sphere65, 1e-2)
        rep = se.gcr_residuals(s, pert)
        _, fmax = se.bundle_curvature(se.bundle_connection(s, pert))
        assert fmax >= 1e-3
        assert fmax <= 10.0 * rep.total
        assert rep.max <= 10.0 * fmax

    def test_equivalence_constant_on_fixtures(self, sphere65, exp33):
        cases = [(sphere65.structure, sphere65.extrinsic),
                 (exp33.structure, synthetic_extrinsic(exp33, r=2))]
        for s, e in cases:
            rep = se.gcr_residuals(s, e)
            _, fmax = se.bundle_curvature(se.bundle_connection(s, e))
            if max(fmax, rep.max) < 1e-12:
                continue
            assert fmax <= 10.0 * max(rep.total, 1e-12)
            assert rep.max <= 10.0 * max(fmax, 1e-12)

    def test_dual_curvature_relation(self, sphere65):
        conn = se.bundle_connection(sphere65.structure, sphere65.extrinsic)
        F, _ = se.bundle_curvature(conn)
        F_star, _ = bundle_curvature_star(conn)
        G = conn.fiber_metric
        low = np.einsum("...KM,...ijML->...ijKL", G, F)
        low_star = np.einsum("...KM,...ijML->...ijKL", G, F_star)
        resid = low + np.swapaxes(low_star, -1, -2)
        assert np.abs(resid).max() <= 1e-6
