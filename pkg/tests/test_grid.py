import numpy as np
import pytest

from statembed.errors import ChartError, NonFiniteError, PathError
from statembed.grid import (
    Chart,
    Field,
    LatticePath,
    closedness_residual,
    partial,
    path_integrate,
    potential_from_closed_form,
    second_partial,
)


def unit_chart(m, n=1):
    return Chart(((0.0, 1.0),) * n, (m,) * n)


class TestChart:
    def test_rejects_degenerate_axes(self):
        with pytest.raises(ChartError):
            Chart(((0.0, 1.0),), (4,))
        with pytest.raises(ChartError):
            Chart(((1.0, 1.0),), (9,))
        with pytest.raises(ChartError):
            Chart(((0.0, 1.0), (0.0, 1.0)), (9,))

    def test_spacing(self):
        c = Chart(((0.0, 2.0), (1.0, 2.0)), (5, 11))
        assert c.spacing == (0.5, 0.1)
        assert c.center_index() == (2, 5)


class TestField:
    def test_shape_validation(self):
        c = unit_chart(9)
        with pytest.raises(ChartError):
            Field(c, (2,), np.zeros((9, 3)))

    def test_rejects_nonfinite(self):
        c = unit_chart(9)
        data = np.zeros(9)
        data[3] = np.nan
        with pytest.raises(NonFiniteError):
            Field(c, (), data)


class TestPartial:
    def test_constant_derivative_vanishes(self):
        c = unit_chart(9)
        f = Field.sample(c, lambda p: np.full(p.shape[:-1], 3.7))
        assert np.abs(partial(f, 0).data).max() <= 1e-13

    def test_exact_on_cubic(self):
        c = unit_chart(9)
        f = Field.sample(c, lambda p: p[..., 0] ** 3)
        err = np.abs(partial(f, 0).data - 3 * c.axis_coords(0) ** 2)
        assert err.max() <= 1e-10

    def test_exact_on_quartic(self):
        c = unit_chart(9)
        f = Field.sample(c, lambda p: p[..., 0] ** 4)
        err = np.abs(partial(f, 0).data - 4 * c.axis_coords(0) ** 3)
        assert err.max() <= 1e-10

    def test_linearity(self):
        c = unit_chart(17, 2)
        pts = c.points()
        f = Field(c, (), np.sin(pts[..., 0] * 3) * pts[..., 1])
        g = Field(c, (), np.exp(pts[..., 0] - pts[..., 1]))
        combo = Field(c, (), 2.5 * f.data - 1.5 * g.data)
        lhs = partial(combo, 0).data
        rhs = 2.5 * partial(f, 0).data - 1.5 * partial(g, 0).data
        assert np.abs(lhs - rhs).max() <= 1e-12

    def test_convergence_order_on_sin(self):
        errs = []
        for m in (17, 33):
            c = Chart(((0.0, np.pi),), (m,))
            f = Field.sample(c, lambda p: np.sin(p[..., 0]))
            errs.append(
                np.abs(partial(f, 0).data - np.cos(c.axis_coords(0))).max()
            )
        order = np.log2(errs[0] / errs[1])
        assert 3.5 <= order <= 5.5

    def test_axis_out_of_range(self):
        c = unit_chart(9)
        f = Field.zeros(c)
        with pytest.raises(ChartError):
            partial(f, 1)


class TestSecondPartial:
    def test_bilinear(self):
        c = unit_chart(9, 2)
        pts = c.points()
        f = Field(c, (), pts[..., 0] * pts[..., 1])
        assert np.abs(second_partial(f, 0, 1).data - 1.0).max() <= 1e-9

    def test_quadratic(self):
        c = unit_chart(9)
        f = Field.sample(c, lambda p: p[..., 0] ** 2)
        assert np.abs(second_partial(f, 0, 0).data - 2.0).max() <= 1e-9

    def test_exponential(self):
        c = Chart(((0.0, 1.0),), (33,))
        f = Field.sample(c, lambda p: np.exp(p[..., 0]))
        err = np.abs(second_partial(f, 0, 0).data - np.exp(c.axis_coords(0)))
        assert err.max() <= 1e-5

    def test_mixed_symmetry(self):
        c = unit_chart(17, 2)
        pts = c.points()
        f = Field(c, (), np.sin(pts[..., 0]) * np.cos(2 * pts[..., 1]))
        d01 = second_partial(f, 0, 1).data
        d10 = second_partial(f, 1, 0).data
        assert np.abs(d01 - d10).max() <= 1e-10


class TestPathIntegrate:
    def test_constant_form(self):
        c = Chart(((0.0, 1.0),), (11,))
        w = Field(c, (1,), np.full((11, 1), 2.5))
        val = path_integrate(w, LatticePath((3,), ((0, 1),)))
        assert val == pytest.approx(2.5 * c.spacing[0], abs=1e-14)

    def test_linear_antiderivative(self):
        c = Chart(((0.0, 1.0),), (9,))
        w = Field.sample(c, lambda p: 2 * p, value_shape=(1,))
        path = LatticePath((0,), ((0, 1),) * 8)
        assert path_integrate(w, path) == pytest.approx(1.0, abs=1e-10)

    def test_closed_plaquette(self):
        c = unit_chart(9, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack([pts[..., 1], pts[..., 0]], axis=-1))
        loop = LatticePath((2, 2), ((0, 1), (1, 1), (0, -1), (1, -1)))
        assert abs(path_integrate(w, loop)) <= 1e-12

    def test_reversal_cancels_exactly(self):
        c = unit_chart(9, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack([np.sin(pts[..., 1]), pts[..., 0] ** 2],
                                    axis=-1))
        path = LatticePath((0, 0), ((0, 1), (1, 1), (0, 1), (1, 1), (0, 1)))
        fwd = path_integrate(w, path)
        rev = path_integrate(w, path.reverse())
        assert fwd + rev == 0.0

    def test_leaving_chart_raises(self):
        c = unit_chart(9)
        w = Field.zeros(c, (1,))
        with pytest.raises(PathError):
            path_integrate(w, LatticePath((8,), ((0, 1),)))

    def test_vector_valued_components(self):
        c = Chart(((0.0, 1.0),), (9,))
        x = c.points()
        data = np.stack([2 * x, 3 * np.ones_like(x)], axis=-2)  # (9, 2, 1)
        w = Field(c, (2, 1), data)
        vals = path_integrate(w, LatticePath((0,), ((0, 1),) * 8))
        assert vals[0] == pytest.approx(1.0, abs=1e-10)
        assert vals[1] == pytest.approx(3.0, abs=1e-12)


class TestClosedness:
    def test_sampled_exact_differential(self):
        c = unit_chart(33, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack(
            [np.cos(pts[..., 0]) * np.cos(pts[..., 1]),
             -np.sin(pts[..., 0]) * np.sin(pts[..., 1])], axis=-1))
        assert closedness_residual(w) <= 1e-6

    def test_y_dx(self):
        c = unit_chart(17, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack(
            [pts[..., 1], np.zeros(c.shape)], axis=-1))
        assert closedness_residual(w) == pytest.approx(1.0, abs=1e-9)

    def test_zero_form(self):
        c = unit_chart(9, 2)
        assert closedness_residual(Field.zeros(c, (2,))) == 0.0


class TestPotential:
    def test_dx_gives_x(self):
        c = unit_chart(9, 2)
        w = Field(c, (2,), np.stack(
            [np.ones(c.shape), np.zeros(c.shape)], axis=-1))
        F = potential_from_closed_form(w, (0, 0))
        assert np.abs(F.data - c.points()[..., 0]).max() <= 1e-12

    def test_product_potential(self):
        c = unit_chart(17, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack([pts[..., 1], pts[..., 0]], axis=-1))
        F = potential_from_closed_form(w, (0, 0))
        assert np.abs(F.data - pts[..., 0] * pts[..., 1]).max() <= 1e-8

    def test_gradient_recovers_form(self):
        c = unit_chart(33, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack(
            [np.cos(pts[..., 0]) * np.cos(pts[..., 1]),
             -np.sin(pts[..., 0]) * np.sin(pts[..., 1])], axis=-1))
        F = potential_from_closed_form(w)
        bound = 10 * (closedness_residual(w) * c.diameter + 1e-8)
        for i in range(2):
            assert np.abs(partial(F, i).data - w.data[..., i]).max() <= bound

    def test_sweep_order_discrepancy_equals_area(self):
        c = unit_chart(17, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack(
            [pts[..., 1], np.zeros(c.shape)], axis=-1))
        f01 = potential_from_closed_form(w, (0, 0), axis_order=(0, 1))
        f10 = potential_from_closed_form(w, (0, 0), axis_order=(1, 0))
        area = pts[..., 0] * pts[..., 1]
        assert np.abs(np.abs(f01.data - f10.data) - area).max() <= 1e-9

    def test_matches_explicit_staircase(self):
        c = unit_chart(9, 2)
        pts = c.points()
        w = Field(c, (2,), np.stack(
            [np.exp(pts[..., 1]), pts[..., 0] * np.exp(pts[..., 1])],
            axis=-1))
        F = potential_from_closed_form(w, (1, 2))
        target = (6, 7)
        path = LatticePath.staircase((1, 2), target)
        assert F.data[target] == pytest.approx(path_integrate(w, path),
                                               abs=1e-12)
