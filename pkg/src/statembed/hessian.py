"""Hessian (flat statistical) structures: potentials, Legendre duality, flatness.

A potential psi on affine coordinates xi carries the metric g = d2psi/dxi dxi
with zero connection coefficients.  The Legendre transform maps the chart to
scattered dual coordinates eta = dpsi/dxi with conjugate values
psi* = xi.eta - psi; diagnostics re-grid psi* onto a rectangular eta-lattice
(cubic-spline interpolation plus Newton inversion of the gradient map) and
verify d(psi*)/d(eta) = xi and the mutual inversion of the two Hessians.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import cKDTree

from .errors import InjectivityError, SingularMetricError
from .grid import Chart, Field, partial_data, second_partial
from .structures import StatisticalStructure, flatness_residual  # noqa: F401

_PD_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HessePotential:
    """Scalar potential on affine coordinates, optionally with analytic evaluators.

    The evaluators map stacked coordinates ``(..., n)`` to values ``(...)``,
    gradients ``(..., n)`` and Hessians ``(..., n, n)``; fixtures provide them,
    generic data does not.
    """

    chart: Chart
    psi: Field
    psi_fn: Callable[[np.ndarray], np.ndarray] | None = None
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None
    hess_fn: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def has_analytic(self) -> bool:
        return self.grad_fn is not None and self.hess_fn is not None


def fd_hessian(psi: Field) -> np.ndarray:
    """Matrix of composed second partials, symmetrized by construction."""
    chart = psi.chart
    n = chart.dim
    out = np.empty(chart.shape + (n, n))
    for i in range(n):
        for j in range(i, n):
            d2 = second_partial(psi, i, j).data
            out[..., i, j] = d2
            out[..., j, i] = d2
    return out


def hessian_metric(p: HessePotential) -> StatisticalStructure:
    """Hessian metric with zero connection (affine coordinates).

    Raises SingularMetricError where the Hessian fails positive definiteness,
    reporting the worst grid point.
    """
    chart = p.chart
    n = chart.dim
    h = fd_hessian(p.psi)
    eig = np.linalg.eigvalsh(h)
    mins = eig[..., 0]
    scale = float(np.abs(eig).max())
    if mins.min() <= _PD_REL_TOL * scale:
        idx = np.unravel_index(np.argmin(mins), mins.shape)
        raise SingularMetricError(
            f"potential Hessian not positive definite at grid point {idx} "
            f"(min eigenvalue {mins.min():.3e})",
            point=idx,
        )
    g = Field(chart, (n, n), h)
    gamma = Field.zeros(chart, (n, n, n))
    return StatisticalStructure(chart, g, gamma)


@dataclass(frozen=True, eq=False)
class LegendreResult:
    eta: Field
    psi_star: np.ndarray
    eta_chart: Chart | None
    psi_star_regrid: Field | None
    xi_regrid: Field | None
    diagnostics: dict


class _SplinePotential:
    """Spline surrogate for a sampled potential with consistent derivatives.

    Newton inversion must use the exact gradient of the same surrogate whose
    values enter psi* = <x, eta> - psi(x); otherwise the stationarity of the
    conjugate does not cancel the first-order inversion error.  For one and
    two chart dimensions scipy's spline classes provide exact derivatives; in
    higher dimension a tensor cubic interpolant per derived field is used.
    """

    def __init__(self, chart: Chart, psi_data: np.ndarray,
                 eta_data: np.ndarray, hess_data: np.ndarray):
        from scipy.interpolate import (
            InterpolatedUnivariateSpline,
            RectBivariateSpline,
        )

        self.n = n = chart.dim
        axes = [chart.axis_coords(a) for a in range(n)]
        if n == 1:
            s = InterpolatedUnivariateSpline(axes[0], psi_data, k=3)
            d1, d2 = s.derivative(1), s.derivative(2)
            self.value = lambda q: s(q[..., 0])
            self.grad = lambda q: d1(q[..., 0])[..., None]
            self.hess = lambda q: d2(q[..., 0])[..., None, None]
        elif n == 2:
            s = RectBivariateSpline(axes[0], axes[1], psi_data, kx=3, ky=3)

            def value(q):
                return s(q[..., 0], q[..., 1], grid=False)

            def grad(q):
                return np.stack(
                    [s(q[..., 0], q[..., 1], dx=1, grid=False),
                     s(q[..., 0], q[..., 1], dy=1, grid=False)], axis=-1)

            def hess(q):
                out = np.empty(q.shape[:-1] + (2, 2))
                out[..., 0, 0] = s(q[..., 0], q[..., 1], dx=2, grid=False)
                out[..., 1, 1] = s(q[..., 0], q[..., 1], dy=2, grid=False)
                mixed = s(q[..., 0], q[..., 1], dx=1, dy=1, grid=False)
                out[..., 0, 1] = out[..., 1, 0] = mixed
                return out

            self.value, self.grad, self.hess = value, grad, hess
        else:
            def interp(arr):
                return RegularGridInterpolator(axes, arr, method="cubic",
                                               bounds_error=False,
                                               fill_value=None)

            val = interp(psi_data)
            gs = [interp(eta_data[..., i]) for i in range(n)]
            hs = [interp(hess_data[..., i, j])
                  for i in range(n) for j in range(n)]
            self.value = val
            self.grad = lambda q: np.stack([f(q) for f in gs], axis=-1)
            self.hess = lambda q: np.stack(
                [f(q) for f in hs], axis=-1).reshape(q.shape[:-1] + (n, n))


def _invert_gradient(p: HessePotential, eta_data: np.ndarray,
                     surrogate: _SplinePotential | None,
                     targets: np.ndarray, max_iter: int = 60,
                     tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Solve grad psi(x) = target for each target by Newton iteration."""
    chart = p.chart
    n = chart.dim
    pts = chart.points().reshape(-1, n)
    tree = cKDTree(eta_data.reshape(-1, n))
    _, nearest = tree.query(targets)
    x = pts[nearest].copy()

    if p.has_analytic:
        grad_at, hess_at = p.grad_fn, p.hess_fn
    else:
        grad_at, hess_at = surrogate.grad, surrogate.hess

    lows = np.array([lo for lo, _ in chart.ranges])
    highs = np.array([hi for _, hi in chart.ranges])
    for _ in range(max_iter):
        res = grad_at(x) - targets
        if np.abs(res).max() < tol:
            break
        step = np.linalg.solve(hess_at(x), res[..., None])[..., 0]
        x = np.clip(x - step, lows, highs)
    res = grad_at(x) - targets
    return x, float(np.abs(res).max())


def _inner_eta_box(eta_data: np.ndarray, n: int, margin_frac: float
                   ) -> tuple[tuple[float, float], ...]:
    """A box certified inside the image of the gradient map.

    For each axis the lower bound is the max of eta_a over the low face of the
    chart and the upper bound the min over the high face; by monotonicity of
    the gradient map every point of that box is attained (Poincare-Miranda).
    """
    ranges = []
    for a in range(n):
        face_lo = np.take(eta_data[..., a], 0, axis=a)
        face_hi = np.take(eta_data[..., a], -1, axis=a)
        lo = float(face_lo.max())
        hi = float(face_hi.min())
        pad = margin_frac * (hi - lo)
        if not hi - 2 * pad > lo:
            raise InjectivityError(
                f"eta image too thin along component {a} for re-gridding"
            )
        ranges.append((lo + pad, hi - pad))
    return tuple(ranges)


def legendre_transform(p: HessePotential, regrid: bool = True,
                       margin_frac: float = 0.1,
                       regrid_shape: tuple[int, ...] | None = None) -> LegendreResult:
    """Dual coordinates eta = dpsi/dxi, conjugate values, and duality diagnostics.

    The gradient map must be injective on the chart; this is certified by
    positive definiteness of the Hessian at every grid point plus a strict
    monotonicity check of eta_a along every axis-a grid line.
    """
    chart = p.chart
    n = chart.dim
    eta_data = np.stack(
        [partial_data(p.psi.data, chart, i) for i in range(n)], axis=-1
    )
    hess = fd_hessian(p.psi)
    eig_min = np.linalg.eigvalsh(hess)[..., 0]
    if eig_min.min() <= 0.0:
        idx = np.unravel_index(np.argmin(eig_min), eig_min.shape)
        raise InjectivityError(
            f"gradient map Jacobian singular at grid point {idx}; "
            "eta coordinates fold on this chart"
        )
    for a in range(n):
        if not (np.diff(eta_data[..., a], axis=a) > 0.0).all():
            raise InjectivityError(
                f"eta_{a} not strictly increasing along axis {a}; "
                "gradient map not injective on the chart"
            )

    pts = chart.points()
    psi_star = np.einsum("...i,...i->...", pts, eta_data) - p.psi.data
    eta_field = Field(chart, (n,), eta_data)

    if not regrid:
        return LegendreResult(eta_field, psi_star, None, None, None,
                              {"route": "none"})

    eta_chart = Chart(_inner_eta_box(eta_data, n, margin_frac),
                      regrid_shape or chart.shape)
    targets = eta_chart.points().reshape(-1, n)
    surrogate = (None if p.has_analytic
                 else _SplinePotential(chart, p.psi.data, eta_data, hess))
    x_hat, newton_res = _invert_gradient(p, eta_data, surrogate, targets)

    if p.psi_fn is not None:
        psi_at = p.psi_fn(x_hat)
    else:
        psi_at = surrogate.value(x_hat)
    star_vals = np.einsum("ij,ij->i", x_hat, targets) - psi_at
    star_field = Field(eta_chart, (), star_vals.reshape(eta_chart.shape))
    xi_field = Field(eta_chart, (n,), x_hat.reshape(eta_chart.shape + (n,)))

    grad_star = np.stack(
        [partial_data(star_field.data, eta_chart, i) for i in range(n)], axis=-1
    )
    grad_residual = float(np.abs(grad_star - xi_field.data).max())

    hess_star = fd_hessian(star_field)
    if p.has_analytic:
        h_xi = p.hess_fn(x_hat).reshape(eta_chart.shape + (n, n))
        route = "analytic"
    else:
        h_xi = surrogate.hess(x_hat).reshape(eta_chart.shape + (n, n))
        route = "interpolated"
    eye = np.eye(n)
    inv_residual = float(np.abs(hess_star @ h_xi - eye).max())

    diagnostics = {
        "route": route,
        "newton_max_residual": newton_res,
        "grad_residual": grad_residual,
        "hessian_inverse_residual": inv_residual,
    }
    return LegendreResult(eta_field, psi_star, eta_chart, star_field, xi_field,
                          diagnostics)
