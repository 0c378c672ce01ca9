"""Statistical structures (g, Gamma): axiom checks, duality, alpha-family, curvature.

Index conventions.  The connection field stores ``Gamma_ij^k`` with the two
lower indices first and the upper index last.  Lowered coefficients are
``Gamma_ijk = g_kl Gamma_ij^l``.  The metric-duality relation

    d_i g_jk = Gamma_ijk + Gamma*_ikj

defines the dual connection; because the stored metric is exactly symmetric,
the dual of the dual reproduces the original coefficients to roundoff, and the
dual of an alpha-connection is the (-alpha)-connection exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartError, SingularMetricError
from .grid import Chart, Field, partial_data


@dataclass(frozen=True, eq=False)
class StatisticalStructure:
    """Metric components g_ij and connection coefficients Gamma_ij^k on one chart."""

    chart: Chart
    g: Field
    gamma: Field

    def __post_init__(self):
        n = self.chart.dim
        if self.g.chart != self.chart or self.gamma.chart != self.chart:
            raise ChartError("metric and connection must live on the given chart")
        if self.g.value_shape != (n, n):
            raise ChartError(f"metric value shape {self.g.value_shape} != ({n},{n})")
        if self.gamma.value_shape != (n, n, n):
            raise ChartError(
                f"connection value shape {self.gamma.value_shape} != ({n},{n},{n})"
            )

    @property
    def n(self) -> int:
        return self.chart.dim


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """R_ij^k_l in the Ricci-identity convention, plus the lowered R_ijkl."""

    R: Field
    R_low: Field | None


@dataclass(frozen=True)
class StructureReport:
    torsion_residual: float
    nabla_g_residual: float
    min_metric_eigenvalue: float
    worst_metric_point: tuple

    def passes(self, tol: float) -> bool:
        return (
            self.torsion_residual <= tol
            and self.nabla_g_residual <= tol
            and self.min_metric_eigenvalue > 0.0
        )


def metric_derivative(s: StatisticalStructure) -> np.ndarray:
    """dg[..., i, j, k] = finite-difference d_i g_jk."""
    n = s.n
    return np.stack(
        [partial_data(s.g.data, s.chart, i) for i in range(n)], axis=s.chart.dim
    )


def lowered_gamma(s: StatisticalStructure) -> np.ndarray:
    """Gamma_ijk = g_kl Gamma_ij^l."""
    return np.einsum("...kl,...ijl->...ijk", s.g.data, s.gamma.data)


def metric_inverse(g: Field) -> np.ndarray:
    eig = np.linalg.eigvalsh(g.data)
    mins = eig[..., 0]
    if mins.min() <= 0.0:
        idx = np.unravel_index(np.argmin(mins), mins.shape)
        raise SingularMetricError(
            f"metric not positive definite at grid point {idx} "
            f"(min eigenvalue {mins.min():.3e})",
            point=idx,
        )
    return np.linalg.inv(g.data)


def check_statistical(s: StatisticalStructure) -> StructureReport:
    """Torsion and metric-compatibility residuals plus metric definiteness.

    nabla_g_residual is the max of ``|nabla_i g_jk - nabla_j g_ik|`` with
    ``nabla_i g_jk = d_i g_jk - Gamma_ij^l g_lk - Gamma_ik^l g_jl``.
    """
    torsion = float(
        np.abs(s.gamma.data - np.swapaxes(s.gamma.data, -3, -2)).max()
    )
    dg = metric_derivative(s)
    nabla_g = (
        dg
        - np.einsum("...ijl,...lk->...ijk", s.gamma.data, s.g.data)
        - np.einsum("...ikl,...jl->...ijk", s.gamma.data, s.g.data)
    )
    asym = nabla_g - np.swapaxes(nabla_g, -3, -2)
    eig = np.linalg.eigvalsh(s.g.data)
    mins = eig[..., 0]
    worst = np.unravel_index(np.argmin(mins), mins.shape)
    return StructureReport(
        torsion_residual=torsion,
        nabla_g_residual=float(np.abs(asym).max()),
        min_metric_eigenvalue=float(mins.min()),
        worst_metric_point=tuple(int(i) for i in worst),
    )


def dual_connection(s: StatisticalStructure) -> Field:
    """Connection coefficients of the g-dual connection, upper last index.

    Built from ``Gamma*_ikj = d_i g_jk - Gamma_ijk`` (lowered form) and raised
    with the inverse metric.  Applying the operation twice returns the input
    coefficients to roundoff.
    """
    dg = metric_derivative(s)
    gl = lowered_gamma(s)
    dual_low = np.swapaxes(dg - gl, -1, -2)  # [i, k, j] -> slot order (i, j, pairing)
    ginv = metric_inverse(s.g)
    data = np.einsum("...kl,...ijl->...ijk", ginv, dual_low)
    return Field(s.chart, s.gamma.value_shape, data)


def alpha_connection(s: StatisticalStructure, alpha: float) -> Field:
    """(1+a)/2 * Gamma + (1-a)/2 * Gamma*."""
    if alpha == 1.0:
        return s.gamma
    star = dual_connection(s)
    if alpha == -1.0:
        return star
    data = 0.5 * (1.0 + alpha) * s.gamma.data + 0.5 * (1.0 - alpha) * star.data
    return Field(s.chart, s.gamma.value_shape, data)


def levi_civita(g: Field) -> Field:
    """Christoffel symbols of g, computed independently of any connection."""
    chart = g.chart
    n = chart.dim
    dg = np.stack(
        [partial_data(g.data, chart, i) for i in range(n)], axis=chart.dim
    )
    dg_jil = np.swapaxes(dg, -3, -2)
    dg_lij = np.moveaxis(dg, (-3, -2, -1), (-1, -3, -2))
    low = 0.5 * (dg + dg_jil - dg_lij)
    ginv = metric_inverse(g)
    data = np.einsum("...kl,...ijl->...ijk", ginv, low)
    return Field(chart, (n, n, n), data)


def curvature(gamma: Field, g: Field | None = None) -> CurvatureField:
    """Curvature of a torsion-free connection via the Ricci identity.

    R_ij^k_l = d_i Gamma_jl^k - d_j Gamma_il^k
               + Gamma_im^k Gamma_jl^m - Gamma_jm^k Gamma_il^m,

    antisymmetrized explicitly so R_ij = -R_ji holds exactly.  When a metric is
    supplied, R_low lowers the upper index into the third slot (R_ijkl).
    """
    chart = gamma.chart
    n = chart.dim
    dgam = np.stack(
        [partial_data(gamma.data, chart, i) for i in range(n)], axis=chart.dim
    )  # [..., i, j, l, k]
    term1 = np.swapaxes(dgam, -1, -2)  # -> [..., i, j, k, l]
    term2 = np.einsum("...imk,...jlm->...ijkl", gamma.data, gamma.data)
    b = term1 + term2
    r = b - np.swapaxes(b, -4, -3)
    R = Field(chart, (n, n, n, n), r)
    if g is None:
        return CurvatureField(R=R, R_low=None)
    low = np.einsum("...km,...ijml->...ijkl", g.data, r)
    return CurvatureField(R=R, R_low=Field(chart, (n, n, n, n), low))


def curvature_duality_residual(s: StatisticalStructure) -> float:
    """max |R_ijkl + R*_ijlk| over the grid (duality of the curvature pair)."""
    r = curvature(s.gamma, s.g).R_low.data
    r_star = curvature(dual_connection(s), s.g).R_low.data
    return float(np.abs(r + np.swapaxes(r_star, -1, -2)).max())


def flatness_residual(gamma: Field) -> float:
    """Max-norm of the curvature of a torsion-free connection."""
    return float(np.abs(curvature(gamma).R.data).max())
