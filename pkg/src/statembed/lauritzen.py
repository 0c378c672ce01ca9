"""Pairs of maps (f, phi) into V x V* realizing a statistical structure.

A pair realizes (g, Gamma) when g_ij = d_i f^A d_j phi_A and
Gamma_ijk = d_i d_j f^A d_k phi_A.  Verification recomputes everything by
finite differences from the stored components, so it applies identically to
pairs produced by transport, by conormal construction, or by hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartError, StatembedError
from .grid import Chart, Field, partial_data
from .structures import StatisticalStructure, lowered_gamma

_RANK_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class LauritzenPair:
    """Component fields of f: M -> V and phi: M -> V* on a shared chart."""

    chart: Chart
    N: int
    f: Field
    phi: Field

    def __post_init__(self):
        object.__setattr__(self, "N", int(self.N))
        if self.N < self.chart.dim:
            raise ChartError("ambient dimension below chart dimension")
        for name, fld in (("f", self.f), ("phi", self.phi)):
            if fld.chart != self.chart or fld.value_shape != (self.N,):
                raise ChartError(f"{name} must be an ({self.N},)-valued field "
                                 "on the pair's chart")


@dataclass(frozen=True)
class LauritzenReport:
    metric_residual: float
    connection_residual: float
    pairing_symmetry_residual: float
    min_singular_ratio: float

    @property
    def rank_ok(self) -> bool:
        return self.min_singular_ratio > _RANK_RTOL

    def passes(self, tol: float) -> bool:
        return (self.metric_residual <= tol
                and self.connection_residual <= tol
                and self.rank_ok)


def differential(p: LauritzenPair) -> np.ndarray:
    """df[..., i, A] = finite-difference d_i f^A."""
    n = p.chart.dim
    return np.stack([partial_data(p.f.data, p.chart, i) for i in range(n)],
                    axis=p.chart.dim)


def second_differential(p: LauritzenPair) -> np.ndarray:
    n = p.chart.dim
    df = differential(p)
    return np.stack([partial_data(df, p.chart, i) for i in range(n)],
                    axis=p.chart.dim)  # [..., i, j, A]


def immersion_singular_ratio(p: LauritzenPair) -> float:
    """min over grid points of sigma_min/sigma_max of the Jacobian of f."""
    df = differential(p)
    sv = np.linalg.svd(df, compute_uv=False)
    return float((sv[..., -1] / sv[..., 0]).min())


def verify_lauritzen(p: LauritzenPair, s: StatisticalStructure) -> LauritzenReport:
    """Residuals of the defining equations of the pair against (g, Gamma)."""
    if p.chart != s.chart:
        raise ChartError("pair and structure live on different charts")
    n = p.chart.dim
    df = differential(p)
    dphi = np.stack([partial_data(p.phi.data, p.chart, i) for i in range(n)],
                    axis=p.chart.dim)
    pairing = np.einsum("...iA,...jA->...ij", df, dphi)
    metric_residual = float(np.abs(s.g.data - pairing).max())
    ddf = second_differential(p)
    conn = np.einsum("...ijA,...kA->...ijk", ddf, dphi)
    connection_residual = float(np.abs(lowered_gamma(s) - conn).max())
    sym = float(np.abs(pairing - np.swapaxes(pairing, -1, -2)).max())
    return LauritzenReport(
        metric_residual=metric_residual,
        connection_residual=connection_residual,
        pairing_symmetry_residual=sym,
        min_singular_ratio=immersion_singular_ratio(p),
    )


def dual_pair(p: LauritzenPair) -> LauritzenPair:
    """Swap (f, phi) -> (phi, f): realizes the dual structure (g, Gamma*)."""
    return LauritzenPair(p.chart, p.N, p.phi, p.f)


def alpha_pair(p: LauritzenPair, alpha: float,
               s: StatisticalStructure | None = None,
               tol: float = 1e-4) -> LauritzenPair:
    """Double the ambient space to realize the alpha-connection family.

    F = (f, (1-a)/2 phi) into V (+) V*;  Phi = ((1+a)/2 phi, f) into V* (+) V.
    The result pairs with (g, Gamma_alpha).  When a structure is supplied the
    input pair is verified against it first and rejected beyond ``tol``.
    """
    if s is not None:
        rep = verify_lauritzen(p, s)
        if not rep.passes(tol):
            raise StatembedError(
                "input pair fails verification before alpha doubling: "
                f"metric {rep.metric_residual:.3e}, "
                f"connection {rep.connection_residual:.3e}"
            )
    lo = 0.5 * (1.0 - alpha)
    hi = 0.5 * (1.0 + alpha)
    F = np.concatenate([p.f.data, lo * p.phi.data], axis=-1)
    Phi = np.concatenate([hi * p.phi.data, p.f.data], axis=-1)
    return LauritzenPair(p.chart, 2 * p.N,
                         Field(p.chart, (2 * p.N,), F),
                         Field(p.chart, (2 * p.N,), Phi))
