"""Extrinsic data, Gauss-Codazzi-Ricci residuals, and the flat bundle connection.

The bundle is E = TM (+) R^r with the fiber metric blockdiag(g, delta); the
codimension index is contracted with the delta identification of R^r and its
dual throughout.  Flatness of the pair of connections on E is equivalent to
the four GCR residuals vanishing; both sides are computed here so the
equivalence can be tested numerically in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartError
from .grid import Chart, Field, partial_data
from .structures import (
    StatisticalStructure,
    curvature,
    dual_connection,
    lowered_gamma,
    metric_derivative,
    metric_inverse,
)

_SYM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ExtrinsicData:
    """Candidate second fundamental forms h^a_ij, h*_aij and normal forms tau^a_bi.

    The shape operators and dual normal forms are not stored; they are the
    index-raised h*, h and -tau respectively.
    """

    r: int
    h: Field
    h_star: Field
    tau: Field

    def __post_init__(self):
        r = int(self.r)
        object.__setattr__(self, "r", r)
        n = self.h.chart.dim
        if r < 0:
            raise ChartError("codimension must be >= 0")
        if self.h.value_shape != (r, n, n) or self.h_star.value_shape != (r, n, n):
            raise ChartError(f"h/h* value shapes must be ({r},{n},{n})")
        if self.tau.value_shape != (r, r, n):
            raise ChartError(f"tau value shape must be ({r},{r},{n})")
        for name, f in (("h", self.h), ("h_star", self.h_star)):
            asym = np.abs(f.data - np.swapaxes(f.data, -1, -2)).max() if r else 0.0
            if asym > _SYM_TOL:
                raise ChartError(
                    f"{name} must be symmetric in its last two indices "
                    f"(asymmetry {asym:.3e})"
                )

    @property
    def chart(self) -> Chart:
        return self.h.chart


@dataclass(frozen=True)
class ResidualStat:
    max: float
    rms: float


def _stat(arr: np.ndarray) -> ResidualStat:
    return ResidualStat(max=float(np.abs(arr).max()) if arr.size else 0.0,
                        rms=float(np.sqrt(np.mean(arr ** 2))) if arr.size else 0.0)


@dataclass(frozen=True, eq=False)
class GcrReport:
    gauss: ResidualStat
    codazzi_h: ResidualStat
    codazzi_hstar: ResidualStat
    ricci: ResidualStat
    fields: dict

    @property
    def max(self) -> float:
        return max(self.gauss.max, self.codazzi_h.max,
                   self.codazzi_hstar.max, self.ricci.max)

    @property
    def total(self) -> float:
        return (self.gauss.max + self.codazzi_h.max
                + self.codazzi_hstar.max + self.ricci.max)


def _check_shapes(s: StatisticalStructure, e: ExtrinsicData) -> None:
    if e.chart != s.chart:
        raise ChartError("structure and extrinsic data live on different charts")


def raised_h_star(s: StatisticalStructure, e: ExtrinsicData) -> np.ndarray:
    """h*_ai^j with the last index raised by the metric."""
    return np.einsum("...jl,...ail->...aij", metric_inverse(s.g), e.h_star.data)


def raised_h(s: StatisticalStructure, e: ExtrinsicData) -> np.ndarray:
    return np.einsum("...jl,...ail->...aij", metric_inverse(s.g), e.h.data)


def _antisym_ij(arr: np.ndarray, axis_i: int, axis_j: int) -> np.ndarray:
    return arr - np.swapaxes(arr, axis_i, axis_j)


def gcr_residuals(s: StatisticalStructure, e: ExtrinsicData) -> GcrReport:
    """The four Gauss-Codazzi-Ricci residual fields and their norms.

    gauss:         R_ijkl - (h*_aik h^a_jl - h*_ajk h^a_il)
    codazzi_h:     nab_i h^a_jl - nab_j h^a_il + tau^a_bi h^b_jl - tau^a_bj h^b_il
    codazzi_hstar: nab_i h*_aj^k - nab_j h*_ai^k + h*_bi^k tau^b_aj - h*_bj^k tau^b_ai
    ricci:         nab_i tau^a_bj - nab_j tau^a_bi + tau^a_ci tau^c_bj
                   - tau^a_cj tau^c_bi - h^a_il h*_bj^l + h^a_jl h*_bi^l

    Covariant derivatives use the tangential connection on i, j, k, l slots and
    the trivial connection on codimension slots; tau never appears inside a
    covariant derivative, only in the explicit terms above.
    """
    _check_shapes(s, e)
    chart, n = s.chart, s.n
    gamma = s.gamma.data
    r_low = curvature(s.gamma, s.g).R_low.data

    hh = np.einsum("...aik,...ajl->...ijkl", e.h_star.data, e.h.data)
    gauss = r_low - _antisym_ij(hh, -4, -3)

    if e.r == 0:
        zero = np.zeros(chart.shape + (0,))
        report_fields = {"gauss": gauss, "codazzi_h": zero,
                         "codazzi_hstar": zero, "ricci": zero}
        return GcrReport(_stat(gauss), _stat(zero), _stat(zero), _stat(zero),
                         report_fields)

    h = e.h.data
    tau = e.tau.data
    hs_up = raised_h_star(s, e)

    dh = np.stack([partial_data(h, chart, i) for i in range(n)], axis=chart.dim)
    nab_h = (
        dh
        - np.einsum("...ijm,...aml->...iajl", gamma, h)
        - np.einsum("...ilm,...ajm->...iajl", gamma, h)
    )
    ch = np.swapaxes(nab_h, -4, -3)  # -> [..., a, i, j, l]
    ch = ch + np.einsum("...abi,...bjl->...aijl", tau, h)
    codazzi_h = _antisym_ij(ch, -3, -2)

    dhs = np.stack([partial_data(hs_up, chart, i) for i in range(n)],
                   axis=chart.dim)
    nab_hs = (
        dhs
        - np.einsum("...ijm,...amk->...iajk", gamma, hs_up)
        + np.einsum("...imk,...ajm->...iajk", gamma, hs_up)
    )
    chs = np.swapaxes(nab_hs, -4, -3)
    chs = chs + np.einsum("...bik,...baj->...aijk", hs_up, tau)
    codazzi_hstar = _antisym_ij(chs, -3, -2)

    dtau = np.stack([partial_data(tau, chart, i) for i in range(n)],
                    axis=chart.dim)
    nab_tau = dtau - np.einsum("...ijm,...abm->...iabj", gamma, tau)
    rc = np.moveaxis(nab_tau, -4, -2)  # [..., a, b, i, j]
    rc = rc + np.einsum("...aci,...cbj->...abij", tau, tau)
    rc = rc - np.einsum("...ail,...bjl->...abij", h, hs_up)
    ricci = _antisym_ij(rc, -2, -1)

    report_fields = {"gauss": gauss, "codazzi_h": codazzi_h,
                     "codazzi_hstar": codazzi_hstar, "ricci": ricci}
    return GcrReport(_stat(gauss), _stat(codazzi_h), _stat(codazzi_hstar),
                     _stat(ricci), report_fields)


def codazzi_hstar_dual_form(s: StatisticalStructure, e: ExtrinsicData) -> np.ndarray:
    """The second Codazzi residual in its dual-connection (all-lower) form.

    nab*_i h*_ajk - nab*_j h*_aik + h*_bki tau^b_aj - h*_bkj tau^b_ai,
    returned with the last index raised so it is comparable with the primary
    form from :func:`gcr_residuals`.
    """
    _check_shapes(s, e)
    chart, n = s.chart, s.n
    gamma_star = dual_connection(s).data
    hs = e.h_star.data
    tau = e.tau.data
    dhs = np.stack([partial_data(hs, chart, i) for i in range(n)],
                   axis=chart.dim)
    nab = (
        dhs
        - np.einsum("...ijm,...amk->...iajk", gamma_star, hs)
        - np.einsum("...ikm,...ajm->...iajk", gamma_star, hs)
    )
    form = np.swapaxes(nab, -4, -3)
    form = form + np.einsum("...bki,...baj->...aijk", hs, tau)
    low = _antisym_ij(form, -3, -2)
    return np.einsum("...kl,...aijl->...aijk", metric_inverse(s.g), low)


@dataclass(frozen=True, eq=False)
class BundleConnection:
    """Matrix-valued forms A, A* of the connection pair on TM (+) R^r.

    ``A[..., i, K, L]`` acts on sections (X^j, lam^a) as d_i + A_i; the fiber
    metric is blockdiag(g, I_r).
    """

    chart: Chart
    n: int
    r: int
    A: np.ndarray
    A_star: np.ndarray
    fiber_metric: np.ndarray
    g: Field

    @property
    def m(self) -> int:
        return self.n + self.r

    def fiber_metric_at(self, idx: tuple) -> np.ndarray:
        return self.fiber_metric[idx]


def bundle_connection(s: StatisticalStructure, e: ExtrinsicData) -> BundleConnection:
    """Assemble the dual pair of bundle connections from (g, Gamma) and (h, h*, tau)."""
    _check_shapes(s, e)
    chart, n, r = s.chart, s.n, e.r
    m = n + r
    gamma_star = dual_connection(s).data
    hs_up = raised_h_star(s, e)
    h_up = raised_h(s, e)

    A = np.zeros(chart.shape + (n, m, m))
    A_star = np.zeros(chart.shape + (n, m, m))
    A[..., :n, :n] = np.moveaxis(s.gamma.data, -1, -2)       # Gamma_ik^j -> [i, j, k]
    A_star[..., :n, :n] = np.moveaxis(gamma_star, -1, -2)
    if r:
        A[..., :n, n:] = np.moveaxis(hs_up, -3, -1)          # h*_bi^j -> [i, j, b]
        A_star[..., :n, n:] = np.moveaxis(h_up, -3, -1)
        A[..., n:, :n] = -np.swapaxes(e.h.data, -3, -2)      # -h^a_ik -> [i, a, k]
        A_star[..., n:, :n] = -np.swapaxes(e.h_star.data, -3, -2)
        A[..., n:, n:] = np.moveaxis(e.tau.data, -1, -3)     # tau^a_bi -> [i, a, b]
        A_star[..., n:, n:] = -np.moveaxis(
            np.swapaxes(e.tau.data, -3, -2), -1, -3
        )

    G = np.zeros(chart.shape + (m, m))
    G[..., :n, :n] = s.g.data
    for a in range(r):
        G[..., n + a, n + a] = 1.0
    return BundleConnection(chart, n, r, A, A_star, G, s.g)


def duality_residual(c: BundleConnection) -> float:
    """max |d_i G - A_i^T G - G A*_i| over the grid (a pointwise identity here;
    finite differences enter only through d_i g)."""
    chart, n, m = c.chart, c.n, c.m
    dG = np.zeros(chart.shape + (n, m, m))
    dg = np.stack([partial_data(c.g.data, chart, i) for i in range(n)],
                  axis=chart.dim)
    dG[..., :n, :n] = dg
    pairing = np.einsum("...iKM,...KL->...iML", c.A, c.fiber_metric)
    pairing = pairing + np.einsum("...KM,...iML->...iKL", c.fiber_metric, c.A_star)
    return float(np.abs(dG - pairing).max())


def bundle_curvature(c: BundleConnection) -> tuple[np.ndarray, float]:
    """F_ij = d_i A_j - d_j A_i + [A_i, A_j]; returns (field, max-norm)."""
    chart, n = c.chart, c.n
    dA = np.stack([partial_data(c.A, chart, i) for i in range(n)],
                  axis=chart.dim)
    comm = np.einsum("...iKM,...jML->...ijKL", c.A, c.A)
    b = dA + comm
    F = b - np.swapaxes(b, chart.dim, chart.dim + 1)
    return F, float(np.abs(F).max())


def bundle_curvature_star(c: BundleConnection) -> tuple[np.ndarray, float]:
    """Curvature of the dual connection A*."""
    chart, n = c.chart, c.n
    dA = np.stack([partial_data(c.A_star, chart, i) for i in range(n)],
                  axis=chart.dim)
    comm = np.einsum("...iKM,...jML->...ijKL", c.A_star, c.A_star)
    b = dA + comm
    F = b - np.swapaxes(b, chart.dim, chart.dim + 1)
    return F, float(np.abs(F).max())
