"""Codimension-1/2 affine immersions: decomposition, equiaffinity, conormals.

For an immersion f with transverse field xi (and, in codimension 2, the
position field eta = f itself), second derivatives of f decompose in the
moving frame {d_1 f, ..., d_n f, xi[, eta]} as

    d_i d_j f = Gamma_ij^k d_k f - g_ij xi [- k_ij eta],
    d_i xi    = S_i^k d_k f + tau_i xi [+ mu_i eta],

which is solved pointwise by partial-pivoting LU.  With tau = 0 the conormal
map phi (phi.df = 0, <xi, phi> = 1[, phi.eta = 0]) pairs with f as a
realization of the decomposed (g, Gamma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartError, StatembedError, TransversalityError
from .grid import Chart, Field, partial_data
from .lauritzen import LauritzenPair, verify_lauritzen
from .structures import StatisticalStructure, check_statistical

_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class AffineImmersion:
    """Immersion into R^{n+codim} with transverse field xi.

    For codim 2 the position field eta(x) = f(x) is used as the second
    transverse direction and must stay transverse on the chart (charts whose
    image passes through the origin are rejected by the frame solve).
    """

    chart: Chart
    codim: int
    f: Field
    xi: Field

    def __post_init__(self):
        if self.codim not in (1, 2):
            raise ChartError("affine immersions support codimension 1 or 2 only")
        N = self.chart.dim + self.codim
        for name, fld in (("f", self.f), ("xi", self.xi)):
            if fld.chart != self.chart or fld.value_shape != (N,):
                raise ChartError(f"{name} must be ({N},)-valued on the chart")

    @property
    def N(self) -> int:
        return self.chart.dim + self.codim


@dataclass(frozen=True, eq=False)
class AffineDecomposition:
    gamma: Field
    g: Field
    S: Field
    tau: Field
    k: Field | None
    mu: Field | None
    reconstruction_residual: float
    frame_condition: float


def _frame(im: AffineImmersion) -> np.ndarray:
    """Columns: tangent derivatives of f, then xi, then (codim 2) eta = f."""
    chart, N = im.chart, im.N
    n = chart.dim
    df = np.stack([partial_data(im.f.data, chart, i) for i in range(n)],
                  axis=-1)  # [..., A, i]
    cols = [df, im.xi.data[..., None]]
    if im.codim == 2:
        cols.append(im.f.data[..., None])
    fr = np.concatenate(cols, axis=-1)
    cond = np.linalg.cond(fr)
    worst = float(cond.max())
    if not np.isfinite(worst) or worst > _COND_LIMIT:
        idx = np.unravel_index(np.argmax(np.where(np.isfinite(cond), cond,
                                                  np.inf)), cond.shape)
        raise TransversalityError(
            f"frame singular or ill-conditioned at grid point {idx} "
            f"(condition {worst:.3e}); transversality fails",
            point=tuple(int(i) for i in idx),
        )
    return fr


def decompose(im: AffineImmersion) -> AffineDecomposition:
    """Solve the frame equations for (Gamma, g[, k]) and (S, tau[, mu])."""
    chart, N = im.chart, im.N
    n = chart.dim
    fr = _frame(im)
    cond = float(np.linalg.cond(fr).max())

    df = fr[..., :n]
    ddf = np.stack(
        [np.stack([partial_data(df[..., :, j], chart, i) for j in range(n)],
                  axis=-1) for i in range(n)],
        axis=-1,
    )  # [..., A, j, i]
    rhs1 = ddf.reshape(ddf.shape[:-2] + (n * n,))
    coef1 = np.linalg.solve(fr, rhs1).reshape(fr.shape[:-2] + (N, n, n))
    gamma = np.moveaxis(coef1[..., :n, :, :], -3, -1)   # [..., j, i, k] -> ij^k
    gamma = np.swapaxes(gamma, -3, -2)
    g = -coef1[..., n, :, :]
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    k = -coef1[..., n + 1, :, :] if im.codim == 2 else None

    dxi = np.stack([partial_data(im.xi.data, chart, i) for i in range(n)],
                   axis=-1)  # [..., A, i]
    coef2 = np.linalg.solve(fr, dxi)
    S = np.swapaxes(coef2[..., :n, :], -1, -2)          # [..., i, k]
    tau = coef2[..., n, :]
    mu = coef2[..., n + 1, :] if im.codim == 2 else None

    recon = np.einsum("...ijk,...Ak->...Aij", gamma, df)
    recon = recon - g[..., None, :, :] * im.xi.data[..., :, None, None]
    if im.codim == 2:
        recon = recon - k[..., None, :, :] * im.f.data[..., :, None, None]
    ddf_ij = np.swapaxes(ddf, -1, -2)  # [..., A, i, j]
    residual = float(np.abs(ddf_ij - recon).max())

    return AffineDecomposition(
        gamma=Field(chart, (n, n, n), gamma),
        g=Field(chart, (n, n), g),
        S=Field(chart, (n, n), S),
        tau=Field(chart, (n,), tau),
        k=Field(chart, (n, n), k) if k is not None else None,
        mu=Field(chart, (n,), mu) if mu is not None else None,
        reconstruction_residual=residual,
        frame_condition=cond,
    )


@dataclass(frozen=True)
class AffineStatReport:
    tau_max: float
    mu_max: float
    g_min_eigenvalue: float
    g_positive_definite: bool
    torsion_residual: float
    nabla_g_residual: float


def check_statistical_affine(d: AffineDecomposition) -> AffineStatReport:
    """Equiaffinity (max |tau|), definiteness of g, and the structure axioms."""
    eig = np.linalg.eigvalsh(d.g.data)
    min_eig = float(eig[..., 0].min())
    structure = StatisticalStructure(d.g.chart, d.g, d.gamma)
    rep = check_statistical(structure)
    return AffineStatReport(
        tau_max=float(np.abs(d.tau.data).max()),
        mu_max=float(np.abs(d.mu.data).max()) if d.mu is not None else 0.0,
        g_min_eigenvalue=min_eig,
        g_positive_definite=min_eig > 0.0,
        torsion_residual=rep.torsion_residual,
        nabla_g_residual=rep.nabla_g_residual,
    )


@dataclass(frozen=True)
class ConormalReport:
    defining_residual: float
    xi_phi_residual: float
    eta_phi_residual: float
    min_singular_ratio: float


def conormal_map(im: AffineImmersion) -> tuple[Field, ConormalReport]:
    """Solve phi.d_i f = 0, <xi, phi> = 1 (and phi.eta = 0 for codim 2) pointwise.

    Also reports the finite-difference residuals of <xi, phi_* Z> = 0 (and
    <eta, phi_* Z> = 0), which vanish exactly in the equiaffine case.
    """
    chart, N = im.chart, im.N
    n = chart.dim
    fr = _frame(im)
    rows = np.swapaxes(fr, -1, -2)  # rows are the frame vectors
    rhs = np.zeros(rows.shape[:-2] + (N,))
    rhs[..., n] = 1.0
    phi = np.linalg.solve(rows, rhs[..., None])[..., 0]
    phi_field = Field(chart, (N,), phi)

    defining = np.abs(rows @ phi[..., None] - rhs[..., None]).max()
    dphi = np.stack([partial_data(phi, chart, i) for i in range(n)],
                    axis=chart.dim)  # [..., i, A]
    xi_phi = np.einsum("...A,...iA->...i", im.xi.data, dphi)
    eta_phi = (np.einsum("...A,...iA->...i", im.f.data, dphi)
               if im.codim == 2 else np.zeros_like(xi_phi))
    sv = np.linalg.svd(dphi, compute_uv=False)
    return phi_field, ConormalReport(
        defining_residual=float(defining),
        xi_phi_residual=float(np.abs(xi_phi).max()),
        eta_phi_residual=float(np.abs(eta_phi).max()),
        min_singular_ratio=float((sv[..., -1] / sv[..., 0]).min()),
    )


@dataclass(frozen=True, eq=False)
class AffinePipelineReport:
    stat: AffineStatReport
    conormal: ConormalReport
    verify: object
    decomposition: AffineDecomposition


def affine_to_lauritzen(im: AffineImmersion, tau_tol: float = 1e-6
                        ) -> tuple[LauritzenPair, AffinePipelineReport]:
    """Pair the immersion with its conormal and verify against the decomposition.

    Raises when equiaffinity fails beyond ``tau_tol``; definiteness of g is
    reported, not enforced, so sign conventions of the transverse field stay
    visible to the caller.
    """
    d = decompose(im)
    stat = check_statistical_affine(d)
    if stat.tau_max > tau_tol:
        raise StatembedError(
            f"equiaffinity violated: max |tau| = {stat.tau_max:.3e} > {tau_tol:g}"
        )
    phi, conrep = conormal_map(im)
    pair = LauritzenPair(im.chart, im.N, im.f, phi)
    structure = StatisticalStructure(im.chart, d.g, d.gamma)
    verify = verify_lauritzen(pair, structure)
    return pair, AffinePipelineReport(stat=stat, conormal=conrep, verify=verify,
                                      decomposition=d)
