"""Ambient Hessian potentials over a tubular grid around an embedded chart.

Given a realizing pair (f, phi), the pulled-back form w = <df, phi> is closed
(its residual is the antisymmetric part of the pairing metric) and integrates
to a potential psi0 on the base.  Extending along Euclidean-orthonormal
normals nu_a with

    psi(x, t) = psi0(x) + t^a (phi . nu_a)(x) + C sum_a (t^a)^2

matches the required restriction and ambient-gradient conditions on the base
slice, and a doubling search on C makes the coordinate Hessian positive
definite on the whole tube.  Restricting that Hessian to the base slice
induces a metric and connection that are compared against the original
structure, closing the loop with the transport construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InjectivityError, NotClosedError, StatembedError
from .grid import Chart, Field, partial_data, potential_from_closed_form
from .grid import closedness_residual as form_closedness
from .lauritzen import LauritzenPair, differential, second_differential
from .structures import StatisticalStructure, lowered_gamma

_C_CAP = float(2 ** 30)


def pullback_potential(p: LauritzenPair, closedness_tol: float = 1e-3
                       ) -> tuple[Field, float]:
    """Integrate w_i = d_i f^A phi_A to a potential on the base chart.

    Raises NotClosedError when the closedness residual exceeds the tolerance;
    for a pair realizing a statistical structure the residual equals the
    antisymmetric part of the pairing metric, which must be ~ 0.
    """
    df = differential(p)
    omega = np.einsum("...iA,...A->...i", df, p.phi.data)
    w = Field(p.chart, (p.chart.dim,), omega)
    residual = form_closedness(w)
    if residual > closedness_tol:
        raise NotClosedError(
            f"<df, phi> has closedness residual {residual:.3e} > "
            f"{closedness_tol:g}; the pair does not realize a statistical "
            "structure"
        )
    psi0 = potential_from_closed_form(w, p.chart.center_index())
    return psi0, residual


def normal_frame(p: LauritzenPair) -> Field:
    """Euclidean-orthonormal complement of the tangent planes of f, smoothly gauged.

    Raw per-point null spaces are aligned with their staircase predecessor by
    orthogonal Procrustes, removing arbitrary per-point rotations and sign
    flips so the frame can be finite-differenced.
    """
    chart = p.chart
    n, N = chart.dim, p.N
    r = N - n
    df = differential(p)  # [..., i, A]
    _, _, vh = np.linalg.svd(df)
    raw = vh[..., n:, :]  # [..., a, A], orthonormal rows spanning the complement
    if r == 0:
        return Field(chart, (0, N), raw)

    nu = raw.copy()

    def align(target: np.ndarray, cand: np.ndarray) -> np.ndarray:
        # rotate candidate rows to best match the target rows
        mats = target @ np.swapaxes(cand, -1, -2)
        u, _, vt = np.linalg.svd(mats)
        rot = u @ vt
        return rot @ cand

    done: set[int] = set()
    base = chart.center_index()
    for axis in range(n):
        def at(k: int, axis=axis):
            return tuple(
                slice(None) if a in done else (k if a == axis else base[a])
                for a in range(chart.dim)
            )
        for k in range(base[axis], chart.shape[axis] - 1):
            nu[at(k + 1)] = align(nu[at(k)], nu[at(k + 1)])
        for k in range(base[axis], 0, -1):
            nu[at(k - 1)] = align(nu[at(k)], nu[at(k - 1)])
        done.add(axis)
    return Field(chart, (r, N), nu)


@dataclass(frozen=True, eq=False)
class TubularChart:
    """Base chart times a normal box, with the tube map iota(x,t) = f + t^a nu_a."""

    base_chart: Chart
    epsilon: float
    normal_shape: tuple[int, ...]
    nu: Field
    points: np.ndarray          # tube grid, shape base + normal + (N,)
    min_separation: float
    min_adjacent: float

    @property
    def r(self) -> int:
        return self.nu.value_shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.base_chart.shape + self.normal_shape

    def t_coords(self, a: int) -> np.ndarray:
        return np.linspace(-self.epsilon, self.epsilon, self.normal_shape[a])


def build_tube(p: LauritzenPair, epsilon: float, normal_points: int = 5
               ) -> TubularChart:
    """Sample the tube grid and certify injectivity of the tube map.

    Certification: the global minimum pairwise separation of tube points must
    exceed half the minimum adjacent-point separation (a fold would create a
    closer alien pair).
    """
    if normal_points < 3 or normal_points % 2 == 0:
        raise StatembedError("normal axes need an odd point count >= 3")
    chart = p.chart
    N = p.N
    r = N - chart.dim
    nu = normal_frame(p)
    normal_shape = (normal_points,) * r
    ts = [np.linspace(-epsilon, epsilon, normal_points) for _ in range(r)]
    grids = np.meshgrid(*ts, indexing="ij") if r else []
    pts = np.broadcast_to(
        p.f.data.reshape(chart.shape + (1,) * r + (N,)),
        chart.shape + normal_shape + (N,),
    ).copy()
    for a in range(r):
        t_a = grids[a].reshape((1,) * chart.dim + normal_shape + (1,))
        nu_a = nu.data[..., a, :].reshape(chart.shape + (1,) * r + (N,))
        pts = pts + t_a * nu_a

    cloud = pts.reshape(-1, N)
    adjacent = []
    for axis in range(pts.ndim - 1):
        if pts.shape[axis] < 2:
            continue
        d = np.diff(pts, axis=axis)
        adjacent.append(float(np.sqrt((d ** 2).sum(axis=-1)).min()))
    min_adjacent = min(adjacent)
    tree = cKDTree(cloud)
    dist, _ = tree.query(cloud, k=2)
    min_sep = float(dist[:, 1].min())
    if min_sep <= 0.5 * min_adjacent:
        raise InjectivityError(
            f"tube self-intersects: min pairwise separation {min_sep:.3e} <= "
            f"half the adjacent-point separation {0.5 * min_adjacent:.3e}; "
            "shrink epsilon"
        )
    return TubularChart(chart, float(epsilon), normal_shape, nu, pts,
                        min_sep, min_adjacent)


@dataclass(frozen=True, eq=False)
class AmbientPotential:
    tube: TubularChart
    psi0: Field
    C: float
    psi_values: np.ndarray       # tube-shaped
    hessian: np.ndarray          # tube-shaped + (N, N), coordinate Hessian
    hessian_base: np.ndarray     # base-shaped + (N, N), the t = 0 slice
    min_eigenvalue: float
    gradient_jet_residual: float
    margin: float


def _tube_geometry(p: LauritzenPair, tube: TubularChart):
    """Base-chart derivatives needed by the chain rule, computed once."""
    chart = p.chart
    n, N = chart.dim, p.N
    r = tube.r
    df = differential(p)                       # [..., i, A]
    ddf = second_differential(p)               # [..., i, j, A]
    nu = tube.nu.data                          # [..., a, A]
    dnu = np.stack([partial_data(nu, chart, i) for i in range(n)],
                   axis=chart.dim)             # [..., i, a, A]
    ddnu = np.stack([partial_data(dnu, chart, i) for i in range(n)],
                    axis=chart.dim)            # [..., i, j, a, A]
    w = np.einsum("...A,...aA->...a", p.phi.data, nu)          # phi . nu_a
    dw = np.stack([partial_data(w, chart, i) for i in range(n)],
                  axis=chart.dim)
    ddw = np.stack([partial_data(dw, chart, i) for i in range(n)],
                   axis=chart.dim)
    return df, ddf, nu, dnu, ddnu, w, dw, ddw


def extend_potential(p: LauritzenPair, psi0: Field, epsilon: float,
                     margin: float | None = None, normal_points: int = 5,
                     c_init: float = 1.0, c_cap: float = _C_CAP
                     ) -> AmbientPotential:
    """Extend psi0 off the base with the required 1-jet, then convexify.

    C doubles from 1 until the coordinate Hessian (chain rule through the
    Jacobian of the tube map) has minimum eigenvalue above ``margin`` on the
    whole tube; default margin is 5% of the minimum pairing-metric eigenvalue.
    """
    chart = p.chart
    n, N = chart.dim, p.N
    r = N - n
    tube = build_tube(p, epsilon, normal_points)
    df, ddf, nu, dnu, ddnu, w, dw, ddw = _tube_geometry(p, tube)

    dpsi0 = np.stack([partial_data(psi0.data, chart, i) for i in range(n)],
                     axis=chart.dim)
    ddpsi0 = np.stack([partial_data(dpsi0, chart, i) for i in range(n)],
                      axis=chart.dim)

    if margin is None:
        pairing = np.einsum("...iA,...jA->...ij",
                            df, np.stack([partial_data(p.phi.data, chart, i)
                                          for i in range(n)], axis=chart.dim))
        pairing = 0.5 * (pairing + np.swapaxes(pairing, -1, -2))
        margin = 0.05 * float(np.linalg.eigvalsh(pairing)[..., 0].min())

    tshape = tube.normal_shape
    ts = [tube.t_coords(a) for a in range(r)]
    tgrids = np.meshgrid(*ts, indexing="ij") if r else []

    # tube-shaped scalars per normal coordinate
    t_stack = (np.stack([g.reshape((1,) * n + tshape) for g in tgrids], axis=-1)
               if r else np.zeros((1,) * n + tshape + (0,)))
    t_full = np.broadcast_to(t_stack, chart.shape + tshape + (r,))

    # Jacobian of the tube map: J[..., A, col]
    J = np.zeros(chart.shape + tshape + (N, N))
    df_cols = np.swapaxes(df, -1, -2)          # [..., A, i]
    dnu_cols = np.moveaxis(dnu, chart.dim, -1)  # [..., a, A, i]
    J[..., :, :n] = (
        df_cols.reshape(chart.shape + (1,) * r + (N, n))
        + np.einsum("...a,...aAi->...Ai",
                    t_full,
                    dnu_cols.reshape(chart.shape + (1,) * r + (r, N, n)))
    )
    if r:
        nu_cols = np.swapaxes(nu, -1, -2)      # [..., A, a]
        J[..., :, n:] = nu_cols.reshape(chart.shape + (1,) * r + (N, r))

    # gradient of psi in tube coordinates, C-independent part
    grad = np.zeros(chart.shape + tshape + (N,))
    grad[..., :n] = (
        dpsi0.reshape(chart.shape + (1,) * r + (n,))
        + np.einsum("...a,...ia->...i",
                    t_full, dw.reshape(chart.shape + (1,) * r + (n, r)))
    )
    if r:
        grad[..., n:] = w.reshape(chart.shape + (1,) * r + (r,))

    # tube-coordinate Hessian of psi, C-independent part
    H0 = np.zeros(chart.shape + tshape + (N, N))
    H0[..., :n, :n] = (
        ddpsi0.reshape(chart.shape + (1,) * r + (n, n))
        + np.einsum("...a,...ija->...ij",
                    t_full, ddw.reshape(chart.shape + (1,) * r + (n, n, r)))
    )
    if r:
        H0[..., :n, n:] = dw.reshape(chart.shape + (1,) * r + (n, r))
        H0[..., n:, :n] = np.swapaxes(
            dw.reshape(chart.shape + (1,) * r + (n, r)), -1, -2)

    # second derivatives of the tube map: P[..., A, col, col]
    P = np.zeros(chart.shape + tshape + (N, N, N))
    ddf_cols = np.moveaxis(ddf, -1, -3)        # [..., A, i, j]
    ddnu_cols = np.moveaxis(ddnu, -1, -4)      # [..., A, i, j, a]
    P[..., :, :n, :n] = (
        ddf_cols.reshape(chart.shape + (1,) * r + (N, n, n))
        + np.einsum("...a,...Aija->...Aij",
                    t_full,
                    ddnu_cols.reshape(chart.shape + (1,) * r + (N, n, n, r)))
    )
    if r:
        dnu_swap = np.moveaxis(dnu, chart.dim, -1)  # [..., a, A, i]
        blk = np.swapaxes(dnu_swap, -3, -2)         # [..., A, a, i]
        blk = blk.reshape(chart.shape + (1,) * r + (N, r, n))
        P[..., :, n:, :n] = blk
        P[..., :, :n, n:] = np.swapaxes(blk, -1, -2)

    JT = np.swapaxes(J, -1, -2)
    psi_vals_0 = (
        psi0.data.reshape(chart.shape + (1,) * r)
        + np.einsum("...a,...a->...",
                    t_full, w.reshape(chart.shape + (1,) * r + (r,)))
    )
    t_sq = (t_full ** 2).sum(axis=-1)

    c_block = np.zeros((N, N))
    for a in range(r):
        c_block[n + a, n + a] = 2.0

    base_slice = (slice(None),) * n + tuple(m // 2 for m in tshape)
    C = float(c_init)
    while True:
        grad_c = grad.copy()
        if r:
            grad_c[..., n:] += 2.0 * C * t_full
        v = np.linalg.solve(JT, grad_c[..., None])[..., 0]  # ambient gradient
        K = H0 + C * c_block - np.einsum("...A,...Aab->...ab", v, P)
        inner = np.linalg.solve(JT, K)
        H_xi = np.swapaxes(np.linalg.solve(JT, np.swapaxes(inner, -1, -2)),
                           -1, -2)
        H_xi = 0.5 * (H_xi + np.swapaxes(H_xi, -1, -2))
        min_eig = float(np.linalg.eigvalsh(H_xi)[..., 0].min())
        if min_eig > margin or r == 0:
            break
        C *= 2.0
        if C > c_cap:
            raise StatembedError(
                f"convexification cap reached (C > {c_cap:g}); the tube is too "
                "thick for this curvature, shrink epsilon"
            )

    grad_jet = float(np.abs(v[base_slice] - p.phi.data).max())
    psi_values = psi_vals_0 + C * t_sq
    return AmbientPotential(
        tube=tube,
        psi0=psi0,
        C=C,
        psi_values=psi_values,
        hessian=H_xi,
        hessian_base=H_xi[base_slice],
        min_eigenvalue=min_eig,
        gradient_jet_residual=grad_jet,
        margin=float(margin),
    )


@dataclass(frozen=True)
class InducedReport:
    g_residual: float
    gamma_residual: float


def induced_structure(a: AmbientPotential, p: LauritzenPair,
                      reference: StatisticalStructure | None = None
                      ) -> tuple[StatisticalStructure, InducedReport | None]:
    """Pull the ambient Hessian metric back to the base and compare.

    g~_ij = G_AB d_i f^A d_j f^B and Gamma~_ijk = G_AB d_i d_j f^A d_k f^B with
    G the coordinate Hessian of the extended potential on the base slice.
    """
    chart = p.chart
    n = chart.dim
    df = differential(p)
    ddf = second_differential(p)
    G0 = a.hessian_base
    g_ind = np.einsum("...iA,...AB,...jB->...ij", df, G0, df)
    g_ind = 0.5 * (g_ind + np.swapaxes(g_ind, -1, -2))
    gamma_low = np.einsum("...ijA,...AB,...kB->...ijk", ddf, G0, df)
    ginv = np.linalg.inv(g_ind)
    gamma_up = np.einsum("...kl,...ijl->...ijk", ginv, gamma_low)
    induced = StatisticalStructure(chart, Field(chart, (n, n), g_ind),
                                   Field(chart, (n, n, n), gamma_up))
    if reference is None:
        return induced, None
    report = InducedReport(
        g_residual=float(np.abs(g_ind - reference.g.data).max()),
        gamma_residual=float(
            np.abs(gamma_low - lowered_gamma(reference)).max()
        ),
    )
    return induced, report
