"""Parallel frames of the flat bundle, the theta forms, and embedding by integration.

Columnwise transport solves d_i e + A_i e = 0 with the classical 4-stage
one-step method (midpoint values of A cubic-interpolated), sweeping axis 0
along the line through the base point, then axis 1 across every such line, and
so on.  With dually-parallel frames normalized so G(e_A, e*_B) = delta at the
base, theta(X) = frame coordinates of (X, 0) is closed whenever the GCR
residuals vanish, and staircase integration of theta and theta* yields the
component maps of a realizing pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameConditionError, IntegrabilityError
from .gcr import (
    BundleConnection,
    ExtrinsicData,
    GcrReport,
    bundle_connection,
    bundle_curvature,
    gcr_residuals,
)
from .grid import (
    Chart,
    Field,
    closedness_residual,
    midpoint_matrix,
    potential_from_closed_form,
)
from .lauritzen import LauritzenPair, LauritzenReport, verify_lauritzen
from .structures import StatisticalStructure

_COND_LIMIT = 1e8


def _one_step_propagators(A_axis: np.ndarray, chart: Chart, axis: int) -> np.ndarray:
    """RK4 propagators S_k for e' = -A e over every segment of ``axis``.

    ``A_axis`` is the axis component of the connection form, grid + (m, m);
    the result has the transported axis shortened by one: S[k] maps frame
    values at node k to node k+1.
    """
    h = chart.spacing[axis]
    mdim = A_axis.shape[-1]
    a0 = np.delete(A_axis, -1, axis=axis)
    a1 = np.delete(A_axis, 0, axis=axis)
    interp = midpoint_matrix(chart.shape[axis])
    am = np.moveaxis(
        np.tensordot(interp, np.moveaxis(A_axis, axis, 0), axes=(1, 0)), 0, axis
    )
    eye = np.broadcast_to(np.eye(mdim), a0.shape)
    k1 = -a0
    k2 = -am @ (eye + 0.5 * h * k1)
    k3 = -am @ (eye + 0.5 * h * k2)
    k4 = -a1 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _transport_sweep(propagators: list[np.ndarray], chart: Chart,
                     base: tuple[int, ...], base_frame: np.ndarray,
                     axis_order: tuple[int, ...]) -> np.ndarray:
    """Fill the grid with transported frames along the canonical staircase sweep."""
    mdim = base_frame.shape[-1]
    E = np.zeros(chart.shape + (mdim, mdim))
    E[base] = base_frame
    done: set[int] = set()
    for axis in axis_order:
        def at(k: int, axis=axis):
            return tuple(
                slice(None) if a in done else (k if a == axis else base[a])
                for a in range(chart.dim)
            )
        S = propagators[axis]
        for k in range(base[axis], chart.shape[axis] - 1):
            E[at(k + 1)] = S[at(k)] @ E[at(k)]
        for k in range(base[axis], 0, -1):
            E[at(k - 1)] = np.linalg.solve(S[at(k - 1)], E[at(k)])
        done.add(axis)
    return E


def plaquette_holonomy(conn: BundleConnection,
                       propagators: list[np.ndarray] | None = None) -> float:
    """Max deviation from the identity of transport around every unit 2-face."""
    chart = conn.chart
    n = chart.dim
    if n < 2:
        return 0.0
    if propagators is None:
        propagators = [
            _one_step_propagators(conn.A[..., a, :, :], chart, a)
            for a in range(n)
        ]
    eye = np.eye(conn.m)
    worst = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            Sa = propagators[a]
            Sb = propagators[b]
            sa0 = np.delete(Sa, -1, axis=b)       # S_a at x (cells)
            sb1 = np.delete(Sb, -1, axis=a)
            sb_at_xa = np.delete(Sb, 0, axis=a)   # S_b at x + e_a
            sa_at_xb = np.delete(Sa, 0, axis=b)   # S_a at x + e_b
            up = sb_at_xa @ sa0                   # forward a then b
            around = sa_at_xb @ sb1               # forward b then a
            hol = np.linalg.solve(around, up)
            worst = max(worst, float(np.abs(hol - eye).max()))
    return worst


@dataclass(frozen=True, eq=False)
class FrameField:
    """Dually-parallel frame pair: columns of E are e_A in the product frame."""

    chart: Chart
    E: np.ndarray
    E_star: np.ndarray
    base: tuple[int, ...]
    base_frame: np.ndarray
    condition_max: float
    pairing_residual: float
    holonomy_max: float


def dual_base_frame(base_frame: np.ndarray, fiber_metric_at_base: np.ndarray
                    ) -> np.ndarray:
    """G-dual basis at the base point: G(e_A, e*_B) = delta_AB there."""
    m = base_frame.shape[-1]
    return np.linalg.solve(base_frame.T @ fiber_metric_at_base, np.eye(m))


def parallel_frame(conn: BundleConnection, base: tuple[int, ...] | None = None,
                   base_frame: np.ndarray | None = None,
                   integrability_tol: float | None = None,
                   axis_order: tuple[int, ...] | None = None) -> FrameField:
    """Transport a frame and its G-dual from the base across the chart.

    The dual frame starts from :func:`dual_base_frame`, so G(e_A, e*_B) = delta
    at the base; its constancy across the chart is verified and reported, not
    imposed.  When ``integrability_tol`` is given, the bundle curvature is
    checked first and transport refuses to run above the gate.
    """
    chart = conn.chart
    m = conn.m
    base = tuple(base) if base is not None else chart.center_index()
    if base_frame is None:
        base_frame = np.eye(m)
    base_frame = np.asarray(base_frame, dtype=float)
    if abs(np.linalg.det(base_frame)) < 1e-300:
        raise FrameConditionError("base frame is singular")
    if integrability_tol is not None:
        _, fmax = bundle_curvature(conn)
        if fmax > integrability_tol:
            raise IntegrabilityError(
                f"bundle curvature {fmax:.3e} above integrability gate "
                f"{integrability_tol:g}; transport would not be path-independent"
            )
    order = tuple(axis_order) if axis_order is not None else tuple(range(chart.dim))

    props = [_one_step_propagators(conn.A[..., a, :, :], chart, a)
             for a in range(chart.dim)]
    props_star = [_one_step_propagators(conn.A_star[..., a, :, :], chart, a)
                  for a in range(chart.dim)]
    E = _transport_sweep(props, chart, base, base_frame, order)
    dual0 = dual_base_frame(base_frame, conn.fiber_metric[base])
    E_star = _transport_sweep(props_star, chart, base, dual0, order)

    cond = float(np.linalg.cond(E).max())
    if not np.isfinite(cond):
        raise FrameConditionError("transported frame became singular")
    pairing = np.einsum("...KA,...KL,...LB->...AB", E, conn.fiber_metric, E_star)
    pairing_residual = float(np.abs(pairing - np.eye(m)).max())
    holonomy = plaquette_holonomy(conn, props)
    return FrameField(chart, E, E_star, base, base_frame, cond,
                      pairing_residual, holonomy)


@dataclass(frozen=True)
class ThetaReport:
    closedness: float
    closedness_star: float
    condition_max: float


def theta_form(frames: FrameField) -> tuple[Field, Field, ThetaReport]:
    """Coordinates of (d/dx^i, 0) in the parallel frames, as (n+r, n)-valued forms."""
    chart = frames.chart
    n = chart.dim
    m = frames.E.shape[-1]
    cond = float(np.linalg.cond(frames.E).max())
    if cond > _COND_LIMIT:
        raise FrameConditionError(
            f"frame condition number {cond:.3e} exceeds {_COND_LIMIT:g}"
        )
    proj = np.zeros((m, n))
    proj[:n, :n] = np.eye(n)
    theta = np.linalg.solve(frames.E, np.broadcast_to(proj, frames.E.shape[:-2]
                                                      + (m, n)))
    theta_star = np.linalg.solve(frames.E_star,
                                 np.broadcast_to(proj, frames.E.shape[:-2]
                                                 + (m, n)))
    th = Field(chart, (m, n), theta)
    th_star = Field(chart, (m, n), theta_star)
    report = ThetaReport(
        closedness=closedness_residual(th),
        closedness_star=closedness_residual(th_star),
        condition_max=cond,
    )
    return th, th_star, report


@dataclass(frozen=True, eq=False)
class BonnetReport:
    gcr: GcrReport
    bundle_curvature_max: float
    holonomy_max: float
    pairing_residual: float
    theta: ThetaReport
    path_independence: float
    verify: LauritzenReport


@dataclass(frozen=True, eq=False)
class BonnetResult:
    pair: LauritzenPair
    frames: FrameField
    theta: Field
    theta_star: Field
    report: BonnetReport


def bonnet_embed(s: StatisticalStructure, e: ExtrinsicData,
                 base: tuple[int, ...] | None = None,
                 base_frame: np.ndarray | None = None,
                 integrability_tol: float = 1e-3) -> BonnetResult:
    """Construct a realizing pair (f, phi) from GCR-compatible extrinsic data.

    Aborts when the GCR residual max-norm exceeds ``integrability_tol``
    (transporting a curved connection silently produces garbage).  The
    verification report is attached; residuals above any caller threshold are
    the caller's decision, not an exception.
    """
    gcr = gcr_residuals(s, e)
    if gcr.max > integrability_tol:
        raise IntegrabilityError(
            f"GCR residual {gcr.max:.3e} above integrability gate "
            f"{integrability_tol:g}"
        )
    conn = bundle_connection(s, e)
    _, fmax = bundle_curvature(conn)
    base = tuple(base) if base is not None else s.chart.center_index()
    frames = parallel_frame(conn, base, base_frame)
    theta, theta_star, theta_report = theta_form(frames)

    f = potential_from_closed_form(theta, base)
    f_alt = potential_from_closed_form(theta, base,
                                       axis_order=tuple(reversed(range(s.n))))
    path_independence = float(np.abs(f.data - f_alt.data).max())
    phi = potential_from_closed_form(theta_star, base)

    pair = LauritzenPair(s.chart, conn.m, f, phi)
    verify = verify_lauritzen(pair, s)
    report = BonnetReport(
        gcr=gcr,
        bundle_curvature_max=fmax,
        holonomy_max=frames.holonomy_max,
        pairing_residual=frames.pairing_residual,
        theta=theta_report,
        path_independence=path_independence,
        verify=verify,
    )
    return BonnetResult(pair, frames, theta, theta_star, report)
