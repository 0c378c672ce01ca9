"""Built-in analytic manifolds used as oracles.

Every closed-form constant below was derived by the symbolic script
``tools/derive_fixture_values.py`` kept in the repository; the test suite
re-derives the key ones with sympy.

    euclidean(n)     g = delta, Gamma = 0, zero extrinsic data, identity pair
    exp_potential(n) psi = sum_i exp(xi^i): g = diag(exp(xi^i)), eta = exp(xi),
                     conjugate psi* = sum_i (eta log eta - eta)
    sphere2          g = diag(1, sin^2 th), Levi-Civita connection
                     (Gamma^th_phph = -sin th cos th, Gamma^ph_thph = cot th),
                     codimension 1 with h = h* = g, tau = 0, R_thphthph = sin^2 th
    paraboloid(n)    graph immersion (x, |x|^2/2) with constant transverse field:
                     Gamma = 0, g = delta, S = 0, tau = 0
    cone_codim2      circle at height 1 on the cone through the origin,
                     position field transverse: g = 1, Gamma = 0, k = 1, mu = 0
    gaussian1d       log-partition of the one-dimensional Gaussian family in
                     natural coordinates (th1, th2), th2 < 0:
                     psi = -th1^2/(4 th2) - log(-2 th2)/2, g = Hessian(psi),
                     conjugate psi* = -(1 + log(e2 - e1^2))/2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .affine import AffineImmersion
from .errors import StatembedError
from .gcr import ExtrinsicData
from .grid import Chart, Field
from .hessian import HessePotential
from .lauritzen import LauritzenPair
from .structures import StatisticalStructure


@dataclass(frozen=True, eq=False)
class Fixture:
    """An analytic manifold with every field the tests need, sampled on a chart."""

    name: str
    chart: Chart
    structure: StatisticalStructure
    extrinsic: ExtrinsicData | None = None
    potential: HessePotential | None = None
    pair: LauritzenPair | None = None
    immersion: AffineImmersion | None = None
    conjugate_potential: Callable[[Chart], HessePotential] | None = None
    expected: dict = dc_field(default_factory=dict)


DEFAULT_RANGES: dict[str, tuple] = {
    "euclidean": ((0.0, 1.0),),
    "exp_potential": ((-0.25, 0.25),),
    "sphere2": ((math.pi / 3, 2 * math.pi / 3), (0.0, math.pi / 2)),
    "paraboloid": ((-0.5, 0.5),),
    "cone_codim2": ((0.0, math.pi / 2),),
    "gaussian1d": ((-0.4, 0.4), (-1.2, -0.9)),
}


def _sym_metric(chart: Chart, entries: dict[tuple[int, int], np.ndarray]) -> Field:
    """Assemble an exactly-symmetric metric field from upper-triangle entries."""
    n = chart.dim
    data = np.zeros(chart.shape + (n, n))
    for (i, j), val in entries.items():
        data[..., i, j] = val
        data[..., j, i] = val
    return Field(chart, (n, n), data)


def _euclidean(chart: Chart) -> Fixture:
    n = chart.dim
    pts = chart.points()
    g = _sym_metric(chart, {(i, i): np.ones(chart.shape) for i in range(n)})
    gamma = Field.zeros(chart, (n, n, n))
    structure = StatisticalStructure(chart, g, gamma)
    extr = ExtrinsicData(
        r=1,
        h=Field.zeros(chart, (1, n, n)),
        h_star=Field.zeros(chart, (1, n, n)),
        tau=Field.zeros(chart, (1, 1, n)),
    )
    pair = LauritzenPair(chart, n, Field(chart, (n,), pts.copy()),
                         Field(chart, (n,), pts.copy()))
    psi = Field(chart, (), 0.5 * np.einsum("...i,...i->...", pts, pts))
    pot = HessePotential(
        chart, psi,
        psi_fn=lambda q: 0.5 * np.einsum("...i,...i->...", q, q),
        grad_fn=lambda q: np.array(q, copy=True),
        hess_fn=lambda q: np.broadcast_to(np.eye(n), q.shape[:-1] + (n, n)).copy(),
    )
    return Fixture("euclidean", chart, structure, extrinsic=extr, potential=pot,
                   pair=pair, expected={"g": "identity", "gamma": 0.0})


def _exp_potential(chart: Chart) -> Fixture:
    n = chart.dim
    pts = chart.points()
    expx = np.exp(pts)
    g = _sym_metric(chart, {(i, i): expx[..., i] for i in range(n)})
    gamma = Field.zeros(chart, (n, n, n))
    structure = StatisticalStructure(chart, g, gamma)
    pair = LauritzenPair(chart, n, Field(chart, (n,), pts.copy()),
                         Field(chart, (n,), expx))
    psi = Field(chart, (), expx.sum(axis=-1))

    def hess_fn(q):
        e = np.exp(q)
        out = np.zeros(q.shape[:-1] + (n, n))
        for i in range(n):
            out[..., i, i] = e[..., i]
        return out

    pot = HessePotential(
        chart, psi,
        psi_fn=lambda q: np.exp(q).sum(axis=-1),
        grad_fn=lambda q: np.exp(q),
        hess_fn=hess_fn,
    )

    def conjugate(eta_chart: Chart) -> HessePotential:
        def star(q):
            return (q * np.log(q) - q).sum(axis=-1)

        def star_grad(q):
            return np.log(q)

        def star_hess(q):
            out = np.zeros(q.shape[:-1] + (n, n))
            for i in range(n):
                out[..., i, i] = 1.0 / q[..., i]
            return out

        e_pts = eta_chart.points()
        return HessePotential(eta_chart, Field(eta_chart, (), star(e_pts)),
                              psi_fn=star, grad_fn=star_grad, hess_fn=star_hess)

    return Fixture("exp_potential", chart, structure, potential=pot, pair=pair,
                   conjugate_potential=conjugate,
                   expected={"eta": "exp(xi)", "psi_star": "eta log eta - eta"})


def _sphere2(chart: Chart) -> Fixture:
    if chart.dim != 2:
        raise StatembedError("sphere2 is two-dimensional")
    pts = chart.points()
    th = pts[..., 0]
    sin, cos = np.sin(th), np.cos(th)
    g = _sym_metric(chart, {(0, 0): np.ones(chart.shape), (1, 1): sin ** 2})
    gamma = np.zeros(chart.shape + (2, 2, 2))
    gamma[..., 1, 1, 0] = -sin * cos          # Gamma^th_phph
    cot = cos / sin
    gamma[..., 0, 1, 1] = cot                  # Gamma^ph_thph
    gamma[..., 1, 0, 1] = cot                  # Gamma^ph_phth
    structure = StatisticalStructure(chart, g, Field(chart, (2, 2, 2), gamma))
    h = np.zeros(chart.shape + (1, 2, 2))
    h[..., 0, :, :] = g.data
    extr = ExtrinsicData(
        r=1,
        h=Field(chart, (1, 2, 2), h),
        h_star=Field(chart, (1, 2, 2), h.copy()),
        tau=Field.zeros(chart, (1, 1, 2)),
    )
    ph = pts[..., 1]
    emb = np.stack([sin * np.cos(ph), sin * np.sin(ph), cos], axis=-1)
    f_field = Field(chart, (3,), emb)
    # outward transverse field: the decomposition then returns the round metric
    immersion = AffineImmersion(chart, codim=1, f=f_field,
                                xi=Field(chart, (3,), emb.copy()))
    pair = LauritzenPair(chart, 3, f_field, Field(chart, (3,), emb.copy()))
    return Fixture(
        "sphere2", chart, structure, extrinsic=extr, immersion=immersion,
        pair=pair,
        expected={"R_thphthph": "sin^2(th)", "conormal": "+f", "shape_op": "identity"},
    )


def _paraboloid(chart: Chart) -> Fixture:
    n = chart.dim
    pts = chart.points()
    f = np.concatenate(
        [pts, 0.5 * np.einsum("...i,...i->...", pts, pts)[..., None]], axis=-1
    )
    xi = np.zeros(chart.shape + (n + 1,))
    xi[..., n] = -1.0
    g = _sym_metric(chart, {(i, i): np.ones(chart.shape) for i in range(n)})
    gamma = Field.zeros(chart, (n, n, n))
    structure = StatisticalStructure(chart, g, gamma)
    immersion = AffineImmersion(chart, codim=1, f=Field(chart, (n + 1,), f),
                                xi=Field(chart, (n + 1,), xi))
    phi = np.concatenate([pts, -np.ones(chart.shape + (1,))], axis=-1)
    pair = LauritzenPair(chart, n + 1, Field(chart, (n + 1,), f),
                         Field(chart, (n + 1,), phi))
    return Fixture("paraboloid", chart, structure, immersion=immersion, pair=pair,
                   expected={"g": "identity", "S": 0.0, "tau": 0.0,
                             "conormal": "(x, -1)"})


def _cone_codim2(chart: Chart) -> Fixture:
    if chart.dim != 1:
        raise StatembedError("cone_codim2 is one-dimensional")
    t = chart.points()[..., 0]
    f = np.stack([np.cos(t), np.sin(t), np.ones_like(t)], axis=-1)
    xi = np.zeros(chart.shape + (3,))
    xi[..., 2] = -1.0
    g = _sym_metric(chart, {(0, 0): np.ones(chart.shape)})
    structure = StatisticalStructure(chart, g, Field.zeros(chart, (1, 1, 1)))
    immersion = AffineImmersion(chart, codim=2, f=Field(chart, (3,), f),
                                xi=Field(chart, (3,), xi))
    phi = np.stack([np.cos(t), np.sin(t), -np.ones_like(t)], axis=-1)
    pair = LauritzenPair(chart, 3, Field(chart, (3,), f), Field(chart, (3,), phi))
    return Fixture("cone_codim2", chart, structure, immersion=immersion, pair=pair,
                   expected={"g": 1.0, "k": 1.0, "mu": 0.0, "tau": 0.0})


def _gaussian1d(chart: Chart) -> Fixture:
    if chart.dim != 2:
        raise StatembedError("gaussian1d has a two-dimensional natural chart")
    lo, hi = chart.ranges[1]
    if not hi < 0.0:
        raise StatembedError("gaussian1d needs th2 < 0 on the whole chart")

    def psi_fn(q):
        t1, t2 = q[..., 0], q[..., 1]
        return -t1 ** 2 / (4.0 * t2) - 0.5 * np.log(-2.0 * t2)

    def grad_fn(q):
        t1, t2 = q[..., 0], q[..., 1]
        return np.stack(
            [-t1 / (2.0 * t2), t1 ** 2 / (4.0 * t2 ** 2) - 1.0 / (2.0 * t2)],
            axis=-1,
        )

    def hess_fn(q):
        t1, t2 = q[..., 0], q[..., 1]
        out = np.empty(q.shape[:-1] + (2, 2))
        out[..., 0, 0] = -1.0 / (2.0 * t2)
        out[..., 0, 1] = out[..., 1, 0] = t1 / (2.0 * t2 ** 2)
        out[..., 1, 1] = -t1 ** 2 / (2.0 * t2 ** 3) + 1.0 / (2.0 * t2 ** 2)
        return out

    pts = chart.points()
    hess = hess_fn(pts)
    g = _sym_metric(chart, {(0, 0): hess[..., 0, 0], (0, 1): hess[..., 0, 1],
                            (1, 1): hess[..., 1, 1]})
    gamma = Field.zeros(chart, (2, 2, 2))
    structure = StatisticalStructure(chart, g, gamma)
    psi = Field(chart, (), psi_fn(pts))
    pot = HessePotential(chart, psi, psi_fn=psi_fn, grad_fn=grad_fn, hess_fn=hess_fn)
    eta = grad_fn(pts)
    pair = LauritzenPair(chart, 2, Field(chart, (2,), pts.copy()),
                         Field(chart, (2,), eta))

    def conjugate(eta_chart: Chart) -> HessePotential:
        def star(q):
            return -0.5 * (1.0 + np.log(q[..., 1] - q[..., 0] ** 2))

        def star_grad(q):
            var = q[..., 1] - q[..., 0] ** 2
            return np.stack([q[..., 0] / var, -0.5 / var], axis=-1)

        def star_hess(q):
            e1, var = q[..., 0], q[..., 1] - q[..., 0] ** 2
            out = np.empty(q.shape[:-1] + (2, 2))
            out[..., 0, 0] = 1.0 / var + 2.0 * e1 ** 2 / var ** 2
            out[..., 0, 1] = out[..., 1, 0] = -e1 / var ** 2
            out[..., 1, 1] = 0.5 / var ** 2
            return out

        e_pts = eta_chart.points()
        return HessePotential(eta_chart, Field(eta_chart, (), star(e_pts)),
                              psi_fn=star, grad_fn=star_grad, hess_fn=star_hess)

    return Fixture("gaussian1d", chart, structure, potential=pot, pair=pair,
                   conjugate_potential=conjugate,
                   expected={"psi_star": "-(1 + log(e2 - e1^2))/2"})


_BUILDERS = {
    "euclidean": _euclidean,
    "exp_potential": _exp_potential,
    "sphere2": _sphere2,
    "paraboloid": _paraboloid,
    "cone_codim2": _cone_codim2,
    "gaussian1d": _gaussian1d,
}

FIXTURE_NAMES = tuple(sorted(_BUILDERS))


def fixture(name: str, dim: int = 2, shape: tuple[int, ...] | int | None = None,
            ranges: tuple | None = None) -> Fixture:
    """Build a named fixture; ``shape``/``ranges`` override the default chart.

    Accepts spec-style names with an inline dimension, e.g. ``euclidean(3)``.
    """
    name = name.strip()
    if "(" in name and name.endswith(")"):
        base, arg = name[:-1].split("(", 1)
        name, dim = base.strip(), int(arg)
    if name not in _BUILDERS:
        raise StatembedError(
            f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}"
        )
    default = DEFAULT_RANGES[name]
    if name in ("euclidean", "exp_potential", "paraboloid"):
        chart_ranges = ranges if ranges is not None else default * dim
    else:
        chart_ranges = ranges if ranges is not None else default
    ndim = len(chart_ranges)
    if shape is None:
        shape = (33,) * ndim
    elif isinstance(shape, int):
        shape = (shape,) * ndim
    return _BUILDERS[name](Chart(tuple(chart_ranges), tuple(shape)))
