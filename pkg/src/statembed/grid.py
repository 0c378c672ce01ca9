"""Rectangular charts, tensor fields on them, finite differences, path integration.

Derivatives use the 5-point 4th-order centered stencil in the interior and
4th-order one-sided closures on the two layers nearest each boundary, so every
derivative is exact on polynomials of degree <= 4 along the axis.  Line
integrals use a Simpson rule per unit lattice step with the midpoint value
reconstructed by cubic interpolation, which is exact on cubic integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ChartError, NonFiniteError, PathError

MIN_AXIS_POINTS = 5


@dataclass(frozen=True, eq=True)
class Chart:
    """A rectangular coordinate grid: closed intervals with uniform spacing."""

    ranges: tuple[tuple[float, float], ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        shape = tuple(int(m) for m in self.shape)
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "shape", shape)
        if len(ranges) != len(shape) or len(shape) == 0:
            raise ChartError("ranges and shape must have equal, positive length")
        for (lo, hi), m in zip(ranges, shape):
            if m < MIN_AXIS_POINTS:
                raise ChartError(
                    f"axis needs >= {MIN_AXIS_POINTS} points for 4th-order stencils, got {m}"
                )
            if not hi > lo:
                raise ChartError(f"empty axis range [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (m - 1) for (lo, hi), m in zip(self.ranges, self.shape)
        )

    @property
    def npoints(self) -> int:
        return int(np.prod(self.shape))

    @property
    def diameter(self) -> float:
        return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.ranges))

    def axis_coords(self, axis: int) -> np.ndarray:
        lo, hi = self.ranges[axis]
        return np.linspace(lo, hi, self.shape[axis])

    def points(self) -> np.ndarray:
        """All grid points, shape ``shape + (dim,)``."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def center_index(self) -> tuple[int, ...]:
        return tuple(m // 2 for m in self.shape)

    def contains_index(self, idx: Sequence[int]) -> bool:
        return len(idx) == self.dim and all(
            0 <= k < m for k, m in zip(idx, self.shape)
        )

    def point_at(self, idx: Sequence[int]) -> np.ndarray:
        return np.array(
            [self.axis_coords(a)[idx[a]] for a in range(self.dim)]
        )

    def with_shape(self, shape: Sequence[int]) -> "Chart":
        return Chart(self.ranges, tuple(shape))


@dataclass(frozen=True, eq=False)
class Field:
    """Real components at every grid point of a chart.

    ``data`` has shape ``chart.shape + value_shape``; a scalar field has
    ``value_shape == ()``.  All entries must be finite.
    """

    chart: Chart
    value_shape: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        value_shape = tuple(int(s) for s in self.value_shape)
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "value_shape", value_shape)
        object.__setattr__(self, "data", data)
        expected = self.chart.shape + value_shape
        if data.shape != expected:
            raise ChartError(f"field data shape {data.shape} != {expected}")
        if not np.isfinite(data).all():
            raise NonFiniteError("field contains NaN or Inf entries")

    @classmethod
    def sample(cls, chart: Chart, fn: Callable[[np.ndarray], np.ndarray],
               value_shape: tuple[int, ...] = ()) -> "Field":
        """Sample ``fn(points)`` on the grid; fn maps ``(..., dim) -> (..., *value_shape)``."""
        data = np.asarray(fn(chart.points()), dtype=np.float64)
        return cls(chart, value_shape, data)

    @classmethod
    def zeros(cls, chart: Chart, value_shape: tuple[int, ...] = ()) -> "Field":
        return cls(chart, value_shape, np.zeros(chart.shape + value_shape))

    @property
    def grid_ndim(self) -> int:
        return self.chart.dim


@lru_cache(maxsize=None)
def diff_matrix(m: int, h: float) -> np.ndarray:
    """Dense 1-D differentiation matrix: centered 4th-order interior stencil,
    one-sided boundary closures exact on degree <= 4.

    Axes with >= 6 points get 6-point closures (one extra order at the edge);
    composing two first derivatives then stays at the interior error level
    instead of losing an order to the boundary rows.  A 5-point axis falls
    back to the minimal-width closures.
    """
    if m < MIN_AXIS_POINTS:
        raise ChartError(f"need >= {MIN_AXIS_POINTS} points, got {m}")
    d = np.zeros((m, m))
    if m >= 6:
        d[0, :6] = np.array((-137.0, 300.0, -300.0, 200.0, -75.0, 12.0)) / 60.0
        d[1, :6] = np.array((-12.0, -65.0, 120.0, -60.0, 20.0, -3.0)) / 60.0
        d[m - 2, m - 6:] = -d[1, :6][::-1]
        d[m - 1, m - 6:] = -d[0, :6][::-1]
    else:
        d[0, :5] = np.array((-25.0, 48.0, -36.0, 16.0, -3.0)) / 12.0
        d[1, :5] = np.array((-3.0, -10.0, 18.0, -6.0, 1.0)) / 12.0
        d[m - 2, m - 5:] = -d[1, :5][::-1]
        d[m - 1, m - 5:] = -d[0, :5][::-1]
    for k in range(2, m - 2):
        d[k, k - 2:k + 3] = np.array((1.0, -8.0, 0.0, 8.0, -1.0)) / 12.0
    return d / h


@lru_cache(maxsize=None)
def midpoint_matrix(m: int) -> np.ndarray:
    """Cubic interpolation of segment midpoints from nodal values, (m-1) x m."""
    w = np.zeros((m - 1, m))
    w[0, :4] = (5.0, 15.0, -5.0, 1.0)
    for k in range(1, m - 2):
        w[k, k - 1:k + 3] = (-1.0, 9.0, 9.0, -1.0)
    w[m - 2, m - 4:] = (1.0, -5.0, 15.0, 5.0)
    return w / 16.0


@lru_cache(maxsize=None)
def segment_matrix(m: int) -> np.ndarray:
    """Per-segment Simpson weights (unit spacing): row k integrates node k -> k+1."""
    ends = np.zeros((m - 1, m))
    for k in range(m - 1):
        ends[k, k] = 1.0
        ends[k, k + 1] = 1.0
    return (ends + 4.0 * midpoint_matrix(m)) / 6.0


def _contract_axis(mat: np.ndarray, data: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(data, axis, 0)
    out = np.tensordot(mat, moved, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def partial_data(data: np.ndarray, chart: Chart, axis: int) -> np.ndarray:
    """Raw array form of :func:`partial` (grid axes lead)."""
    if not 0 <= axis < chart.dim:
        raise ChartError(f"axis {axis} out of range for dim {chart.dim}")
    d = diff_matrix(chart.shape[axis], chart.spacing[axis])
    return _contract_axis(d, data, axis)


def partial(field: Field, axis: int) -> Field:
    """Componentwise partial derivative along a chart axis."""
    return Field(field.chart, field.value_shape,
                 partial_data(field.data, field.chart, axis))


def second_partial(field: Field, axis_i: int, axis_j: int) -> Field:
    """Composition partial_i(partial_j(field))."""
    return partial(partial(field, axis_j), axis_i)


@dataclass(frozen=True)
class LatticePath:
    """A walk on the grid: a base multi-index and ordered unit moves (axis, +-1)."""

    base: tuple[int, ...]
    steps: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(i) for i in self.base))
        steps = tuple((int(a), int(s)) for a, s in self.steps)
        object.__setattr__(self, "steps", steps)
        for a, s in steps:
            if s not in (-1, 1):
                raise PathError(f"step direction must be +-1, got {s}")

    def nodes(self, chart: Chart) -> list[tuple[int, ...]]:
        """All visited multi-indices; raises PathError if any leaves the chart."""
        cur = list(self.base)
        if not chart.contains_index(cur):
            raise PathError(f"path base {tuple(cur)} outside chart")
        out = [tuple(cur)]
        for axis, direction in self.steps:
            if not 0 <= axis < chart.dim:
                raise PathError(f"step axis {axis} out of range")
            cur[axis] += direction
            if not chart.contains_index(cur):
                raise PathError(f"path leaves chart at {tuple(cur)}")
            out.append(tuple(cur))
        return out

    def reverse(self) -> "LatticePath":
        end = list(self.base)
        for axis, direction in self.steps:
            end[axis] += direction
        rev = tuple((a, -s) for a, s in reversed(self.steps))
        return LatticePath(tuple(end), rev)

    @classmethod
    def staircase(cls, base: Sequence[int], target: Sequence[int],
                  axis_order: Sequence[int] | None = None) -> "LatticePath":
        """Axis-ordered path from base to target (sweep axis_order[0] first)."""
        base = tuple(int(i) for i in base)
        target = tuple(int(i) for i in target)
        order = tuple(axis_order) if axis_order is not None else tuple(range(len(base)))
        steps = []
        for axis in order:
            delta = target[axis] - base[axis]
            sgn = 1 if delta > 0 else -1
            steps.extend((axis, sgn) for _ in range(abs(delta)))
        return cls(base, tuple(steps))


def _one_form_components(one_form: Field) -> tuple[tuple[int, ...], int]:
    """Split value shape into (leading components, covector dim); validates."""
    vs = one_form.value_shape
    n = one_form.chart.dim
    if len(vs) == 0 or vs[-1] != n:
        raise ChartError(f"one-form value shape {vs} must end in ({n},)")
    return vs[:-1], n


def path_integrate(one_form: Field, path: LatticePath) -> float | np.ndarray:
    """Integrate a 1-form along a lattice path, one value per leading component.

    Each unit step is integrated by the Simpson rule with a cubic-interpolated
    midpoint, always evaluated in ascending-index orientation so a path and its
    reversal cancel exactly.
    """
    lead, _ = _one_form_components(one_form)
    chart = one_form.chart
    nodes = path.nodes(chart)
    contribs: list = []
    for (axis, direction), start in zip(path.steps, nodes[:-1]):
        m = chart.shape[axis]
        h = chart.spacing[axis]
        seg = start[axis] if direction > 0 else start[axis] - 1
        idx = tuple(slice(None) if a == axis else start[a] for a in range(chart.dim))
        line = one_form.data[idx + (..., axis)]           # (m, *lead) after move
        line = np.moveaxis(line, 0, -1)                    # (*lead, m)
        row = segment_matrix(m)[seg]
        contribs.append(direction * h * (line @ row))
    if not contribs:
        zero = np.zeros(lead)
        return float(zero) if lead == () else zero
    if lead == ():
        return math.fsum(float(c) for c in contribs)
    stacked = np.stack([np.asarray(c) for c in contribs], axis=-1)
    flat = stacked.reshape(-1, stacked.shape[-1])
    out = np.array([math.fsum(row.tolist()) for row in flat])
    return out.reshape(lead)


def closedness_residual(one_form: Field) -> float:
    """max over the grid and index pairs of ``|d_i w_j - d_j w_i|``."""
    lead, n = _one_form_components(one_form)
    chart = one_form.chart
    dw = np.stack(
        [partial_data(one_form.data, chart, i) for i in range(n)],
        axis=chart.dim,
    )  # grid + (i, *lead, j)
    curl = dw - np.swapaxes(dw, chart.dim, dw.ndim - 1)
    return float(np.abs(curl).max())


def segment_integrals(one_form: Field, axis: int) -> np.ndarray:
    """Per-segment integrals of the axis component along ``axis`` (whole grid).

    Returns an array shaped like the grid with the given axis shortened by one;
    entry k is the integral of ``w_axis dx^axis`` from node k to node k+1.
    """
    _one_form_components(one_form)
    chart = one_form.chart
    comp = one_form.data[..., axis]  # grid + lead
    m = chart.shape[axis]
    h = chart.spacing[axis]
    return _contract_axis(segment_matrix(m), comp, axis) * h


def potential_from_closed_form(one_form: Field,
                               base: Sequence[int] | None = None,
                               axis_order: Sequence[int] | None = None) -> Field:
    """Potential F with F(base) = 0 and dF ~= one_form, by staircase integration.

    F(p) equals the path integral of the form along the canonical axis-ordered
    staircase path from base to p (sweeping ``axis_order[0]`` first).  Exact for
    closed forms up to quadrature error; for non-closed input the result is
    path-dependent and comparing different ``axis_order`` values exposes it.
    """
    lead, n = _one_form_components(one_form)
    chart = one_form.chart
    base = tuple(base) if base is not None else chart.center_index()
    if not chart.contains_index(base):
        raise PathError(f"base index {base} outside chart")
    order = tuple(axis_order) if axis_order is not None else tuple(range(n))
    if sorted(order) != list(range(n)):
        raise ChartError(f"axis_order {order} is not a permutation of axes")

    out = np.zeros(chart.shape + lead)
    for comp in np.ndindex(lead) if lead else [()]:
        w = one_form.data[(...,) + comp + (slice(None),)] if lead else one_form.data
        comp_form = Field(chart, (n,), w)
        acc = np.zeros(chart.shape)
        for stage, axis in enumerate(order):
            active = set(order[:stage + 1])
            seg = segment_integrals(comp_form, axis)
            slicer = tuple(
                slice(None) if a in active else base[a] for a in range(n)
            )
            seg_slab = seg[slicer]
            # position of `axis` among the kept (sliced) axes
            kept = sorted(active)
            pos = kept.index(axis)
            prefix = np.concatenate(
                [np.zeros_like(np.take(seg_slab, [0], axis=pos)),
                 np.cumsum(seg_slab, axis=pos)],
                axis=pos,
            )
            baseline = np.take(prefix, [base[axis]], axis=pos)
            contrib = prefix - baseline
            # broadcast back over the axes currently pinned at base
            full_shape = tuple(
                chart.shape[a] if a in active else 1 for a in range(n)
            )
            acc = acc + contrib.reshape(full_shape)
        if lead:
            out[(...,) + comp] = acc
        else:
            out = acc
    return Field(chart, lead, out)
