"""CSV exchange format for grid fields.

One row per grid point in row-major multi-index order; the header names every
component with explicit index strings (``g_00,g_01,...``).  Values are written
with repr-level precision and a locale-independent decimal point.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import ChartError
from .grid import Chart, Field


def component_names(prefix: str, value_shape: tuple[int, ...]) -> list[str]:
    if value_shape == ():
        return [prefix]
    return [
        prefix + "_" + "".join(str(i) for i in idx)
        for idx in np.ndindex(value_shape)
    ]


def write_field_csv(path: str | Path, field: Field, prefix: str) -> None:
    names = component_names(prefix, field.value_shape)
    flat = field.data.reshape(field.chart.npoints, -1)
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    np.savetxt(buf, flat, fmt="%.17g", delimiter=",")
    Path(path).write_text(buf.getvalue())


def read_field_csv(path: str | Path, chart: Chart,
                   value_shape: tuple[int, ...], prefix: str) -> Field:
    text = Path(path).read_text()
    lines = text.strip().splitlines()
    if not lines:
        raise ChartError(f"{path}: empty data file")
    header = [h.strip() for h in lines[0].split(",")]
    expected = component_names(prefix, value_shape)
    if header != expected:
        raise ChartError(
            f"{path}: header {header[:4]}... does not match expected "
            f"{expected[:4]}... for prefix {prefix!r} and shape {value_shape}"
        )
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",",
                      ndmin=2)
    want_rows = chart.npoints
    if data.shape != (want_rows, len(expected)):
        raise ChartError(
            f"{path}: got {data.shape[0]} rows x {data.shape[1]} columns, "
            f"expected {want_rows} x {len(expected)}"
        )
    return Field(chart, value_shape, data.reshape(chart.shape + value_shape))
