"""Structured run reports: named checks, convergence tables, deterministic JSON.

The report file contains only deterministic content so reruns with the same
inputs are byte-identical; wall-clock timings go to a sidecar file that is
excluded from the reproducibility contract.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Check:
    name: str
    value: float
    tolerance: float | None = None
    kind: str = "max"

    @property
    def passed(self) -> bool:
        if self.tolerance is None:
            return True
        return self.value <= self.tolerance

    def as_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "value": self.value,
               "pass": self.passed}
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        return out


@dataclass
class Report:
    command: str
    inputs: dict
    checks: list[Check] = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def add(self, name: str, value: float, tolerance: float | None = None,
            kind: str = "max") -> Check:
        c = Check(name, float(value), tolerance, kind)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "checks": [c.as_dict() for c in self.checks],
            "tables": self.tables,
            "pass": self.passed,
        }

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True)
                        + "\n")
        if self.timings:
            (out / "timings.json").write_text(
                json.dumps(self.timings, indent=2, sort_keys=True) + "\n"
            )
        return path

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            tol = f" (tol {c.tolerance:g})" if c.tolerance is not None else ""
            status = "pass" if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name}: {c.value:.6e}{tol}")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return lines


def measured_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """log-ratio convergence order; inf when both errors sit at roundoff."""
    floor = 1e-13
    if fine < floor and coarse < floor:
        return math.inf
    if fine <= 0.0:
        return math.inf
    return math.log(coarse / fine) / math.log(ratio)


def write_convergence_csv(path: str | Path, rows: list[dict]) -> None:
    if not rows:
        return
    keys = list(rows[0].keys())
    lines = [",".join(keys)]
    for row in rows:
        lines.append(",".join(
            f"{row[k]:.17g}" if isinstance(row[k], float) else str(row[k])
            for k in keys
        ))
    Path(path).write_text("\n".join(lines) + "\n")
