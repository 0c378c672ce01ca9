"""Command-line front end: one subcommand per construction, JSON/CSV artifacts.

Subcommands
    check-structure   statistical-structure axioms and duality residuals
    check-gcr         Gauss-Codazzi-Ricci residuals and bundle flatness
    embed             transport pipeline: extrinsic data -> realizing pair
    ambient           embed + ambient potential + induced-structure closure
    affine            codimension-1/2 affine immersion pipeline
    legendre          dual coordinates and conjugate-potential diagnostics
    alpha-embed       doubled pair realizing an alpha-connection
    convergence       resolution ladder with fitted convergence orders

Inputs come from a built-in fixture or from CSV field files named in a JSON
spec file; command-line flags mirror and override spec-file fields.  Exit
status: 0 all checks pass, 1 numerical failure, 2 malformed specification.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import affine as affine_mod
from . import ambient as ambient_mod
from .bonnet import bonnet_embed
from .dataio import read_field_csv, write_field_csv
from .errors import StatembedError
from .fixtures import FIXTURE_NAMES, fixture
from .gcr import ExtrinsicData, bundle_connection, bundle_curvature, gcr_residuals
from .grid import Chart, Field
from .hessian import legendre_transform
from .lauritzen import alpha_pair, verify_lauritzen
from .report import Report, measured_order, write_convergence_csv
from .structures import (
    StatisticalStructure,
    alpha_connection,
    check_statistical,
    curvature_duality_residual,
    dual_connection,
)

DEFAULT_TOLERANCES = {"axiom": 1e-6, "gcr": 1e-3, "embed": 5e-3}


class SpecError(Exception):
    """Malformed run specification (exit status 2)."""


def _parse_ranges(text: str) -> tuple:
    try:
        out = []
        for part in text.split(","):
            lo, hi = part.split(":")
            out.append((float(lo), float(hi)))
        return tuple(out)
    except ValueError as exc:
        raise SpecError(f"cannot parse ranges {text!r}; use 'lo:hi,lo:hi'") from exc


def _load_spec_file(path: str) -> dict:
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecError("spec file must contain a JSON object")
    return spec


class RunSpec:
    """Merged view of spec-file fields and command-line flags."""

    def __init__(self, args: argparse.Namespace):
        spec = _load_spec_file(args.spec) if getattr(args, "spec", None) else {}
        self.command = args.command
        self.fixture = getattr(args, "fixture", None) or spec.get("fixture")
        self.dim = getattr(args, "dim", None) or spec.get("dim", 2)
        self.data = dict(spec.get("data", {}))
        for key in ("g", "gamma", "h", "hstar", "tau", "f", "xi", "phi"):
            flag = getattr(args, f"data_{key}", None)
            if flag:
                self.data[key] = flag
        chart_spec = spec.get("chart", {})
        res = getattr(args, "res", None) or chart_spec.get("resolution")
        self.resolution = int(res) if res else 33
        if getattr(args, "ranges", None):
            self.ranges = _parse_ranges(args.ranges)
        elif chart_spec.get("ranges"):
            self.ranges = tuple(tuple(map(float, r)) for r in chart_spec["ranges"])
        else:
            self.ranges = None
        self.tolerances = dict(DEFAULT_TOLERANCES)
        self.tolerances.update(spec.get("tolerances", {}))
        for key in ("axiom", "gcr", "embed"):
            flag = getattr(args, f"{key}_tol", None)
            if flag is not None:
                self.tolerances[key] = flag
        if getattr(args, "tol", None) is not None:
            self.tolerances[_MAIN_TOL.get(self.command, "embed")] = args.tol
        gauge = spec.get("gauge", {})
        self.base_point = gauge.get("base_point")
        if getattr(args, "base_point", None):
            self.base_point = [int(v) for v in args.base_point.split(",")]
        self.base_frame = gauge.get("base_frame")
        if getattr(args, "base_frame", None):
            self.base_frame = np.loadtxt(args.base_frame, delimiter=",",
                                         ndmin=2).tolist()
        self.out_dir = getattr(args, "out", None) or spec.get("out_dir", "out")
        self.alpha = getattr(args, "alpha", None)
        if self.alpha is None:
            self.alpha = spec.get("alpha", 0.0)
        self.epsilon = getattr(args, "epsilon", None) or spec.get("epsilon", 0.1)
        self.margin = getattr(args, "margin", None) or spec.get("margin")
        self.check = getattr(args, "check", None) or spec.get("check", "structure")
        res_list = getattr(args, "resolutions", None) or spec.get("resolutions")
        self.resolutions = ([int(v) for v in str(res_list).split(",")]
                            if res_list else [17, 33, 65])

    def echo(self) -> dict:
        return {
            "fixture": self.fixture,
            "data": self.data,
            "resolution": self.resolution,
            "ranges": self.ranges,
            "tolerances": self.tolerances,
            "base_point": self.base_point,
            "base_frame": self.base_frame,
        }


_MAIN_TOL = {
    "check-structure": "axiom",
    "check-gcr": "gcr",
    "embed": "embed",
    "ambient": "embed",
    "affine": "embed",
    "alpha-embed": "embed",
}


def _require_chart(spec: RunSpec, dim: int) -> Chart:
    if spec.ranges is None:
        raise SpecError("data-file inputs need chart ranges "
                        "(--ranges or spec chart.ranges)")
    if len(spec.ranges) != dim:
        raise SpecError(f"chart has {len(spec.ranges)} ranges, need {dim}")
    return Chart(spec.ranges, (spec.resolution,) * dim)


def _resolve_structure(spec: RunSpec) -> tuple[StatisticalStructure, object]:
    """Returns (structure, fixture-or-None)."""
    if spec.fixture:
        fx = fixture(spec.fixture, dim=int(spec.dim), shape=spec.resolution,
                     ranges=spec.ranges)
        return fx.structure, fx
    if "g" not in spec.data or "gamma" not in spec.data:
        raise SpecError("need a fixture or data files for g and gamma")
    ndim = len(spec.ranges) if spec.ranges else None
    if ndim is None:
        raise SpecError("data-file inputs need chart ranges")
    chart = _require_chart(spec, ndim)
    n = chart.dim
    g = read_field_csv(spec.data["g"], chart, (n, n), "g")
    gamma = read_field_csv(spec.data["gamma"], chart, (n, n, n), "gamma")
    return StatisticalStructure(chart, g, gamma), None


def _count_columns(path: str) -> int:
    with open(path) as fh:
        return len(fh.readline().split(","))


def _resolve_extrinsic(spec: RunSpec, s: StatisticalStructure,
                       fx) -> ExtrinsicData:
    if fx is not None and not spec.data:
        if fx.extrinsic is None:
            raise SpecError(f"fixture {fx.name} carries no extrinsic data")
        return fx.extrinsic
    needed = {"h", "hstar", "tau"}
    if not needed.issubset(spec.data):
        raise SpecError("extrinsic data files h, hstar, tau are required")
    n = s.chart.dim
    r = _count_columns(spec.data["h"]) // (n * n)
    h = read_field_csv(spec.data["h"], s.chart, (r, n, n), "h")
    hstar = read_field_csv(spec.data["hstar"], s.chart, (r, n, n), "hstar")
    tau = read_field_csv(spec.data["tau"], s.chart, (r, r, n), "tau")
    return ExtrinsicData(r, h, hstar, tau)


def _cmd_check_structure(spec: RunSpec, report: Report) -> None:
    s, _ = _resolve_structure(spec)
    tol = spec.tolerances["axiom"]
    rep = check_statistical(s)
    report.add("torsion_residual", rep.torsion_residual, tol)
    report.add("nabla_g_residual", rep.nabla_g_residual, tol)
    report.add("min_metric_eigenvalue", -rep.min_metric_eigenvalue, 0.0,
               kind="negated-min")
    report.add("curvature_duality_residual", curvature_duality_residual(s),
               max(tol, 1e-6))
    star = dual_connection(s)
    back = dual_connection(StatisticalStructure(s.chart, s.g, star))
    report.add("dual_involution_residual",
               float(np.abs(back.data - s.gamma.data).max()), 1e-8)


def _cmd_check_gcr(spec: RunSpec, report: Report) -> None:
    s, fx = _resolve_structure(spec)
    e = _resolve_extrinsic(spec, s, fx)
    tol = spec.tolerances["gcr"]
    rep = gcr_residuals(s, e)
    report.add("gauss_residual", rep.gauss.max, tol)
    report.add("codazzi_h_residual", rep.codazzi_h.max, tol)
    report.add("codazzi_hstar_residual", rep.codazzi_hstar.max, tol)
    report.add("ricci_residual", rep.ricci.max, tol)
    conn = bundle_connection(s, e)
    _, fmax = bundle_curvature(conn)
    report.add("bundle_curvature_max", fmax, tol)
    report.tables["gcr_rms"] = {
        "gauss": rep.gauss.rms, "codazzi_h": rep.codazzi_h.rms,
        "codazzi_hstar": rep.codazzi_hstar.rms, "ricci": rep.ricci.rms,
    }


def _bonnet_from_spec(spec: RunSpec):
    s, fx = _resolve_structure(spec)
    e = _resolve_extrinsic(spec, s, fx)
    base = tuple(spec.base_point) if spec.base_point else None
    frame = np.array(spec.base_frame) if spec.base_frame else None
    return s, e, bonnet_embed(s, e, base=base, base_frame=frame,
                              integrability_tol=spec.tolerances["gcr"])


def _cmd_embed(spec: RunSpec, report: Report, out: Path) -> None:
    s, e, res = _bonnet_from_spec(spec)
    tol = spec.tolerances["embed"]
    rep = res.report
    report.add("verify_metric_residual", rep.verify.metric_residual, tol)
    report.add("verify_connection_residual", rep.verify.connection_residual, tol)
    report.add("plaquette_holonomy", rep.holonomy_max, 1e-5)
    report.add("theta_closedness", rep.theta.closedness, 1e-4)
    report.add("path_independence", rep.path_independence, 1e-3)
    report.add("frame_pairing_residual", rep.pairing_residual, 1e-4)
    write_field_csv(out / "f.csv", res.pair.f, "f")
    write_field_csv(out / "phi.csv", res.pair.phi, "phi")


def _cmd_ambient(spec: RunSpec, report: Report, out: Path) -> None:
    s, e, res = _bonnet_from_spec(spec)
    tol = spec.tolerances["embed"]
    report.add("verify_metric_residual", res.report.verify.metric_residual, tol)
    psi0, closed = ambient_mod.pullback_potential(res.pair)
    report.add("pullback_closedness", closed, 1e-3)
    amb = ambient_mod.extend_potential(res.pair, psi0, epsilon=spec.epsilon,
                                       margin=spec.margin)
    report.add("convexify_C", amb.C, kind="value")
    report.add("hessian_min_eigenvalue", -amb.min_eigenvalue, 0.0,
               kind="negated-min")
    report.add("gradient_jet_residual", amb.gradient_jet_residual, tol)
    _, irep = ambient_mod.induced_structure(amb, res.pair, s)
    report.add("induced_metric_residual", irep.g_residual, tol)
    report.add("induced_connection_residual", irep.gamma_residual, tol)


def _cmd_affine(spec: RunSpec, report: Report) -> None:
    if spec.fixture:
        fx = fixture(spec.fixture, dim=int(spec.dim), shape=spec.resolution,
                     ranges=spec.ranges)
        if fx.immersion is None:
            raise SpecError(f"fixture {fx.name} has no affine immersion")
        im = fx.immersion
    else:
        if "f" not in spec.data or "xi" not in spec.data:
            raise SpecError("affine needs a fixture or data files f and xi")
        if spec.ranges is None:
            raise SpecError("data-file inputs need chart ranges")
        chart = _require_chart(spec, len(spec.ranges))
        cols = _count_columns(spec.data["f"])
        codim = cols - chart.dim
        f = read_field_csv(spec.data["f"], chart, (cols,), "f")
        xi = read_field_csv(spec.data["xi"], chart, (cols,), "xi")
        im = affine_mod.AffineImmersion(chart, codim, f, xi)
    tol = spec.tolerances["embed"]
    pair, rep = affine_mod.affine_to_lauritzen(im)
    report.add("tau_max", rep.stat.tau_max, 1e-6)
    report.add("min_g_eigenvalue", -rep.stat.g_min_eigenvalue, 0.0,
               kind="negated-min")
    report.add("conormal_defining_residual", rep.conormal.defining_residual,
               1e-10)
    report.add("verify_metric_residual", rep.verify.metric_residual, tol)
    report.add("verify_connection_residual", rep.verify.connection_residual,
               tol)


def _cmd_legendre(spec: RunSpec, report: Report) -> None:
    if not spec.fixture:
        raise SpecError("legendre runs on a fixture with a potential")
    fx = fixture(spec.fixture, dim=int(spec.dim), shape=spec.resolution,
                 ranges=spec.ranges)
    if fx.potential is None:
        raise SpecError(f"fixture {fx.name} has no potential")
    res = legendre_transform(fx.potential)
    grad_tol = 1e-7 if res.diagnostics["route"] == "analytic" else 1e-4
    report.add("grad_inverse_residual", res.diagnostics["grad_residual"],
               grad_tol)
    report.add("hessian_inverse_residual",
               res.diagnostics["hessian_inverse_residual"], 1e-5)
    report.add("newton_residual", res.diagnostics["newton_max_residual"], 1e-9)


def _cmd_alpha_embed(spec: RunSpec, report: Report) -> None:
    if not spec.fixture:
        raise SpecError("alpha-embed runs on a fixture with a pair")
    fx = fixture(spec.fixture, dim=int(spec.dim), shape=spec.resolution,
                 ranges=spec.ranges)
    if fx.pair is None:
        raise SpecError(f"fixture {fx.name} has no realizing pair")
    tol = spec.tolerances["embed"]
    ap = alpha_pair(fx.pair, float(spec.alpha), fx.structure)
    ga = alpha_connection(fx.structure, float(spec.alpha))
    sa = StatisticalStructure(fx.chart, fx.structure.g, ga)
    rep = verify_lauritzen(ap, sa)
    report.add("alpha_metric_residual", rep.metric_residual, tol)
    report.add("alpha_connection_residual", rep.connection_residual, tol)


def _convergence_residual(spec: RunSpec, res: int) -> float:
    sub = RunSpec.__new__(RunSpec)
    sub.__dict__.update(spec.__dict__)
    sub.resolution = res
    if spec.check == "structure":
        s, _ = _resolve_structure(sub)
        rep = check_statistical(s)
        return max(rep.torsion_residual, rep.nabla_g_residual)
    if spec.check == "gcr":
        s, fx = _resolve_structure(sub)
        e = _resolve_extrinsic(sub, s, fx)
        return gcr_residuals(s, e).max
    if spec.check == "embed":
        _, _, res_b = _bonnet_from_spec(sub)
        return max(res_b.report.verify.metric_residual,
                   res_b.report.verify.connection_residual)
    raise SpecError(f"unknown convergence check {spec.check!r}")


_ORDER_BOUNDS = {"structure": 3.5, "gcr": 2.0, "embed": 1.5}


def _cmd_convergence(spec: RunSpec, report: Report, out: Path) -> None:
    rows = []
    prev = None
    for res in spec.resolutions:
        value = _convergence_residual(spec, res)
        row = {"resolution": res, "residual": value}
        if prev is not None:
            row["order"] = measured_order(prev[1], value,
                                          (res - 1) / (prev[0] - 1))
        rows.append(row)
        prev = (res, value)
    report.tables["convergence"] = rows
    orders = [r["order"] for r in rows if "order" in r
              and r["order"] != float("inf")]
    if orders:
        bound = _ORDER_BOUNDS[spec.check]
        report.add("min_measured_order", -min(orders), -bound,
                   kind="negated-order")
    write_convergence_csv(out / "convergence.csv", rows)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="statembed",
        description="Statistical-structure checks and flat statistical "
                    "(Hessian) embedding pipelines on discretized charts.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    commands = {
        "check-structure": "verify the statistical-structure axioms",
        "check-gcr": "verify the Gauss-Codazzi-Ricci equations",
        "embed": "construct a realizing pair by parallel transport",
        "ambient": "embed plus ambient-potential reconstruction",
        "affine": "affine immersion pipeline (codimension 1 or 2)",
        "legendre": "Legendre transform diagnostics",
        "alpha-embed": "alpha-connection pair construction",
        "convergence": "resolution ladder with fitted orders",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--fixture", choices=FIXTURE_NAMES, default=None,
                       help="built-in analytic fixture")
        p.add_argument("--dim", type=int, default=None,
                       help="dimension for parameterized fixtures")
        p.add_argument("--res", type=int, default=None,
                       help="grid points per axis")
        p.add_argument("--ranges", default=None,
                       help="chart ranges as 'lo:hi,lo:hi'")
        p.add_argument("--spec", default=None, help="JSON run-spec file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--tol", type=float, default=None,
                       help="main tolerance for this command")
        p.add_argument("--axiom-tol", dest="axiom_tol", type=float)
        p.add_argument("--gcr-tol", dest="gcr_tol", type=float)
        p.add_argument("--embed-tol", dest="embed_tol", type=float)
        p.add_argument("--base-point", dest="base_point", default=None,
                       help="comma-separated base multi-index")
        p.add_argument("--base-frame", dest="base_frame", default=None,
                       help="CSV file with the base frame matrix")
        for key in ("g", "gamma", "h", "hstar", "tau", "f", "xi", "phi"):
            p.add_argument(f"--data-{key}", dest=f"data_{key}", default=None,
                           help=f"CSV field file for {key}")
        if name == "alpha-embed":
            p.add_argument("--alpha", type=float, default=0.0)
        if name == "ambient":
            p.add_argument("--epsilon", type=float, default=0.1)
            p.add_argument("--margin", type=float, default=None)
        if name == "convergence":
            p.add_argument("--check", default="structure",
                           choices=("structure", "gcr", "embed"))
            p.add_argument("--resolutions", default="17,33,65")
    return ap


_RUNNERS = {
    "check-structure": lambda spec, report, out: _cmd_check_structure(spec, report),
    "check-gcr": lambda spec, report, out: _cmd_check_gcr(spec, report),
    "embed": _cmd_embed,
    "ambient": _cmd_ambient,
    "affine": lambda spec, report, out: _cmd_affine(spec, report),
    "legendre": lambda spec, report, out: _cmd_legendre(spec, report),
    "alpha-embed": lambda spec, report, out: _cmd_alpha_embed(spec, report),
    "convergence": _cmd_convergence,
}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        spec = RunSpec(args)
        out = Path(spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report = Report(command=spec.command, inputs=spec.echo())
        t0 = time.perf_counter()
        _RUNNERS[spec.command](spec, report, out)
        report.timings["wall_seconds"] = time.perf_counter() - t0
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except StatembedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    report.write(out)
    print(f"{spec.command}: wrote {out / 'report.json'}")
    for line in report.summary_lines():
        print(line)
    if not report.passed:
        failing = [c.name for c in report.checks if not c.passed]
        print(f"failing checks: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
