"""Command line interface: ``r5curve check|analyze|trace SCENE``.

Exit codes: 0 success, 1 input error, 2 geometric degeneracy or failed
check, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .curve import TRANSVERSAL_TOL, analyze
from .darboux import all_geodesics
from .errors import GeometryError, InputError, NewtonDivergence, R5CurveError
from .linalg import norm, quad_product
from .scene import Scene, load_scene
from .surface import REGULARITY_TOL, unit_normal
from .tracer import trace, trace_around

EXIT_OK, EXIT_INPUT, EXIT_GEOMETRY, EXIT_NUMERIC = 0, 1, 2, 3

CSV_HEADER = "s,x1,x2,x3,x4,x5"
PROFILE_HEADER = ",k1,k2,k3,k4,kn1,kn2,kn3,kn4,k1g1,k1g2,k1g3,k1g4"


# --- checks -----------------------------------------------------------------


@dataclass
class CheckReport:
    residual: float
    agreement_tol: float
    margins: list
    transversality: float | None
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def run_checks(scene: Scene) -> CheckReport:
    tol = scene.tolerances["agreement"]
    pts = [s.evaluate(p) for s, p in zip(scene.surfaces, scene.params)]
    residual = max(norm(pts[i] - pts[j]) for i, j in combinations(range(4), 2))
    failures = []
    if residual > tol:
        failures.append("PointMismatch")
    jets = [s.jet(p, 1, check=False) for s, p in zip(scene.surfaces, scene.params)]
    margins = [j.regularity_margin() for j in jets]
    if any(m <= REGULARITY_TOL for m in margins):
        failures.append("NotRegular")
        transversality = None
    else:
        transversality = norm(quad_product(*[unit_normal(j) for j in jets]))
        if transversality < TRANSVERSAL_TOL:
            failures.append("NonTransversal")
    return CheckReport(residual, tol, margins, transversality, failures)


def format_check(scene: Scene, rep: CheckReport) -> str:
    def verdict(ok):
        return "ok" if ok else "FAIL"

    rows = [("agreement residual", _g6(rep.residual), verdict(rep.residual <= rep.agreement_tol))]
    for s, m in zip(scene.surfaces, rep.margins):
        rows.append((f"regularity margin {s.name}", _g6(m), verdict(m > REGULARITY_TOL)))
    if rep.transversality is None:
        rows.append(("transversality |N1 x N2 x N3 x N4|", "undefined", "FAIL"))
    else:
        rows.append((
            "transversality |N1 x N2 x N3 x N4|",
            _g6(rep.transversality),
            verdict(rep.transversality >= TRANSVERSAL_TOL),
        ))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    lines = [f"scene: {scene.name}"]
    lines += [f"{a:<{w0}}  {b:>{w1}}  {c}" for a, b, c in rows]
    if rep.passed:
        lines.append("result: pass")
    else:
        lines.append("result: FAIL (" + ", ".join(rep.failures) + ")")
    return "\n".join(lines) + "\n"


def cmd_check(scene: Scene, out=None) -> int:
    rep = run_checks(scene)
    (out or sys.stdout).write(format_check(scene, rep))
    return EXIT_OK if rep.passed else EXIT_GEOMETRY


def _require_checks(scene):
    rep = run_checks(scene)
    if not rep.passed:
        sys.stderr.write(format_check(scene, rep))
        raise GeometryError("scene checks failed: " + ", ".join(rep.failures))
    return rep


# --- analyze ----------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    if isinstance(x, np.ndarray):
        return [_num(v) for v in x]
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return float(x)


def build_report(scene: Scene, app, geos, rep: CheckReport | None = None) -> dict:
    """Everything analyze knows about the point, as nested plain data."""
    data = app.data
    k = app.kappa
    report = {
        "scene": scene.name,
        "frenet_status": app.status,
        "degenerate_reason": app.degenerate_reason,
        "point": _num(data.point.point),
        "agreement_residual": _num(data.point.residual),
        "transversality": None if rep is None else _num(rep.transversality),
        "normals": _num(data.normals),
        "normal_gram": _num(data.gram),
        "tangent": _num(app.t),
        "principal_normal": _num(app.n),
        "binormal1": _num(app.b1),
        "binormal2": _num(app.b2),
        "binormal3": _num(app.b3),
        "kappa1": _num(k[0]),
        "kappa2": _num(k[1]),
        "kappa3": _num(k[2]),
        "kappa4": _num(k[3]),
        "kappa1_prime": _num(data.k1p),
        "kappa1_second": _num(data.k1pp),
        "kn": _num(data.kn),
        "a": _num(data.a),
        "c": _num(data.c),
        "d": _num(data.d),
        "m": _num(data.m),
        "mu": _num(data.mu),
        "xi": _num(data.xi),
        "eta": _num(data.eta),
    }
    for i in range(5):
        report[f"alpha{i + 1}"] = _num(data.alpha(i + 1))
    surfaces = []
    for i, (s, g) in enumerate(zip(scene.surfaces, geos)):
        entry = {
            "name": s.name,
            "params": _num(data.point.params[i]),
            "regularity_margin": None if rep is None else _num(rep.margins[i]),
            "first_fundamental": _num(data.first_forms[i]),
            "second_fundamental": _num(data.second_forms[i]),
            "kn": _num(data.kn[i]),
        }
        for r in range(4):
            entry[f"u{r + 1}"] = _num(data.u[i][r]) if r < len(data.u[i]) else None
        entry["delta"] = _num(data.delta[i]) if i < len(data.delta) else None
        entry["darboux"] = {
            "kappa1g": _num(g.kappa1g),
            "tau1g": _num(g.tau[0]),
            "tau2g": _num(g.tau[1]),
            "tau3g": _num(g.tau[2]),
            "dN_ds": _num(g.dNds),
            **{f"U{j}": _num(g.frame[j]) for j in range(1, 6)},
        }
        surfaces.append(entry)
    report["surfaces"] = surfaces
    if scene.reference:
        ref = {}
        for key, value in scene.reference.items():
            computed = report.get(key)
            delta = None if not isinstance(computed, float) else computed - value
            ref[key] = {"reference": value, "computed": computed, "delta": delta}
        report["reference"] = ref
    return report


def _g17(x):
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _g6(x):
    return format(x, ".6g")


def to_json(obj, indent=0) -> str:
    """Deterministic JSON with 17 significant digits for every float."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _g17(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _text_value(v):
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return _g6(v)
    if isinstance(v, str):
        return v
    return "(" + ", ".join(_text_value(x) for x in v) + ")"


def _text_rows(obj, prefix=""):
    for key, v in obj.items():
        name = f"{prefix}{key}"
        if isinstance(v, dict):
            yield from _text_rows(v, name + ".")
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for item in v:
                label = item.get("name", "?")
                yield from _text_rows({k: x for k, x in item.items() if k != "name"}, f"{label}.")
        elif isinstance(v, list) and v and isinstance(v[0], list):
            for r, row in enumerate(v, start=1):
                yield f"{name}[{r}]", _text_value(row)
        else:
            yield name, _text_value(v)


def to_text(report: dict) -> str:
    rows = list(_text_rows(report))
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def analyze_scene(scene: Scene):
    rep = _require_checks(scene)
    app = analyze(scene.surfaces, scene.start())
    geos = all_geodesics(app)
    return build_report(scene, app, geos, rep), app


def cmd_analyze(scene: Scene, fmt="text", out=None) -> int:
    report, app = analyze_scene(scene)
    (out or sys.stdout).write(to_json(report) + "\n" if fmt == "json" else to_text(report))
    return EXIT_OK if app.degenerate_level is None else EXIT_GEOMETRY


# --- trace ------------------------------------------------------------------


def _cell(v):
    return "" if v is None else repr(float(v))


def profile_cells(scene: Scene, pt):
    app = analyze(scene.surfaces, pt)
    geos = all_geodesics(app)
    values = list(app.kappa) + list(app.data.kn) + [g.kappa1g for g in geos]
    return [_cell(v) for v in values]


def cmd_trace(scene: Scene, steps, step=None, out_path=None, profile=False, back=0) -> int:
    _require_checks(scene)
    cfg = scene.trace_config(h=step if step is not None else scene.tolerances["step"])
    start = scene.start()
    if back:
        tr = trace_around(scene.surfaces, start, cfg, back, steps)
    else:
        tr = trace(scene.surfaces, start, replace(cfg, steps=steps))
    header = CSV_HEADER + (PROFILE_HEADER if profile else "")
    lines = [header]
    for s, pt in zip(tr.s, tr.points):
        cells = [_cell(s)] + [_cell(x) for x in pt.point]
        if profile:
            cells += profile_cells(scene, pt)
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


# --- entry point ------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="r5curve",
        description="Frenet apparatus of the intersection curve of four hypersurfaces in R^5.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="validate a scene: point agreement, regularity, transversality")
    c.add_argument("scene")

    a = sub.add_parser("analyze", help="Frenet frame, curvatures and Darboux data at the scene point")
    a.add_argument("scene")
    a.add_argument("--format", choices=("json", "text"), default="text")
    a.add_argument("--out", help="write the report here instead of stdout")

    t = sub.add_parser("trace", help="march along the curve and write a CSV")
    t.add_argument("scene")
    t.add_argument("--steps", type=int, required=True, help="steps in the forward direction")
    t.add_argument("--step", type=float, default=None, help="arc-length step (default from scene)")
    t.add_argument("--back", type=int, default=0, help="steps traced backwards before the start point")
    t.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    t.add_argument("--profile", action="store_true", help="add curvature columns")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scene = load_scene(args.scene)
        if args.command == "check":
            return cmd_check(scene)
        if args.command == "analyze":
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                    return cmd_analyze(scene, args.format, fh)
            return cmd_analyze(scene, args.format)
        if args.steps < 0 or args.back < 0:
            raise InputError("--steps and --back must be non-negative")
        if args.step is not None and not args.step > 0:
            raise InputError("--step must be positive")
        return cmd_trace(scene, args.steps, args.step, args.out, args.profile, args.back)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GeometryError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except NewtonDivergence as exc:
        where = "" if exc.step_index is None else f" at step {exc.step_index}"
        print(f"error: NewtonDivergence{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except R5CurveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
