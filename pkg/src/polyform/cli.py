"""Command-line front end.

Subcommands: ``minimize`` (one model, one n), ``table`` (sweep over n),
``bounds`` (formula vs measured minima), ``export`` (OFF / JSON / CSV from a
stored run record).  Exit codes: 0 success, 2 usage error, 3 non-converged,
4 bound violation.  All randomness flows from --seed; identical invocations
produce byte-identical outputs.  POLYFORM_THREADS caps start-level
parallelism (0 = auto).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis, energies as en, optimize as opt
from .errors import PolyformError
from .geometry import Configuration, Constraint, convex_hull, dual
from .errors import DegenerateHull, DuplicatePoints
from .symmetry import detect_point_group

MODEL_NAMES = ("thomson", "riesz", "sumsep", "tammes", "central", "monopole",
               "lj", "atiyah", "triangle")


class UsageError(Exception):
    pass


def _resolve_model(name, p):
    if name == "thomson":
        return en.RieszSphere(1.0)
    if name == "riesz":
        return en.RieszSphere(p if p is not None else 1.0)
    if name == "sumsep":
        return en.SumSeparation()
    if name == "central":
        return en.CentralCoulomb()
    if name == "monopole":
        return en.MonopoleLinear()
    if name == "lj":
        return en.LennardJones()
    if name == "atiyah":
        return en.AtiyahDet()
    if name == "triangle":
        return en.TriangleApprox()
    raise UsageError(f"unknown model {name!r}")


def _merged(args, key, default=None):
    """Flag value if given, else the config-file value, else the default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    return args.config_data.get(key, default)


def _load_config(args):
    args.config_data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        args.config_data = data


def _settings(args, n):
    kwargs = {}
    for key, name in (("gtol", "gtol"), ("max_iter", "max_iter"),
                      ("starts", "start_count"), ("seed", "seed")):
        val = _merged(args, key)
        if val is not None:
            kwargs[name] = val
    if _merged(args, "no_structured_seeds", False):
        kwargs["structured_seeds"] = False
    return opt.OptimizerSettings(**kwargs)


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run_model(args, model_name, n):
    p = _merged(args, "p")
    settings = _settings(args, n)
    constraint_name = _merged(args, "constraint")
    if model_name == "tammes":
        if constraint_name not in (None, "sphere"):
            raise UsageError("tammes runs on the sphere")
        return opt.tammes_solve(n, settings)
    model = _resolve_model(model_name, p)
    constraint = Constraint.parse(constraint_name) if constraint_name else None
    return opt.multi_start(model, n, settings, constraint)


def _hull_or_none(points):
    try:
        return convex_hull(np.asarray(points))
    except (DegenerateHull, DuplicatePoints):
        return None


def _planar_census(points):
    """(ring size, interior count) for plane/disk minimizers."""
    pts = np.asarray(points)
    r = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
    interior = int(np.sum(r < 0.5 * r.max()))
    return len(pts) - interior, interior


def _run_record(run):
    record = run.to_dict()
    record["symmetry"] = detect_point_group(run.best).to_dict()
    return record


def cmd_minimize(args) -> int:
    _load_config(args)
    model_name = _merged(args, "model")
    n = _merged(args, "n")
    if model_name is None or n is None:
        raise UsageError("minimize needs --model and --n")
    run = _run_model(args, model_name, int(n))
    record = _run_record(run)
    _write(_merged(args, "out"), json.dumps(record, sort_keys=True, indent=2) + "\n")
    off_path = _merged(args, "off")
    if off_path:
        poly = _hull_or_none(run.best.points)
        if poly is None:
            raise UsageError("hull export requested for a degenerate configuration")
        _write(off_path, poly.to_off())
    return 0 if run.converged else 3


TABLE_COLUMNS = ("n", "energy", "symmetry_label", "hull_V", "hull_F", "hull_E",
                 "ring_size", "interior_count", "signature", "starts", "seed")


def cmd_table(args) -> int:
    _load_config(args)
    model_name = _merged(args, "model")
    n_min = _merged(args, "n_min")
    n_max = _merged(args, "n_max")
    if model_name is None or n_min is None or n_max is None:
        raise UsageError("table needs --model, --n-min and --n-max")
    n_min, n_max = int(n_min), int(n_max)
    if n_min > n_max:
        raise UsageError("--n-min must not exceed --n-max")
    seed = _merged(args, "seed", 0)
    lines = [",".join(TABLE_COLUMNS)]
    worst = 0
    for n in range(n_min, n_max + 1):
        run = _run_model(args, model_name, n)
        label = detect_point_group(run.best).label.text
        poly = _hull_or_none(run.best.points)
        if poly is not None:
            hv, hf, he = poly.num_vertices, poly.num_faces, poly.num_edges
            ring = inner = ""
        else:
            hv = hf = he = ""
            ring, inner = _planar_census(run.best.points)
        sig = opt.census_signature(run.best.points)
        lines.append(",".join(str(v) for v in (
            n, repr(run.best_energy), label, hv, hf, he, ring, inner,
            sig, run.starts, seed)))
        worst = max(worst, 0 if run.converged else 3)
    _write(_merged(args, "out"), "\n".join(lines) + "\n")
    return worst


def _bounds_rows(args, kind, n_min, n_max):
    rows = []
    if kind == "toth":
        for n in range(n_min, n_max + 1):
            run = _run_model(args, "sumsep", n)
            rows.append(analysis.bound_report("toth", n, analysis.toth_lower_bound(n),
                                              run.best_energy))
    elif kind == "central":
        for n in range(max(2, n_min), n_max + 1):
            run = _run_model(args, "central", n)
            rows.append(analysis.bound_report("central", n,
                                              analysis.central_lower_bound(n),
                                              run.best_energy))
        if n_min <= 1:
            rows.insert(0, analysis.bound_report("central", 1,
                                                 analysis.central_lower_bound(1), 0.0))
    elif kind == "monopole":
        for n in range(n_min, n_max + 1):
            run = _run_model(args, "monopole", n)
            _radius, est = analysis.monopole_estimates(n)
            gap = abs(run.best_energy - est) / abs(est)
            tol = _merged(args, "rel_tol", 0.02)
            rows.append(analysis.BoundReport("monopole-energy", n, est,
                                             run.best_energy, gap <= tol, gap))
    elif kind == "geomfit":
        for n in range(n_min, n_max + 1):
            run = _run_model(args, "atiyah", n)
            est = analysis.geom_energy_fit(n)
            scale = max(abs(est), 1.0)
            gap = abs(run.best_energy - est) / scale
            tol = _merged(args, "rel_tol", 0.15)
            rows.append(analysis.BoundReport("geomfit", n, est, run.best_energy,
                                             gap <= tol, gap))
    elif kind == "atiyah":
        rows.extend(_atiyah_sampling_rows(args, n_min, n_max))
    else:
        raise UsageError(f"unknown bounds kind {kind!r}")
    return rows


def _atiyah_sampling_rows(args, n_min, n_max):
    samples = int(_merged(args, "samples", 10000))
    seed = int(_merged(args, "seed", 0))
    rng = np.random.default_rng([seed, 977])
    sizes = list(range(max(2, n_min), n_max + 1))
    per = max(1, samples // len(sizes))
    rows = []
    floor = 1.0 - 1e-9
    for n in sizes:
        worst = np.inf
        for k in range(per):
            mode = k % 3
            if mode == 0:
                pts = rng.normal(size=(n, 3))
            elif mode == 1:
                pts = rng.normal(size=(n, 3))
                pts /= np.linalg.norm(pts, axis=1)[:, None]
            else:
                pts = rng.normal(size=(n, 3))
                pts[:, 2] = 0.0
            try:
                val = en.atiyah_determinant(pts).modulus
            except PolyformError:
                continue
            worst = min(worst, val)
        rows.append(analysis.BoundReport("atiyah-modulus", n, floor, worst,
                                         worst >= floor, worst - 1.0))
    return rows


def cmd_bounds(args) -> int:
    _load_config(args)
    kind = _merged(args, "kind")
    n_min = _merged(args, "n_min")
    n_max = _merged(args, "n_max")
    if kind is None or n_min is None or n_max is None:
        raise UsageError("bounds needs --kind, --n-min and --n-max")
    rows = _bounds_rows(args, kind, int(n_min), int(n_max))
    out = _merged(args, "out")
    if out and str(out).endswith(".csv"):
        header = "name,n,bound,measured,satisfied,relative_gap"
        body = [",".join([r.name, str(r.n), repr(r.bound), repr(r.measured),
                          str(r.satisfied), repr(r.relative_gap)]) for r in rows]
        _write(out, "\n".join([header] + body) + "\n")
    else:
        payload = {"kind": kind, "rows": [r.to_dict() for r in rows],
                   "violations": sum(1 for r in rows if not r.satisfied)}
        _write(out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 4 if any(not r.satisfied for r in rows) else 0


def cmd_export(args) -> int:
    _load_config(args)
    run_path = _merged(args, "run")
    if run_path is None:
        raise UsageError("export needs --run")
    try:
        with open(run_path) as fh:
            record = json.load(fh)
        best = record["best_configuration"]
        config = Configuration(np.array(best["points"], dtype=float),
                               Constraint.parse(best["constraint"]))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read run record {run_path}: {exc}") from exc
    wrote = False
    if _merged(args, "off"):
        poly = _hull_or_none(config.points)
        if poly is None:
            raise UsageError("configuration has no 3D hull to export")
        _write(_merged(args, "off"), poly.to_off())
        wrote = True
    if _merged(args, "dual_off"):
        poly = _hull_or_none(config.points)
        if poly is None:
            raise UsageError("configuration has no 3D hull to export")
        _write(_merged(args, "dual_off"), dual(poly).to_off())
        wrote = True
    if _merged(args, "json_out"):
        _write(_merged(args, "json_out"), config.to_json() + "\n")
        wrote = True
    if _merged(args, "csv"):
        lines = ["x,y,z"] + [",".join(repr(float(c)) for c in p) for p in config.points]
        _write(_merged(args, "csv"), "\n".join(lines) + "\n")
        wrote = True
    if not wrote:
        raise UsageError("export needs at least one of --off/--dual-off/--json-out/--csv")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="JSON file with defaults; flags override")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--starts", type=int)
    sub.add_argument("--gtol", type=float)
    sub.add_argument("--max-iter", dest="max_iter", type=int)
    sub.add_argument("--no-structured-seeds", dest="no_structured_seeds",
                     action="store_const", const=True)
    sub.add_argument("--constraint", choices=("sphere", "free", "plane", "disk"))
    sub.add_argument("--p", type=float, help="Riesz exponent for --model riesz")
    sub.add_argument("--out", help="output path (default stdout)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="polyform",
        description="Minimal-energy point configurations and their polyhedra.")
    subs = parser.add_subparsers(dest="command", required=True)

    m = subs.add_parser("minimize", help="run one multi-start minimization")
    m.add_argument("--model", choices=MODEL_NAMES)
    m.add_argument("--n", type=int)
    m.add_argument("--off", help="also write the hull as an OFF mesh")
    _add_common(m)
    m.set_defaults(func=cmd_minimize)

    t = subs.add_parser("table", help="sweep n and emit a CSV table")
    t.add_argument("--model", choices=MODEL_NAMES)
    t.add_argument("--n-min", dest="n_min", type=int)
    t.add_argument("--n-max", dest="n_max", type=int)
    _add_common(t)
    t.set_defaults(func=cmd_table)

    b = subs.add_parser("bounds", help="check closed-form bounds against minima")
    b.add_argument("--kind", choices=("toth", "central", "monopole", "geomfit", "atiyah"))
    b.add_argument("--n-min", dest="n_min", type=int)
    b.add_argument("--n-max", dest="n_max", type=int)
    b.add_argument("--samples", type=int, help="random configurations for --kind atiyah")
    b.add_argument("--rel-tol", dest="rel_tol", type=float,
                   help="tolerance for estimate kinds (monopole, geomfit)")
    _add_common(b)
    b.set_defaults(func=cmd_bounds)

    e = subs.add_parser("export", help="export geometry from a stored run record")
    e.add_argument("--run", help="path of a minimize JSON record")
    e.add_argument("--off", help="write hull OFF here")
    e.add_argument("--dual-off", dest="dual_off", help="write dual-hull OFF here")
    e.add_argument("--json-out", dest="json_out", help="write configuration JSON here")
    e.add_argument("--csv", help="write point list CSV here")
    e.add_argument("--config")
    e.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PolyformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
