"""Command-line front end: figure tables as CSV, single quantifications as JSON.

Exit codes: 0 success, 2 input or schema error, 3 solver failure,
4 the input is certified infeasible (e.g. outside the quantum relaxation).
"""

import argparse
import concurrent.futures
import csv
import json
import math
import sys

import jsonschema
import numpy as np

from . import __version__, amm, entanglement, figures, incompat, npa, solver, steering
from .quantum import Assemblage, BellFunctional, Correlation, MeasurementAssemblage, ValidationError, io

EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, EXIT_INFEASIBLE = 0, 2, 3, 4

CONTEXT = {
    "sr": "SR(A->B) lower-bounds SR^c, IR of Alice's measurements and ER of the shared state",
    "src": "SR^c equals IR of the steering-equivalent observables and lower-bounds IR of Alice's measurements",
    "sw": "SW lower-bounds IW of Alice's measurements",
    "ir": "IR upper-bounds SR^c and SR of any assemblage these measurements prepare",
    "iw": "IW upper-bounds SW of any assemblage these measurements prepare",
    "er": "PPT relaxation lower-bounds ER; exact for qubit-qubit and qubit-qutrit states",
    "nr": "lower-bounds NR, which lower-bounds SR and ER",
    "nrc": "lower-bounds NR^c, which lower-bounds SR^c and IR",
    "sr-di": "lower-bounds SR, SR^c, IR, ER",
    "src-di": "lower-bounds SR^c and IR",
    "sw-di": "lower-bounds SW and IW",
    "er-di": "lower-bounds ER of every state reproducing the data",
    "q-member": "a negative margin certifies that no quantum realization exists",
}

INPUT_TYPE = {
    "sr": Assemblage, "src": Assemblage, "sw": Assemblage,
    "ir": MeasurementAssemblage, "iw": MeasurementAssemblage,
    "er": tuple,
    "nr": Correlation, "nrc": Correlation, "sr-di": Correlation, "src-di": Correlation,
    "sw-di": Correlation, "q-member": Correlation,
}


class InputError(Exception):
    pass


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(obj)
    return str(obj)


def load_input(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
        return io.from_json(data)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, ValidationError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _check_input(kind, obj):
    want = INPUT_TYPE.get(kind)
    if kind == "er-di":
        if not isinstance(obj, (Correlation, BellFunctional)):
            raise InputError("er-di expects a correlation or a bell_functional document")
        return
    if not isinstance(obj, want):
        name = "state" if want is tuple else want.__name__
        raise InputError(f"{kind} expects {name} input, got {type(obj).__name__}")
    try:
        if isinstance(obj, (Assemblage, MeasurementAssemblage, Correlation)):
            obj.validate()
    except ValidationError as exc:
        raise InputError(str(exc)) from exc


def quantify(kind, obj, level=1, observed=None):
    """Run one quantifier and return the report dict (without exit status)."""
    _check_input(kind, obj)
    report = {"kind": kind, "level": None, "context": CONTEXT[kind]}
    if kind in ("sr", "src", "sw"):
        fn = {"sr": steering.steering_robustness, "src": steering.consistent_steering_robustness,
              "sw": steering.steerable_weight}[kind]
        res = fn(obj)
        report.update(value=res.value, status="Optimal", diagnostics=res.diagnostics)
    elif kind in ("ir", "iw"):
        fn = incompat.incompatibility_robustness if kind == "ir" else incompat.incompatibility_weight
        res = fn(obj)
        report.update(value=res.value, status="Optimal", diagnostics=res.diagnostics)
    elif kind == "er":
        rho, dims = obj
        if len(dims) != 2:
            raise InputError("er expects a bipartite state")
        try:
            value, _ = entanglement.er_ppt(rho, dims)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        report.update(value=value, status="Optimal", diagnostics={})
    elif kind == "q-member":
        res = npa.q_membership(obj, level)
        report.update(level=level, value=res.margin, status="Feasible" if res.feasible else amm.INFEASIBLE,
                      diagnostics=res.diagnostics)
    else:
        if kind in ("nr", "nrc"):
            bound = npa.nonlocal_robustness(obj, level, consistent=kind == "nrc")
        elif kind == "sr-di":
            bound = amm.sr_di(obj, level)
        elif kind == "src-di":
            bound = amm.sr_di_consistent(obj, level)
        elif kind == "sw-di":
            bound = amm.sw_di(obj, level)
        elif isinstance(obj, BellFunctional):
            if observed is None:
                raise InputError("er-di on a bell_functional needs --observed")
            bound = npa.er_di_bell(obj, observed, level)
            report["observed"] = observed
        else:
            bound = npa.er_di_mblhg(obj, level)
        report.update(level=level, value=bound.value, status=bound.status, diagnostics=bound.diagnostics)
    return report


def _write_json(report, out):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _status_code(report):
    return EXIT_INFEASIBLE if report.get("status") == amm.INFEASIBLE else EXIT_OK


def _row(args):
    name, param, level, seed, tol = args
    with solver.options(**_tol_options(tol)):
        return figures.FIGURES[name].row(param, level=level, seed=seed)


def _tol_options(tol):
    return {} if tol is None else {"gap_tol": tol, "feas_tol": tol}


def figure_rows(name, grid=None, level=None, seed=1234, tol=None, jobs=1):
    """Header and rows of a figure table, in grid order."""
    fig = figures.FIGURES[name]
    params = fig.grid(grid or fig.default_grid)
    tasks = [(name, p, level, seed, tol) for p in params]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    return fig.header, rows


def _format(x):
    return "nan" if not math.isfinite(x) else f"{x:.12g}"


def write_csv(header, rows, out):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_format(float(x)) for x in row])
    finally:
        if out:
            fh.close()


def _cmd_figure(args):
    header, rows = figure_rows(args.name, args.grid, args.level, args.seed, args.tol, args.jobs)
    write_csv(header, rows, args.out)
    return EXIT_OK


def _cmd_quantify(args):
    obj = load_input(args.input)
    with solver.options(**_tol_options(args.tol)):
        report = quantify(args.kind, obj, args.level, args.observed)
    report["input"] = args.input
    _write_json(report, args.out)
    return _status_code(report)


def _cmd_subchannel(args):
    obj = load_input(args.input)
    _check_input("sr-di", obj)
    with solver.options(**_tol_options(args.tol)):
        advantage, bound = amm.subchannel_advantage(obj, args.level)
    report = {
        "kind": "subchannel",
        "level": args.level,
        "advantage_lower_bound": advantage,
        "sr_di": bound.value,
        "status": bound.status,
        "diagnostics": bound.diagnostics,
        "context": "SR_DI + 1 lower-bounds the best subchannel-discrimination advantage over unentangled strategies",
        "input": args.input,
    }
    _write_json(report, args.out)
    return _status_code(report)


def build_parser():
    p = argparse.ArgumentParser(prog="diquant", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, level_default):
        sp.add_argument("--level", type=int, default=level_default,
                        help="local level: each party's operator words have length at most this")
        sp.add_argument("--tol", type=float, default=None, help="solver gap and feasibility tolerance")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--dump-sdp", default=None, metavar="PREFIX",
                        help="write every SDP solved in this process to PREFIX-<n>.sdp")

    f = sub.add_parser("figure", help="compute a figure's data table as CSV")
    f.add_argument("name", choices=sorted(figures.FIGURES))
    f.add_argument("--grid", type=int, default=None, help="number of grid points")
    f.add_argument("--seed", type=int, default=1234, help="see-saw seed for numerically optimised settings")
    f.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    common(f, None)
    f.set_defaults(func=_cmd_figure)

    q = sub.add_parser("quantify", help="evaluate one quantifier on a JSON input")
    q.add_argument("kind", choices=sorted(CONTEXT))
    q.add_argument("input")
    q.add_argument("--observed", type=float, default=None, help="Bell value for er-di on a bell_functional")
    q.add_argument("--seed", type=int, default=1234, help="accepted for uniformity; quantifiers are deterministic")
    common(q, 1)
    q.set_defaults(func=_cmd_quantify)

    s = sub.add_parser("subchannel", help="certified subchannel-discrimination advantage from a correlation")
    s.add_argument("input")
    common(s, 1)
    s.set_defaults(func=_cmd_subchannel)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "level", None) is not None and args.level < 1:
        print("error: --level must be at least 1", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        if args.dump_sdp:
            with solver.capture(args.dump_sdp):
                return args.func(args)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (solver.SolverError, MemoryError, OverflowError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
