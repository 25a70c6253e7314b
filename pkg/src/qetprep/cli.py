"""Command-line interface: ``qetprep <command> [options]``.

Every command writes a JSON document tagged ``"schema": "qetprep/1"`` to the
output directory and prints either the same document (``--format json``) or
a short summary (``--format text``).  The exit status is 0 when every
declared tolerance holds, 1 when one fails and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, pipeline, plotting, resources, verify
from .approx import PolyApprox, target_function
from .errors import CompositionError, ConvergenceError, PreconditionError
from .funclib import FourierSeries

SCHEMA = "qetprep/1"
EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
VOLATILE_KEYS = ("seconds",)

log = logging.getLogger("qetprep")


def _strip(obj):
    """Drops run-time measurements so that repeated runs give identical files."""
    if isinstance(obj, dict):
        return {k: _strip(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, list):
        return [_strip(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_strip(doc), indent=2, sort_keys=True) + "\n"


def _write(out: Path, name: str, doc: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(dumps(doc))
    return path


def _load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def _load_config(args) -> pipeline.JobConfig:
    if not args.config:
        raise PreconditionError("--config is required for this command")
    obj = _load_json(args.config)
    if args.seed is not None:
        obj["seed"] = args.seed
    return pipeline.JobConfig.from_json(obj)


def _emit(args, doc: dict, text_lines) -> None:
    if args.format == "json":
        sys.stdout.write(dumps(doc))
    else:
        for line in text_lines:
            print(line)


# Commands ------------------------------------------------------------------------------

def _approx_ok(report: dict, cfg) -> bool:
    if report["method"] == "fourier":
        return report["l2_error"] < cfg.target_epsilon
    if report.get("delta_budget") is None:
        return True
    return report["linf_error"] <= report["delta_budget"]


def cmd_approx(args) -> int:
    cfg = _load_config(args)
    approx, _, report = pipeline.run_approx(cfg)
    doc = {"schema": SCHEMA, "config": cfg.to_json(), "report": report,
           "approximant": approx.to_json()}
    ok = _approx_ok(report, cfg)
    doc["passed"] = ok
    path = _write(args.out, cfg.outputs.get("approx", "poly.json"), doc)
    err = report.get("linf_error", report.get("l2_error"))
    _emit(args, doc, [f"method: {report['method']}", f"degree: {report['degree']}",
                      f"error: {err:.3e}", f"written: {path}",
                      f"status: {'PASS' if ok else 'FAIL'}"])
    return EXIT_OK if ok else EXIT_FAIL


def _poly_from_args(args):
    if args.poly:
        obj = _load_json(args.poly)
        return pipeline.load_poly(obj.get("approximant", obj))
    cfg = _load_config(args)
    approx, _, _ = pipeline.run_approx(cfg)
    return approx


def cmd_angles(args) -> int:
    P = _poly_from_args(args)
    if isinstance(P, FourierSeries):
        raise PreconditionError("phase factors are computed for polynomials only")
    if not P.qsp_ready:
        P = pipeline.make_qsp_ready(P, pipeline.QSP_MARGIN)
    phases = pipeline.run_angles(P, args.seed or 0)
    rep = pipeline.phases_report(phases)
    doc = {"schema": SCHEMA, "degree": P.degree, "parity": P.parity, "phases": rep}
    ok = rep["max_residual"] <= 1e-10
    doc["passed"] = ok
    path = _write(args.out, "phases.json", doc)
    _emit(args, doc, [f"degree: {P.degree}", f"parity: {P.parity}",
                      f"max residual: {rep['max_residual']:.3e}", f"written: {path}",
                      f"status: {'PASS' if ok else 'FAIL'}"])
    return EXIT_OK if ok else EXIT_FAIL


def _simulate(args, cfg):
    P = enc = phases = None
    if getattr(args, "poly", None):
        obj = _load_json(args.poly)
        P = PolyApprox.from_json(obj.get("approximant", obj))
    if getattr(args, "phases", None):
        if P is None:
            raise PreconditionError("--phases needs the matching --poly")
        phases = pipeline.load_phases(_load_json(args.phases)["phases"])
    return pipeline.run_simulation(cfg, P=P, enc=enc, phases=phases)


def _sim_ok(m: dict, cfg) -> dict:
    return {
        "trace_distance": m["trace_distance"] <= cfg.target_epsilon,
        "bound_ordering": m["trace_distance"] <= m["practical_bound"] <= m["rigorous_bound"],
    }


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    m = _simulate(args, cfg)
    checks = _sim_ok(m, cfg)
    doc = {"schema": SCHEMA, "config": cfg.to_json(), "metrics": m, "checks": checks,
           "passed": all(checks.values())}
    path = _write(args.out, cfg.outputs.get("simulate", "simulation.json"), doc)
    _emit(args, doc, [
        f"n: {m['n']}  degree: {m['degree']}  rounds: {m['plan']['rounds']}",
        f"trace distance: {m['trace_distance']:.3e}",
        f"practical bound: {m['practical_bound']:.3e}",
        f"rigorous bound: {m['rigorous_bound']:.3e}",
        f"final amplitude: {m['final_amplitude']:.12f}",
        f"written: {path}",
        f"status: {'PASS' if doc['passed'] else 'FAIL'}",
    ])
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    est = pipeline.run_estimate(cfg)
    doc = {"schema": SCHEMA, "config": cfg.to_json(), "estimate": est, "passed": True}
    path = _write(args.out, cfg.outputs.get("estimate", "estimate.json"), doc)
    r = est["resources"]
    lines = [f"n: {est['n']}  degree: {est['degree']}  rounds: {est['rounds']}",
             f"rotations: {r['rotations']}  toffolis: {r['toffolis']}",
             f"toffoli equivalent: {r['toffoli_equivalent']}"]
    if est["comparison"]:
        lines.append(resources.format_table(est["comparison"]))
    lines.append(f"written: {path}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_verify(args) -> int:
    crit = [int(c) for c in args.criteria.split(",")] if args.criteria else None
    results = verify.run_all(crit)
    doc = {"schema": SCHEMA, "results": [r.to_json() for r in results],
           "passed": all(r.passed for r in results)}
    _write(args.out, "verify.json", doc)
    _emit(args, doc, [r.line() for r in results])
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def cmd_report(args) -> int:
    """Runs every stage for one config and writes JSON, TSV tables and PNG figures."""
    cfg = _load_config(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    approx, enc, approx_rep = pipeline.run_approx(cfg)
    doc = {"schema": SCHEMA, "config": cfg.to_json(), "approx": approx_rep}
    files = []
    passed = _approx_ok(approx_rep, cfg)
    spec = cfg.function

    ns = list(range(2, 13))
    fills = [analysis.filling_fraction(spec, 2**k, continuous=False).filling_N for k in ns]
    f_inf = analysis.filling_fraction(spec, 2**12).filling_inf
    files.append(plotting.write_tsv(out / "filling.tsv", ["n", "filling_N", "filling_inf"],
                                    [(k, f, f_inf) for k, f in zip(ns, fills)]))
    files.append(plotting.plot_filling(ns, fills, f_inf, out / "filling.png"))

    if isinstance(approx, FourierSeries):
        xs = np.linspace(*spec.domain, 2001)
        files.append(plotting.write_tsv(
            out / "approximation.tsv", ["x", "series"], [(x, float(approx(x))) for x in xs]))
    else:
        target = target_function(spec, enc)
        ys = np.linspace(*approx.interval, 501)
        files.append(plotting.write_tsv(
            out / "approximation.tsv", ["y", "target", "approximant", "error"],
            [(y, float(target(y)), float(approx(y) / approx.scale),
              float(approx(y) / approx.scale - target(y))) for y in ys]))
        files.append(plotting.plot_approximation(approx, target, approx.interval,
                                                 out / "approximation.png",
                                                 f"{spec.kind}, degree {approx.degree}"))
        limit = pipeline.max_width_from_env(pipeline.SIMULATE_MAX_N)
        if cfg.n <= limit:
            m = pipeline.run_simulation(cfg, P=approx, enc=enc)
            checks = _sim_ok(m, cfg)
            passed = passed and all(checks.values())
            doc["simulation"] = {k: v for k, v in m.items() if k not in ("state", "target")}
            doc["checks"] = checks
            a, b = spec.domain
            v = np.asarray(m["register_values"])
            xbar = (0.5 * (a + b) if enc.symmetric else a) + (b - a) * v / 2**cfg.n
            rows = [(int(i), float(x), t, complex(*s).real, complex(*s).imag)
                    for i, (x, t, s) in enumerate(zip(xbar, m["target"], m["state"]))]
            files.append(plotting.write_tsv(
                out / "state.tsv", ["index", "x", "target", "simulated_re", "simulated_im"], rows))
            files.append(plotting.write_tsv(
                out / "trajectory.tsv", ["round", "amplitude", "good_probability"],
                [(t["round"], t["amplitude"], t["good_probability"]) for t in m["trajectory"]]))
            files.append(plotting.plot_state(m, xbar, out / "state.png"))
            files.append(plotting.plot_trajectory(m["trajectory"], out / "trajectory.png"))
        else:
            doc["simulation"] = {"skipped": f"n={cfg.n} above the simulation guard {limit}"}

    est = pipeline.run_estimate(cfg, approx_rep)
    doc["estimate"] = est
    r = est["resources"]
    files.append(plotting.write_tsv(
        out / "resources.tsv", ["quantity", "value"],
        [(k, r[k]) for k in ("rotations", "toffolis", "t_count", "toffoli_equivalent",
                             "ancilla_qubits")]))
    if est["comparison"]:
        files.append(plotting.write_tsv(
            out / "comparison.tsv", ["method", "ancillas", "toffolis", "display"],
            [(c["method"], c["ancillas"], c["toffolis"], c["display"])
             for c in est["comparison"]]))
    doc["files"] = sorted(p.name for p in files)
    doc["passed"] = passed
    path = _write(out, "report.json", doc)
    lines = [f"{p.name}" for p in files] + [f"written: {path}",
                                            f"status: {'PASS' if passed else 'FAIL'}"]
    _emit(args, doc, lines)
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    "approx": cmd_approx,
    "angles": cmd_angles,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="job configuration (JSON)")
    common.add_argument("--out", type=Path, default=Path("qetprep-out"),
                        help="output directory (default: qetprep-out)")
    common.add_argument("--seed", type=int, default=None, help="solver seed")
    common.add_argument("--format", choices=("json", "text"), default="text",
                        help="stdout format")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="qetprep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qetprep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("approx", parents=[common], help="build the polynomial approximation")
    p = sub.add_parser("angles", parents=[common], help="compute phase factors")
    p.add_argument("--poly", help="approximation file written by 'approx'")
    p = sub.add_parser("simulate", parents=[common], help="simulate the full circuit")
    p.add_argument("--poly", help="approximation file written by 'approx'")
    p.add_argument("--phases", help="phase file written by 'angles'")
    sub.add_parser("estimate", parents=[common], help="fault-tolerant cost estimate")
    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    sub.add_parser("report", parents=[common], help="all stages plus figures and tables")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, CompositionError, ConvergenceError, FileNotFoundError, KeyError,
            TypeError) as exc:
        # ValueError covers the domain, width, precondition and JSON decoding errors.
        log.error("%s: %s", type(exc).__name__, exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
