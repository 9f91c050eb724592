"""Command-line entry point: ``superint {simulate,verify,closure,schema}``.

Exit codes: 0 success, 1 configuration error, 2 trajectory truncated at the
singularity guard zone, 3 inconclusive closure search, 4 a failed check in
``verify``.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load, schema_json
from .dynamics import drift_report, find_closure, integrate
from .errors import ConfigError, SuperintError
from .verify import report_dict, run_suite, step_sweep

EXIT_OK, EXIT_CONFIG, EXIT_TRUNCATED, EXIT_INCONCLUSIVE, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4

TRAJECTORY_COLUMNS = ("t", "x", "y", "px", "py", "H", "J2", "ReK", "ImK")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    # NaN/inf are not JSON; emit null instead
    if isinstance(o, float) and not np.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default, allow_nan=False)
    path.write_text(text + "\n")
    return path


def write_trajectory(path, traj, decimation=1):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    inv = traj.invariant_track[::decimation]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for t, s, v in zip(traj.times, traj.states, inv):
            w.writerow([repr(float(t)), *(repr(float(a)) for a in s), *(repr(float(a)) for a in v)])
    return path


def _outputs(cfg, args, name):
    if args.out:
        return Path(args.out) / getattr(cfg.output, name)
    return cfg.output.path(name, base=Path(args.config).resolve().parent)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(cfg, args):
    it = cfg.integrator
    traj = integrate(cfg.start_state(), cfg.potential, cfg.step, cfg.duration, it.scheme, it.decimation)
    rep = drift_report(traj)
    threshold = cfg.verification.drift_threshold
    under = {k: (None if v is None else v < threshold) for k, v in rep.max_relative.items()}
    summary = {
        "potential": cfg.potential.to_dict(),
        "scheme": it.scheme,
        "step": cfg.step,
        "duration": cfg.duration,
        "rows": len(traj),
        "truncated": traj.boundary,
        "drift": rep.as_dict(),
        "drift_threshold": threshold,
        "under_threshold": under,
    }
    tpath = write_trajectory(_outputs(cfg, args, "trajectory"), traj, it.decimation)
    spath = write_json(_outputs(cfg, args, "summary"), summary)
    print(f"wrote {tpath} ({len(traj)} rows) and {spath}")
    if traj.boundary:
        print("trajectory entered the singularity guard zone; truncated", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_verify(cfg, args):
    settings = cfg.suite_settings()
    results = run_suite(settings)
    for r in results:
        print(r.line())
    report = report_dict(results, settings)
    report["fd_step_sweep"] = step_sweep(settings)
    path = write_json(_outputs(cfg, args, "report"), report)
    print(f"wrote {path}")
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


def cmd_closure(cfg, args):
    c = cfg.closure
    h = cfg.step
    res, traj = find_closure(cfg.start_state(), cfg.potential, h, eps=c.eps, scheme=cfg.integrator.scheme,
                             safety=c.safety, max_time=c.max_time)
    dec = cfg.integrator.decimation
    doc = res.as_dict()
    doc["eps"] = c.eps
    doc["truncated"] = traj.boundary
    doc["points"] = {"x": traj.states[::dec, 0].tolist(), "y": traj.states[::dec, 1].tolist()}
    path = write_json(_outputs(cfg, args, "closure"), doc)
    print(f"{res.status}: period={res.period_estimate:.10g} distance={res.return_distance:.3e} "
          f"horizon={res.horizon:.6g}; wrote {path}")
    if traj.boundary:
        return EXIT_TRUNCATED
    if res.status == "inconclusive":
        print(f"closure inconclusive within horizon {res.horizon:.6g}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "closure": cmd_closure}


def build_parser():
    p = argparse.ArgumentParser(prog="superint", description="Superintegrable-potential experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("simulate", "integrate a trajectory and report invariant drift"),
        ("verify", "run the residual and identity suite"),
        ("closure", "search for the return of a bounded orbit"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("config", help="YAML experiment config")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
    sub.add_parser("schema", help="print the config JSON schema")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(schema_json())
        return EXIT_OK
    try:
        cfg = load(args.config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SuperintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
