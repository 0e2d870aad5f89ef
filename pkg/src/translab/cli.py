"""Command-line interface.

    translab run <config.json>
    translab preset <name> [--out DIR] [--override key=value ...]
    translab presets
    translab oracle-compare <config.json>

Exit codes: 0 converged, 2 finished without converging, 1 error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .config import (apply_overrides, list_presets, parse_config,
                     preset_config)
from .errors import TranslabError
from .runner import oracle_comparison, run


def _print_outcome(result):
    rep = result.report
    if rep.error is not None:
        print(f"error: {rep.error}", file=sys.stderr)
        return
    state = "converged" if rep.converged else "not converged"
    print(f"{state}: speed {rep.c_inf:.10g} "
          f"(domain-averaged {rep.c_inf_mean:.10g})")
    if rep.series:
        last = rep.series[-1]
        print(f"final osc {last.osc_w:.3e}, speed spread "
              f"{last.sup_ut_minus_speed:.3e}, min obliqueness "
              f"{last.min_obliqueness:.4g}")
    if rep.caps_exceeded:
        print("warning: norm caps were exceeded during the run",
              file=sys.stderr)
    if result.paths:
        for name, path in sorted(result.paths.items()):
            print(f"wrote {path}")


def _cmd_run(args) -> int:
    with open(args.config) as f:
        cfg = parse_config(f.read())
    result = run(cfg)
    _print_outcome(result)
    return result.exit_code


def _cmd_preset(args) -> int:
    doc = preset_config(args.name)
    if args.out:
        doc.setdefault("output", {})["dir"] = args.out
    if args.override:
        apply_overrides(doc, args.override)
    cfg = parse_config(json.dumps(doc))
    result = run(cfg)
    _print_outcome(result)
    return result.exit_code


def _cmd_presets(_args) -> int:
    for name, desc in list_presets():
        print(f"{name:20s} {desc}")
    return 0


def _cmd_oracle_compare(args) -> int:
    with open(args.config) as f:
        cfg = parse_config(f.read())
    rows, problem = oracle_comparison(cfg)
    print(f"closed-form comparison, slopes ({problem.alpha:g}, "
          f"{problem.beta:g}), {problem.n_modes} modes")
    print("t,max_error")
    for t, err in rows:
        print(f"{t:.17g},{err:.17g}")
    print(f"final max error {rows[-1][1]:.6e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="translab",
        description="Finite-difference laboratory for nonlinear parabolic "
                    "flows with oblique boundary conditions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a configuration file")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name")
    p.add_argument("--out", help="output directory for artifacts")
    p.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help="override a configuration entry (dotted path)")
    p.set_defaults(fn=_cmd_preset)

    p = sub.add_parser("presets", help="list available presets")
    p.set_defaults(fn=_cmd_presets)

    p = sub.add_parser("oracle-compare",
                       help="score an interval run against the closed-form "
                            "solution")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_oracle_compare)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except TranslabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
