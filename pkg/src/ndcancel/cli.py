"""Command line entry point.

    ndcancel run scenario.ini --out results/
    ndcancel compare scenario.ini --out results/
    ndcancel figures --paper-set 3 --out results/

Exit status is 0 on success, 1 for an invalid scenario or arguments and 2
when a computation fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .params import NORMALIZATIONS
from .scenario import ScenarioError, format_scenario, figure_scenarios, parse_scenario, run_scenario

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad arguments are validation errors, not computation errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--normalize", choices=NORMALIZATIONS, help="override the scenario normalization")
    p.add_argument("--oracle", action="store_true", help="also run the numeric oracle")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ndcancel", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="evaluate one scenario file")
    run.add_argument("config", type=Path)
    _common(run)
    cmp = sub.add_parser("compare", help="quantum and classical grids plus their variance ratios")
    cmp.add_argument("config", type=Path)
    _common(cmp)
    fig = sub.add_parser("figures", help="grids and reports for the built-in figure parameter sets")
    fig.add_argument("--paper-set", required=True, choices=("3", "4", "5"))
    _common(fig)
    return parser


def _load(path, args, mode=None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    if mode is not None:
        # reparse so that the default grid follows the forced mode
        text = _with_mode(text, mode)
    return _apply_flags(parse_scenario(text), args)


def _apply_flags(scenario, args):
    changes = {}
    if args.normalize:
        changes["normalization"] = args.normalize
    if args.oracle:
        changes["oracle_check"] = True
    return scenario.replace(**changes) if changes else scenario


def _with_mode(text, mode):
    out, section = [], None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("["):
            section = stripped.strip("[]").strip()
        elif section == "mode" and stripped.split("=")[0].strip().lower() == "mode":
            line = f"mode = {mode}"
        out.append(line)
    return "\n".join(out) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        if args.command == "figures":
            jobs = []
            for name, text in figure_scenarios(args.paper_set).items():
                jobs.append((args.out / name, _apply_flags(parse_scenario(text), args)))
        else:
            mode = "compare" if args.command == "compare" else None
            jobs = [(args.out, _load(args.config, args, mode))]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    for out_dir, scenario in jobs:
        try:
            log(f"{scenario.mode}: writing {out_dir}")
            written = run_scenario(scenario, out_dir, log)
            (Path(out_dir) / "scenario.ini").write_text(format_scenario(scenario), encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {out_dir}: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        except Exception as exc:
            print(f"error: {scenario.mode} scenario failed: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        for path in written.values():
            log(f"  {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
