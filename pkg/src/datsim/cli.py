"""Batch command-line interface.

Subcommands:
    dat-sim run <config> [--out DIR] [--seed N]
    dat-sim validate <config>
    dat-sim sweep <config> --grid <overrides-json> [--out DIR] [--seed N] [--workers N]

Exit codes: 0 success, 1 usage or I/O error, 2 validation failure,
3 numerical abort (non-finite state; partial CSV is still written).
"""
from __future__ import annotations

import argparse
import copy
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .output import write_csv, write_summary
from .scenario import ScenarioParseError, parse_scenario, scenario_from_dict
from .simulator import ScenarioValidationError, run, validate_scenario

__all__ = ["main", "run_cli"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this artifact reserves 2 for
    # validation failures, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dat-sim",
                     description="Distributed average tracking batch simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="validate, integrate, write CSV + summary")
    p_run.add_argument("config", help="scenario JSON file")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_val = sub.add_parser("validate", help="run all validators without integrating")
    p_val.add_argument("config", help="scenario JSON file")
    p_val.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_sweep = sub.add_parser("sweep", help="cartesian grid of config overrides")
    p_sweep.add_argument("config", help="base scenario JSON file")
    p_sweep.add_argument("--grid", required=True,
                         help='JSON object mapping dotted keys to value lists, '
                              'e.g. \'{"gains.alpha": [3.5, 5, 8]}\'')
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--workers", type=int, default=4, help="worker pool size")
    return parser


def _load_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _out_dir(args, config) -> Path:
    out = args.out if args.out is not None else (config.output or ".")
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    return out_path


def _print_violations(exc: ScenarioParseError) -> None:
    print("scenario is invalid:", file=sys.stderr)
    for line in exc.violations:
        print(f"  - {line}", file=sys.stderr)


def _cmd_validate(args) -> int:
    try:
        text = _load_text(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_scenario(text)
    except ScenarioParseError as exc:
        _print_violations(exc)
        return EXIT_VALIDATION
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    report = validate_scenario(config)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _run_one(config, stem: str, out_path: Path) -> int:
    try:
        log = run(config)
    except ScenarioValidationError as exc:
        for line in exc.report.lines():
            print(line, file=sys.stderr)
        return EXIT_VALIDATION
    csv_path = write_csv(log, out_path / f"{stem}.csv")
    write_summary(log, out_path / f"{stem}_summary.txt")
    if log.summary.aborted:
        print(f"numerical abort: {log.summary.abort_reason}; "
              f"partial trajectory in {csv_path}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        text = _load_text(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_scenario(text)
    except ScenarioParseError as exc:
        _print_violations(exc)
        return EXIT_VALIDATION
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return _run_one(config, Path(args.config).stem, _out_dir(args, config))


def _apply_override(doc: dict, dotted: str, value) -> None:
    node = doc
    parts = dotted.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def _cell_name(stem: str, assignment: list[tuple[str, object]]) -> str:
    parts = [f"{key.replace('.', '_')}={value:g}" if isinstance(value, float)
             else f"{key.replace('.', '_')}={value}" for key, value in assignment]
    return f"{stem}__" + "__".join(parts)


def _cmd_sweep(args) -> int:
    try:
        text = _load_text(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        base_doc = json.loads(text)
        grid = json.loads(args.grid)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not isinstance(grid, dict) or not grid or not all(
            isinstance(v, list) and v for v in grid.values()):
        print("error: --grid must map dotted keys to non-empty value lists",
              file=sys.stderr)
        return EXIT_USAGE

    # Cell order is the cartesian product over sorted keys, so file names
    # and ordering depend only on the config and grid.
    keys = sorted(grid)
    cells = [list(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    stem = Path(args.config).stem

    configs = []
    for assignment in cells:
        doc = copy.deepcopy(base_doc)
        for key, value in assignment:
            _apply_override(doc, key, value)
        if args.seed is not None:
            doc["seed"] = args.seed
        try:
            configs.append((scenario_from_dict(doc), _cell_name(stem, assignment)))
        except ScenarioParseError as exc:
            print(f"cell {_cell_name(stem, assignment)} is invalid:", file=sys.stderr)
            for line in exc.violations:
                print(f"  - {line}", file=sys.stderr)
            return EXIT_VALIDATION

    out_path = _out_dir(args, configs[0][0])
    done = 0

    def execute(item):
        config, name = item
        return _run_one(config, name, out_path)

    codes = []
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        for code in pool.map(execute, configs):
            codes.append(code)
            done += 1
            print(f"completed {done}/{len(configs)} cells", file=sys.stderr)
    if EXIT_VALIDATION in codes:
        return EXIT_VALIDATION
    if EXIT_NUMERICAL in codes:
        return EXIT_NUMERICAL
    return EXIT_OK


def run_cli(argv=None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_sweep(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    raise SystemExit(run_cli())
