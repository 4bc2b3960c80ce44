"""Command-line experiment runner.

    seqmeas <experiment> --seed N [--trials T] [--out results.json]
            [--csv trials.csv] [--param key=value ...]
            [--fn-f path --fn-g path] [--group path]

Writes the result document (JSON, byte-identical for a fixed configuration)
to --out or stdout, prints one pass/fail line per assertion on stderr, and
exits 0 iff every assertion passed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .experiments import EXPERIMENT_NAMES, ExperimentConfig, run_experiment
from .gates import PermutationAction
from .testers import FunctionTable


def _parse_param(raw: str):
    if "=" not in raw:
        raise argparse.ArgumentTypeError(f"--param expects key=value, got {raw!r}")
    key, value = raw.split("=", 1)
    for cast in (int, float):
        try:
            return key, cast(value)
        except ValueError:
            continue
    return key, value


def _load_function(path: str) -> FunctionTable:
    return FunctionTable.from_lines(Path(path).read_text().splitlines())


def _load_group(path: str) -> tuple[PermutationAction, ...]:
    actions = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            actions.append(PermutationAction(tuple(int(x) for x in line.split())))
    if not actions:
        raise ValueError(f"no permutations found in {path}")
    return tuple(actions)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqmeas", description=__doc__)
    parser.add_argument("experiment", choices=EXPERIMENT_NAMES)
    parser.add_argument("--seed", type=int, default=0, help="master seed (64-bit unsigned)")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--out", type=str, default=None, help="result document path")
    parser.add_argument("--csv", type=str, default=None, help="per-trial CSV path")
    parser.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="instance parameter (repeatable)",
    )
    parser.add_argument("--fn-f", type=str, default=None, help="function table file (lines 'x y')")
    parser.add_argument("--fn-g", type=str, default=None)
    parser.add_argument(
        "--group", type=str, default=None, help="permutation list file (one image list per line)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    params = dict(_parse_param(p) for p in args.param)
    fn_f = _load_function(args.fn_f) if args.fn_f else None
    fn_g = _load_function(args.fn_g) if args.fn_g else None
    if (fn_f is None) != (fn_g is None):
        print("error: --fn-f and --fn-g must be given together", file=sys.stderr)
        return 2
    if fn_f is not None and fn_f.codomain_size != fn_g.codomain_size:
        cod = max(fn_f.codomain_size, fn_g.codomain_size)
        fn_f = FunctionTable(fn_f.domain_size, cod, fn_f.values)
        fn_g = FunctionTable(fn_g.domain_size, cod, fn_g.values)
    group = _load_group(args.group) if args.group else None

    config = ExperimentConfig(
        name=args.experiment,
        seed=args.seed,
        trials=args.trials,
        params=params,
        function_f=fn_f,
        function_g=fn_g,
        group=group,
    )
    try:
        record = run_experiment(config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    document = record.to_document()
    if args.out:
        Path(args.out).write_text(document)
    else:
        sys.stdout.write(document)
    if args.csv and record.csv_rows:
        with open(args.csv, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(record.csv_rows[0].keys()))
            writer.writeheader()
            writer.writerows(record.csv_rows)

    for assertion in record.assertions:
        status = "PASS" if assertion["passed"] else "FAIL"
        print(
            f"{status} {record.experiment}:{assertion['name']} "
            f"observed={assertion['observed']} bound={assertion['bound']}",
            file=sys.stderr,
        )
    print(
        f"{record.experiment}: {'all assertions passed' if record.all_passed else 'FAILURES'} "
        f"({record.wall_clock_seconds:.2f} s)",
        file=sys.stderr,
    )
    return 0 if record.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
