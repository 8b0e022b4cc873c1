"""Command-line entry points.

    pogd run <config>     train per a dataset-mode config
    pogd testfn <config>  drive an optimizer over a benchmark function
    pogd report <csv...>  compare finished runs

Exit codes: 0 success, 1 config error, 2 runtime abort (non-finite loss,
missing files, malformed data).
"""

import argparse
import sys

from ..errors import ConfigError, RunAborted
from .config import override, parse_config
from .report import compare_report, write_long_csv
from .run import run_experiment, run_testfn


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pogd",
        description="Particle-optimized gradient descent benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("run", "train a model per config"),
                            ("testfn", "optimize a benchmark function per config")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the experiment config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output CSV path")
        p.add_argument("--iter-log", action="store_true", default=None,
                       help="also log one row per training iteration")

    p = sub.add_parser("report", help="compare metrics CSVs")
    p.add_argument("csvs", nargs="+", help="metrics CSV files (first run is baseline)")
    p.add_argument("--loss-threshold", type=float, default=None,
                   help="report first epoch with val_loss <= this")
    p.add_argument("--acc-threshold", type=float, default=None,
                   help="report first epoch with val_acc >= this")
    p.add_argument("--out", default=None, help="write the report text here")
    p.add_argument("--long-csv", default=None,
                   help="write the plot-ready long-format companion CSV here")
    return parser


def _load_config(path: str):
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "report":
            report = compare_report(
                args.csvs,
                loss_threshold=args.loss_threshold,
                acc_threshold=args.acc_threshold,
            )
            if args.out:
                with open(args.out, "w") as f:
                    f.write(report.text)
            if args.long_csv:
                write_long_csv(report, args.long_csv)
            print(report.text, end="")
            return 0

        cfg = override(_load_config(args.config), seed=args.seed, out=args.out,
                       iter_log=args.iter_log)
        if args.command == "run":
            if cfg.mode != "dataset":
                raise ConfigError("'pogd run' needs a dataset-mode config")
            records = run_experiment(cfg)
        else:
            if cfg.mode != "testfn":
                raise ConfigError("'pogd testfn' needs a testfn-mode config")
            records = run_testfn(cfg)
        dest = cfg.out or "(not written: no 'out' configured)"
        print(f"{cfg.run_id}: {len(records)} records -> {dest}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RunAborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
