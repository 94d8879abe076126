"""Command-line pipeline driver.

Stages compose through JSON/CSV artifacts on disk and are pure: the
same inputs produce byte-identical outputs.  Exit codes: 0 success,
2 missing/unreadable input, 3 validation failure, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from multiprocessing import Pool

from .errors import (
    AdjustmentError,
    InvalidInputError,
    ModelError,
    SolverFailureError,
    StablehhError,
)
from . import identification, ingest, oracle, stability
from .market import MarriageMarket, dump_markets, read_markets, validate_market

EXIT_OK = 0
EXIT_MISSING = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _model(args: argparse.Namespace) -> stability.ModelKind:
    return stability.model_from_string(args.model, getattr(args, "binding", False))


def _load_markets_checked(path: str) -> list[MarriageMarket]:
    markets = read_markets(path)
    problems = [(m.region, v) for m in markets for v in validate_market(m)]
    if problems:
        for region, violation in problems:
            print(f"{region}: {violation}", file=sys.stderr)
        raise _ValidationFailed(f"{len(problems)} validation violations")
    return markets


class _ValidationFailed(StablehhError):
    pass


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    config = ingest.load_config(args.config) if args.config else ingest.IngestConfig()
    markets = ingest.ingest_markets(args.agents, args.households, config)
    problems = [(m.region, v) for m in markets for v in validate_market(m)]
    if problems:
        for region, violation in problems:
            print(f"{region}: {violation}", file=sys.stderr)
        return EXIT_VALIDATION
    _write(args.out, dump_markets(markets))
    print(f"wrote {len(markets)} market(s) to {args.out}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    model = _model(args)
    market, truth = oracle.generate_stable_market(
        seed=args.seed,
        n_couples=args.couples,
        n_singles=args.singles,
        model=model,
    )
    _write(args.out, dump_markets([market]))
    if args.truth:
        _write(args.truth, json.dumps(truth, indent=2, sort_keys=True) + "\n")
    print(f"wrote synthetic market ({args.couples} couples, {args.singles} singles) to {args.out}")
    return EXIT_OK


def _solve_one(payload):
    market, model, split = payload
    return stability.solve_stability_indices(market, model, split)


def _cmd_stability(args: argparse.Namespace) -> int:
    model = _model(args)
    markets = _load_markets_checked(args.market)
    split = "fixed5050" if args.split == "fixed" else "endogenous"
    payloads = [(m, model, split) for m in markets]
    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            reports = pool.map(_solve_one, payloads)
    else:
        reports = [_solve_one(p) for p in payloads]
    _write(args.out, stability.dump_reports(reports))
    if args.csv:
        _write(args.csv, stability.reports_csv(reports))
    for report in reports:
        print(
            f"{report.region}: {len(report.options)} options, "
            f"sum of indices {report.sum_indices:.4f}"
        )
    return EXIT_OK


def _bounds_one(payload):
    market, model, report, pin_splits = payload
    return identification.compute_bounds(market, model, report, pin_splits=pin_splits)


def _cmd_bounds(args: argparse.Namespace) -> int:
    model = _model(args)
    markets = _load_markets_checked(args.market)
    with open(args.report, "r", encoding="utf-8") as handle:
        reports = stability.load_reports(handle.read())
    by_region = {r.region: r for r in reports}
    for market in markets:
        if market.region not in by_region:
            raise InvalidInputError(f"stability report lacks market {market.region!r}")
    payloads = [(m, model, by_region[m.region], args.pin_splits) for m in markets]
    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            results = pool.map(_bounds_one, payloads)
    else:
        results = [_bounds_one(p) for p in payloads]
    _write(args.out, identification.bounds_csv(results))
    if args.json:
        _write(args.json, identification.dump_bounds_reports(results))
    if args.emit_plot_data:
        markets_map = {m.region: m for m in markets}
        _write(args.emit_plot_data, identification.plot_data_csv(results, markets_map))
    total = sum(len(r.couples) for r in results)
    print(f"wrote bounds for {total} couple(s) to {args.out}")
    return EXIT_OK


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _cmd_report(args: argparse.Namespace) -> int:
    with open(args.stability, "r", encoding="utf-8") as handle:
        reports = stability.load_reports(handle.read())
    lines = []
    lines.append("Stability summary")
    lines.append("market  couples  options  mean_avg_index  min_avg_index  mean_min_index  min_min_index  sum_s")
    all_avg: list[float] = []
    all_min: list[float] = []
    for report in reports:
        avgs = [c.average_index for c in report.couples]
        mins = [c.minimum_index for c in report.couples]
        all_avg.extend(avgs)
        all_min.extend(mins)
        lines.append(
            "  ".join(
                [
                    report.region,
                    str(len(report.couples)),
                    str(len(report.options)),
                    _fmt(sum(avgs) / len(avgs)) if avgs else "n/a",
                    _fmt(min(avgs)) if avgs else "n/a",
                    _fmt(sum(mins) / len(mins)) if mins else "n/a",
                    _fmt(min(mins)) if mins else "n/a",
                    _fmt(report.sum_indices),
                ]
            )
        )
    if all_avg:
        lines.append(
            "overall  mean average index "
            + _fmt(sum(all_avg) / len(all_avg))
            + "  lowest minimum index "
            + _fmt(min(all_min))
        )

    if args.bounds:
        with open(args.bounds, "r", encoding="utf-8") as handle:
            rows = handle.read().strip().splitlines()[1:]
        widths: dict[str, list[tuple[float, float]]] = {}
        bounds_cells: dict[str, list[tuple[float, float, float, float]]] = {}
        for row in rows:
            _couple, target, lower, upper, naive_lower, naive_upper = row.split(",")
            widths.setdefault(target, []).append(
                (float(upper) - float(lower), float(naive_upper) - float(naive_lower))
            )
            bounds_cells.setdefault(target, []).append(
                (float(lower), float(upper), float(naive_lower), float(naive_upper))
            )
        lines.append("")
        lines.append("Bounds summary (mean over couples; widths in percentage points)")
        lines.append("target  lower  upper  difference_pp  naive_lower  naive_upper  naive_difference_pp")
        for target in sorted(widths):
            cells = bounds_cells[target]
            pairs = widths[target]
            n = len(cells)
            lines.append(
                "  ".join(
                    [
                        target,
                        _fmt(sum(c[0] for c in cells) / n),
                        _fmt(sum(c[1] for c in cells) / n),
                        _fmt(100.0 * sum(p[0] for p in pairs) / n),
                        _fmt(sum(c[2] for c in cells) / n),
                        _fmt(sum(c[3] for c in cells) / n),
                        _fmt(100.0 * sum(p[1] for p in pairs) / n),
                    ]
                )
            )

    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablehh",
        description="Marriage-market stability indices and intrahousehold allocation bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse survey CSVs into canonical market JSON")
    p.add_argument("--agents", required=True)
    p.add_argument("--households", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic rationalizable market")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--couples", type=int, required=True)
    p.add_argument("--singles", type=int, default=0)
    p.add_argument("--model", choices=("jc", "spc"), required=True)
    p.add_argument("--binding", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("stability", help="solve stability indices per market")
    p.add_argument("--market", required=True)
    p.add_argument("--model", choices=("jc", "spc"), required=True)
    p.add_argument("--binding", action="store_true")
    p.add_argument("--split", choices=("fixed", "endogenous"), default="fixed")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("bounds", help="set-identify allocation bounds on adjusted data")
    p.add_argument("--market", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--model", choices=("jc", "spc"), required=True)
    p.add_argument("--binding", action="store_true")
    p.add_argument("--pin-splits", action="store_true", help="pin non-labor shares at 50/50")
    p.add_argument("--out", required=True)
    p.add_argument("--json")
    p.add_argument("--emit-plot-data")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("report", help="summarize stability and bounds artifacts")
    p.add_argument("--stability", required=True)
    p.add_argument("--bounds")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"missing file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_MISSING
    except _ValidationFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverFailureError, ModelError, AdjustmentError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (StablehhError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
