"""Command-line interface: ``r2attr attribute|simulate|fixture``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import io as rio
from .dominance import DEFAULT_DA_LIMIT, default_threads
from .engine import AttributionRequest, SplineConfig, attribute
from .errors import DALimitError, DataError, NumericalError
from .legacy import population_legacy
from .sim import EXAMPLE_BETA, EXAMPLES, campaign_fixture, correlation_structure, replicate_study
from .splines import DEFAULT_FOLDS, DEFAULT_K_GRID, DEFAULT_Q

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    input: str
    method: str = "rw"
    model: str = "linear"
    q: int = DEFAULT_Q
    K_grid: tuple[int, ...] = DEFAULT_K_GRID
    folds: int = DEFAULT_FOLDS
    seed: int = 0
    hybrid: bool = False
    group_map: str | None = None
    output_format: str = "table"
    da_limit: int = DEFAULT_DA_LIMIT
    threads: int = 1
    timing: bool = False
    figure: str | None = None

    def request(self) -> AttributionRequest:
        gm = rio.load_group_map(self.group_map) if self.group_map else None
        spline = SplineConfig(self.q, tuple(self.K_grid), self.folds, self.seed) \
            if self.model == "additive" else None
        return AttributionRequest(self.method, self.model, spline, self.hybrid, gm,
                                  self.da_limit, self.threads)


class UsageError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _methods(text: str) -> tuple[str, ...]:
    vals = tuple(v.strip().lower() for v in text.split(",") if v.strip())
    bad = [v for v in vals if v not in ("da", "rw")]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"methods must be da and/or rw, got {text!r}")
    return vals


def cmd_attribute(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    ds = rio.load_csv(cfg.input)
    res = attribute(ds, cfg.request())
    if cfg.output_format == "json":
        out.write(rio.to_json(rio.report_dict(res, cfg.seed, cfg.timing)))
    else:
        header, rows, footer = rio.report_rows(res)
        wall = rio.fmt(res.wall_time.get("total"))
        if cfg.output_format == "csv":
            out.write(rio.render_csv(header, rows, footer, wall if cfg.timing else None))
        else:
            out.write(rio.render_table(header, rows, footer, wall))
    if cfg.figure:
        from .plots import plot_attribution
        plot_attribution(res, cfg.figure)
    return EXIT_OK


def _cell(mean, sd):
    return f"{rio.fmt(mean, 3)} ({rio.fmt(sd, 3)})"


def simulation_tables(summary):
    """Header, per-channel rows and extra rows one row per channel, one column per model and method."""
    keys = list(summary.shares)
    header = ["channel"]
    legacy = None
    if summary.example in (1, 2):
        cfg = EXAMPLES[summary.example]
        C = correlation_structure(cfg.corr, cfg.p, cfg.r)
        legacy = population_legacy(EXAMPLE_BETA, C)
        header += ["beta", "beta^2", "rho^2", "beta*rho"]
    header += [f"{model}:{m.upper()}" for model, m in keys]
    rows = []
    for j, c in enumerate(summary.channels):
        row = [c]
        if legacy is not None:
            row += [rio.fmt(EXAMPLE_BETA[j], 3)]
            row += [rio.fmt(a[j] / a.sum(), 3) for a in (legacy.beta_sq, legacy.rho_sq, legacy.beta_rho)]
        row += [_cell(summary.mean(*k)[j], summary.sd(*k)[j]) for k in keys]
        rows.append(row)
    extra = []
    if summary.example == 3:
        for label, kind in (("R^2", "r2"), ("RMSE", "rmse"), ("RMSE(observed)", "rmse_observed")):
            row = [label]
            for model, m in keys:
                first = next(k for k in keys if k[0] == model) == (model, m)
                row.append(_cell(*summary.stat(kind, model)) if first else "")
            extra.append(row)
    return header, rows, extra


def simulation_dict(summary) -> dict:
    out = {
        "example": summary.example,
        "replicates": summary.replicates,
        "seed": summary.seed,
        "channels": list(summary.channels),
        "results": [
            {"model": model, "method": m,
             "mean": [rio._num(v) for v in summary.mean(model, m)],
             "sd": [rio._num(v) for v in summary.sd(model, m)]}
            for model, m in summary.shares
        ],
    }
    if summary.example == 3:
        out["fit"] = {
            model: {kind: dict(zip(("mean", "sd"), map(rio._num, summary.stat(kind, model))))
                    for kind in ("r2", "rmse", "rmse_observed")}
            for model in ("linear", "additive")
        }
        out["chosen_K"] = [int(k) for k in summary.chosen_K]
    return out


def cmd_simulate(example: int, methods=("da", "rw"), replicates: int = 30, seed: int = 0,
                 output_format: str = "table", figure: str | None = None, threads: int = 1,
                 spline: SplineConfig | None = None, out=None) -> int:
    out = out or sys.stdout
    summary = replicate_study(example, methods, replicates, seed, spline=spline, threads=threads)
    if output_format == "json":
        out.write(rio.to_json(simulation_dict(summary)))
    else:
        header, rows, extra = simulation_tables(summary)
        render = rio.render_csv if output_format == "csv" else rio.render_table
        out.write(render(header, rows + extra))
    if figure:
        from .plots import plot_replication
        plot_replication(summary, figure)
    return EXIT_OK


def cmd_fixture(p: int, signal, n: int, seed: int, output: str, group_map: str | None = None,
                negative=None, out=None) -> int:
    out = out or sys.stdout
    fx = campaign_fixture(p, signal, n, seed, negative)
    rio.write_csv(fx.dataset, output)
    if group_map:
        rio.write_group_map(fx.group_map, group_map)
    out.write(f"wrote {fx.dataset.n} rows x {fx.dataset.p} channels to {output}\n")
    out.write(f"signal channels: {', '.join(fx.signal)}\n")
    out.write(f"negative channels: {', '.join(fx.negative) or 'none'}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="r2attr", description=(
        "Attribute revenue to advertising channels by decomposing regression R-squared."))
    sub = ap.add_subparsers(dest="command", required=True)
    threads = default_threads()

    a = sub.add_parser("attribute", help="attribute revenue in a CSV file to its channels")
    a.add_argument("input", help="CSV with a 'revenue' column followed by channel columns")
    a.add_argument("--method", choices=("da", "rw"), default="rw")
    a.add_argument("--model", choices=("linear", "additive"), default="linear")
    a.add_argument("--q", type=int, default=DEFAULT_Q, help="spline polynomial order")
    a.add_argument("--k-grid", type=_int_list, default=DEFAULT_K_GRID,
                   help="candidate internal knot counts, e.g. 0,1,2,4")
    a.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--hybrid", action="store_true", help="zero channels with nonpositive coefficients")
    a.add_argument("--group-map", help="channel,group CSV for group-level analysis")
    a.add_argument("--format", choices=("table", "json", "csv"), default="table")
    a.add_argument("--da-limit", type=int, default=DEFAULT_DA_LIMIT,
                   help="largest number of variables allowed for dominance analysis")
    a.add_argument("--threads", type=int, default=threads)
    a.add_argument("--timing", action="store_true", help="include stage timings in json/csv output")
    a.add_argument("--figure", help="also write a bar chart of the shares to this file")

    s = sub.add_parser("simulate", help="replicate a simulation study")
    s.add_argument("--example", type=int, choices=(1, 2, 3), required=True)
    s.add_argument("--methods", type=_methods, default=("da", "rw"))
    s.add_argument("--replicates", type=int, default=30)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--q", type=int, default=DEFAULT_Q)
    s.add_argument("--k-grid", type=_int_list, default=DEFAULT_K_GRID)
    s.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    s.add_argument("--format", choices=("table", "json", "csv"), default="table")
    s.add_argument("--threads", type=int, default=threads)
    s.add_argument("--figure", help="also write a bar chart of mean shares to this file")

    f = sub.add_parser("fixture", help="write a synthetic campaign dataset")
    f.add_argument("--p", type=int, default=18)
    f.add_argument("--signal", type=_int_list, default=None,
                   help="1-based signal channel indices (default: the last three)")
    f.add_argument("--negative", type=_int_list, default=None,
                   help="1-based negatively related channel indices")
    f.add_argument("--n", type=int, default=10_000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--output", "-o", required=True)
    f.add_argument("--group-map", help="also write the channel,group map here")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "attribute":
            cfg = RunConfig(args.input, args.method, args.model, args.q, tuple(args.k_grid),
                            args.folds, args.seed, args.hybrid, args.group_map, args.format,
                            args.da_limit, args.threads, args.timing, args.figure)
            return cmd_attribute(cfg)
        if args.command == "simulate":
            if args.replicates < 1:
                raise UsageError("--replicates must be at least 1")
            spline = None
            if (args.q, tuple(args.k_grid), args.folds) != (DEFAULT_Q, DEFAULT_K_GRID, DEFAULT_FOLDS):
                spline = SplineConfig(args.q, tuple(args.k_grid), args.folds, args.seed)
            return cmd_simulate(args.example, args.methods, args.replicates, args.seed,
                                args.format, args.figure, args.threads, spline)
        p = args.p
        signal = args.signal or tuple(range(max(1, p - 2), p + 1))
        return cmd_fixture(p, signal, args.n, args.seed, args.output, args.group_map, args.negative)
    except (UsageError, DALimitError) as exc:
        print(f"r2attr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, DataError) as exc:
        print(f"r2attr: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"r2attr: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"r2attr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
