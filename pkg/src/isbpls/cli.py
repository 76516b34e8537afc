"""Command-line entry point: ``isbpls {gen,gen-prices,fit,stream,mc,track,replay}``.

Every command writes its CSV outputs plus ``config.json`` into ``--out``.
``isbpls replay DIR/config.json`` reruns the recorded command.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import csvio
from .errors import DataError, DimensionMismatch, InvalidConfig, InvalidHyper, NonFinite, ScheduleGap
from .montecarlo import (
    STATIONARY_WINDOWS, MCConfig, aggregate, lambda_sweep, run_experiment, settle_stats, window_mean,
)
from .offline import HyperParams, fit_sbpls
from .online import init_state, step
from .simulate import SCHEDULES, simulate
from .tracking import (
    PERIODS_PER_YEAR, backtest_ispls, enhance, load_prices, random_portfolio_baseline, synthetic_market,
    to_returns, write_prices,
)

log = logging.getLogger("isbpls")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4
PATH_ARGS = ("out", "data", "prices")


class UsageError(Exception):
    pass


def _hyper_args(p: argparse.ArgumentParser, lam: float, components: int, theta_help: str):
    g = p.add_argument_group("model")
    g.add_argument("--alpha", type=float, default=1e-5, help="ridge mixing weight in [0, 1]")
    g.add_argument("--lambda", dest="lam", type=float, default=lam, help="forgetting factor in (0, 1]")
    g.add_argument("--components", type=int, default=components, help="number of PLS components R")
    g.add_argument("--theta", type=int, action="append", help=theta_help)
    g.add_argument("--tau", type=float, default=1e-8, help="offline inner-loop tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isbpls", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="simulate AR(1)-factor streams")
    p.add_argument("--T", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default="paper-drift")
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-prices", help="synthetic weekly prices for two indices")
    p.add_argument("--stocks", type=int, default=100)
    p.add_argument("--T", type=int, default=291, help="number of weekly returns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    theta_help = "variables kept per component; repeat once per component (default: all)"
    p = sub.add_parser("fit", help="offline Sparse Bridge PLS on a stream CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--no-center", dest="center", action="store_false")
    _hyper_args(p, 1.0, 1, theta_help)
    p.add_argument("--out", required=True)

    p = sub.add_parser("stream", help="run iSB-PLS over a stream CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--center", action="store_true", help="track forgotten means and center online")
    _hyper_args(p, 0.98, 2, theta_help)
    p.add_argument("--out", required=True)

    p = sub.add_parser("mc", help="Monte Carlo percent-correct curves")
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default="paper-drift")
    p.add_argument("--T", type=int, default=None, help="horizon (default 400, or 100 for static)")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--offline-prefix", type=int, default=None, help="also fit offline on the first N samples")
    p.add_argument("--no-center", dest="center", action="store_false")
    _hyper_args(p, 0.98, 2, theta_help)
    p.add_argument("--sweep", type=float, action="append", help="forgetting factor for a sweep; repeatable")
    p.add_argument("--out", required=True)

    p = sub.add_parser("track", help="enhanced index-tracking backtest")
    p.add_argument("--prices", required=True)
    p.add_argument("--q", type=int, default=2, help="number of index columns")
    p.add_argument("--portfolio-size", type=int, default=10)
    p.add_argument("--enhance", type=float, default=0.15, help="annual excess return added to each index")
    p.add_argument("--periods-per-year", type=int, default=PERIODS_PER_YEAR)
    p.add_argument("--n-random", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lag", type=int, choices=(0, 1), default=0)
    p.add_argument("--burn-in", type=int, default=None)
    _hyper_args(p, 0.99, 1, "variables kept by components after the first")
    p.add_argument("--out", required=True)

    p = sub.add_parser("replay", help="rerun a command from its config.json")
    p.add_argument("config")
    p.add_argument("--out", help="write to this directory instead of the recorded one")
    return ap


def _subparser(ap: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    action = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices[name]


def canonical_argv(ap: argparse.ArgumentParser, args: argparse.Namespace) -> list[str]:
    """Flag list that reproduces ``args`` exactly, with every option spelled out."""
    argv = [args.command]
    for a in _subparser(ap, args.command)._actions:
        if not a.option_strings or a.dest == "help":
            continue
        v = getattr(args, a.dest)
        flag = a.option_strings[0]
        if isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if v != a.default:
                argv.append(flag)
        elif isinstance(a, argparse._AppendAction):
            for item in v or []:
                argv += [flag, repr(item)]
        elif v is not None:
            argv += [flag, repr(v) if isinstance(v, float) else str(v)]
    return argv


def _hyper(args, p: int) -> HyperParams:
    thetas = tuple(args.theta) if args.theta else None
    if thetas is not None and len(thetas) not in (1, args.components):
        raise UsageError(f"--theta given {len(thetas)} times for {args.components} components")
    hp = HyperParams(alpha=args.alpha, lam=args.lam, R=args.components, thetas=thetas, tau=args.tau)
    try:
        hp.validate(p)
    except InvalidHyper as exc:
        raise UsageError(str(exc)) from None
    return hp


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_gen(args, out: Path):
    if args.T < 2:
        raise UsageError("--T must be at least 2")
    sim = simulate(args.T, args.schedule, args.seed)
    csvio.write_stream(out / "stream.csv", sim.X, sim.Y)
    csvio.write_truth(out / "truth.csv", sim)


def cmd_gen_prices(args, out: Path):
    if args.T < 2 or args.stocks < 1:
        raise UsageError("--T must be at least 2 and --stocks positive")
    write_prices(out / "prices.csv", synthetic_market(args.stocks, args.T, args.seed))


def cmd_fit(args, out: Path):
    _, X, Y = csvio.read_stream(args.data)
    model = fit_sbpls(X, Y, _hyper(args, X.shape[1]), center=args.center)
    q = Y.shape[1]
    _write_csv(out / "coefficients.csv", ["variable_index", *(f"beta_{j + 1}" for j in range(q))],
               [[i + 1, *map(csvio.fmt, row)] for i, row in enumerate(model.beta)])
    _write_csv(out / "weights.csv", ["component", "variable_index", "weight"],
               [[r + 1, int(i) + 1, csvio.fmt(model.U[i, r])]
                for r in range(model.U.shape[1]) for i in model.selected[r]])
    _write_csv(out / "loadings.csv", ["component", *(f"w_{j + 1}" for j in range(q))],
               [[r + 1, *map(csvio.fmt, row)] for r, row in enumerate(model.W)])
    if args.center:
        _write_csv(out / "means.csv", ["column", "mean"],
                   [[f"x{i + 1}", csvio.fmt(v)] for i, v in enumerate(model.x_mean)]
                   + [[f"y{j + 1}", csvio.fmt(v)] for j, v in enumerate(model.y_mean)])


def cmd_stream(args, out: Path):
    t_idx, X, Y = csvio.read_stream(args.data)
    state = init_state(X.shape[1], Y.shape[1], _hyper(args, X.shape[1]), center=args.center)
    q = Y.shape[1]
    with open(out / "selection.csv", "w", newline="", encoding="utf-8") as fs, \
            open(out / "predictions.csv", "w", newline="", encoding="utf-8") as fp:
        sel = csvio.SelectionWriter(fs)
        pw = csv.writer(fp, lineterminator="\n")
        pw.writerow(["t", *(f"y_hat{j + 1}" for j in range(q)), *(f"y_prior{j + 1}" for j in range(q))])
        for t, x, y in zip(t_idx, X, Y):
            o = step(state, x, y)
            sel.write(int(t), state.U)
            pw.writerow([int(t), *map(csvio.fmt, o.y_hat), *map(csvio.fmt, o.y_prior)])


def cmd_mc(args, out: Path):
    T = args.T or (100 if args.schedule == "static" else 400)
    if T < 2 or args.reps < 2:
        raise UsageError("--T must be at least 2 and --reps at least 2")
    hyper = _hyper(args, 60)
    cfg = MCConfig(T, args.schedule, hyper, args.center, args.offline_prefix)
    breakpoints = [101, 301] if args.schedule == "paper-drift" else []
    breakpoints = [b for b in breakpoints if b <= T]
    if args.sweep:
        rows = []
        for res in lambda_sweep(cfg, args.sweep, args.reps, args.seed, args.workers, breakpoints):
            csvio.write_aggregate(out / f"aggregate_lambda{res.lam!r}.csv", res.curve)
            for r in range(hyper.R):
                rec = settle_stats(res.curve, breakpoints, component=r)
                for b in breakpoints:
                    rows.append([repr(res.lam), b, r + 1, "" if rec[b] is None else rec[b],
                                 csvio.fmt(window_mean(res.curve.mean[:, r])),
                                 csvio.fmt(window_mean(res.curve.std[:, r]))])
        _write_csv(out / "recovery.csv",
                   ["lambda", "breakpoint", "component", "recovery_steps", "window_mean", "window_std"], rows)
        return
    traces = run_experiment(cfg, args.reps, args.seed, args.workers)
    curve = aggregate(traces)
    csvio.write_aggregate(out / "aggregate.csv", curve)
    if breakpoints:
        rows = []
        for r in range(hyper.R):
            rec = settle_stats(curve, breakpoints, component=r)
            rows += [[b, r + 1, "" if rec[b] is None else rec[b]] for b in breakpoints]
        _write_csv(out / "recovery.csv", ["breakpoint", "component", "recovery_steps"], rows)
    if args.offline_prefix:
        n = args.offline_prefix
        off = np.stack([tr.offline_percent for tr in traces])
        agree = np.stack([np.all(tr.offline_masks == tr.masks[n - 1], axis=1) for tr in traces])
        _write_csv(out / "offline.csv", ["component", "mean", "std", "online_agreement"],
                   [[r + 1, csvio.fmt(off[:, r].mean()), csvio.fmt(off[:, r].std()),
                     csvio.fmt(agree[:, r].mean())] for r in range(hyper.R)])


def cmd_track(args, out: Path):
    table = load_prices(args.prices, args.q)
    idx_ret, stock_ret = to_returns(table)
    targets = enhance(idx_ret, args.enhance, args.periods_per_year)
    p = stock_ret.shape[1]
    if not 1 <= args.portfolio_size <= p:
        raise UsageError(f"--portfolio-size must lie in [1, {p}]")
    thetas = list(args.theta or [])
    args_for_hyper = argparse.Namespace(**{**vars(args), "theta": [args.portfolio_size] + thetas})
    if args.components > 1 and len(thetas) == 1:
        args_for_hyper.theta = [args.portfolio_size] + thetas * (args.components - 1)
    hyper = _hyper(args_for_hyper, p)
    res = backtest_ispls(stock_ret, targets, hyper, args.portfolio_size, args.burn_in, args.lag)
    base = random_portfolio_baseline(stock_ret, targets, args.n_random, args.portfolio_size, hyper.lam,
                                     args.seed, res.burn_in, args.lag)
    q = targets.shape[1]
    header = (["t", "date"] + [f"cumulative_model_{j + 1}" for j in range(q)]
              + [f"cumulative_target_{j + 1}" for j in range(q)]
              + [f"cumulative_random_mean_{j + 1}" for j in range(q)])
    rows = [[t + 1, table.dates[t + 1], *map(csvio.fmt, res.cumulative[t]), *map(csvio.fmt, res.target_cumulative[t]),
             *map(csvio.fmt, base.cumulative[t])] for t in range(len(targets))]
    _write_csv(out / "performance.csv", header, rows)
    hrows = [[t + 1, int(i) + 1, csvio.fmt(res.sparse_weights[t, i]), *map(csvio.fmt, res.weights[t, i])]
             for t in range(len(targets)) for i in res.holdings[t]]
    _write_csv(out / "holdings.csv", ["t", "stock_index", "weight", *(f"beta_{j + 1}" for j in range(q))], hrows)
    _write_csv(out / "baseline.csv", ["portfolios_used", "portfolios_skipped"], [[len(base.members), base.skipped]])


COMMANDS = {"gen": cmd_gen, "gen-prices": cmd_gen_prices, "fit": cmd_fit, "stream": cmd_stream,
            "mc": cmd_mc, "track": cmd_track}


def run(argv: list[str]) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "replay":
        try:
            recorded = json.loads(Path(args.config).read_text(encoding="utf-8"))["argv"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"isbpls: cannot read config {args.config}: {exc}", file=sys.stderr)
            return EXIT_DATA
        if args.out:
            i = recorded.index("--out")
            recorded = recorded[: i + 1] + [os.path.abspath(args.out)] + recorded[i + 2 :]
        return run(recorded)
    for name in PATH_ARGS:
        if getattr(args, name, None):
            setattr(args, name, os.path.abspath(getattr(args, name)))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"isbpls {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DimensionMismatch, NonFinite, InvalidConfig, ScheduleGap, OSError) as exc:
        print(f"isbpls {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ArithmeticError as exc:
        print(f"isbpls {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    config = {"command": args.command, "argv": canonical_argv(ap, args),
              "args": {k: v for k, v in vars(args).items() if k != "verbose"}}
    (out / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("wrote %s", out)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
