"""Command-line entry point.

Seven subcommands drive the toolkit end to end: `simulate` and
`steady` run the plant, `uncertainty`, `morris`, `filter`, and
`sweep` run the sampling studies, and `chart` renders CSV outputs to
SVG. A single JSON config feeds every command; flags override config
scalars. Exit codes: 0 ok, 2 config error, 3 solver failure, 4 too
many non-converged Monte Carlo samples.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys

import numpy as np

from .accounting import (AccountingError, TEAInputs, bsm1_operating_bindings,
                         lca_total, tea_annualize)
from .charts import (ChartError, render_ecdf, render_heatmap,
                     render_morris_scatter, render_timeseries)
from .config import ConfigError, load_config
from .flowsheet import (METRIC_NAMES, ConvergenceError, FlowsheetError,
                        SolverError, _fmt, assemble_ode, bsm1_initial_state,
                        build_bsm1, effluent_metrics, integrate, steady_state,
                        write_steady_csv)
from .uq import (MonteCarloError, SampleMatrix, UQError, bsm1_binding,
                 grid_sweep, mc_filter, morris, run_monte_carlo, sample_lhs)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CONVERGENCE = 4


def _load(args):
    cfg = load_config(args.config)
    run = cfg.run
    overrides = {}
    for name in ("seed", "workers", "t_end", "rtol", "atol", "out"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    if overrides:
        run = dataclasses.replace(run, **overrides)
        cfg = dataclasses.replace(cfg, run=run)
    return cfg


def _outdir(cfg):
    os.makedirs(cfg.run.out, exist_ok=True)
    return cfg.run.out


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_rows(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    _write_text(path, "\n".join(lines) + "\n")


def _build_problem(cfg):
    return assemble_ode(build_bsm1(cfg.settings, cfg.asm1, cfg.settling))


def _binding(cfg):
    return bsm1_binding(cfg.settings, cfg.asm1, cfg.settling,
                        specs=cfg.distributions,
                        tol_ss=cfg.run.mc_tol_ss, t_max=cfg.run.mc_t_max,
                        check_interval=cfg.run.check_interval,
                        warm_start=cfg.run.warm_start)


def cmd_simulate(args):
    cfg = _load(args)
    out = _outdir(cfg)
    problem = _build_problem(cfg)
    traj = integrate(problem, cfg.run.t_end, bsm1_initial_state(problem),
                     rtol=cfg.run.rtol, atol=cfg.run.atol)
    path = os.path.join(out, "trajectory.csv")
    traj.to_csv(path)
    print(f"simulate: {len(traj.times)} rows -> {path}")
    return EXIT_OK


def cmd_steady(args):
    cfg = _load(args)
    out = _outdir(cfg)
    problem = _build_problem(cfg)
    ss = steady_state(problem, bsm1_initial_state(problem),
                      tol_ss=cfg.run.tol_ss, t_max=cfg.run.t_max,
                      check_interval=cfg.run.check_interval)
    metrics = effluent_metrics(problem, ss)
    path = os.path.join(out, "steady.csv")
    write_steady_csv(path, problem, ss, metrics)
    print(f"steady: converged t={ss.diagnostics['time']:g} d -> {path}")
    if cfg.has_accounting:
        tea_path = os.path.join(out, "tea_lca.csv")
        _write_tea_lca(tea_path, cfg, problem, ss)
        print(f"steady: accounting -> {tea_path}")
    return EXIT_OK


def _write_tea_lca(path, cfg, problem, ss):
    tea_cfg = cfg.tea
    inventory, opex = bsm1_operating_bindings(
        problem, ss,
        electricity_item=cfg.items.get("aeration_electricity"),
        sludge_item=cfg.items.get("sludge_disposal"),
        electricity_price=tea_cfg.electricity_price,
        sludge_price=tea_cfg.sludge_price)
    inputs = TEAInputs(capital=tea_cfg.capital,
                       operating_costs={**tea_cfg.operating_costs, **opex},
                       revenues=tea_cfg.revenues,
                       discount_rate=tea_cfg.discount_rate,
                       horizon_yr=tea_cfg.horizon_yr,
                       income_tax=tea_cfg.income_tax,
                       population=tea_cfg.population)
    tea = tea_annualize(inputs)
    header = ["scenario", "net_annual_cost", "per_capita_cost"]
    row = ["steady", _fmt(tea.net_annual),
           "" if tea.per_capita is None else _fmt(tea.per_capita)]
    if cfg.indicators:
        lca = lca_total(inventory, cfg.indicators, tea_cfg.lca_horizon_days)
        for ind in cfg.indicators:
            header.append(f"{ind.id}_total")
            row.append(_fmt(lca.totals[ind.id]))
            for item_id, v in lca.breakdown[ind.id].items():
                header.append(f"{ind.id}:{item_id}")
                row.append(_fmt(v))
    _write_rows(path, header, [row])


def cmd_uncertainty(args):
    cfg = _load(args)
    out = _outdir(cfg)
    binding = _binding(cfg)
    samples = sample_lhs(binding.parameters, cfg.run.n, cfg.run.seed)
    result = run_monte_carlo(binding, samples, workers=cfg.run.workers)
    _write_samples_csv(os.path.join(out, "samples.csv"), samples)
    _write_metrics_csv(os.path.join(out, "metrics.csv"), result)
    print(f"uncertainty: {samples.n} samples, "
          f"{result.n_failed} non-converged -> {out}")
    return EXIT_OK


def _write_samples_csv(path, samples):
    rows = [[_fmt(v) for v in row] for row in samples.values]
    _write_rows(path, list(samples.names), rows)


def _write_metrics_csv(path, result):
    header = list(result.metrics) + ["converged"]
    rows = []
    for row, ok in zip(result.table, result.converged):
        rows.append([_fmt(v) for v in row] + ["1" if ok else "0"])
    _write_rows(path, header, rows)


def cmd_morris(args):
    cfg = _load(args)
    out = _outdir(cfg)
    binding = _binding(cfg)
    result = morris(binding, n_trajectory=cfg.run.n_trajectory,
                    levels=cfg.run.levels, seed=cfg.run.seed,
                    workers=cfg.run.workers)
    path = os.path.join(out, "morris.csv")
    header = ["parameter", "metric", "mu_star", "sigma", "mu_star_norm",
              "sigma_norm", "ci95"]
    rows = []
    for i, p in enumerate(result.parameters):
        for j, m in enumerate(result.metrics):
            rows.append([p, m, _fmt(result.mu_star[i, j]),
                         _fmt(result.sigma[i, j]),
                         _fmt(result.mu_star_norm[i, j]),
                         _fmt(result.sigma_norm[i, j]),
                         _fmt(result.ci95[i, j])])
    _write_rows(path, header, rows)
    print(f"morris: {result.n_simulations} simulations -> {path}")
    return EXIT_OK


def _read_csv_columns(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ConfigError(f"{path} is empty")
            rows = list(reader)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}")
    return header, rows


def _column_floats(header, rows, name, path):
    idx = header.index(name)
    try:
        return np.array([float(r[idx]) for r in rows])
    except (ValueError, IndexError):
        raise ConfigError(f"column {name!r} in {path} is not numeric")


def cmd_filter(args):
    cfg = _load(args)
    out = _outdir(cfg)
    sp = os.path.join(out, "samples.csv")
    mp = os.path.join(out, "metrics.csv")
    s_header, s_rows = _read_csv_columns(sp)
    m_header, m_rows = _read_csv_columns(mp)
    metric = cfg.filter.metric
    if metric not in m_header:
        raise ConfigError(f"metrics.csv has no column {metric!r}")
    if len(s_rows) != len(m_rows):
        raise ConfigError("samples.csv and metrics.csv row counts differ")
    values = np.array([[float(v) for v in r] for r in s_rows])
    samples = SampleMatrix(tuple(s_header), values, seed=cfg.run.seed,
                           method="loaded")
    mv = _column_floats(m_header, m_rows, metric, mp)
    converged = None
    if "converged" in m_header:
        converged = _column_floats(m_header, m_rows, "converged", mp) > 0.5
    result = mc_filter(samples, mv, cfg.filter.threshold, metric=metric,
                       converged=converged)
    path = os.path.join(out, "filter.csv")
    header = ["parameter", "metric", "D", "p", "n_above", "n_below"]
    rows = [[p, metric, _fmt(result.d[j]), _fmt(result.p[j]),
             str(result.n_above), str(result.n_below)]
            for j, p in enumerate(result.parameters)]
    _write_rows(path, header, rows)
    note = " (low confidence)" if result.low_confidence else ""
    print(f"filter: {metric} > {cfg.filter.threshold:g}, "
          f"{result.n_above} above / {result.n_below} below{note} -> {path}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load(args)
    out = _outdir(cfg)
    binding = _binding(cfg)
    sw = cfg.sweep
    x_values = np.linspace(sw.x_min, sw.x_max, sw.nx)
    y_values = np.linspace(sw.y_min, sw.y_max, sw.ny)
    result = grid_sweep(binding, sw.x, sw.y, x_values, y_values,
                        workers=cfg.run.workers)
    path = os.path.join(out, "sweep.csv")
    header = [sw.x, sw.y] + list(result.metrics) + ["converged"]
    rows = []
    for j in range(len(y_values)):
        for i in range(len(x_values)):
            row = [_fmt(x_values[i]), _fmt(y_values[j])]
            row += [_fmt(result.grids[k, j, i])
                    for k in range(len(result.metrics))]
            row.append("0" if result.missing[j, i] else "1")
            rows.append(row)
    _write_rows(path, header, rows)
    n_missing = int(result.missing.sum())
    print(f"sweep: {len(rows)} grid points, {n_missing} missing -> {path}")
    return EXIT_OK


def cmd_chart(args):
    header, rows = _read_csv_columns(args.input)
    kind = args.kind
    if kind == "timeseries":
        svg = _chart_timeseries(args, header, rows)
    elif kind == "ecdf":
        svg = _chart_ecdf(args, header, rows)
    elif kind == "morris_scatter":
        svg = _chart_morris(args, header, rows)
    else:
        svg = _chart_heatmap(args, header, rows)
    _write_text(args.output, svg)
    print(f"chart: {kind} -> {args.output}")
    return EXIT_OK


def _require_columns(header, needed, path):
    missing = [c for c in needed if c not in header]
    if missing:
        raise ConfigError(
            f"{path} is missing columns: {', '.join(missing)}")


def _chart_timeseries(args, header, rows):
    _require_columns(header, ["t_d"], args.input)
    wanted = [c.strip() for c in args.columns.split(",")] if args.columns \
        else [c for c in header if c != "t_d"]
    _require_columns(header, wanted, args.input)
    t = _column_floats(header, rows, "t_d", args.input)
    series = [(c, _column_floats(header, rows, c, args.input))
              for c in wanted]
    return render_timeseries(t, series,
                             x_label=args.x_label or "t_d",
                             y_label=args.y_label or "",
                             title=args.title or "")


def _chart_ecdf(args, header, rows):
    column = args.column or (header[0] if header else "")
    _require_columns(header, [column], args.input)
    v = _column_floats(header, rows, column, args.input)
    return render_ecdf(v, column=column, threshold=args.threshold,
                       x_label=args.x_label, y_label=args.y_label
                       or "cumulative probability", title=args.title or "")


def _chart_morris(args, header, rows):
    needed = ["parameter", "metric", "mu_star_norm", "sigma_norm"]
    _require_columns(header, needed, args.input)
    i_p = header.index("parameter")
    i_m = header.index("metric")
    metrics = []
    for r in rows:
        if r[i_m] not in metrics:
            metrics.append(r[i_m])
    metric = args.metric or (metrics[0] if metrics else "")
    if metric not in metrics:
        raise ConfigError(f"{args.input} has no metric {metric!r}")
    i_mu = header.index("mu_star_norm")
    i_sg = header.index("sigma_norm")
    points = [(r[i_p], float(r[i_mu]), float(r[i_sg]))
              for r in rows if r[i_m] == metric]
    return render_morris_scatter(points, metric=metric,
                                 title=args.title or "")


def _chart_heatmap(args, header, rows):
    if len(header) < 3:
        raise ConfigError(f"{args.input} needs x, y, and metric columns")
    x_name, y_name = header[0], header[1]
    metric = args.metric or header[2]
    _require_columns(header, [metric], args.input)
    xs = _column_floats(header, rows, x_name, args.input)
    ys = _column_floats(header, rows, y_name, args.input)
    vs = _column_floats(header, rows, metric, args.input)
    x_values = list(dict.fromkeys(xs.tolist()))
    y_values = list(dict.fromkeys(ys.tolist()))
    grid = np.full((len(y_values), len(x_values)), np.nan)
    xi = {v: i for i, v in enumerate(x_values)}
    yi = {v: j for j, v in enumerate(y_values)}
    for x, y, v in zip(xs, ys, vs):
        grid[yi[y], xi[x]] = v
    return render_heatmap(x_values, y_values, grid,
                          x_label=args.x_label or x_name,
                          y_label=args.y_label or y_name,
                          metric=metric, title=args.title or "")


def _add_common(p):
    p.add_argument("--config", metavar="PATH",
                   help="JSON config (default: bundled BSM1 baseline)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--workers", type=int, metavar="N")
    p.add_argument("--t-end", dest="t_end", type=float, metavar="DAYS")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="asmbench",
        description="Activated-sludge benchmark simulation and "
                    "uncertainty analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("simulate", cmd_simulate, "integrate the plant, write "
                                   "trajectory.csv"),
        ("steady", cmd_steady, "solve to steady state, write steady.csv "
                               "(and tea_lca.csv with accounting config)"),
        ("uncertainty", cmd_uncertainty, "LHS Monte Carlo, write "
                                         "samples.csv and metrics.csv"),
        ("morris", cmd_morris, "Morris screening, write morris.csv"),
        ("filter", cmd_filter, "KS filtering of an existing "
                               "samples/metrics pair, write filter.csv"),
        ("sweep", cmd_sweep, "two-parameter grid sweep, write sweep.csv"),
    ]
    for name, func, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(func=func)
    p = sub.add_parser("chart", help="render a CSV to a deterministic SVG")
    p.add_argument("kind", choices=["timeseries", "ecdf", "morris_scatter",
                                    "heatmap"])
    p.add_argument("input", help="input CSV path")
    p.add_argument("output", help="output SVG path")
    p.add_argument("--column", help="value column (ecdf)")
    p.add_argument("--columns", help="comma-separated columns (timeseries)")
    p.add_argument("--metric", help="metric name (morris_scatter, heatmap)")
    p.add_argument("--threshold", type=float, help="threshold line (ecdf)")
    p.add_argument("--x-label", dest="x_label")
    p.add_argument("--y-label", dest="y_label")
    p.add_argument("--title")
    p.set_defaults(func=cmd_chart)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ChartError, UQError, AccountingError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MonteCarloError as e:
        print(f"convergence failure: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SolverError, ConvergenceError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except FlowsheetError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
