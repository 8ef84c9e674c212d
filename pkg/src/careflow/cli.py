"""Command line interface.

Subcommands: fit-los, fit-arrivals, simulate, evaluate, sweep, whatif,
validate, serve. Exit codes: 0 success, 2 configuration problem, 3 data
problem (malformed or insufficient input data).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .census import chi_square_gof, fit_arrivals, load_residents
from .config import data_path, load_config, load_preset_scenario, config_hash
from .engine import run as run_simulation, summarize
from .errors import ConfigError, DataError
from .rng import RngStream
from .sampling import sample_by_total_hazard
from .staffing import (
    StaffingStrategy,
    compare,
    cost_model_from_dict,
    suggest_ratio,
)
from .store import RunStore, read_output_dir, write_output_dir
from .survival import fit as fit_los, kaplan_meier
from .validate import km_overlay, ks_two_sample

__all__ = ["main"]


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"wrote {path}")


def _load_cost(path: str | None):
    cost_file = Path(path) if path else data_path("cost_default.json")
    try:
        payload = json.loads(cost_file.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"cost file not found: {cost_file}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{cost_file} is not valid JSON: {exc}") from None
    return cost_model_from_dict(payload)


def _parse_strategy_list(text: str) -> list[StaffingStrategy]:
    strategies = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        ctype, sep, ratio = token.partition(":")
        if not sep:
            raise ConfigError(f"--strategies: expected TYPE:RATIO, got {token!r}")
        try:
            strategies.append(
                StaffingStrategy(caregiver_type=ctype, residents_per_staff=int(ratio))
            )
        except ValueError:
            raise ConfigError(f"--strategies: ratio in {token!r} is not an integer") from None
    if not strategies:
        raise ConfigError("--strategies: at least one TYPE:RATIO pair is required")
    return strategies


def _print_report_rows(rows) -> None:
    header = (
        f"{'strategy':<12} {'total_cost':>14} {'ci_lower':>12} {'ci_upper':>12} "
        f"{'planned':>12} {'under_cost':>12} {'under_min':>10} {'over_min':>10}"
    )
    print(header)
    print("-" * len(header))
    for row in rows:
        print(
            f"{row.strategy.label:<12} {row.total_cost_mean:>14.2f} "
            f"{row.total_cost_ci_lower:>12.2f} {row.total_cost_ci_upper:>12.2f} "
            f"{row.planned_cost_mean:>12.2f} {row.understaffing_cost_mean:>12.2f} "
            f"{row.avg_daily_understaffing_min:>10.2f} {row.avg_daily_overstaffing_min:>10.2f}"
        )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_fit_los(args) -> int:
    table = load_residents(args.residents)
    model = fit_los(table.dataset(), tolerance=args.tolerance)
    n_cens = sum(1 for obs in table.observations if obs.censored)
    print(
        f"fit {len(table.observations)} stays ({n_cens} censored), "
        f"log-likelihood {model.log_likelihood:.4f}, "
        f"{model.iterations} iterations, converged={model.converged}"
    )
    payload = {
        "dispositions": [],
        "log_likelihood": model.log_likelihood,
        "iterations": model.iterations,
        "converged": model.converged,
        "n_observations": len(table.observations),
        "n_censored": n_cens,
    }
    for mu in model.dispositions:
        params = model.params[mu]
        print(f"  {mu.label:<12} eta={params.eta:.6f}  sigma={params.sigma:.6f}")
        payload["dispositions"].append(
            {"index": mu.index, "label": mu.label, "eta": params.eta, "sigma": params.sigma}
        )
    _write_json(args.json, payload)
    return 0


def _read_counts(path: str) -> list[int]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"counts file not found: {path}") from None
    counts = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line_no == 1 and not line.lstrip("-").isdigit():
            continue  # tolerate a single header line
        try:
            counts.append(int(line))
        except ValueError:
            raise DataError(f"{path}:{line_no}: not an integer count: {line!r}") from None
    if not counts:
        raise DataError(f"{path}: no counts found")
    return counts


def _cmd_fit_arrivals(args) -> int:
    counts = _read_counts(args.counts)
    model = fit_arrivals(counts, family=args.family)
    if model.family == "negbinom":
        print(f"negative binomial: r={model.r:.6f}  p={model.p:.6f}  mean/day={model.mean():.4f}")
        payload = {"family": "negbinom", "r": model.r, "p": model.p}
    else:
        print(f"poisson: lam={model.lam:.6f}")
        payload = {"family": "poisson", "lam": model.lam}
    payload["mean_per_day"] = model.mean()
    try:
        gof = chi_square_gof(counts, model)
        print(
            f"chi-square GOF: statistic={gof.statistic:.4f} dof={gof.dof} "
            f"p={gof.p_value:.4f} ({gof.bins} pooled bins)"
        )
        payload["gof"] = {
            "statistic": gof.statistic,
            "p_value": gof.p_value,
            "dof": gof.dof,
            "bins": gof.bins,
        }
    except DataError as exc:
        print(f"chi-square GOF skipped: {exc}")
        payload["gof"] = None
    _write_json(args.json, payload)
    return 0


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    output = run_simulation(config, parallel=args.parallel, max_workers=args.workers)
    if args.out:
        target = Path(args.out)
        write_output_dir(output, target)
    else:
        store = RunStore(args.data_dir)
        record = store.create_run(config)
        target = store.persist_run(record, output)
        print(f"run_id {record.run_id}")
    frame = summarize(output)
    print(f"config_hash {output.config_hash}")
    print(f"wrote {target}")
    print(
        f"post-warmup census mean {float(frame.census.mean.mean()):.2f} "
        f"(days {frame.days[0]}..{frame.days[-1]}, {config.replications} replications)"
    )
    for ctype, series in frame.demand.items():
        print(f"post-warmup {ctype} demand mean {float(series.mean.mean()):.1f} min/day")
    return 0


def _cmd_evaluate(args) -> int:
    output = read_output_dir(args.run_dir)
    cost = _load_cost(args.cost_file)
    strategies = _parse_strategy_list(args.strategies)
    report = compare(output, strategies, cost, fixed_census=args.fixed_census)
    _print_report_rows(report.rows)
    run_dir = Path(args.run_dir)
    (run_dir / "report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    from .staffing import report_to_csv

    report_to_csv(report, run_dir / "report.csv")
    print(f"wrote {run_dir / 'report.json'} and {run_dir / 'report.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    output = read_output_dir(args.run_dir)
    cost = _load_cost(args.cost_file)
    best, evaluations = suggest_ratio(
        output,
        args.type,
        cost,
        k_min=args.k_min,
        k_max=args.k_max,
        fixed_census=args.fixed_census,
    )
    _print_report_rows(evaluations)
    print(
        f"suggested ratio for {args.type}: 1:{best.strategy.residents_per_staff} "
        f"(total cost {best.total_cost_mean:.2f})"
    )
    _write_json(
        args.json,
        {
            "caregiver_type": args.type,
            "suggested": best.to_dict(),
            "evaluations": [ev.to_dict() for ev in evaluations],
        },
    )
    return 0


def _cmd_whatif(args) -> int:
    from dataclasses import replace

    base = load_config(args.config)
    cost = _load_cost(args.cost_file)
    strategies = _parse_strategy_list(args.strategies)
    names = [token.strip() for token in args.scenarios.split(",") if token.strip()]
    if not names:
        raise ConfigError("--scenarios: at least one scenario name is required")
    out_root = Path(args.out) if args.out else None
    print(
        f"{'scenario':<12} {'census':>8} " +
        " ".join(f"{'demand_' + s.caregiver_type:>12}" for s in strategies) +
        " " + " ".join(f"{s.label + ' cost':>16}" for s in strategies)
    )
    for name in names:
        scenario = load_preset_scenario(name) if name in ("baseline", "S1", "S2", "S3") \
            else _load_scenario_file(name)
        config = replace(base, scenario=scenario)
        output = run_simulation(config, parallel=args.parallel, max_workers=args.workers)
        if out_root is not None:
            write_output_dir(output, out_root / scenario.name)
        frame = summarize(output)
        report = compare(output, strategies, cost)
        demand_cells = " ".join(
            f"{float(frame.demand[s.caregiver_type].mean.mean()):>12.1f}" for s in strategies
        )
        cost_cells = " ".join(f"{row.total_cost_mean:>16.2f}" for row in report.rows)
        print(
            f"{scenario.name:<12} {float(frame.census.mean.mean()):>8.2f} "
            f"{demand_cells} {cost_cells}"
        )
    if out_root is not None:
        print(f"wrote per-scenario run directories under {out_root}")
    return 0


def _load_scenario_file(path_text: str):
    from .census import scenario_from_dict
    from .config import resolve_includes

    path = Path(path_text)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(
            f"--scenarios: {path_text!r} is neither a preset (baseline/S1/S2/S3) "
            "nor a readable scenario file"
        ) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    try:
        return scenario_from_dict(resolve_includes(payload, path.parent))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_validate(args) -> int:
    table = load_residents(args.residents)
    config = load_config(args.config)
    rng = RngStream(seed=args.seed, stream_id=0).generator()
    sim_times, _ = sample_by_total_hazard(config.los_model, rng, size=args.samples)

    observed_all = np.array([obs.t_days for obs in table.observations])
    event_flags = np.array([not obs.censored for obs in table.observations])
    uncensored = observed_all[event_flags]
    if uncensored.size == 0:
        raise DataError("resident data has no uncensored stays to compare")

    ks = ks_two_sample(uncensored, sim_times)
    print(
        f"KS (uncensored observed vs {args.samples} simulated stays): "
        f"D={ks.statistic:.4f} p={ks.p_value:.4f}"
    )

    observed_km = kaplan_meier(observed_all, event_flags)
    simulated_km = kaplan_meier(sim_times, np.ones(sim_times.size, dtype=bool))
    overlay = km_overlay(observed_km, simulated_km)
    print(
        f"survival overlay: max vertical gap {overlay.max_gap:.4f} "
        f"over {overlay.times.size} time points"
    )
    _write_json(
        args.json,
        {
            "ks": {"statistic": ks.statistic, "p_value": ks.p_value,
                   "n_observed": ks.n1, "n_simulated": ks.n2},
            "km_overlay": {"max_gap": overlay.max_gap},
        },
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    ui_dir = None
    if args.ui:
        ui_dir = Path(args.ui)
        if not (ui_dir / "index.html").is_file():
            raise ConfigError(f"ui: no index.html under {ui_dir}")
    app = create_app(
        store=RunStore(args.data_dir), max_workers=args.workers or 2, ui_dir=ui_dir
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="careflow",
        description="Census, stay-length and staffing analysis for long-term care.",
    )
    parser.add_argument("--version", action="version", version=f"careflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-los", help="fit the competing-risks stay model to a resident CSV")
    p.add_argument("residents", help="resident CSV (see README for the schema)")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--json", help="also write the fit as JSON to this path")
    p.set_defaults(handler=_cmd_fit_los)

    p = sub.add_parser("fit-arrivals", help="fit a daily admission count model")
    p.add_argument("counts", help="text file with one daily admission count per line")
    p.add_argument("--family", choices=["negbinom", "poisson"], default="negbinom")
    p.add_argument("--json", help="also write the fit as JSON to this path")
    p.set_defaults(handler=_cmd_fit_arrivals)

    p = sub.add_parser("simulate", help="run the census simulation from a config file")
    p.add_argument("config", help="simulation config JSON")
    p.add_argument("--out", help="write the run into this directory instead of the store")
    p.add_argument("--data-dir", help="run store root (default: CAREFLOW_DATA_DIR)")
    p.add_argument("--parallel", action="store_true", help="run replications on a thread pool")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("evaluate", help="evaluate staffing ratios on a finished run")
    p.add_argument("run_dir", help="run directory written by simulate")
    p.add_argument("--strategies", required=True, help="comma list of TYPE:RATIO, e.g. CNA:20,LPN:25")
    p.add_argument("--cost-file", help="cost model JSON (default: shipped placeholder wages)")
    p.add_argument("--fixed-census", type=int, default=None,
                   help="plan supply against this census instead of the simulated one")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate a ratio range and suggest the cheapest")
    p.add_argument("run_dir")
    p.add_argument("--type", default="CNA", help="caregiver type to sweep")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=60)
    p.add_argument("--cost-file")
    p.add_argument("--fixed-census", type=int, default=None)
    p.add_argument("--json", help="also write the sweep result as JSON to this path")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("whatif", help="compare scenarios under common random numbers")
    p.add_argument("config", help="base simulation config JSON")
    p.add_argument("--scenarios", default="baseline,S1,S2,S3",
                   help="comma list of presets or scenario JSON paths")
    p.add_argument("--strategies", default="CNA:20",
                   help="comma list of TYPE:RATIO evaluated on every scenario")
    p.add_argument("--cost-file")
    p.add_argument("--out", help="write one run directory per scenario under this root")
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=_cmd_whatif)

    p = sub.add_parser("validate", help="compare observed stays against the configured model")
    p.add_argument("residents", help="observed resident CSV")
    p.add_argument("config", help="config JSON providing the stay model")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--json", help="also write the comparison as JSON to this path")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", help="run store root (default: CAREFLOW_DATA_DIR)")
    p.add_argument("--workers", type=int, default=None, help="simulation worker threads")
    p.add_argument("--ui", help="serve this built admin-panel directory at /")
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
