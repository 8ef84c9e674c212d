"""Run the shipped example configuration and print the headline numbers:
post-warmup census, per-type demand, and the suggested CNA ratio from a
1/10..1/20 sweep. Writes nothing unless --out is given.

Usage: python scripts/run_baseline.py [--config PATH] [--reps N] [--out DIR]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from careflow.config import config_hash, data_path, load_config
from careflow.engine import run, summarize
from careflow.staffing import cost_model_from_dict, suggest_ratio
from careflow.store import write_output_dir


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None, help="config JSON (default: shipped example)")
    parser.add_argument("--reps", type=int, default=None, help="override replication count")
    parser.add_argument("--out", default=None, help="also write the run directory here")
    parser.add_argument("--parallel", action="store_true")
    args = parser.parse_args()

    config = load_config(args.config or data_path("config_example.json"))
    if args.reps:
        import dataclasses

        config = dataclasses.replace(config, replications=args.reps)

    print(f"config hash {config_hash(config)[:16]}..., "
          f"{config.replications} replications, horizon {config.horizon_days} days")
    started = time.monotonic()
    output = run(config, parallel=args.parallel)
    print(f"simulated in {time.monotonic() - started:.1f}s")

    warmup = config.warmup_days
    frame = summarize(output)
    census = frame.census
    print(f"\npost-warmup census: mean {np.mean(census.mean):.1f} "
          f"(95% CI band half-width {np.mean(census.ci_upper - census.ci_lower) / 2:.2f})")
    for ctype, series in frame.demand.items():
        per_day = np.mean(series.mean)
        census_mean = np.mean(census.mean)
        print(f"  {ctype:>3} demand: {per_day:8.1f} min/day "
              f"({per_day / census_mean:5.1f} min per resident-day)")

    cost = cost_model_from_dict(json.loads(data_path("cost_default.json").read_text()))
    best, evaluations = suggest_ratio(output, "CNA", cost, k_min=10, k_max=20)
    print("\nCNA ratio sweep (total daily cost, cost units):")
    for ev in evaluations:
        marker = " <- suggested" if ev.strategy == best.strategy else ""
        print(f"  1/{ev.strategy.residents_per_staff:<3} "
              f"{ev.total_cost_mean / (config.horizon_days - warmup):10.2f}{marker}")

    if args.out:
        write_output_dir(output, args.out)
        print(f"\nrun written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
