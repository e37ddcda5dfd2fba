"""Command-line harness: exponent sweeps, Monte Carlo runs, config checks.

Subcommands
-----------
exponent-sweep   edge/cloud exponents along one swept parameter -> CSV
simulate         Monte Carlo error rates over an L grid -> CSV (+ slope fit)
validate         config invariants plus sampler moment checks
reproduce-fig2   bundled interference sweep (sigma2_G axis, several C)
reproduce-fig3   bundled fronthaul sweep (C axis)

All CSV output is deterministic: fixed column order, fixed float formatting,
no timestamps.  Exit codes: 0 success, 1 failed checks or bad config, 2 bad
usage (unknown axis, empty grid, too few trials).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import recipes
from .detectors import estimate_error_prob, fit_exponent
from .exponents import (
    cloud_exponent,
    edge_exponent,
    solve_quantization_noise,
)
from .model import (
    ConfigError,
    HypothesisVector,
    SystemConfig,
    UnsupportedConfigError,
    build_prior_from_rho,
    edge_surrogate,
    load_config,
    validate_config,
)
from .simulate import RngSeed, sample_interval, sample_intervals

SWEEP_AXES = ("sigma2_G", "C", "rho", "lambda", "snr_db")

_FMT = "%.12g"


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    if isinstance(value, float):
        return _FMT % value
    return str(value)


def _parse_grid(text: str) -> list[float]:
    items = [chunk.strip() for chunk in text.split(",")]
    return [float(chunk) for chunk in items if chunk]


def _apply_axis(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    if axis == "sigma2_G":
        return config.replace(sigma2_G=value)
    if axis == "C":
        return config.replace(C=value)
    if axis == "rho":
        if config.K != 2:
            raise ConfigError("rho sweeps need a K=2 config")
        return config.replace(prior=build_prior_from_rho(value))
    if axis == "lambda":
        return config.replace(lam=value)
    if axis == "snr_db":
        return config.replace(snr=10.0 ** (value / 10.0))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _sweep_point(config: SystemConfig) -> dict:
    """Edge and (when available) cloud exponents for one config point."""
    edge = edge_exponent(config)
    row = {
        "E_edge_nats": edge.exponent,
        "E_cloud_nats": float("nan"),
        "alpha_star_edge": edge.alpha_star,
        "alpha_star_cloud": float("nan"),
        "sigma2_q": float("nan"),
    }
    if config.C > 0.0 and config.K == 2:
        cloud = cloud_exponent(config)
        row["E_cloud_nats"] = cloud.exponent
        row["alpha_star_cloud"] = cloud.alpha_star
        row["sigma2_q"] = solve_quantization_noise(config, 0).sigma2_q
    return row


def _run_sweep(
    config: SystemConfig,
    axis: str,
    grid: list[float],
    capacities: list[float] | None,
    threads: int,
) -> tuple[list[str], list[list[str]]]:
    points: list[tuple[float, float | None, SystemConfig]] = []
    for value in grid:
        swept = _apply_axis(config, axis, value)
        if capacities:
            for cap in capacities:
                points.append((value, cap, swept.replace(C=cap)))
        else:
            points.append((value, None, swept))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: _sweep_point(p[2]), points))
    else:
        results = [_sweep_point(p) for _, _, p in points]

    header = [axis]
    if capacities:
        header.append("C_bit_s_hz")
    header += ["E_edge_nats", "E_cloud_nats", "alpha_star_edge", "alpha_star_cloud", "sigma2_q"]

    rows = []
    for (value, cap, _), res in zip(points, results):
        row = [_fmt(value)]
        if capacities:
            row.append(_fmt(cap))
        row += [
            _fmt(res["E_edge_nats"]),
            _fmt(res["E_cloud_nats"]),
            _fmt(res["alpha_star_edge"]),
            _fmt(res["alpha_star_cloud"]),
            _fmt(res["sigma2_q"]),
        ]
        rows.append(row)
    return header, rows


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_or(config_path: str | None, fallback) -> SystemConfig:
    if config_path:
        return load_config(config_path)
    return fallback()


def _plot_sweep(csv_path: str, plot_path: str, x_col: str, logx: bool) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row.get("C_bit_s_hz", ""), []).append(row)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for cap, block in groups.items():
        x = [float(r[x_col]) for r in block]
        edge = [float(r["E_edge_nats"]) for r in block]
        cloud = [float(r["E_cloud_nats"]) for r in block]
        suffix = f" (C={cap})" if cap else ""
        ax.plot(x, edge, "o-", label="edge" + suffix)
        if not all(math.isnan(v) for v in cloud):
            ax.plot(x, cloud, "s--", label="cloud" + suffix)
    if logx:
        ax.set_xscale("symlog", linthresh=0.5)
    ax.set_xlabel(x_col)
    ax.set_ylabel("error exponent [nats/interval]")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(plot_path, dpi=150)
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_exponent_sweep(args) -> int:
    config = _load_or(args.config, recipes.fig2_config)
    grid = _parse_grid(args.grid)
    if not grid:
        print("error: empty sweep grid", file=sys.stderr)
        return 2
    capacities = _parse_grid(args.capacities) if args.capacities else None
    header, rows = _run_sweep(config, args.axis, grid, capacities, args.threads)
    _write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.plot:
        _plot_sweep(args.out, args.plot, header[0], logx=args.axis == "sigma2_G")
        print(f"wrote plot to {args.plot}")
    return 0


def cmd_simulate(args) -> int:
    config = _load_or(args.config, recipes.desk_config)
    grid = [int(v) for v in _parse_grid(args.l_grid)]
    if not grid:
        print("error: empty sweep grid", file=sys.stderr)
        return 2
    if args.trials < 100:
        print(f"error: trials must be >= 100, got {args.trials}", file=sys.stderr)
        return 2

    rows = []
    pe_by_L = []
    for L in grid:
        est = estimate_error_prob(
            config, L, args.trials, args.mode, RngSeed(args.seed), threads=args.threads
        )
        pe_by_L.append((L, est.p_hat))
        rows.append(
            [
                args.mode,
                str(L),
                str(args.trials),
                _fmt(est.p_hat),
                _fmt(est.ci_lo),
                _fmt(est.ci_hi),
                str(args.seed),
            ]
        )

    analytic = (
        edge_exponent(config).exponent if args.mode == "edge" else cloud_exponent(config).exponent
    )
    try:
        slope = fit_exponent(pe_by_L, trials=args.trials).slope_nats
    except ValueError:
        slope = float("nan")
    # footer: p_hat column carries the fitted slope, ci_lo the analytical
    # exponent (both nats/interval)
    rows.append(["fit", "", "", _fmt(slope), _fmt(analytic), "", str(args.seed)])

    _write_csv(args.out, ["mode", "L", "trials", "p_hat", "ci_lo", "ci_hi", "seed"], rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    print(f"fitted slope {_fmt(slope)} nats/interval vs analytical {_fmt(analytic)}")

    if args.trace:
        _write_trace(config, grid[-1], min(args.trials, args.trace_limit), args.seed, args.trace)
        print(f"wrote trace to {args.trace}")
    return 0


def _write_trace(config: SystemConfig, L: int, trials: int, seed: int, path: str) -> None:
    complex_field = config.signal_field == "complex"
    if complex_field:
        entry_cols = [f"y_{m}_{part}" for m in range(config.M) for part in ("re", "im")]
    else:
        entry_cols = [f"y_{m}" for m in range(config.M)]
    header = ["trial", "interval", "cell"] + entry_cols
    root = RngSeed(seed)
    gen = root.substream(2**32).generator()  # truth stream, apart from sample streams
    table = config.prior.table / config.prior.table.sum()
    rows = []
    for trial in range(trials):
        truth = HypothesisVector.from_index(int(gen.choice(table.size, p=table)), config.K)
        for interval in range(L):
            blocks = sample_interval(config, truth, interval, root.substream(trial))
            for block in blocks:
                if complex_field:
                    vals = [x for m in range(config.M) for x in (block.y[m].real, block.y[m].imag)]
                else:
                    vals = [float(block.y[m]) for m in range(config.M)]
                rows.append([str(trial), str(interval), str(block.cell)] + [_fmt(v) for v in vals])
    _write_csv(path, header, rows)


def cmd_validate(args) -> int:
    try:
        config = _load_or(args.config, recipes.fig2_config)
    except ConfigError as exc:
        # still report the named violations, one per line
        print("FAIL config:", exc)
        return 1
    failures = 0
    for problem in validate_config(config):
        failures += 1
        print(f"FAIL config: {problem}")
    if failures == 0:
        print("PASS config: all invariants hold")
        failures += _moment_checks(config, args.samples, args.seed)
    return 1 if failures else 0


def _moment_checks(config: SystemConfig, samples: int, seed: int) -> int:
    truth = HypothesisVector((0,) * config.K)
    y = sample_intervals(config, truth, samples, RngSeed(seed)).reshape(
        samples, config.K * config.M
    )
    if config.signal_field == "complex":
        y = np.concatenate([y.real, y.imag], axis=1)  # moments checked per part

    emp_mean = y.mean(axis=0)
    emp_var = y.var(axis=0, ddof=1)
    fourth = ((y - emp_mean) ** 4).mean(axis=0)
    se_mean = np.sqrt(emp_var / samples)
    se_var = np.sqrt(np.maximum(fourth - emp_var**2, 0.0) / samples)

    # surrogate means are the exact sampler means, so a z-test applies; the
    # sampler's exact per-entry variance additionally carries the Poisson
    # fluctuation of the line-of-sight terms (mu^2 lambda p per source cell).
    sur_mean = np.zeros(config.K * config.M)
    law_var = np.zeros(config.K * config.M)
    for cell in range(config.K):
        g = edge_surrogate(config, cell, truth)
        sl = slice(cell * config.M, (cell + 1) * config.M)
        sur_mean[sl] = g.mean
        own = config.p_table(cell, 0) * config.lam
        law_var[sl] = g.var + config.mu_H**2 * own
        for other in range(config.K):
            if other != cell:
                law_var[sl] += config.mu_G**2 * config.lam * config.p_table(other, 0)
    if config.signal_field == "complex":
        sur_mean = np.concatenate([sur_mean, np.zeros_like(sur_mean)])
        law_var = np.concatenate([0.5 * law_var, 0.5 * law_var])

    failures = 0
    worst = float(np.max(np.abs(emp_mean - sur_mean) / np.maximum(se_mean, 1e-300)))
    if worst <= 5.0:
        print(f"PASS moments: empirical means match surrogate means (max {worst:.2f} SE)")
    else:
        failures += 1
        print(f"FAIL moments: empirical means off surrogate means by {worst:.2f} SE")

    worst = float(np.max(np.abs(emp_var - law_var) / np.maximum(se_var, 1e-300)))
    if worst <= 5.0:
        print(f"PASS moments: empirical variances match the sampler law (max {worst:.2f} SE)")
    else:
        failures += 1
        print(f"FAIL moments: empirical variances off the sampler law by {worst:.2f} SE")
    return failures


def cmd_reproduce_fig2(args) -> int:
    config = _load_or(args.config, recipes.fig2_config)
    header, rows = _run_sweep(
        config,
        "sigma2_G",
        list(recipes.FIG2_SIGMA2_G_GRID),
        list(recipes.FIG2_CAPACITIES),
        args.threads,
    )
    _write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.plot:
        _plot_sweep(args.out, args.plot, "sigma2_G", logx=True)
        print(f"wrote plot to {args.plot}")
    return 0


def cmd_reproduce_fig3(args) -> int:
    config = _load_or(args.config, recipes.fig3_config)
    header, rows = _run_sweep(
        config, "C", list(recipes.FIG3_CAPACITY_GRID), None, args.threads
    )
    _write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.plot:
        _plot_sweep(args.out, args.plot, "C", logx=False)
        print(f"wrote plot to {args.plot}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", help="JSON system config")
    sub.add_argument("--seed", type=int, default=0, help="root RNG seed (u64)")
    sub.add_argument("--threads", type=int, default=1, help="worker thread bound")
    sub.add_argument("--out", metavar="PATH", default="out.csv", help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tbma",
        description="edge vs cloud detection limits for type-based multiple access",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("exponent-sweep", help="exponents along one parameter axis")
    _add_common(sweep)
    sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sweep.add_argument("--grid", required=True, help="comma-separated axis values")
    sweep.add_argument(
        "--capacities",
        help="comma-separated C values; each grid point is repeated per capacity",
    )
    sweep.add_argument("--plot", metavar="PATH", help="optional PNG rendered from the CSV")
    sweep.set_defaults(func=cmd_exponent_sweep)

    sim = subs.add_parser("simulate", help="Monte Carlo error rates over an L grid")
    _add_common(sim)
    sim.add_argument("--mode", choices=("edge", "cloud"), default="edge")
    sim.add_argument("--l-grid", default="1,2,5,10,20", help="comma-separated interval counts")
    sim.add_argument("--trials", type=int, default=10000)
    sim.add_argument("--trace", metavar="PATH", help="optional per-interval trace CSV")
    sim.add_argument("--trace-limit", type=int, default=100, help="max trials in the trace")
    sim.set_defaults(func=cmd_simulate)

    val = subs.add_parser("validate", help="config invariants plus sampler moment checks")
    _add_common(val)
    val.add_argument("--samples", type=int, default=20000, help="intervals for moment checks")
    val.set_defaults(func=cmd_validate)

    fig2 = subs.add_parser("reproduce-fig2", help="bundled interference sweep")
    _add_common(fig2)
    fig2.add_argument("--plot", metavar="PATH")
    fig2.set_defaults(func=cmd_reproduce_fig2)

    fig3 = subs.add_parser("reproduce-fig3", help="bundled fronthaul sweep")
    _add_common(fig3)
    fig3.add_argument("--plot", metavar="PATH")
    fig3.set_defaults(func=cmd_reproduce_fig3)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
