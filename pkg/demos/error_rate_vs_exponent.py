"""Monte Carlo error decay against the analytical error exponent.

Single cell, scatter-dominated channel.  The detection error probability
falls roughly as exp(-E * L) in the number of collection intervals L; the
script estimates the error rate per L with Wilson intervals, fits the decay
slope on -log p, and compares it with the analytical edge exponent.
"""

import argparse
import math

from tbma import RngSeed, edge_exponent, estimate_error_prob, fit_exponent, recipes


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=50000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--l-grid", type=int, nargs="+", default=[1, 2, 5, 10, 20])
    args = parser.parse_args()

    config = recipes.desk_config()
    print(f"{'L':>4} {'p_hat':>10} {'95% Wilson interval':>22} {'-log p / L':>11}")
    points = []
    for L in args.l_grid:
        est = estimate_error_prob(config, L, args.trials, "edge", RngSeed(args.seed))
        points.append((L, est.p_hat))
        per_l = -math.log(est.p_hat) / L if est.p_hat > 0.0 else float("inf")
        print(f"{L:>4} {est.p_hat:>10.5f}   [{est.ci_lo:>8.5f}, {est.ci_hi:>8.5f}] {per_l:>11.4f}")

    fit = fit_exponent(points, trials=args.trials)
    analytic = edge_exponent(config).exponent
    print(f"\nfitted slope      {fit.slope_nats:.4f} nats/interval (L = {list(fit.used_L)})")
    print(f"analytical E_edge {analytic:.4f} nats/interval")
    print(f"ratio             {fit.slope_nats / analytic:.3f}")


if __name__ == "__main__":
    main()
