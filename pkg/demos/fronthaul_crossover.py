"""Edge vs cloud exponents as the fronthaul capacity grows.

Two cells coupled through a line-of-sight cross link (mu_G > 0), correlated
bits (rho = 0.8).  The edge exponent does not depend on the fronthaul.  The
cloud exponent starts below it when quantization noise is heavy (small C)
and overtakes it once the fronthaul is generous: the grid point where the
sign of the gap flips is the capacity beyond which centralizing detection
pays off.
"""

import argparse

from tbma import cloud_exponent, edge_exponent, recipes, solve_quantization_noise


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--grid", type=float, nargs="+", default=list(recipes.FIG3_CAPACITY_GRID)
    )
    args = parser.parse_args()

    edge = edge_exponent(recipes.fig3_config()).exponent
    print(f"E_edge = {edge:.4f} nats/interval (fronthaul-independent)\n")
    print(f"{'C [bit/s/Hz]':>13} {'sigma2_q':>12} {'E_cloud':>9} {'winner':>7}")

    crossover = None
    for C in args.grid:
        config = recipes.fig3_config(C=C)
        s2q = solve_quantization_noise(config, 0).sigma2_q
        cloud = cloud_exponent(config).exponent
        winner = "cloud" if cloud > edge else "edge"
        if crossover is None and cloud > edge:
            crossover = C
        print(f"{C:>13g} {s2q:>12.5f} {cloud:>9.4f} {winner:>7}")

    print(f"\ncloud overtakes edge at C = {crossover:g} on this grid.")


if __name__ == "__main__":
    main()
