"""Winner surplus of the second-price auction vs mu/(n+1), as a CSV table.

    python scripts/auction_surplus.py --trials 100000 --seed 1 > surplus.csv
"""

import argparse
import csv
import sys

from rollup_dispute import economics
from rollup_dispute.sim import sample_auction_surplus, summarize, verify_against_analytic
from rollup_dispute.verify import reference_params


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--mu", type=float, default=1.0)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 5, 10, 20, 50, 100])
    args = ap.parse_args()

    params = reference_params(mu=args.mu)
    reward = economics.reward_pot(params)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("n", "analytic_surplus", "mean_surplus", "stderr", "z", "mean_price", "analytic_price"))
    for n in args.n:
        surplus, price = sample_auction_surplus(n, reward, args.mu, args.trials, args.seed)
        stats = summarize(surplus, economics.expected_surplus(n, args.mu))
        v = verify_against_analytic(stats)
        expected_price = economics.expected_second_bid(reward, args.mu, n) if n > 1 else reward - args.mu
        w.writerow((n, f"{stats.prediction:.6f}", f"{stats.mean:.6f}", f"{stats.stderr:.2e}", f"{v.z:+.3f}",
                    f"{price.mean():.6f}", f"{expected_price:.6f}"))


if __name__ == "__main__":
    main()
