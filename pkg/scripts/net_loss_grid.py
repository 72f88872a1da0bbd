"""End-to-end proposer net loss over an (alpha, n) grid, simulated vs closed form.

Each cell runs full ledger trials (challenges, auction, dispute resolution,
settlement).  At the default 10^4 trials per cell this takes a few minutes.

    python scripts/net_loss_grid.py --trials 10000 --workers 4 > grid.csv
"""

import argparse
import csv
import sys

from rollup_dispute.sim import ScenarioConfig, run_monte_carlo, verify_against_analytic
from rollup_dispute.verify import reference_params


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.5, 0.99, 1.0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 9, 99])
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("alpha", "n", "analytic_loss", "mean_loss", "stderr", "z", "pass_3sigma"))
    for alpha in args.alpha:
        for n in args.n:
            cfg = ScenarioConfig("2", reference_params(alpha), n_validators=n, trials=args.trials, master_seed=args.seed)
            stats = run_monte_carlo(cfg, workers=args.workers)["proposer_loss"]
            v = verify_against_analytic(stats)
            w.writerow((alpha, n, f"{v.prediction:.6f}", f"{stats.mean:.6f}", f"{stats.stderr:.2e}", f"{v.z:+.3f}", v.passed))
            sys.stdout.flush()


if __name__ == "__main__":
    main()
