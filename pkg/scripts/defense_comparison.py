"""Mean proposer loss and reward capture under each rule set and attacker mix.

    python scripts/defense_comparison.py --trials 2000
"""

import argparse
import csv
import sys

from rollup_dispute.sim import ScenarioConfig, run_monte_carlo
from rollup_dispute.verify import reference_params

CASES = [
    ("1", False, ()),
    ("2", False, ()),
    ("3", False, ()),
    ("Escrow", False, ()),
    ("Escrow", True, ("frontrunner",)),
    ("Escrow", False, ("frontrunner",)),
    ("BaselineNoDefense", False, ("follow_the_leader",)),
    ("CommitReveal", False, ("follow_the_leader",)),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=5)
    args = ap.parse_args()

    params = reference_params(alpha=args.alpha, mu=5.0, cost=0.5)
    w = csv.writer(sys.stdout, lineterminator="\n")
    columns = ("honest_won", "frontrunner_won", "follower_copied", "follower_correct")
    w.writerow(("scenario", "public_mempool", "attackers", "mean_loss", "entrants", *columns))
    for scenario, public, attackers in CASES:
        cfg = ScenarioConfig(scenario, params, n_validators=args.n, trials=args.trials, master_seed=args.seed,
                             public_mempool=public, attackers=attackers)
        stats = run_monte_carlo(cfg)
        extra = [f"{stats[c].mean:.4f}" if c in stats.metrics else "" for c in columns]
        w.writerow((scenario, public, "+".join(attackers) or "-", f"{stats['proposer_loss'].mean:.6f}",
                    f"{stats['entrants'].mean:.2f}", *extra))


if __name__ == "__main__":
    main()
