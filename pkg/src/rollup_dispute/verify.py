"""Named verification suites run by ``rollup-dispute verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks do.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from . import economics
from .economics import ProtocolParams
from .ledger import UNIT, commit_hash
from .sim import (
    ScenarioConfig,
    run_monte_carlo,
    run_trial,
    sample_auction_surplus,
    simulate_ledger,
    summarize,
    verify_against_analytic,
)

# suite names are the public ``--suite`` choices
SUITES = ("theorem1", "corollary2", "scenarios", "defenses")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    z: float | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        z = "" if self.z is None else f" z={self.z:+.2f}"
        return f"{tag} {self.name}{z} {self.detail}"


def reference_params(alpha: float = 1.0, mu: float = 1.0, cost: float = 0.001) -> ProtocolParams:
    return ProtocolParams(
        proposer_deposit=100,
        validator_deposit=32,
        dispute_collateral=10,
        collateral_cap=50,
        reward_fraction=alpha,
        participation_cost=cost,
        valuation_dispersion=mu,
    )


def _from_verdict(name: str, verdict) -> Check:
    detail = f"mean={verdict.mean:.6g} prediction={verdict.prediction:.6g} se={verdict.stderr:.3g}"
    return Check(name, verdict.passed, detail, verdict.z)


def auction_surplus(seed: int, trials: int = 100_000, sigmas: float = 3.0) -> list[Check]:
    params = reference_params()
    reward = economics.reward_pot(params)
    checks = []
    for n in (1, 2, 5, 10, 50):
        surplus, _ = sample_auction_surplus(n, reward, params.mu, trials, seed)
        stats = summarize(surplus, economics.expected_surplus(n, params.mu))
        checks.append(_from_verdict(f"winner surplus n={n}", verify_against_analytic(stats, tolerance_sigmas=sigmas)))
    return checks


def net_loss_grid(seed: int, trials: int = 10_000, sigmas: float = 3.0, workers: int = 1) -> list[Check]:
    checks = []
    for alpha in (0.5, 0.99, 1.0):
        for n in (2, 9, 99):
            cfg = ScenarioConfig("2", reference_params(alpha), n_validators=n, trials=trials, master_seed=seed)
            stats = run_monte_carlo(cfg, workers=workers)
            verdict = verify_against_analytic(stats["proposer_loss"], tolerance_sigmas=sigmas)
            checks.append(_from_verdict(f"proposer net loss alpha={alpha} n={n}", verdict))
    return checks


def scenarios(seed: int, triples: int = 100) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0
    for i in range(triples):
        alpha = float(np.round(rng.uniform(0.01, 1.0), 4))
        deposit = int(rng.integers(1, 1000))
        collateral = int(rng.integers(1, 100))
        params = ProtocolParams(deposit, 1, collateral, collateral + 1, alpha, 0.001, min(1.0, alpha * deposit + collateral))
        result = run_trial(ScenarioConfig("1", params, master_seed=seed), i)
        exact = (1 - Decimal(str(alpha))) * deposit * UNIT
        worst = max(worst, abs(Decimal(-result.proposer_gross) - exact))
    checks = [Check("scenario1 exact accounting", worst <= 1, f"max deviation {worst} base units over {triples} triples")]

    mismatches = 0
    grid = 0
    for mu in np.linspace(0.5, 10.0, 20):
        for c in np.linspace(0.25, 3.0, 20):
            mu_f, c_f = float(mu), float(c)
            expected = economics.equilibrium_entrants(mu_f, c_f, 1)
            params = reference_params(mu=mu_f, cost=c_f)
            cfg = ScenarioConfig("3", params, n_validators=expected + 2, master_seed=seed)
            mismatches += run_trial(cfg, grid).entrants != expected
            grid += 1
    checks.append(Check("scenario3 entry equilibrium", mismatches == 0, f"{mismatches} mismatches on {grid} grid points"))
    spot = run_trial(ScenarioConfig("3", reference_params(mu=10.0, cost=1.0), n_validators=12, master_seed=seed), 0)
    checks.append(Check("scenario3 mu=10 c=1", spot.entrants == 8, f"entrants={spot.entrants}"))
    edge = [run_trial(ScenarioConfig("3", reference_params(mu=3.0 * c, cost=c), n_validators=4, master_seed=seed), 0).entrants
            for c in (0.25, 0.5, 1.0, 2.0)]
    checks.append(Check("scenario3 mu<=3c no extra entrant", all(k == 1 for k in edge), f"entrants={edge}"))
    return checks


def defenses(seed: int, permutations: int = 1000, trials: int = 10_000) -> list[Check]:
    checks = []
    params = reference_params(alpha=0.5)
    base = run_trial(ScenarioConfig("1", params, master_seed=seed), 0)
    esc = run_trial(ScenarioConfig("Escrow", params, master_seed=seed), 0)
    dp, dg = params.proposer_deposit, params.dispute_collateral
    checks.append(Check(
        "escrow restores penalty",
        -base.proposer_gross == (1 - Decimal(str(params.alpha))) * dp * UNIT and -esc.proposer_gross == (dp + dg) * UNIT,
        f"baseline loss={-base.proposer_gross / 1e9} escrow loss={-esc.proposer_gross / 1e9}",
    ))

    rng = np.random.default_rng(seed)
    cfg = ScenarioConfig("Escrow", params, n_validators=3, master_seed=seed)
    winners = set()
    for i in range(permutations):
        def shuffle(ledger, order, _i=i):
            return list(rng.permutation(order))
        ledger, _, _ = simulate_ledger(cfg, 0, order_hook=shuffle)
        winners.add(ledger.escrows[ledger.blocks[1].escrow_id].winner)
    checks.append(Check("escrow winner order-invariant", len(winners) == 1, f"winners={sorted(winners)}"))

    rejected = 0
    for _ in range(trials):
        decision = int(rng.integers(0, 2))
        block = int(rng.integers(0, 2**63))
        nonce = rng.bytes(32)
        validator = int(rng.integers(0, 2**63))
        h = commit_hash(decision, block, nonce, validator)
        mutated = [
            (1 - decision, block, nonce, validator),
            (decision, block ^ 1, nonce, validator),
            (decision, block, bytes([nonce[0] ^ 1]) + nonce[1:], validator),
            (decision, block, nonce, validator ^ 1),
        ]
        rejected += all(commit_hash(*m) != h for m in mutated)
    checks.append(Check("commit binding", rejected == trials, f"{rejected}/{trials} tuples reject every mutation"))

    cr = ScenarioConfig(
        "CommitReveal", params, trials=trials, master_seed=seed, attackers=("follow_the_leader",), invalid_prob=0.5
    )
    acc = run_monte_carlo(cr)["follower_correct"]
    checks.append(Check(
        "follow-the-leader blind under commit-reveal",
        abs(acc.mean - 0.5) <= 0.05,
        f"accuracy={acc.mean:.4f}",
    ))
    plain = ScenarioConfig("BaselineNoDefense", params, trials=min(trials, 1000), master_seed=seed, attackers=("follow_the_leader",))
    copied = run_monte_carlo(plain)["follower_copied"]
    checks.append(Check("follow-the-leader copies plaintext", copied.mean == 1.0, f"copy rate={copied.mean:.4f}"))
    return checks


def run_suite(name: str, seed: int, trials: int | None = None) -> list[Check]:
    if name == "theorem1":
        return auction_surplus(seed, **({"trials": trials} if trials else {}))
    if name == "corollary2":
        return net_loss_grid(seed, **({"trials": trials} if trials else {}))
    if name == "scenarios":
        return scenarios(seed)
    if name == "defenses":
        return defenses(seed, **({"trials": trials} if trials else {}))
    raise ValueError(f"unknown suite {name!r}")
