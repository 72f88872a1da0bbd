"""Acceptance criteria, one test per criterion.

Each test prints a PASS/FAIL line (also collected into the pytest terminal
summary) before asserting.  Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""

import time
from decimal import Decimal

import numpy as np

from rollup_dispute import economics
from rollup_dispute.cli import main
from rollup_dispute.errors import HashMismatch
from rollup_dispute.ledger import COMMIT_REVEAL, UNIT, Ledger, commit_hash
from rollup_dispute.sim import (
    ScenarioConfig,
    run_monte_carlo,
    run_trial,
    run_trials,
    sample_auction_surplus,
    simulate_ledger,
    summarize,
    verify_against_analytic,
)

from conftest import make_params, report
from ledger_fuzz import run_sequence

SEED = 20240601


def test_criterion_1_winner_surplus():
    start = time.perf_counter()
    reward = economics.reward_pot(make_params())
    zs, ok = [], True
    for n in (1, 2, 5, 10, 50):
        surplus, _ = sample_auction_surplus(n, reward, 1.0, 100_000, SEED)
        verdict = verify_against_analytic(summarize(surplus, 1.0 / (n + 1)), tolerance_sigmas=3)
        zs.append(f"n={n} z={verdict.z:+.2f}")
        ok &= verdict.passed
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    assert report(1, "winner surplus matches mu/(n+1) within 3 s.e.", ok, f"{', '.join(zs)}; {elapsed:.2f}s")


def test_criterion_2_end_to_end_net_loss():
    lines, ok = [], True
    for alpha in (0.5, 0.99, 1.0):
        for n in (2, 9, 99):
            cfg = ScenarioConfig("2", make_params(alpha=alpha), n_validators=n, trials=10_000, master_seed=SEED)
            stats = run_monte_carlo(cfg)["proposer_loss"]
            expected = (1 - alpha) * 100 + 2.0 / (n + 1)
            verdict = verify_against_analytic(stats, expected, tolerance_sigmas=3)
            lines.append(f"a={alpha} n={n} mean={stats.mean:.5f} z={verdict.z:+.2f}")
            ok &= verdict.passed
    assert report(2, "Scenario-2 proposer loss matches (1-a)D_P + 2mu/(n+1)", ok, "; ".join(lines))


def test_criterion_3_scenario1_exact():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = 0
    for i in range(100):
        alpha = float(np.round(rng.uniform(0.01, 1.0), 4))
        deposit = int(rng.integers(1, 1000))
        collateral = int(rng.integers(1, 100))
        params = make_params(alpha=alpha, deposit=deposit, collateral=collateral, cap=collateral + 1, mu=1.0)
        r = run_trial(ScenarioConfig("1", params, master_seed=SEED), i)
        exact = (1 - Decimal(str(alpha))) * deposit * UNIT
        worst = max(worst, abs(Decimal(-r.proposer_gross) - exact))
    elapsed = time.perf_counter() - start
    ok = worst <= 1 and elapsed < 1
    assert report(3, "Scenario-1 gross loss equals (1-a)D_P", ok, f"max deviation {worst} units; {elapsed:.3f}s")


def test_criterion_4_entry_equilibrium():
    mismatches = 0
    for mu in np.linspace(0.5, 10.0, 20):
        for c in np.linspace(0.25, 3.0, 20):
            mu, c = float(mu), float(c)
            expected = economics.equilibrium_entrants(mu, c, 1)
            cfg = ScenarioConfig("3", make_params(mu=mu, cost=c), n_validators=expected + 2, master_seed=SEED)
            mismatches += run_trial(cfg, 0).entrants != expected
    spot = run_trial(ScenarioConfig("3", make_params(mu=10.0, cost=1.0), n_validators=12, master_seed=SEED), 0).entrants
    edge = [
        run_trial(ScenarioConfig("3", make_params(mu=m, cost=1.0), n_validators=4, master_seed=SEED), 0).entrants
        for m in (1.0, 2.0, 3.0)
    ]
    ok = mismatches == 0 and spot == 8 and edge == [1, 1, 1]
    assert report(4, "entrants equal the sequential-entry fixed point", ok, f"{mismatches}/400 mismatches; mu=10,c=1 -> {spot}; mu<=3c -> {edge}")


def test_criterion_5_conservation():
    broken = [seed for seed in range(10_000) if not run_sequence(SEED + seed)[1]]
    assert report(5, "supply conserved over 10^4 fuzzed sequences", not broken, f"{len(broken)} violations")


def test_criterion_6_escrow():
    params = make_params(alpha=0.5)
    base_ledger, _, base_info = simulate_ledger(ScenarioConfig("1", params, master_seed=SEED), 0)
    games = sorted(base_ledger.games_on(1), key=lambda g: g.sequence)
    staged = (
        len(games) == 2
        and games[1].creation_block == games[0].creation_block + 1
        and games[1].challenger == 10
        and games[1].concluded_index < games[0].concluded_index
    )
    base = run_trial(ScenarioConfig("1", params, master_seed=SEED), 0)
    esc = run_trial(ScenarioConfig("Escrow", params, master_seed=SEED), 0)
    losses_ok = -base.proposer_gross == 50 * UNIT and -esc.proposer_gross == 110 * UNIT

    rng = np.random.default_rng(SEED)
    cfg = ScenarioConfig("Escrow", params, n_validators=3, master_seed=SEED)
    winners = set()
    for _ in range(1_000):
        ledger, _, _ = simulate_ledger(cfg, 0, order_hook=lambda _l, order: list(rng.permutation(order)))
        winners.add(ledger.escrows[ledger.blocks[1].escrow_id].winner)
    ok = staged and losses_ok and len(winners) == 1
    detail = f"baseline {-base.proposer_gross / UNIT}, escrow {-esc.proposer_gross / UNIT}, winners {sorted(winners)}"
    assert report(6, "escrow restores D_P + D_g and is order-invariant", ok, detail)


def _reveal_rejects_mutations(trials):
    rng = np.random.default_rng(SEED)
    ledger = Ledger(make_params())
    ledger.mint(1, 1_000 * UNIT)
    ledger.propose_block(1, 1, True, regime=COMMIT_REVEAL, commit_window=1, reveal_window=1)
    cr_id = ledger.blocks[1].cr_id
    tuples = []
    for _ in range(trials):
        decision = int(rng.integers(0, 2))
        block = int(rng.integers(0, 2**63))
        nonce = rng.bytes(32)
        validator = int(rng.integers(0, 2**62)) * 2  # even ids: validator ^ 1 is a distinct odd id
        h = commit_hash(decision, block, nonce, validator)
        ledger.commit(cr_id, validator, h)
        ledger.commit(cr_id, validator ^ 1, h)  # a copied commitment under another identity
        tuples.append((decision, block, nonce, validator))
    ledger.height = 1
    rejected = 0
    for decision, block, nonce, validator in tuples:
        mutations = [
            (validator, 1 - decision, block, nonce),
            (validator, decision, block ^ 1, nonce),
            (validator, decision, block, bytes([nonce[0] ^ 0x80]) + nonce[1:]),
            (validator ^ 1, decision, block, nonce),
        ]
        count = 0
        for who, d, b, n in mutations:
            try:
                ledger.reveal(cr_id, who, d, b, n)
            except HashMismatch:
                count += 1
        ledger.reveal(cr_id, validator, decision, block, nonce)  # the honest opening still works
        rejected += count == 4
    return rejected


def test_criterion_7_commit_reveal():
    trials = 10_000
    rejected = _reveal_rejects_mutations(trials)
    src = ScenarioConfig(
        "CommitReveal", make_params(), trials=trials, master_seed=SEED, attackers=("follow_the_leader",), invalid_prob=0.5
    )
    accuracy = run_monte_carlo(src)["follower_correct"].mean
    plain = ScenarioConfig("BaselineNoDefense", make_params(), trials=trials, master_seed=SEED, attackers=("follow_the_leader",))
    copied = run_monte_carlo(plain)["follower_copied"].mean
    ok = rejected == trials and abs(accuracy - 0.5) <= 0.05 and copied == 1.0
    detail = f"(a) {rejected}/{trials} rejected all mutations; (b) accuracy {accuracy:.4f}; (c) copy rate {copied:.4f}"
    assert report(7, "commit-reveal binds and blinds; plaintext is copied", ok, detail)


def test_criterion_8_determinism(tmp_path):
    config = tmp_path / "cfg.toml"
    config.write_text(
        """schema_version = 1
scenario = "2"
n_validators = 9
[params]
proposer_deposit = 100
validator_deposit = 32
dispute_collateral = 10
collateral_cap = 50
reward_fraction = 0.99
participation_cost = 0.001
valuation_dispersion = 1.0
"""
    )
    outputs = []
    for run, workers in (("a", "1"), ("b", "1"), ("c", "2")):
        out = tmp_path / run
        assert main(["simulate", str(config), "--trials", "50", "--seed", "7", "--out", str(out), "--workers", workers]) == 0
        outputs.append(((out / "trials.csv").read_bytes(), (out / "manifest.json").read_bytes()))
    cfg = ScenarioConfig("Escrow", make_params(), n_validators=4, trials=30, master_seed=7, attackers=("free_rider",))
    ok = outputs[0] == outputs[1] == outputs[2] and run_trials(cfg, 1) == run_trials(cfg, 3)
    assert report(8, "byte-identical reruns; parallel equals serial", ok)
