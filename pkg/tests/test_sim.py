import dataclasses

import pytest

from rollup_dispute.errors import ConfigInvalid, DegenerateStats
from rollup_dispute.ledger import UNIT, to_units
from rollup_dispute.sim import (
    MetricStats,
    ScenarioConfig,
    run_monte_carlo,
    run_trial,
    run_trials,
    sample_auction_surplus,
    simulate_ledger,
    summarize,
    verify_against_analytic,
)

from conftest import make_params


def test_config_validation():
    with pytest.raises(ConfigInvalid, match="trials"):
        ScenarioConfig("2", make_params(), trials=0)
    with pytest.raises(ConfigInvalid, match="n_validators"):
        ScenarioConfig("2", make_params(), n_validators=0)
    with pytest.raises(ConfigInvalid, match="scenario"):
        ScenarioConfig("4", make_params())
    with pytest.raises(ConfigInvalid, match="attackers"):
        ScenarioConfig("Escrow", make_params(), attackers=("sybil",))


def test_same_seed_same_trial():
    cfg = ScenarioConfig("2", make_params(), n_validators=9, master_seed=42)
    assert run_trial(cfg, 3) == run_trial(cfg, 3)
    assert run_trial(cfg, 3) != run_trial(cfg, 4)


def test_parallel_matches_serial():
    cfg = ScenarioConfig("2", make_params(), n_validators=9, trials=40, master_seed=42)
    assert run_trials(cfg, workers=1) == run_trials(cfg, workers=2)
    assert run_monte_carlo(cfg, workers=1) == run_monte_carlo(cfg, workers=2)


def test_scenario1_net_includes_controlled_cost():
    params = make_params(alpha=0.99)
    r = run_trial(ScenarioConfig("1", params), 0)
    assert -r.proposer_gross == UNIT
    assert -r.proposer_net == UNIT + to_units(0.001)


def test_valid_block_draws_no_dispute():
    cfg = ScenarioConfig("2", make_params(), n_validators=3, invalid_prob=0.0)
    ledger, _, _ = simulate_ledger(cfg, 0)
    assert ledger.disputes == {} and ledger.auctions == {}


def test_scenario3_auction_follows_first_challenge():
    cfg = ScenarioConfig("3", make_params(mu=10.0, cost=1.0), n_validators=4)
    ledger, _, _ = simulate_ledger(cfg, 0)
    first = min(ledger.disputes.values(), key=lambda g: g.sequence)
    auction = ledger.auction_for(1)
    assert auction.auction_start == first.creation_block + 1


def test_scenario2_spot_value():
    stats = run_monte_carlo(ScenarioConfig("2", make_params(), n_validators=9, trials=3000, master_seed=8))
    assert verify_against_analytic(stats["proposer_loss"]).passed
    assert stats["proposer_net"].mean == pytest.approx(-0.2, abs=0.03)


def test_defense_ordering():
    params = make_params(alpha=0.5)
    loss = {
        s: run_monte_carlo(ScenarioConfig(s, params, n_validators=5, trials=50, master_seed=2))["proposer_loss"].mean
        for s in ("BaselineNoDefense", "2", "Escrow")
    }
    assert loss["BaselineNoDefense"] == 50
    assert loss["BaselineNoDefense"] < loss["2"] <= 110 == loss["Escrow"]


def test_summarize_single_trial_has_zero_error():
    s = summarize([1.5])
    assert (s.variance, s.stderr, s.trials) == (0.0, 0.0, 1)


def test_verify_examples():
    ok = verify_against_analytic(MetricStats(0.1671, 0.0, 0.0008, 100), 1 / 6)
    assert ok.passed and ok.z == pytest.approx(0.55, abs=0.01)
    assert "z=" in ok.line("surplus") and ok.line("surplus").startswith("PASS")
    assert not verify_against_analytic(MetricStats(0.20, 0.0, 0.0008, 100), 1 / 6).passed
    exact = verify_against_analytic(MetricStats(50.0, 0.0, 0.0, 10), 50.0)
    assert exact.passed and exact.z == 0
    with pytest.raises(DegenerateStats):
        verify_against_analytic(MetricStats(50.1, 0.0, 0.0, 10), 50.0)


@pytest.mark.parametrize("seed", range(10))
def test_conclusions_hold_across_seeds(seed):
    surplus, _ = sample_auction_surplus(5, 110.0, 1.0, 20_000, seed)
    assert verify_against_analytic(summarize(surplus, 1 / 6), tolerance_sigmas=4).passed
    cfg = ScenarioConfig("2", make_params(alpha=0.5), n_validators=9, trials=300, master_seed=seed)
    assert verify_against_analytic(run_monte_carlo(cfg)["proposer_loss"], tolerance_sigmas=4).passed


def test_trial_config_is_frozen():
    cfg = ScenarioConfig("2", make_params())
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.trials = 5
