import pytest

from rollup_dispute.config import AnalysisOptions, config_to_dict, load_config, parse_config
from rollup_dispute.errors import ConfigInvalid

PARAMS = {
    "proposer_deposit": 100,
    "validator_deposit": 32,
    "dispute_collateral": 10,
    "collateral_cap": 50,
    "reward_fraction": 1.0,
    "participation_cost": 0.001,
    "valuation_dispersion": 1.0,
}


def doc(**top):
    d = {"schema_version": 1, "scenario": "2", "params": dict(PARAMS)}
    d.update(top)
    return d


def test_round_trip():
    config, analysis = parse_config(doc(n_validators=9, trials=5, attackers=["free_rider"]))
    assert analysis == AnalysisOptions()
    again, _ = parse_config(config_to_dict(config))
    assert again == config


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.update(trails=5), "trails"),
        (lambda d: d["params"].update(alpha=1.0), "params.alpha"),
        (lambda d: d["params"].pop("collateral_cap"), "params.collateral_cap"),
        (lambda d: d["params"].update(reward_fraction=1.5), "params.reward_fraction"),
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d.update(trials="many"), "trials"),
        (lambda d: d.update(analysis={"n_grid": [0]}), "analysis.n_grid"),
        (lambda d: d.pop("scenario"), "scenario"),
    ],
)
def test_errors_name_the_field(mutate, field):
    d = doc()
    mutate(d)
    with pytest.raises(ConfigInvalid) as info:
        parse_config(d)
    assert str(info.value).startswith(field + ":")


def test_alpha_message():
    d = doc()
    d["params"]["reward_fraction"] = 1.5
    with pytest.raises(ConfigInvalid, match=r"reward_fraction out of \(0,1\]"):
        parse_config(d)


def test_shipped_configs_load():
    from pathlib import Path

    paths = sorted((Path(__file__).parents[1] / "configs").glob("*.toml"))
    assert paths
    for path in paths:
        load_config(path)


def test_unreadable_and_malformed(tmp_path):
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("schema_version = [")
    with pytest.raises(ConfigInvalid):
        load_config(bad)
