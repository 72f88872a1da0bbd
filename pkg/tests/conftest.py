import pytest
from hypothesis import settings

from rollup_dispute.economics import ProtocolParams

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def make_params(alpha=1.0, mu=1.0, cost=0.001, deposit=100, collateral=10, validator_deposit=32, cap=50):
    return ProtocolParams(
        proposer_deposit=deposit,
        validator_deposit=validator_deposit,
        dispute_collateral=collateral,
        collateral_cap=cap,
        reward_fraction=alpha,
        participation_cost=cost,
        valuation_dispersion=mu,
    )


@pytest.fixture
def params():
    return make_params()


@pytest.fixture(scope="session")
def commit_vectors():
    import json
    from pathlib import Path

    return json.loads((Path(__file__).parent / "data" / "commit_vectors.json").read_text())


ACCEPTANCE_LINES = []


def report(number, title, passed, detail=""):
    """Record and print one acceptance verdict line."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
