"""Monte Carlo scenario runner.

A trial builds a fresh ledger and agent population, mines blocks until every
contract has settled, and reports per-account payoffs.  Each trial draws
from its own generator keyed by ``(master_seed, trial_index)``, so results do
not depend on execution order or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import economics
from .agents import AgentStrategy, Kind, act
from .errors import ConfigInvalid, DegenerateStats
from .economics import ProtocolParams
from .ledger import (
    BASELINE,
    COMMIT_REVEAL,
    ESCROW,
    FUND,
    UNIT,
    Decision,
    Ledger,
    Phase,
    Status,
    Truth,
    to_units,
)

SCENARIOS = ("1", "2", "3", "Escrow", "CommitReveal", "BaselineNoDefense")
ATTACKERS = ("frontrunner", "follow_the_leader", "free_rider")

PROPOSER = 1
BLOCK_ID = 1
CONTROLLED_BASE = 10
VALIDATOR_BASE = 100
FRONTRUNNER_ID = 900
FOLLOWER_ID = 901
FREE_RIDER_ID = 902


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: ProtocolParams
    n_validators: int = 1
    trials: int = 1
    master_seed: int = 0
    public_mempool: bool = False
    attackers: tuple[str, ...] = ()
    # probability that the proposed block is invalid
    invalid_prob: float = 1.0
    follower_prior: float = 0.5
    # None picks a duration long enough for every validator to act
    auction_duration: int | None = None
    dispute_window: int = 4
    commit_window: int = 3
    reveal_window: int = 2

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigInvalid(f"scenario: unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.trials < 1:
            raise ConfigInvalid("trials: must be >= 1")
        if self.n_validators < 1:
            raise ConfigInvalid("n_validators: must be >= 1")
        for a in self.attackers:
            if a not in ATTACKERS:
                raise ConfigInvalid(f"attackers: unknown attacker {a!r}; expected one of {ATTACKERS}")
        if not 0 <= self.invalid_prob <= 1:
            raise ConfigInvalid("invalid_prob: out of [0,1]")
        if not 0 <= self.follower_prior <= 1:
            raise ConfigInvalid("follower_prior: out of [0,1]")
        if self.auction_duration is not None and self.auction_duration < 1:
            raise ConfigInvalid("auction_duration: must be >= 1")
        if min(self.dispute_window, self.commit_window, self.reveal_window) < 1:
            raise ConfigInvalid("windows: must be >= 1 block")

    @property
    def regime(self) -> str:
        if self.scenario == "Escrow":
            return ESCROW
        if self.scenario == "CommitReveal":
            return COMMIT_REVEAL
        return BASELINE

    @property
    def uses_auction(self) -> bool:
        return self.scenario in ("2", "3")

    def effective_auction_duration(self) -> int:
        if self.auction_duration is not None:
            return self.auction_duration
        # scenario 3 entrants arrive one per block and bid one block later
        return 2 if self.scenario == "2" else self.n_validators + 1

    def expected_bidders(self) -> int:
        """Auction participants implied by the entry rule (scenario 3) or the population."""
        if self.scenario == "3":
            p = self.params
            k = economics.equilibrium_entrants(p.valuation_dispersion, p.participation_cost, 1)
            return min(k, self.n_validators)
        return self.n_validators


@dataclass
class TrialResult:
    trial: int
    scenario: str
    block_invalid: bool
    # signed base units; proposer side includes controlled validators
    proposer_net: int
    proposer_gross: int
    fund_delta: int
    nets: dict[int | str, int]
    winner_id: int | None
    entrants: int
    auction_price: int | None
    valuations: dict[int, float] = field(default_factory=dict)
    bidder_utility: dict[int, float] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class MetricStats:
    mean: float
    variance: float
    stderr: float
    trials: int
    prediction: float | None = None
    z: float | None = None


@dataclass(frozen=True)
class AggregateStats:
    trials: int
    metrics: dict[str, MetricStats]

    def __getitem__(self, name: str) -> MetricStats:
        return self.metrics[name]


@dataclass(frozen=True)
class Verdict:
    passed: bool
    mean: float
    prediction: float
    stderr: float
    z: float
    tolerance_sigmas: float

    def line(self, name: str) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag} {name}: mean={self.mean:.6g} prediction={self.prediction:.6g} "
            f"se={self.stderr:.3g} z={self.z:+.2f}"
        )


# ----------------------------------------------------------------------
# population


def _trial_rng(config: ScenarioConfig, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([config.master_seed & (2**64 - 1), trial_index]))


def _build(config: ScenarioConfig, rng: np.random.Generator) -> tuple[Ledger, list[AgentStrategy], dict]:
    p = config.params
    ledger = Ledger(p, public_mempool=config.public_mempool)
    invalid = bool(rng.random() < config.invalid_prob) if config.invalid_prob < 1 else True
    streams = iter(rng.spawn(config.n_validators + 8))

    # generous endowments: a deposit, a bid and collateral several times over
    wealth = 4 * (ledger.D_P + ledger.D_V + ledger.reward_units + 2 * ledger.D_g + ledger.cost) + UNIT
    proposer_wealth = wealth * (config.n_validators + 2)

    scenario = config.scenario
    controlled: tuple[int, ...] = ()
    if scenario in ("1", "Escrow", "CommitReveal", "BaselineNoDefense"):
        controlled = (CONTROLLED_BASE,)
    proposer = AgentStrategy(
        Kind.PROPOSER,
        PROPOSER,
        BLOCK_ID,
        rng=next(streams),
        scenario=int(scenario) if scenario in ("2", "3") else 1,
        controlled=controlled,
        auction_duration=config.effective_auction_duration(),
    )
    agents = [proposer]
    ledger.mint(PROPOSER, proposer_wealth)
    for acct in controlled:
        agents.append(AgentStrategy(Kind.CONTROLLED, acct, BLOCK_ID, controller=PROPOSER))
        ledger.mint(acct, wealth)

    for i in range(config.n_validators):
        acct = VALIDATOR_BASE + i
        if config.uses_auction:
            initial = scenario == "2" or i == 0
            agent = AgentStrategy(
                Kind.BIDDER,
                acct,
                BLOCK_ID,
                rng=next(streams),
                initial_challenger=initial,
                arrival=None if initial else i - 1,
            )
        else:
            agent = AgentStrategy(Kind.HONEST, acct, BLOCK_ID, rng=next(streams))
        agents.append(agent)
        ledger.mint(acct, wealth)

    kinds = {
        "frontrunner": (Kind.FRONTRUNNER, FRONTRUNNER_ID),
        "free_rider": (Kind.FREE_RIDER, FREE_RIDER_ID),
        "follow_the_leader": (Kind.FOLLOWER, FOLLOWER_ID),
    }
    for name in sorted(config.attackers):
        kind, acct = kinds[name]
        agents.append(AgentStrategy(kind, acct, BLOCK_ID, rng=next(streams), prior=config.follower_prior))
        ledger.mint(acct, wealth)

    initial = dict(ledger.balances)
    ledger.propose_block(
        PROPOSER,
        BLOCK_ID,
        invalid,
        regime=config.regime,
        dispute_window=config.dispute_window,
        commit_window=config.commit_window,
        reveal_window=config.reveal_window,
    )
    return ledger, agents, {"controlled": controlled, "initial": initial}


def _resolution_ready(config: ScenarioConfig, ledger: Ledger) -> bool:
    blk = ledger.blocks[BLOCK_ID]
    if config.uses_auction:
        auction = ledger.auction_for(BLOCK_ID)
        if auction is not None:
            return auction.phase is not Phase.BIDDING
        return ledger.height >= config.dispute_window
    if blk.cr_id is not None:
        return ledger.commit_reveals[blk.cr_id].processed
    return ledger.height >= config.dispute_window


def finalization_order(ledger: Ledger, controlled: Sequence[int], block_id: int = BLOCK_ID) -> list[int]:
    """Order in which open games on a block conclude.

    The auction contract guarantees its winner concludes first; otherwise
    the proposer races its controlled validators' games ahead of the rest.
    """
    games = [g for g in ledger.games_on(block_id) if g.status is Status.OPEN]
    auction = ledger.auction_for(block_id)
    winner_game = auction.winner_dispute if auction is not None else None
    ctrl = set(controlled)

    def key(g):
        return (g.id != winner_game, g.challenger not in ctrl, g.sequence)

    return [g.id for g in sorted(games, key=key)]


def _resolve_all(ledger: Ledger, controlled: Sequence[int], order: Sequence[int] | None = None) -> None:
    truth = Truth.BLOCK_INVALID if ledger.blocks[BLOCK_ID].invalid else Truth.BLOCK_VALID
    for did in order if order is not None else finalization_order(ledger, controlled):
        ledger.finalize_dispute(did, truth)


def simulate_ledger(
    config: ScenarioConfig, trial_index: int, order_hook=None
) -> tuple[Ledger, list[AgentStrategy], dict]:
    """Run one trial to settlement and return the final ledger and agents.

    ``order_hook(ledger, default_order)`` may permute the finalization order.
    """
    rng = _trial_rng(config, trial_index)
    ledger, agents, info = _build(config, rng)
    controlled = info["controlled"]
    horizon = 4 * config.n_validators + 32
    resolved = False
    while ledger.height < horizon:
        for agent in agents:
            for tx in act(agent, ledger):
                ledger.submit(tx)
        ledger.advance_block()
        if not resolved and _resolution_ready(config, ledger):
            order = finalization_order(ledger, controlled)
            if order_hook is not None:
                order = order_hook(ledger, order)
            _resolve_all(ledger, controlled, order)
            resolved = True
        if resolved and not ledger.mempool and ledger.settled():
            break
    return ledger, agents, info


def run_trial(config: ScenarioConfig, trial_index: int) -> TrialResult:
    ledger, agents, info = simulate_ledger(config, trial_index)
    return _summarize_trial(config, trial_index, ledger, agents, info)


def _summarize_trial(config, trial_index, ledger, agents, info) -> TrialResult:
    initial = info["initial"]
    controlled = info["controlled"]
    nets = {k: ledger.balance(k) - initial.get(k, 0) for k in set(initial) | set(ledger.balances)}
    if sum(nets.values()) != 0:
        raise AssertionError("value not conserved within trial")
    side = (PROPOSER, *controlled)
    proposer_net = sum(nets.get(a, 0) for a in side)
    proposer_gross = proposer_net + sum(ledger.costs_paid.get(a, 0) for a in side)
    blk = ledger.blocks[BLOCK_ID]
    auction = ledger.auction_for(BLOCK_ID)

    winner = blk.reward_winner
    price = None
    valuations: dict[int, float] = {}
    utility: dict[int, float] = {}
    metrics: dict[str, float] = {}

    if config.uses_auction:
        bidders = [a for a in agents if a.kind is Kind.BIDDER and "bid" in a.memory and a.memory["bid"] is not None]
        bidder_accounts = {b.bidder for b in auction.bids} if auction is not None else set()
        entrants = len(bidder_accounts)
        reward = ledger.reward_units
        for a in bidders:
            valuations[a.account] = a.memory["valuation"]
        if auction is not None and auction.outcome is not None:
            winner = auction.outcome.winner
            price = auction.outcome.price
            metrics["auction_price"] = price / UNIT
            metrics["winner_surplus"] = valuations[winner] - price / UNIT
        for acct in bidder_accounts:
            u = nets[acct] / UNIT
            if acct == winner:
                # the money prize is the reward pot; utility uses the private valuation
                u += valuations[acct] - reward / UNIT
            utility[acct] = u
        metrics["entrants"] = entrants
    else:
        entrants = len({g.challenger for g in ledger.games_on(BLOCK_ID)})
        metrics["entrants"] = entrants
        if blk.escrow_id is not None:
            winner = ledger.escrows[blk.escrow_id].winner

    metrics["proposer_net"] = proposer_net / UNIT
    metrics["proposer_loss"] = -proposer_gross / UNIT
    metrics["fund_delta"] = nets.get(FUND, 0) / UNIT
    honest = [a for a in agents if a.kind is Kind.HONEST]
    if blk.regime != BASELINE:
        metrics["honest_won"] = float(winner is not None and any(a.account == winner for a in honest))
    for a in agents:
        if a.kind is Kind.FOLLOWER:
            if blk.regime == COMMIT_REVEAL:
                truth = Decision.CHALLENGE if blk.invalid else Decision.NO_CHALLENGE
                guess = a.memory.get("guess")
                metrics["follower_correct"] = float(guess is not None and guess == truth)
                metrics["follower_challenged"] = float(guess == Decision.CHALLENGE)
                metrics["honest_challenged"] = float(blk.invalid)
            else:
                metrics["follower_copied"] = float(ledger.game_of(a.account, BLOCK_ID) is not None)
        if a.kind is Kind.FRONTRUNNER:
            metrics["frontrunner_won"] = float(winner == a.account)

    return TrialResult(
        trial=trial_index,
        scenario=config.scenario,
        block_invalid=blk.invalid,
        proposer_net=proposer_net,
        proposer_gross=proposer_gross,
        fund_delta=nets.get(FUND, 0),
        nets=nets,
        winner_id=winner,
        entrants=entrants,
        auction_price=price,
        valuations=valuations,
        bidder_utility=utility,
        metrics=metrics,
    )


# ----------------------------------------------------------------------
# Monte Carlo


def _run_chunk(args: tuple[ScenarioConfig, int, int]) -> list[TrialResult]:
    config, lo, hi = args
    return [run_trial(config, i) for i in range(lo, hi)]


def run_trials(config: ScenarioConfig, workers: int = 1) -> list[TrialResult]:
    """All trials in index order, serially or across worker processes."""
    n = config.trials
    if workers <= 1 or n < 2:
        return [run_trial(config, i) for i in range(n)]
    size = max(1, math.ceil(n / (workers * 4)))
    chunks = [(config, lo, min(n, lo + size)) for lo in range(0, n, size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    return [r for part in parts for r in part]


def summarize(samples: Iterable[float], prediction: float | None = None) -> MetricStats:
    x = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    mean = float(x.mean())
    var = float(x.var(ddof=1)) if n > 1 else 0.0
    se = math.sqrt(var / n)
    z = None
    if prediction is not None:
        z = (mean - prediction) / se if se > 0 else (0.0 if mean == prediction else math.copysign(math.inf, mean - prediction))
    return MetricStats(mean, var, se, n, prediction, z)


def predictions(config: ScenarioConfig) -> dict[str, float]:
    """Closed-form expectations for the metrics this scenario reports."""
    p = config.params
    out: dict[str, float] = {}
    if config.invalid_prob < 1:
        if config.scenario == "CommitReveal" and "follow_the_leader" in config.attackers:
            q, r = config.invalid_prob, config.follower_prior
            out["follower_correct"] = q * r + (1 - q) * (1 - r)
        return out
    if config.scenario in ("1", "BaselineNoDefense"):
        out["proposer_loss"] = economics.scenario1_cost(p.reward_fraction, p.proposer_deposit)
    elif config.uses_auction:
        n = config.expected_bidders()
        out["proposer_loss"] = economics.proposer_expected_net_loss(
            p.reward_fraction, p.proposer_deposit, p.valuation_dispersion, n
        )
        out["winner_surplus"] = economics.expected_surplus(n, p.valuation_dispersion)
        out["auction_price"] = economics.expected_second_bid(economics.reward_pot(p), p.valuation_dispersion, n)
        out["entrants"] = float(n)
    else:
        out["proposer_loss"] = p.proposer_deposit + p.dispute_collateral
    if config.scenario == "CommitReveal" and "follow_the_leader" in config.attackers:
        out["follower_correct"] = config.follower_prior
    if config.scenario == "BaselineNoDefense" and "follow_the_leader" in config.attackers:
        out["follower_copied"] = 1.0
    return out


def aggregate(config: ScenarioConfig, results: Sequence[TrialResult]) -> AggregateStats:
    """Per-metric statistics; reduction runs over results sorted by trial index."""
    ordered = sorted(results, key=lambda r: r.trial)
    preds = predictions(config)
    names = sorted(ordered[0].metrics) if ordered else []
    metrics = {}
    for name in names:
        values = [r.metrics[name] for r in ordered if name in r.metrics]
        if values:
            metrics[name] = summarize(values, preds.get(name))
    return AggregateStats(len(ordered), metrics)


def run_monte_carlo(config: ScenarioConfig, workers: int = 1) -> AggregateStats:
    return aggregate(config, run_trials(config, workers))


def verify_against_analytic(
    stats: MetricStats,
    prediction: float | None = None,
    tolerance_sigmas: float = 3.0,
    atol: float = 0.0,
) -> Verdict:
    """PASS iff the mean sits within ``tolerance_sigmas`` standard errors of the prediction.

    A zero standard error (deterministic metric) passes only when the mean is
    within ``atol`` of the prediction; otherwise :class:`DegenerateStats`.
    """
    if prediction is None:
        prediction = stats.prediction
    if prediction is None:
        raise ValueError("no analytic prediction for this metric")
    diff = stats.mean - prediction
    if stats.stderr == 0:
        if abs(diff) <= atol:
            return Verdict(True, stats.mean, prediction, 0.0, 0.0, tolerance_sigmas)
        raise DegenerateStats(f"zero standard error but mean {stats.mean} != prediction {prediction}")
    z = diff / stats.stderr
    return Verdict(abs(diff) <= tolerance_sigmas * stats.stderr, stats.mean, prediction, stats.stderr, z, tolerance_sigmas)


def sample_auction_surplus(
    n: int, reward: float, mu: float, trials: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized auction draws: winner surplus and price (tokens) per trial.

    Valuations are quantized to base units exactly as bidders do on the
    ledger; a lone bidder pays the reserve ``reward - mu``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    values = reward - mu + mu * rng.random((trials, n))
    reserve = to_units(reward) - to_units(mu)
    bids = np.maximum(np.floor(values * UNIT).astype(np.int64), reserve)
    if n == 1:
        top = values[:, 0]
        price = np.full(trials, reserve, dtype=np.int64)
    else:
        order = np.argsort(-bids, axis=1, kind="stable")[:, :2]
        rows = np.arange(trials)
        top = values[rows, order[:, 0]]
        price = bids[rows, order[:, 1]]
    return top - price / UNIT, price / UNIT
