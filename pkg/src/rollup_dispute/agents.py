"""Behavioral policies for the proposer, validators and the two countermeasure attackers.

Every policy reads the ledger (plus, for pending transactions, whatever the
mempool exposes) and returns transactions; all state changes go through the
ledger.  Agents keep a small private ``memory`` for things the chain does not
record, such as a commit nonce or whether an entry decision was already made.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import economics
from .auction import draw_valuation
from .ledger import COMMIT_REVEAL, Decision, Ledger, Phase, Tx, commit_hash, to_units


class Kind(str, enum.Enum):
    HONEST = "HonestValidator"
    CONTROLLED = "ControlledValidator"
    BIDDER = "AuctionBidder"
    FREE_RIDER = "FreeRider"
    FRONTRUNNER = "FrontRunner"
    FOLLOWER = "FollowTheLeader"
    PROPOSER = "MaliciousProposer"


@dataclass
class AgentStrategy:
    kind: Kind
    account: int
    target_block: int
    rng: np.random.Generator | None = None
    # MaliciousProposer
    scenario: int = 1
    controlled: tuple[int, ...] = ()
    auction_duration: int = 2
    # ControlledValidator
    controller: int | None = None
    # AuctionBidder: challenge before any auction exists / height offset of the entry decision
    initial_challenger: bool = False
    arrival: int | None = None
    # FollowTheLeader under commit-reveal
    prior: float = 0.5
    memory: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind is Kind.CONTROLLED and self.controller is None:
            raise ValueError("a controlled validator needs a controlling proposer")


def _pending_challenges(ledger: Ledger, block_id: int) -> list[Tx]:
    return [
        tx
        for tx in ledger.visible_mempool()
        if tx.kind == "challenge" and tx.payload["block_id"] == block_id
    ]


def _has_pending(ledger: Ledger, account: int, kind: str) -> bool:
    # an agent always knows what it has itself submitted
    return ledger.has_pending(account, kind)


def _challenge_tx(account: int, block_id: int) -> Tx:
    return Tx("challenge", account, {"block_id": block_id})


def _commit_tx(agent: AgentStrategy, ledger: Ledger, decision: Decision) -> Tx:
    blk = ledger.block(agent.target_block)
    nonce = agent.rng.bytes(32)
    agent.memory["commit"] = (decision, nonce)
    h = commit_hash(decision, blk.block_id, nonce, agent.account)
    return Tx("commit", agent.account, {"cr_id": blk.cr_id, "commit_hash": h})


def _reveal_due(agent: AgentStrategy, ledger: Ledger) -> Tx | None:
    """Reveal once the next block falls inside the reveal window."""
    if "commit" not in agent.memory or agent.memory.get("revealed"):
        return None
    blk = ledger.block(agent.target_block)
    cr = ledger.commit_reveals[blk.cr_id]
    if not cr.commit_deadline <= ledger.height + 1 < cr.reveal_deadline:
        return None
    decision, nonce = agent.memory["commit"]
    agent.memory["revealed"] = True
    return Tx(
        "reveal",
        agent.account,
        {"cr_id": cr.id, "decision": decision, "block_number": blk.block_id, "nonce": nonce},
    )


def _commit_open(ledger: Ledger, block_id: int) -> bool:
    blk = ledger.block(block_id)
    return ledger.height + 1 < ledger.commit_reveals[blk.cr_id].commit_deadline


def proposer_act(strategy: AgentStrategy, ledger: Ledger) -> list[Tx]:
    """Counter the first external challenge.

    Scenario 1 answers with a challenge from a controlled validator, which
    the proposer then races to finalize first.  Scenarios 2 and 3 deploy the
    secondary auction.  Under commit-reveal the proposer cannot see decisions
    in time and does nothing.
    """
    block_id = strategy.target_block
    blk = ledger.block(block_id)
    if blk.regime == COMMIT_REVEAL:
        return []
    own = set(strategy.controlled) | {strategy.account}
    external = any(g.challenger not in own for g in ledger.games_on(block_id)) or any(
        tx.sender not in own for tx in _pending_challenges(ledger, block_id)
    )
    if not external:
        return []
    if strategy.scenario == 1:
        if not strategy.controlled:
            return []
        vj = strategy.controlled[0]
        if ledger.game_of(vj, block_id) is not None or _has_pending(ledger, vj, "challenge"):
            return []
        return [_challenge_tx(vj, block_id)]
    if ledger.auction_for(block_id) is not None or _has_pending(ledger, strategy.account, "auction_init"):
        return []
    if ledger.open_count(block_id) == 0:
        # only a pending challenge so far; the auction needs one on chain
        return []
    return [Tx("auction_init", strategy.account, {"block_id": block_id, "duration": strategy.auction_duration})]


def validator_act(strategy: AgentStrategy, ledger: Ledger, observed_k: int) -> Tx | None:
    block_id = strategy.target_block
    blk = ledger.block(block_id)
    acct = strategy.account
    kind = strategy.kind

    if kind is Kind.HONEST:
        if blk.regime == COMMIT_REVEAL:
            if "commit" not in strategy.memory:
                if not _commit_open(ledger, block_id):
                    return None
                decision = Decision.CHALLENGE if blk.invalid else Decision.NO_CHALLENGE
                return _commit_tx(strategy, ledger, decision)
            return _reveal_due(strategy, ledger)
        if blk.invalid and ledger.game_of(acct, block_id) is None and not _has_pending(ledger, acct, "challenge"):
            return _challenge_tx(acct, block_id)
        return None

    if kind is Kind.FREE_RIDER:
        if not blk.invalid or ledger.game_of(acct, block_id) is not None or _has_pending(ledger, acct, "challenge"):
            return None
        if observed_k > 0 or _pending_challenges(ledger, block_id):
            return None
        return _challenge_tx(acct, block_id)

    if kind is Kind.BIDDER:
        return _bidder_act(strategy, ledger, observed_k)

    return None


def _bidder_act(strategy: AgentStrategy, ledger: Ledger, observed_k: int) -> Tx | None:
    block_id = strategy.target_block
    blk = ledger.block(block_id)
    acct = strategy.account
    mem = strategy.memory
    game = ledger.game_of(acct, block_id)
    pending = _has_pending(ledger, acct, "challenge")
    auction = ledger.auction_for(block_id)

    if auction is None:
        if strategy.initial_challenger and blk.invalid and game is None and not pending:
            return _challenge_tx(acct, block_id)
        return None
    if auction.phase is not Phase.BIDDING or ledger.height + 1 >= auction.deadline:
        return None
    if game is not None:
        if mem.get("bid") is not None:
            return None
        params = ledger.params
        reward = economics.reward_pot(params)
        value = draw_valuation(strategy.rng, reward, params.valuation_dispersion)
        amount = min(max(to_units(value), auction.reserve), auction.proposer_escrow)
        mem["valuation"] = value
        mem["bid"] = amount
        return Tx("bid", acct, {"auction_id": auction.id, "amount": amount})
    if pending or "entered" in mem:
        return None
    if strategy.arrival is not None and ledger.height != auction.auction_start + strategy.arrival:
        return None
    params = ledger.params
    mem["entered"] = economics.marginal_entry_beneficial(
        params.valuation_dispersion, params.participation_cost, observed_k
    )
    mem["observed_k"] = observed_k
    return _challenge_tx(acct, block_id) if mem["entered"] else None


def frontrunner_act(strategy: AgentStrategy, ledger: Ledger) -> Tx | None:
    """Jump ahead of a pending challenge seen in a public mempool."""
    if not ledger.public_mempool:
        return None
    block_id = strategy.target_block
    acct = strategy.account
    if ledger.game_of(acct, block_id) is not None or _has_pending(ledger, acct, "challenge"):
        return None
    victims = [tx for tx in _pending_challenges(ledger, block_id) if tx.sender != acct]
    if not victims:
        return None
    strategy.memory["victim"] = victims[0].sender
    return Tx("challenge", acct, {"block_id": block_id}, front_of=victims[0].seq)


def follow_leader_act(strategy: AgentStrategy, ledger: Ledger) -> Tx | None:
    """Copy observed challenges; under commit-reveal only hashes are visible, so guess."""
    block_id = strategy.target_block
    blk = ledger.block(block_id)
    acct = strategy.account
    mem = strategy.memory

    if blk.regime == COMMIT_REVEAL:
        if "commit" in mem:
            return _reveal_due(strategy, ledger)
        if not _commit_open(ledger, block_id):
            return None
        cr = ledger.commit_reveals[blk.cr_id]
        seen = [rec.commit_hash for v, rec in cr.commits.items() if v != acct]
        seen += [
            tx.payload["commit_hash"]
            for tx in ledger.visible_mempool()
            if tx.kind == "commit" and tx.sender != acct and tx.payload["cr_id"] == cr.id
        ]
        if not seen:
            return None
        guess = infer_decision(seen[0], strategy.rng, strategy.prior)
        mem["guess"] = guess
        return _commit_tx(strategy, ledger, guess)

    if ledger.game_of(acct, block_id) is not None or _has_pending(ledger, acct, "challenge"):
        return None
    observed = any(g.challenger != acct for g in ledger.games_on(block_id)) or any(
        tx.sender != acct for tx in _pending_challenges(ledger, block_id)
    )
    if not observed:
        return None
    mem["copied"] = True
    return _challenge_tx(acct, block_id)


def infer_decision(observed_hash: bytes, rng: np.random.Generator, prior: float) -> Decision:
    """Best available inference of a committed decision from its hash.

    The nonce makes the digest independent of the decision, so the hash is
    deliberately ignored and the answer is a draw from ``prior``.
    """
    del observed_hash
    return Decision.CHALLENGE if rng.random() < prior else Decision.NO_CHALLENGE


def act(strategy: AgentStrategy, ledger: Ledger) -> list[Tx]:
    """Dispatch to the policy for ``strategy.kind``."""
    kind = strategy.kind
    if kind is Kind.PROPOSER:
        return proposer_act(strategy, ledger)
    if kind is Kind.CONTROLLED:
        return []
    if kind is Kind.FRONTRUNNER:
        tx = frontrunner_act(strategy, ledger)
    elif kind is Kind.FOLLOWER:
        tx = follow_leader_act(strategy, ledger)
    else:
        tx = validator_act(strategy, ledger, ledger.open_count(strategy.target_block))
    return [] if tx is None else [tx]
