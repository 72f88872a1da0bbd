"""Simulated settlement chain: balances, block clock, mempool and contracts.

Money is held in integer base units (``UNIT`` per token) so that value
conservation can be checked bit-exactly.  Contract escrows are ordinary
entries of ``Ledger.balances`` keyed by a string address, which makes the
closed-economy invariant a plain sum.

Three reward regimes are supported per proposed block:

``baseline``
    The first challenger-won dispute to finalize is paid ``alpha*D_P + D_g``
    and the rest of ``D_P`` goes to the communal fund.  Later games on an
    already rejected block only refund collateral.
``escrow``
    The proposer stake sits in an escrow contract.  Forfeits are held until
    every game on the block is terminal and the window has closed, then the
    pool goes to the earliest valid challenger.
``commit_reveal``
    Escrow settlement, but challenges enter only through commit-reveal and
    are ordered by commit position.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal
from typing import Any

from . import auction as _auction
from .economics import ProtocolParams
from .errors import (
    AlreadyFinalized,
    AuctionClosed,
    BidBelowReserve,
    CommitRequired,
    CommitWindowClosed,
    DuplicateChallenge,
    DuplicateCommit,
    EmptyAuction,
    HashMismatch,
    InsufficientBalance,
    LedgerError,
    NoCommit,
    NoDisputeGame,
    NoExistingChallenge,
    NotFinalized,
    RevealWindowClosed,
    TooEarly,
    UnknownBlock,
    UnknownDispute,
    WindowClosed,
)

UNIT = 10**9
FUND = "fund"
GAS = "gas"

BASELINE = "baseline"
ESCROW = "escrow"
COMMIT_REVEAL = "commit_reveal"
REGIMES = (BASELINE, ESCROW, COMMIT_REVEAL)


def to_units(tokens: float | int | str | Decimal) -> int:
    """Convert a token amount to base units, flooring sub-unit remainders."""
    d = Decimal(str(tokens)) * UNIT
    return int(d.to_integral_value(rounding=ROUND_FLOOR))


def to_tokens(units: int) -> float:
    return units / UNIT


def format_tokens(units: int) -> str:
    """Exact fixed-point rendering of a base-unit amount."""
    sign = "-" if units < 0 else ""
    q, r = divmod(abs(units), UNIT)
    return f"{sign}{q}.{r:09d}"


def scale(units: int, fraction: float) -> int:
    """``floor(fraction * units)`` computed in decimal, not binary floating point."""
    d = Decimal(str(fraction)) * units
    return int(d.to_integral_value(rounding=ROUND_FLOOR))


class Status(str, enum.Enum):
    OPEN = "Open"
    CHALLENGER_WON = "ChallengerWon"
    PROPOSER_WON = "ProposerWon"


class Truth(str, enum.Enum):
    BLOCK_VALID = "BlockValid"
    BLOCK_INVALID = "BlockInvalid"


class Decision(enum.IntEnum):
    NO_CHALLENGE = 0
    CHALLENGE = 1


class Phase(str, enum.Enum):
    BIDDING = "Bidding"
    FINALIZED = "Finalized"
    RESOLVED = "Resolved"


def commit_hash(decision: Decision | int, block_number: int, nonce: bytes, validator: int) -> bytes:
    """SHA-256 over ``decision(1) || block(8, BE) || nonce(32) || validator(8, BE)``."""
    if len(nonce) != 32:
        raise ValueError("nonce must be 32 bytes")
    payload = (
        bytes([int(decision)])
        + block_number.to_bytes(8, "big")
        + nonce
        + validator.to_bytes(8, "big")
    )
    return hashlib.sha256(payload).digest()


@dataclass(slots=True)
class Block:
    block_id: int
    proposer: int
    invalid: bool
    regime: str
    proposed_at: int
    stake_account: str
    rejected: bool = False
    reward_winner: int | None = None
    escrow_id: int | None = None
    cr_id: int | None = None


@dataclass(slots=True)
class DisputeGame:
    id: int
    block_id: int
    proposer: int
    challenger: int
    creation_block: int
    sequence: int
    account: str
    status: Status = Status.OPEN
    # position in the ledger-wide order in which games reached a terminal status
    concluded_index: int | None = None
    # proposer collateral still held after a challenger win (escrow regimes only)
    held_forfeit: int = 0


@dataclass(slots=True)
class AuctionContract:
    id: int
    dispute_block_id: int
    proposer: int
    auction_start: int
    duration: int
    proposer_escrow: int
    reserve: int
    account: str
    bids: list[_auction.Bid] = field(default_factory=list)
    phase: Phase = Phase.BIDDING
    outcome: _auction.AuctionOutcome | None = None
    winner_dispute: int | None = None
    winner_concluded_first: bool | None = None

    @property
    def deadline(self) -> int:
        return self.auction_start + self.duration


@dataclass(slots=True)
class EscrowContract:
    id: int
    block_id: int
    dispute_start: int
    dispute_duration: int
    account: str
    rewards_locked: bool = False
    reward_pool: int = 0
    challenger_deposits: dict[int, int] = field(default_factory=dict)
    challenge_order: dict[int, tuple[int, int]] = field(default_factory=dict)
    settled: bool = False
    winner: int | None = None

    @property
    def deadline(self) -> int:
        return self.dispute_start + self.dispute_duration


@dataclass(slots=True)
class CommitRecord:
    commit_hash: bytes
    revealed: bool = False
    decision: Decision | None = None
    block_number: int | None = None
    committed_at: tuple[int, int] = (0, 0)


@dataclass(slots=True)
class CommitRevealContract:
    id: int
    block_id: int
    commit_deadline: int
    reveal_deadline: int
    commits: dict[int, CommitRecord] = field(default_factory=dict)
    processed: bool = False


@dataclass(slots=True)
class Tx:
    """A pending call.  ``front_of`` asks for placement ahead of another pending tx."""

    kind: str
    sender: int
    payload: dict[str, Any]
    front_of: int | None = None
    seq: int = -1


@dataclass(slots=True)
class Receipt:
    height: int
    seq: int
    kind: str
    sender: int
    error: str | None


class Ledger:
    def __init__(self, params: ProtocolParams, public_mempool: bool = False) -> None:
        self.params = params
        self.public_mempool = public_mempool
        self.D_P = to_units(params.proposer_deposit)
        self.D_V = to_units(params.validator_deposit)
        self.D_g = to_units(params.dispute_collateral)
        self.cost = to_units(params.participation_cost)
        self.alpha_share = scale(self.D_P, params.reward_fraction)
        self.mu_units = to_units(params.valuation_dispersion)

        self.height = 0
        self.balances: dict[int | str, int] = {FUND: 0, GAS: 0}
        self.supply = 0
        self.mempool: list[Tx] = []
        self.receipts: list[Receipt] = []
        self.blocks: dict[int, Block] = {}
        self.disputes: dict[int, DisputeGame] = {}
        self.auctions: dict[int, AuctionContract] = {}
        self.escrows: dict[int, EscrowContract] = {}
        self.commit_reveals: dict[int, CommitRevealContract] = {}
        self.costs_paid: dict[int, int] = {}

        self._seq = 0
        self._tx_seq = 0
        self._next_id = 1
        self._conclusions = 0
        self._games_by_block: dict[int, list[int]] = {}
        self._open_by_block: dict[int, int] = {}
        self._game_of: dict[tuple[int, int], int] = {}
        self._auction_of_block: dict[int, int] = {}
        self._pending_keys: set[tuple[int, str]] = set()

    # ------------------------------------------------------------------
    # accounting primitives

    @property
    def reward_units(self) -> int:
        """Quantized reward pot ``alpha*D_P + D_g``."""
        return self.alpha_share + self.D_g

    def mint(self, account: int, units: int) -> None:
        """Genesis allocation; the only way supply grows."""
        self.balances[account] = self.balances.get(account, 0) + units
        self.supply += units

    def balance(self, account: int | str) -> int:
        return self.balances.get(account, 0)

    def total(self) -> int:
        return sum(self.balances.values())

    def _move(self, src: int | str, dst: int | str, units: int) -> None:
        if units < 0:
            raise ValueError("negative transfer")
        have = self.balances.get(src, 0)
        if have < units:
            raise InsufficientBalance(f"{src} holds {have}, needs {units}")
        self.balances[src] = have - units
        self.balances[dst] = self.balances.get(dst, 0) + units

    def _require(self, account: int, units: int) -> None:
        if self.balances.get(account, 0) < units:
            raise InsufficientBalance(f"{account} holds {self.balance(account)}, needs {units}")

    def _next_sequence(self) -> int:
        self._seq += 1
        return self._seq

    def _new_id(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def pay_participation(self, account: int) -> None:
        self._move(account, GAS, self.cost)
        self.costs_paid[account] = self.costs_paid.get(account, 0) + self.cost

    # ------------------------------------------------------------------
    # views for agents

    def block(self, block_id: int) -> Block:
        try:
            return self.blocks[block_id]
        except KeyError:
            raise UnknownBlock(f"no block {block_id}") from None

    def games_on(self, block_id: int) -> list[DisputeGame]:
        return [self.disputes[i] for i in self._games_by_block.get(block_id, ())]

    def open_count(self, block_id: int) -> int:
        return self._open_by_block.get(block_id, 0)

    def game_of(self, challenger: int, block_id: int) -> DisputeGame | None:
        did = self._game_of.get((challenger, block_id))
        return None if did is None else self.disputes[did]

    def auction_for(self, block_id: int) -> AuctionContract | None:
        aid = self._auction_of_block.get(block_id)
        return None if aid is None else self.auctions[aid]

    def has_pending(self, sender: int, kind: str) -> bool:
        return (sender, kind) in self._pending_keys

    def visible_mempool(self) -> list[Tx]:
        return self.mempool if self.public_mempool else []

    # ------------------------------------------------------------------
    # blocks and dispute games

    def propose_block(
        self,
        proposer: int,
        block_id: int,
        invalid: bool,
        regime: str = BASELINE,
        dispute_window: int = 4,
        commit_window: int = 3,
        reveal_window: int = 2,
    ) -> Block:
        """Stake ``D_P`` behind a new block; escrow regimes also deploy their contracts."""
        if regime not in REGIMES:
            raise ValueError(f"unknown regime {regime!r}")
        if block_id in self.blocks:
            raise LedgerError(f"block {block_id} already proposed")
        self._require(proposer, self.D_P)
        blk = Block(block_id, proposer, invalid, regime, self.height, f"stake:{block_id}")
        if regime == COMMIT_REVEAL:
            cr = CommitRevealContract(
                id=self._new_id(),
                block_id=block_id,
                commit_deadline=self.height + commit_window,
                reveal_deadline=self.height + commit_window + reveal_window,
            )
            self.commit_reveals[cr.id] = cr
            blk.cr_id = cr.id
            # challenges arrive at the reveal deadline, so the pool window must cover it
            dispute_window = max(dispute_window, commit_window + reveal_window + 1)
        if regime in (ESCROW, COMMIT_REVEAL):
            esc = EscrowContract(
                id=self._new_id(),
                block_id=block_id,
                dispute_start=self.height,
                dispute_duration=dispute_window,
                account="",
            )
            esc.account = f"escrow:{esc.id}"
            self.escrows[esc.id] = esc
            blk.escrow_id = esc.id
            blk.stake_account = esc.account
        self._move(proposer, blk.stake_account, self.D_P)
        self.blocks[block_id] = blk
        self._games_by_block[block_id] = []
        self._open_by_block[block_id] = 0
        return blk

    def open_dispute(self, challenger: int, proposer: int, block_id: int) -> int:
        """Open a game; both parties post ``D_g``.  Returns the dispute id."""
        blk = self.block(block_id)
        if blk.proposer != proposer:
            raise LedgerError(f"block {block_id} was not proposed by {proposer}")
        if (challenger, block_id) in self._game_of:
            raise DuplicateChallenge(f"{challenger} already challenged block {block_id}")
        self._require(challenger, self.D_V + self.D_g)
        self._require(proposer, self.D_g)
        did = self._new_id()
        game = DisputeGame(
            id=did,
            block_id=block_id,
            proposer=proposer,
            challenger=challenger,
            creation_block=self.height,
            sequence=self._next_sequence(),
            account=f"dispute:{did}",
        )
        self._move(challenger, game.account, self.D_g)
        self._move(proposer, game.account, self.D_g)
        self.disputes[did] = game
        self._games_by_block[block_id].append(did)
        self._open_by_block[block_id] += 1
        self._game_of[(challenger, block_id)] = did
        return did

    def challenge(self, challenger: int, block_id: int) -> int:
        """A validator's plaintext challenge: pay ``c``, open a game, join the escrow order."""
        blk = self.block(block_id)
        if blk.regime == COMMIT_REVEAL:
            raise CommitRequired(f"block {block_id} accepts challenges only via commit-reveal")
        if blk.escrow_id is not None:
            esc = self.escrows[blk.escrow_id]
            if self.height >= esc.deadline:
                raise WindowClosed(f"escrow window for block {block_id} closed at {esc.deadline}")
        if (challenger, block_id) in self._game_of:
            raise DuplicateChallenge(f"{challenger} already challenged block {block_id}")
        self._require(challenger, self.D_V + self.D_g + self.cost)
        did = self.open_dispute(challenger, blk.proposer, block_id)
        self.pay_participation(challenger)
        if blk.escrow_id is not None:
            self.escrow_initiate_challenge(blk.escrow_id, challenger, self.D_g)
        return did

    def finalize_dispute(self, dispute_id: int, ground_truth: Truth) -> dict[int | str, int]:
        """Settle a game from the ground-truth verdict; returns gross credits by account."""
        game = self.disputes.get(dispute_id)
        if game is None:
            raise UnknownDispute(f"no dispute {dispute_id}")
        if game.status is not Status.OPEN:
            raise AlreadyFinalized(f"dispute {dispute_id} is {game.status.value}")
        blk = self.blocks[game.block_id]
        payout: dict[int | str, int] = {}

        def pay(src: int | str, dst: int | str, units: int) -> None:
            self._move(src, dst, units)
            payout[dst] = payout.get(dst, 0) + units

        if Truth(ground_truth) is Truth.BLOCK_VALID:
            game.status = Status.PROPOSER_WON
            pay(game.account, game.proposer, 2 * self.D_g)
        else:
            game.status = Status.CHALLENGER_WON
            pay(game.account, game.challenger, self.D_g)
            if blk.regime == BASELINE:
                if not blk.rejected:
                    pay(game.account, game.challenger, self.D_g)
                    pay(blk.stake_account, game.challenger, self.alpha_share)
                    pay(blk.stake_account, FUND, self.balance(blk.stake_account))
                    blk.rejected = True
                    blk.reward_winner = game.challenger
                else:
                    # stake already paid out to an earlier finalizer
                    pay(game.account, game.proposer, self.D_g)
            else:
                game.held_forfeit = self.D_g
        game.concluded_index = self._conclusions
        self._conclusions += 1
        self._open_by_block[game.block_id] -= 1
        return payout

    # ------------------------------------------------------------------
    # secondary auction run by the proposer

    def auction_init(self, proposer: int, dispute_block_id: int, duration: int) -> int:
        blk = self.block(dispute_block_id)
        if blk.proposer != proposer:
            raise LedgerError(f"block {dispute_block_id} was not proposed by {proposer}")
        if self.open_count(dispute_block_id) == 0:
            raise NoExistingChallenge(f"no open challenge on block {dispute_block_id}")
        if dispute_block_id in self._auction_of_block:
            raise LedgerError(f"auction already deployed for block {dispute_block_id}")
        escrow = self.reward_units
        self._require(proposer, escrow)
        aid = self._new_id()
        contract = AuctionContract(
            id=aid,
            dispute_block_id=dispute_block_id,
            proposer=proposer,
            auction_start=self.height,
            duration=duration,
            proposer_escrow=escrow,
            reserve=max(0, escrow - self.mu_units),
            account=f"auction:{aid}",
        )
        self._move(proposer, contract.account, escrow)
        self.auctions[aid] = contract
        self._auction_of_block[dispute_block_id] = aid
        return aid

    def auction_submit_bid(self, auction_id: int, validator: int, amount: int) -> None:
        contract = self.auctions[auction_id]
        if contract.phase is not Phase.BIDDING or self.height >= contract.deadline:
            raise AuctionClosed(f"auction {auction_id} closed at {contract.deadline}")
        game = self.game_of(validator, contract.dispute_block_id)
        if game is None or game.status is not Status.OPEN:
            raise NoDisputeGame(f"{validator} has no open dispute on block {contract.dispute_block_id}")
        if amount < contract.reserve:
            raise BidBelowReserve(f"bid {amount} below reserve {contract.reserve}")
        contract.bids.append(_auction.Bid(validator, amount, self._next_sequence()))

    def auction_finalize(self, auction_id: int) -> _auction.AuctionOutcome:
        contract = self.auctions[auction_id]
        if contract.phase is not Phase.BIDDING:
            raise AlreadyFinalized(f"auction {auction_id} is {contract.phase.value}")
        if self.height < contract.deadline:
            raise TooEarly(f"auction {auction_id} runs until {contract.deadline}")
        if not contract.bids:
            self._move(contract.account, contract.proposer, contract.proposer_escrow)
            contract.phase = Phase.RESOLVED
            raise EmptyAuction(f"auction {auction_id} closed without bids; escrow refunded")
        outcome = _auction.resolve(contract.bids, contract.reserve)
        self._move(outcome.winner, contract.account, outcome.price)
        contract.outcome = outcome
        contract.winner_dispute = self._game_of[(outcome.winner, contract.dispute_block_id)]
        contract.phase = Phase.FINALIZED
        return outcome

    def _concluded_first(self, contract: AuctionContract) -> bool:
        games = [g for g in self.games_on(contract.dispute_block_id) if g.concluded_index is not None]
        first = min(games, key=lambda g: g.concluded_index)
        return first.id == contract.winner_dispute

    def auction_resolve(self, auction_id: int, winner_concluded_first: bool | None = None) -> dict[int | str, int]:
        """Settle the proposer's escrow once the winner's game is terminal.

        When the winner concluded first the price goes to the proposer and the
        escrow is returned; otherwise the escrow is handed to the winner and
        the winner's locked price refunded.  ``None`` reads the order off the
        ledger.
        """
        contract = self.auctions[auction_id]
        if contract.phase is not Phase.FINALIZED:
            raise NotFinalized(f"auction {auction_id} is {contract.phase.value}")
        game = self.disputes[contract.winner_dispute]
        if game.status is Status.OPEN:
            raise TooEarly(f"winner's dispute {game.id} still open")
        if winner_concluded_first is None:
            winner_concluded_first = self._concluded_first(contract)
        assert contract.outcome is not None
        winner, price = contract.outcome.winner, contract.outcome.price
        if winner_concluded_first:
            payout = {contract.proposer: price + contract.proposer_escrow}
            self._move(contract.account, contract.proposer, price)
            self._move(contract.account, contract.proposer, contract.proposer_escrow)
        else:
            payout = {winner: price + contract.proposer_escrow}
            self._move(contract.account, winner, contract.proposer_escrow)
            self._move(contract.account, winner, price)
        contract.winner_concluded_first = winner_concluded_first
        contract.phase = Phase.RESOLVED
        return payout

    # ------------------------------------------------------------------
    # escrowed reward

    def escrow_initiate_challenge(
        self,
        escrow_id: int,
        challenger: int,
        deposit: int,
        order: tuple[int, int] | None = None,
    ) -> None:
        esc = self.escrows[escrow_id]
        if self.height >= esc.deadline:
            raise WindowClosed(f"escrow {escrow_id} window closed at {esc.deadline}")
        esc.challenger_deposits[challenger] = esc.challenger_deposits.get(challenger, 0) + deposit
        if not esc.rewards_locked:
            esc.rewards_locked = True
            esc.reward_pool = self.balance(esc.account)
        if challenger not in esc.challenge_order:
            esc.challenge_order[challenger] = order if order is not None else (self.height, self._next_sequence())

    def escrow_finalize(self, escrow_id: int) -> int | None:
        """Pay the pool to the earliest valid challenger; ``None`` if the block stood."""
        esc = self.escrows[escrow_id]
        if esc.settled:
            raise AlreadyFinalized(f"escrow {escrow_id} already settled")
        if self.height < esc.deadline:
            raise TooEarly(f"escrow {escrow_id} window open until {esc.deadline}")
        games = self.games_on(esc.block_id)
        if any(g.status is Status.OPEN for g in games):
            raise TooEarly(f"block {esc.block_id} still has open disputes")
        blk = self.blocks[esc.block_id]
        won = {g.challenger: g for g in games if g.status is Status.CHALLENGER_WON}
        ranked = sorted((esc.challenge_order[c], c) for c in won if c in esc.challenge_order)
        winner = ranked[0][1] if ranked else None
        if winner is not None:
            self._move(esc.account, winner, scale(esc.reward_pool, self.params.reward_fraction))
            self._move(esc.account, FUND, self.balance(esc.account))
            for challenger, g in won.items():
                dst = winner if challenger == winner else g.proposer
                self._move(g.account, dst, g.held_forfeit)
                g.held_forfeit = 0
            blk.rejected = True
            blk.reward_winner = winner
        else:
            self._move(esc.account, blk.proposer, self.balance(esc.account))
        esc.rewards_locked = False
        esc.settled = True
        esc.winner = winner
        return winner

    # ------------------------------------------------------------------
    # commit-reveal

    def commit(self, cr_id: int, validator: int, commit_hash_: bytes) -> None:
        cr = self.commit_reveals[cr_id]
        if self.height >= cr.commit_deadline:
            raise CommitWindowClosed(f"commits closed at {cr.commit_deadline}")
        if validator in cr.commits:
            raise DuplicateCommit(f"{validator} already committed")
        if len(commit_hash_) != 32:
            raise ValueError("commit hash must be 32 bytes")
        cr.commits[validator] = CommitRecord(bytes(commit_hash_), committed_at=(self.height, self._next_sequence()))

    def reveal(
        self,
        cr_id: int,
        validator: int,
        decision: Decision | int,
        block_number: int,
        nonce: bytes,
    ) -> None:
        cr = self.commit_reveals[cr_id]
        if not cr.commit_deadline <= self.height < cr.reveal_deadline:
            raise RevealWindowClosed(f"reveals accepted in [{cr.commit_deadline}, {cr.reveal_deadline})")
        rec = cr.commits.get(validator)
        if rec is None or rec.revealed:
            raise NoCommit(f"{validator} has no unrevealed commit")
        if commit_hash(decision, block_number, nonce, validator) != rec.commit_hash:
            raise HashMismatch(f"reveal from {validator} does not match its commit")
        rec.revealed = True
        rec.decision = Decision(decision)
        rec.block_number = block_number

    def process_challenges(self, cr_id: int) -> list[int]:
        """Open a game for every revealed challenge, in commit order."""
        cr = self.commit_reveals[cr_id]
        if self.height < cr.reveal_deadline:
            raise TooEarly(f"reveal phase open until {cr.reveal_deadline}")
        if cr.processed:
            raise AlreadyFinalized(f"commit-reveal {cr_id} already processed")
        cr.processed = True
        opened = []
        ordered = sorted(cr.commits.items(), key=lambda kv: kv[1].committed_at)
        for validator, rec in ordered:
            if not rec.revealed or rec.decision is not Decision.CHALLENGE:
                continue
            blk = self.blocks.get(rec.block_number)
            if blk is None:
                continue
            try:
                self._require(validator, self.D_V + self.D_g + self.cost)
                did = self.open_dispute(validator, blk.proposer, blk.block_id)
            except LedgerError:
                continue
            self.pay_participation(validator)
            if blk.escrow_id is not None:
                self.escrow_initiate_challenge(blk.escrow_id, validator, self.D_g, order=rec.committed_at)
            opened.append(did)
        return opened

    # ------------------------------------------------------------------
    # mempool and block clock

    def submit(self, tx: Tx) -> Tx:
        """Queue a transaction.  Placement ahead of another tx needs a public mempool."""
        self._tx_seq += 1
        tx.seq = self._tx_seq
        self._pending_keys.add((tx.sender, tx.kind))
        if tx.front_of is not None and self.public_mempool:
            for i, pending in enumerate(self.mempool):
                if pending.seq == tx.front_of:
                    self.mempool.insert(i, tx)
                    return tx
        self.mempool.append(tx)
        return tx

    def _execute(self, tx: Tx) -> None:
        p = tx.payload
        if tx.kind == "challenge":
            self.challenge(tx.sender, p["block_id"])
        elif tx.kind == "auction_init":
            self.auction_init(tx.sender, p["block_id"], p["duration"])
        elif tx.kind == "bid":
            self.auction_submit_bid(p["auction_id"], tx.sender, p["amount"])
        elif tx.kind == "commit":
            self.commit(p["cr_id"], tx.sender, p["commit_hash"])
        elif tx.kind == "reveal":
            self.reveal(p["cr_id"], tx.sender, p["decision"], p["block_number"], p["nonce"])
        else:
            raise LedgerError(f"unknown transaction kind {tx.kind!r}")

    def advance_block(self) -> None:
        """Mine one block: include the mempool in order, then fire deadline transitions."""
        self.height += 1
        pending, self.mempool = self.mempool, []
        self._pending_keys.clear()
        for tx in pending:
            error = None
            try:
                self._execute(tx)
            except LedgerError as exc:
                error = f"{type(exc).__name__}: {exc}"
            self.receipts.append(Receipt(self.height, tx.seq, tx.kind, tx.sender, error))
        self._fire_deadlines()

    def _fire_deadlines(self) -> None:
        for contract in self.auctions.values():
            if contract.phase is Phase.BIDDING and self.height >= contract.deadline:
                try:
                    self.auction_finalize(contract.id)
                except (EmptyAuction, InsufficientBalance):
                    pass
            if (
                contract.phase is Phase.FINALIZED
                and self.disputes[contract.winner_dispute].status is not Status.OPEN
            ):
                self.auction_resolve(contract.id)
        for cr in self.commit_reveals.values():
            if not cr.processed and self.height >= cr.reveal_deadline:
                self.process_challenges(cr.id)
        for esc in self.escrows.values():
            if (
                not esc.settled
                and self.height >= esc.deadline
                and all(g.status is not Status.OPEN for g in self.games_on(esc.block_id))
            ):
                self.escrow_finalize(esc.id)

    def settled(self) -> bool:
        """True once no game is open and every contract has reached its final state."""
        return (
            all(g.status is not Status.OPEN for g in self.disputes.values())
            and all(a.phase is Phase.RESOLVED for a in self.auctions.values())
            and all(e.settled for e in self.escrows.values())
            and all(c.processed for c in self.commit_reveals.values())
        )

    # ------------------------------------------------------------------
    # serialization

    def snapshot(self) -> dict[str, Any]:
        return {
            "height": self.height,
            "supply": self.supply,
            "balances": {str(k): v for k, v in self.balances.items()},
            "blocks": [_plain(b) for b in self.blocks.values()],
            "disputes": [_plain(g) for g in self.disputes.values()],
            "auctions": [_plain(a) for a in self.auctions.values()],
            "escrows": [_plain(e) for e in self.escrows.values()],
            "commit_reveals": [_plain(c) for c in self.commit_reveals.values()],
            "mempool": [_plain(t) for t in self.mempool],
            "receipts": [_plain(r) for r in self.receipts],
        }

    def serialize(self) -> str:
        """Canonical sorted-key JSON of the full ledger state."""
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))


def _plain(obj: Any) -> Any:
    if hasattr(obj, "__dataclass_fields__"):
        return {name: _plain(getattr(obj, name)) for name in obj.__dataclass_fields__}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, bytes):
        return obj.hex()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
