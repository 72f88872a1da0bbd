"""Sealed-bid second-price auction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BidBelowReserve, EmptyAuction


@dataclass(frozen=True)
class Bid:
    bidder: int
    amount: int
    sequence: int


@dataclass(frozen=True)
class AuctionOutcome:
    winner: int
    price: int
    winning_bid: int
    second_bid: int


def resolve(bids: Sequence[Bid], reserve: int) -> AuctionOutcome:
    """Highest bid wins and pays the second-highest (or the reserve if alone).

    Equal amounts are ordered by submission sequence, so the earliest of
    several tied top bids wins and pays the tied amount.
    """
    if not bids:
        raise EmptyAuction("no bids submitted")
    for bid in bids:
        if bid.amount < reserve:
            raise BidBelowReserve(f"bid {bid.amount} from {bid.bidder} below reserve {reserve}")
    ranked = sorted(bids, key=lambda b: (-b.amount, b.sequence))
    top = ranked[0]
    second = ranked[1].amount if len(ranked) > 1 else reserve
    return AuctionOutcome(winner=top.bidder, price=second, winning_bid=top.amount, second_bid=second)


def draw_valuation(rng: np.random.Generator, reward: float, mu: float) -> float:
    """Private valuation uniform on ``[reward - mu, reward]``."""
    return reward - mu + mu * rng.random()
