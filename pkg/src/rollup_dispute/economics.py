"""Closed-form payoffs for the dispute game and its secondary Vickrey auction.

All amounts here are real-valued token units.  The ledger works in integer
base units (see :mod:`rollup_dispute.ledger`); analytic values are only ever
compared against simulated means.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ProtocolParams:
    """Constants of one rollup economy, in tokens."""

    proposer_deposit: float
    validator_deposit: float
    dispute_collateral: float
    collateral_cap: float
    reward_fraction: float
    participation_cost: float
    valuation_dispersion: float

    def __post_init__(self) -> None:
        for name in ("proposer_deposit", "validator_deposit", "dispute_collateral"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.dispute_collateral < self.collateral_cap:
            raise ValueError("dispute_collateral must be below collateral_cap")
        if not 0 < self.reward_fraction <= 1:
            raise ValueError("reward_fraction out of (0,1]")
        if not self.participation_cost > 0:
            raise ValueError("participation_cost must be positive")
        if not self.valuation_dispersion > 0:
            raise ValueError("valuation_dispersion must be positive")
        if self.valuation_dispersion > reward_pot(self):
            raise ValueError(
                "valuation_dispersion must not exceed the reward pot "
                "(lowest valuation would be negative)"
            )

    # short aliases used throughout the analytic code
    @property
    def alpha(self) -> float:
        return self.reward_fraction

    @property
    def mu(self) -> float:
        return self.valuation_dispersion

    @property
    def c(self) -> float:
        return self.participation_cost


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"need at least one bidder, got n={n}")


def reward_pot(params: ProtocolParams) -> float:
    """Gross prize of a winning challenger: ``alpha * D_P + D_g``."""
    return params.reward_fraction * params.proposer_deposit + params.dispute_collateral


def expected_order_stats(n: int, mu: float) -> tuple[float, float]:
    """Expected highest and second-highest of ``n`` draws from U[0, mu].

    With a single draw the second-highest is taken to be 0 (the bottom of
    the support), which is what the auction charges a lone bidder.
    """
    _check_n(n)
    return n * mu / (n + 1), (n - 1) * mu / (n + 1)


def expected_surplus(n: int, mu: float) -> float:
    """Winner's expected gap between own valuation and the price paid."""
    _check_n(n)
    return mu / (n + 1)


def participation_beneficial(mu: float, c: float, n: int) -> bool:
    # strict: indifference resolves toward abstention
    return mu > c * (n + 1)


def marginal_entry_beneficial(mu: float, c: float, k: int) -> bool:
    """Whether a validator gains by joining an auction that already has ``k`` bidders."""
    return mu > c * (k + 2)


def equilibrium_entrants(mu: float, c: float, k0: int = 1) -> int:
    """Participant count once sequential entry stops, starting from ``k0``."""
    if c <= 0:
        raise ValueError("participation cost must be positive")
    k = k0
    while marginal_entry_beneficial(mu, c, k):
        k += 1
    return k


def scenario1_cost(alpha: float, proposer_deposit: float) -> float:
    """Proposer's cost when a controlled validator wins the dispute."""
    return (1 - alpha) * proposer_deposit


def expected_second_bid(reward: float, mu: float, n: int) -> float:
    """Mean auction price with ``n`` truthful bidders valued on [R - mu, R]."""
    _check_n(n)
    return reward - 2 * mu / (n + 1)


def proposer_expected_net_loss(alpha: float, proposer_deposit: float, mu: float, n: int) -> float:
    """Expected loss of a proposer who auctions the right to win the dispute.

    The proposer forfeits ``D_P + D_g`` and recoups the second-highest bid,
    giving ``(1 - alpha) * D_P + 2 * mu / (n + 1)``.
    """
    _check_n(n)
    return (1 - alpha) * proposer_deposit + 2 * mu / (n + 1)
