"""Exceptions raised by the auction engine and ledger contracts."""


class DisputeSimError(Exception):
    pass


class ConfigInvalid(DisputeSimError, ValueError):
    pass


class LedgerError(DisputeSimError):
    """A contract call that the simulated chain refused."""


class EmptyAuction(LedgerError):
    pass


class BidBelowReserve(LedgerError):
    pass


class InsufficientBalance(LedgerError):
    pass


class UnknownBlock(LedgerError):
    pass


class DuplicateChallenge(LedgerError):
    pass


class CommitRequired(LedgerError):
    """Plain challenges are not accepted on blocks guarded by commit-reveal."""


class UnknownDispute(LedgerError):
    pass


class AlreadyFinalized(LedgerError):
    pass


class NoExistingChallenge(LedgerError):
    pass


class AuctionClosed(LedgerError):
    pass


class NoDisputeGame(LedgerError):
    pass


class TooEarly(LedgerError):
    pass


class NotFinalized(LedgerError):
    pass


class WindowClosed(LedgerError):
    pass


class CommitWindowClosed(LedgerError):
    pass


class DuplicateCommit(LedgerError):
    pass


class RevealWindowClosed(LedgerError):
    pass


class HashMismatch(LedgerError):
    pass


class NoCommit(LedgerError):
    pass


class DegenerateStats(DisputeSimError):
    pass
