"""Single-authority ledger: accounts, escrowed channel funds, clock, event log.

Every other part of the engine mutates state through this one object, which
keeps mutation serialized and makes the event log the complete audit trail of
a run. Money is integer minor units throughout; all arithmetic is exact and
amounts outside the unsigned 64-bit range are rejected, never wrapped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .errors import InsufficientFunds, InvalidOperation, NotFound
from .vouchers import KeyPair, address_of, canonical_seed, derive_keypair

MAX_FUNDS = 2**64 - 1

# Event kinds that move funds between accounts and escrow. Everything else in
# the log is bookkeeping (registrations, approvals, observations, ...).
FUND_MOVING_KINDS = frozenset(
    {"TRANSFER", "CHANNEL_OPEN", "CHANNEL_SETTLE", "CHANNEL_REFUND"}
)


def check_funds(amount: int) -> int:
    if not isinstance(amount, int) or isinstance(amount, bool):
        raise InvalidOperation("amounts must be integers (minor units)")
    if amount < 0:
        raise InvalidOperation("amounts can never be negative")
    if amount > MAX_FUNDS:
        raise InvalidOperation("amount exceeds the unsigned 64-bit range")
    return amount


@dataclass(frozen=True)
class EventRecord:
    index: int
    time: int
    kind: str
    payload: dict

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "time": self.time,
            "kind": self.kind,
            "payload": self.payload,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), separators=(",", ":"))


@dataclass
class Account:
    address: bytes
    keys: KeyPair
    balance: int
    label: str


class Ledger:
    """Accounts, channel escrow, simulated time, and the append-only log."""

    def __init__(self) -> None:
        self.now = 0
        self.accounts: dict[bytes, Account] = {}
        self.escrows: dict[bytes, int] = {}  # channel id -> locked funds
        self.minted = 0
        self._events: list[EventRecord] = []
        self._seen_seeds: set[bytes] = set()
        self._genesis_open = True

    # -- accounts ------------------------------------------------------

    def create_account(
        self,
        seed: bytes | str | int,
        initial_balance: int = 0,
        label: str | None = None,
    ) -> bytes:
        check_funds(initial_balance)
        secret = canonical_seed(seed)
        if secret in self._seen_seeds:
            raise InvalidOperation("seed already used for an account")
        if initial_balance > 0 and not self._genesis_open:
            raise InvalidOperation("minting is only allowed at genesis")
        if self.minted + initial_balance > MAX_FUNDS:
            raise InvalidOperation("total supply would exceed the 64-bit range")
        keys = derive_keypair(seed)
        address = address_of(keys.public)
        account = Account(address, keys, initial_balance, label or address.hex())
        self._seen_seeds.add(secret)
        self.accounts[address] = account
        self.minted += initial_balance
        return address

    def account(self, address: bytes) -> Account:
        try:
            return self.accounts[address]
        except KeyError:
            raise NotFound("unknown address") from None

    def balance(self, address: bytes) -> int:
        return self.account(address).balance

    def keys_of(self, address: bytes) -> KeyPair:
        return self.account(address).keys

    def label_of(self, address: bytes) -> str:
        return self.account(address).label

    def seal_genesis(self) -> None:
        """Close the minting window explicitly (it also closes on first activity)."""
        self._genesis_open = False

    # -- funds movement ------------------------------------------------

    def transfer(
        self, frm: bytes, to: bytes, amount: int, detail: dict | None = None
    ) -> EventRecord:
        check_funds(amount)
        src = self.account(frm)
        dst = self.account(to)
        if src.balance < amount:
            raise InsufficientFunds(
                f"{src.label} holds {src.balance}, cannot move {amount}"
            )
        src.balance -= amount
        dst.balance += amount
        payload = {"from": src.label, "to": dst.label, "amount": amount}
        if detail:
            payload.update(detail)
        return self._append("TRANSFER", payload)

    def lock_escrow(
        self, frm: bytes, channel_id: bytes, amount: int, detail: dict | None = None
    ) -> EventRecord:
        """Move funds from an account into a channel's escrow (tx #1 of a session)."""
        check_funds(amount)
        if channel_id in self.escrows:
            raise InvalidOperation("escrow already exists for this channel")
        src = self.account(frm)
        if src.balance < amount:
            raise InsufficientFunds(
                f"{src.label} holds {src.balance}, cannot lock {amount}"
            )
        src.balance -= amount
        self.escrows[channel_id] = amount
        payload = {"channel": channel_id.hex(), "payer": src.label, "locked": amount}
        if detail:
            payload.update(detail)
        return self._append("CHANNEL_OPEN", payload)

    def release_escrow(
        self,
        channel_id: bytes,
        payouts: Iterable[tuple[bytes, int]],
        kind: str,
        detail: dict | None = None,
    ) -> EventRecord:
        """Pay a channel's escrow out in full (tx #2 of a session).

        The payouts must sum to exactly the locked amount; partial release
        would break conservation.
        """
        if kind not in ("CHANNEL_SETTLE", "CHANNEL_REFUND"):
            raise InvalidOperation(f"not an escrow-release event kind: {kind}")
        if channel_id not in self.escrows:
            raise NotFound("no escrow for this channel")
        payouts = list(payouts)
        total = 0
        for to, amount in payouts:
            check_funds(amount)
            self.account(to)
            total += amount
        locked = self.escrows[channel_id]
        if total != locked:
            raise InvalidOperation(
                f"payouts sum to {total}, escrow holds {locked}"
            )
        del self.escrows[channel_id]
        for to, amount in payouts:
            self.accounts[to].balance += amount
        payload = {
            "channel": channel_id.hex(),
            "payouts": [
                {"to": self.accounts[to].label, "amount": amount}
                for to, amount in payouts
            ],
        }
        if detail:
            payload.update(detail)
        return self._append(kind, payload)

    # -- clock -----------------------------------------------------------

    def advance_time(self, delta: int) -> int:
        if not isinstance(delta, int) or isinstance(delta, bool) or delta < 0:
            raise InvalidOperation("the clock only moves forward")
        self.now += delta
        return self.now

    # -- event log -------------------------------------------------------

    def log(self, kind: str, payload: dict) -> EventRecord:
        """Append a bookkeeping event on behalf of another module."""
        return self._append(kind, payload)

    def events_since(self, index: int = 0) -> list[EventRecord]:
        return list(self._events[max(index, 0):])

    @property
    def event_count(self) -> int:
        return len(self._events)

    def events_to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self._events)

    def _append(self, kind: str, payload: dict) -> EventRecord:
        self._genesis_open = False
        record = EventRecord(len(self._events), self.now, kind, payload)
        self._events.append(record)
        return record

    # -- conservation ----------------------------------------------------

    def total_supply(self) -> int:
        """Sum of account balances plus escrowed funds; always equals minted."""
        return sum(a.balance for a in self.accounts.values()) + sum(
            self.escrows.values()
        )
