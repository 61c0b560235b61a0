"""Payment channels: escrow lock-up, off-ledger voucher sessions, settlement.

A parking session touches the ledger exactly twice: once when the driver's
deposit moves into escrow, and once when the escrow pays out — either a
settlement split among administrator, service provider, landlord, operator
and driver, or a full refund after the channel expires unclaimed. Every
voucher in between is pure message passing and leaves no ledger trace.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import InvalidOperation, NotFound, Unauthorized
from .ledger import Ledger
from .pricing import PaymentPolicy
from .providers import ProviderBook, SessionRef, TenantOperation
from .registry import BASIS_POINTS, ParkedInfo, Registry
from .util import IdSequence
from .vouchers import Voucher, sign_voucher, verify_voucher

DEFAULT_GRACE = 86_400  # seconds after park_until before the payer may reclaim


@dataclass(frozen=True)
class SettlementBreakdown:
    """How one claimed amount splits; shares floor, remainder to the operator."""

    claimed: int
    tax: int
    service: int
    landlord: int
    operator: int
    refund: int

    def as_dict(self) -> dict:
        return {
            "claimed": self.claimed,
            "tax": self.tax,
            "service": self.service,
            "landlord": self.landlord,
            "operator": self.operator,
            "refund": self.refund,
        }


def compute_breakdown(
    locked: int, claimed: int, tax_rate: int, sp_share: int, landlord_share: int
) -> SettlementBreakdown:
    """Split ``claimed`` out of ``locked`` escrow by basis-point rates.

    Exact by construction: the three floored shares are subtracted from the
    claim and the operator absorbs the rounding remainder, so
    tax + service + landlord + operator == claimed and
    claimed + refund == locked always hold.
    """
    if not 0 <= claimed <= locked:
        raise InvalidOperation("claim must lie within the locked escrow")
    tax = claimed * tax_rate // BASIS_POINTS
    service = claimed * sp_share // BASIS_POINTS
    landlord = claimed * landlord_share // BASIS_POINTS
    operator = claimed - tax - service - landlord
    if operator < 0:
        raise InvalidOperation("applied share rates exceed the whole")
    return SettlementBreakdown(claimed, tax, service, landlord, operator, locked - claimed)


@dataclass
class ChannelState:
    id: bytes
    alias: str
    payer: bytes
    payee: str  # provider id
    car: str
    stall: int
    locked: int
    opened_at: int
    park_until: int
    expiry: int
    policy: PaymentPolicy  # captured at open; later provider swaps don't apply
    sp: str | None
    status: str = "open"


@dataclass
class OffchainSession:
    channel: str
    last_emitted: int = 0
    last_accepted: int = 0
    accepted_voucher: Voucher | None = None


class ChannelBook:
    def __init__(
        self,
        ledger: Ledger,
        registry: Registry,
        providers: ProviderBook,
        grace: int = DEFAULT_GRACE,
    ) -> None:
        if not isinstance(grace, int) or isinstance(grace, bool) or grace < 0:
            raise InvalidOperation("grace period must be a non-negative integer")
        self.ledger = ledger
        self.registry = registry
        self.providers = providers
        self.grace = grace
        self.channels: dict[str, ChannelState] = {}  # by alias
        self.sessions: dict[str, OffchainSession] = {}
        self._by_id: dict[bytes, str] = {}
        self._ids = IdSequence()

    # -- lookups ---------------------------------------------------------

    def channel(self, ref: str | bytes) -> ChannelState:
        if isinstance(ref, bytes):
            ref = self._by_id.get(ref, "")
        state = self.channels.get(ref)
        if state is None:
            raise NotFound(f"unknown channel: {ref!r}")
        return state

    def session(self, ref: str | bytes) -> OffchainSession:
        return self.sessions[self.channel(ref).alias]

    # -- opening ------------------------------------------------------------

    def open_channel(
        self,
        caller: bytes,
        car_id: str,
        provider_id: str,
        stall_index: int,
        until: int,
        deposit: int,
        sp: str | None = None,
    ) -> ChannelState:
        """Start a parking session: quote the price, escrow the deposit."""
        now = self.ledger.now
        car = self.registry.car(car_id)
        if caller != car.owner:
            raise Unauthorized("only the car's owner starts parking")
        if car.parked is not None:
            raise InvalidOperation("car is already parked")
        provider = self.providers.provider(provider_id)
        lot = self.providers.lot_of(provider)
        if not lot.is_active(now):
            raise InvalidOperation("lot is not active")
        if not isinstance(stall_index, int) or isinstance(stall_index, bool) \
                or not 0 <= stall_index < len(lot.stalls):
            raise NotFound(f"unknown stall: {stall_index}")
        if lot.stalls[stall_index].controller != provider_id:
            raise InvalidOperation("stall is not controlled by this provider")
        if stall_index in provider.active_sessions:
            raise InvalidOperation("stall already has an active session")
        if not isinstance(until, int) or isinstance(until, bool) or until <= now:
            raise InvalidOperation("parking must end in the future")
        if sp is not None and sp not in provider.service_providers:
            raise NotFound(f"unknown service provider: {sp}")
        quoted = provider.policy.total_price(now, until)
        if deposit < quoted:
            raise InvalidOperation(
                f"deposit {deposit} below the quoted price {quoted}"
            )
        channel_id = hashlib.sha256(
            caller
            + provider_id.encode()
            + now.to_bytes(8, "big")
            + self.ledger.event_count.to_bytes(8, "big")
        ).digest()
        alias = self._ids.next("channel")
        expiry = until + self.grace
        self.ledger.lock_escrow(
            caller,
            channel_id,
            deposit,
            detail={
                "alias": alias,
                "payee": provider_id,
                "car": car_id,
                "stall": stall_index,
                "quoted": quoted,
                "park_until": until,
                "expiry": expiry,
            },
        )
        state = ChannelState(
            id=channel_id,
            alias=alias,
            payer=caller,
            payee=provider_id,
            car=car_id,
            stall=stall_index,
            locked=deposit,
            opened_at=now,
            park_until=until,
            expiry=expiry,
            policy=provider.policy,
            sp=sp,
        )
        self.channels[alias] = state
        self.sessions[alias] = OffchainSession(channel=alias)
        self._by_id[channel_id] = alias
        provider.active_sessions[stall_index] = SessionRef(alias, car_id, car.plate)
        car.parked = ParkedInfo(provider_id, stall_index, alias)
        return state

    # -- off-ledger traffic ---------------------------------------------------

    def next_voucher(self, caller: bytes, ref: str | bytes) -> Voucher:
        """Driver-side: sign the cumulative amount owed so far. No ledger trace."""
        state = self.channel(ref)
        if state.status != "open":
            raise InvalidOperation("channel is not open")
        if caller != state.payer:
            raise Unauthorized("only the paying driver emits vouchers")
        now = self.ledger.now
        owed = state.policy.total_price(
            state.opened_at, min(now, state.park_until)
        )
        cumulative = min(owed, state.locked)
        voucher = sign_voucher(self.ledger.keys_of(state.payer), state.id, cumulative)
        session = self.sessions[state.alias]
        session.last_emitted = max(session.last_emitted, cumulative)
        return voucher

    def accept_voucher(self, caller: bytes, ref: str | bytes, voucher: Voucher) -> bool:
        """Payee-side check of an incoming voucher; acceptance is a return value.

        A voucher is accepted only if it is signed by the channel's payer over
        this channel's id, claims strictly more than the last accepted one,
        and stays within the locked escrow.
        """
        state = self.channel(ref)
        if state.status != "open":
            return False
        provider = self.providers.provider(state.payee)
        if caller != provider.owner:
            raise Unauthorized("only the payee examines incoming vouchers")
        session = self.sessions[state.alias]
        payer_public = self.ledger.keys_of(state.payer).public
        ok = (
            voucher.channel_id == state.id
            and voucher.cumulative > session.last_accepted
            and voucher.cumulative <= state.locked
            and verify_voucher(payer_public, voucher)
        )
        if ok:
            session.last_accepted = voucher.cumulative
            session.accepted_voucher = voucher
        return ok

    # -- closing ----------------------------------------------------------

    def settle_channel(
        self, caller: bytes, ref: str | bytes, voucher: Voucher
    ) -> SettlementBreakdown:
        """Payee claims the voucher amount; escrow pays out in one transaction."""
        state = self.channel(ref)
        if state.status != "open":
            raise InvalidOperation("channel already closed")
        provider = self.providers.provider(state.payee)
        if caller != provider.owner:
            raise Unauthorized("only the payee settles the channel")
        payer_public = self.ledger.keys_of(state.payer).public
        if voucher.channel_id != state.id or not verify_voucher(payer_public, voucher):
            raise InvalidOperation("voucher does not verify for this channel")
        if voucher.cumulative > state.locked:
            raise InvalidOperation("voucher claims more than the locked escrow")
        lot = self.providers.lot_of(provider)
        tax_rate = lot.landlord_contract.tax_rate
        landlord_share = (
            provider.lease.landlord_share
            if isinstance(provider, TenantOperation)
            else 0
        )
        sp_share, sp_account = 0, None
        if state.sp is not None:
            link = provider.service_providers[state.sp]
            sp_share, sp_account = link.share, link.account
        breakdown = compute_breakdown(
            state.locked, voucher.cumulative, tax_rate, sp_share, landlord_share
        )
        payouts = [(self.registry.administrator, breakdown.tax)]
        if sp_account is not None:
            payouts.append((sp_account, breakdown.service))
        if landlord_share:
            payouts.append((lot.owner, breakdown.landlord))
        payouts.append((provider.owner, breakdown.operator))
        payouts.append((state.payer, breakdown.refund))
        detail = {"alias": state.alias, "payee": state.payee}
        detail.update(breakdown.as_dict())
        self.ledger.release_escrow(state.id, payouts, "CHANNEL_SETTLE", detail)
        state.status = "settled"
        self._close_session(state, closed_as="settled", amount=breakdown.claimed)
        return breakdown

    def timeout_refund(self, caller: bytes, ref: str | bytes) -> int:
        """Payer reclaims the full escrow once the grace period has run out."""
        state = self.channel(ref)
        if state.status != "open":
            raise InvalidOperation("channel is not open")
        if caller != state.payer:
            raise Unauthorized("only the paying driver may reclaim the escrow")
        now = self.ledger.now
        if now < state.expiry:
            raise InvalidOperation(
                f"channel not expired until {state.expiry} (now {now})"
            )
        self.ledger.release_escrow(
            state.id,
            [(state.payer, state.locked)],
            "CHANNEL_REFUND",
            {"alias": state.alias, "payee": state.payee, "refund": state.locked},
        )
        state.status = "refunded"
        self._close_session(state, closed_as="refunded", amount=state.locked)
        return state.locked

    def _close_session(self, state: ChannelState, closed_as: str, amount: int) -> None:
        provider = self.providers.provider(state.payee)
        provider.active_sessions.pop(state.stall, None)
        car = self.registry.car(state.car)
        car.parked = None
        car.history.append(
            {
                "channel": state.alias,
                "provider": state.payee,
                "stall": state.stall,
                "opened_at": state.opened_at,
                "closed_at": self.ledger.now,
                "status": closed_as,
                "amount": amount,
            }
        )
