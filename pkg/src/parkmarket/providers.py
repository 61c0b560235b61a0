"""Parking providers: lots, tenant operations, renting contracts, occupancy.

A lot is created by a landlord under an approved contract and owns all of its
stalls. A tenant rents a disjoint stall subset under a renting contract; the
controller of those stalls switches to the tenant's operation for the life of
the contract and reverts on termination. Stall control decides who prices and
who settles a parking session.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidOperation, NotFound, Unauthorized
from .ledger import Ledger, check_funds
from .pricing import PaymentPolicy
from .registry import BASIS_POINTS, Registry
from .util import IdSequence


@dataclass
class Stall:
    index: int
    controller: str  # provider id: the lot's own id, or a lease id
    occupied_by: str | None = None  # plate last reported by observation
    reserved: bool = False


@dataclass
class SessionRef:
    """What the controlling provider knows about one live parking session."""

    channel: str
    car: str
    plate: str


@dataclass
class ServiceProviderLink:
    id: str
    account: bytes
    share: int  # basis points of each settled session


@dataclass
class RentingContract:
    """Lot-tenant terms: the rented stalls, the rent, and the revenue share."""

    id: str
    lot: str
    lot_owner: bytes
    tenant: bytes
    stall_subset: tuple[int, ...]
    rent_fee: int
    period: int
    landlord_share: int
    penalty_rate: int  # basis points of the fee, per whole late period
    next_due: int
    status: str = "active"

    AMENDABLE = frozenset({"rent_fee", "period", "landlord_share", "penalty_rate"})

    @property
    def parties(self) -> tuple[bytes, bytes]:
        return (self.lot_owner, self.tenant)

    def is_active(self, now: int) -> bool:
        return self.status == "active"

    def preview_changes(self, changes: dict) -> dict:
        unknown = set(changes) - self.AMENDABLE
        if unknown:
            raise InvalidOperation(f"fields not amendable: {sorted(unknown)}")
        merged = {f: getattr(self, f) for f in self.AMENDABLE}
        merged.update(changes)
        validate_renting_terms(
            merged["rent_fee"],
            merged["period"],
            merged["landlord_share"],
            merged["penalty_rate"],
        )
        return merged

    def apply_changes(self, changes: dict) -> None:
        merged = self.preview_changes(changes)
        for name, value in merged.items():
            setattr(self, name, value)


def validate_renting_terms(
    rent_fee: int, period: int, landlord_share: int, penalty_rate: int
) -> None:
    check_funds(rent_fee)
    if not isinstance(period, int) or isinstance(period, bool) or period <= 0:
        raise InvalidOperation("rent period must be a positive number of seconds")
    if not isinstance(landlord_share, int) or not 0 <= landlord_share <= BASIS_POINTS:
        raise InvalidOperation(f"landlord share out of range [0, {BASIS_POINTS}]")
    if not isinstance(penalty_rate, int) or penalty_rate < 0:
        raise InvalidOperation("penalty rate must be a non-negative integer")


@dataclass
class TenancyRequest:
    id: str
    lot: str
    tenant: bytes
    stall_subset: tuple[int, ...]
    rent_fee: int
    period: int
    landlord_share: int
    penalty_rate: int
    status: str = "pending"


@dataclass
class Provider:
    """State shared by anything that prices stalls and receives settlements."""

    id: str
    owner: bytes
    policy: PaymentPolicy
    service_providers: dict[str, ServiceProviderLink] = field(default_factory=dict)
    active_sessions: dict[int, SessionRef] = field(default_factory=dict)


@dataclass
class ParkingLot(Provider):
    landlord_contract: object = None  # LandlordContract
    stalls: list[Stall] = field(default_factory=list)
    leases: dict[str, RentingContract] = field(default_factory=dict)
    pending_tenancy: dict[str, TenancyRequest] = field(default_factory=dict)
    rating: int = 0
    location: str = ""

    def is_active(self, now: int) -> bool:
        return self.landlord_contract.is_active(now)

    def active_leases(self) -> list[RentingContract]:
        return [l for l in self.leases.values() if l.status == "active"]


@dataclass
class TenantOperation(Provider):
    lease: RentingContract = None


class ProviderBook:
    def __init__(self, ledger: Ledger, registry: Registry) -> None:
        self.ledger = ledger
        self.registry = registry
        self.lots: dict[str, ParkingLot] = {}
        self.operations: dict[str, TenantOperation] = {}  # keyed by lease id
        self.leases: dict[str, RentingContract] = {}
        self.requests: dict[str, TenancyRequest] = {}
        self._ids = IdSequence()

    # -- lookups -----------------------------------------------------------

    def provider(self, provider_id: str) -> ParkingLot | TenantOperation:
        """Resolve a provider id; terminated tenant operations do not resolve."""
        if provider_id in self.lots:
            return self.lots[provider_id]
        operation = self.operations.get(provider_id)
        if operation is not None and operation.lease.status == "active":
            return operation
        raise NotFound(f"unknown provider: {provider_id}")

    def lot_of(self, provider: Provider) -> ParkingLot:
        if isinstance(provider, ParkingLot):
            return provider
        return self.lots[provider.lease.lot]

    def lease(self, lease_id: str) -> RentingContract:
        contract = self.leases.get(lease_id)
        if contract is None:
            raise NotFound(f"unknown renting contract: {lease_id}")
        return contract

    # -- lot lifecycle -------------------------------------------------------

    def create_parking_lot(
        self,
        caller: bytes,
        contract,
        stall_count: int,
        policy: PaymentPolicy,
        location: str = "",
    ) -> str:
        if contract.landlord != caller:
            raise Unauthorized("caller does not own the landlord contract")
        if not contract.is_active(self.ledger.now):
            raise InvalidOperation("landlord contract is not active")
        if not isinstance(stall_count, int) or isinstance(stall_count, bool) or stall_count <= 0:
            raise InvalidOperation("a lot needs at least one stall")
        lot_id = self._ids.next("lot")
        lot = ParkingLot(
            id=lot_id,
            owner=caller,
            policy=policy,
            landlord_contract=contract,
            stalls=[Stall(i, controller=lot_id) for i in range(stall_count)],
            location=str(location),
        )
        self.lots[lot_id] = lot
        self.ledger.log(
            "LOT_CREATED",
            {
                "lot": lot_id,
                "landlord": self.ledger.label_of(caller),
                "contract": contract.id,
                "stalls": stall_count,
                "policy": policy.digest(),
                "location": lot.location,
            },
        )
        return lot_id

    # -- tenancy lifecycle -----------------------------------------------------

    def request_tenancy(
        self,
        caller: bytes,
        lot_id: str,
        stalls,
        rent_fee: int,
        period: int,
        landlord_share: int,
        penalty_rate: int = 0,
    ) -> str:
        self.ledger.account(caller)
        lot = self._lot(lot_id)
        if not lot.is_active(self.ledger.now):
            raise InvalidOperation("lot is not active")
        subset = self._check_subset(lot, stalls)
        self._check_disjoint(lot, subset)
        validate_renting_terms(rent_fee, period, landlord_share, penalty_rate)
        request_id = self._ids.next("tenancy")
        request = TenancyRequest(
            request_id, lot_id, caller, subset, rent_fee, period,
            landlord_share, penalty_rate,
        )
        self.requests[request_id] = request
        lot.pending_tenancy[request_id] = request
        self.ledger.log(
            "TENANCY_REQUESTED",
            {
                "request": request_id,
                "lot": lot_id,
                "tenant": self.ledger.label_of(caller),
                "stalls": list(subset),
                "rent_fee": rent_fee,
                "period": period,
                "landlord_share": landlord_share,
                "penalty_rate": penalty_rate,
            },
        )
        return request_id

    def approve_tenancy(self, caller: bytes, request_id: str) -> str:
        request = self.requests.get(request_id)
        if request is None:
            raise NotFound(f"unknown tenancy request: {request_id}")
        lot = self._lot(request.lot)
        if caller != lot.owner:
            raise Unauthorized("only the lot's landlord approves tenancies")
        if request.status != "pending":
            raise InvalidOperation("tenancy request already decided")
        if not lot.is_active(self.ledger.now):
            raise InvalidOperation("lot is not active")
        try:
            self._check_disjoint(lot, request.stall_subset)
        except InvalidOperation:
            raise InvalidOperation(
                "request is stale: stalls were rented to someone else"
            ) from None
        now = self.ledger.now
        lease_id = self._ids.next("lease")
        contract = RentingContract(
            id=lease_id,
            lot=lot.id,
            lot_owner=lot.owner,
            tenant=request.tenant,
            stall_subset=request.stall_subset,
            rent_fee=request.rent_fee,
            period=request.period,
            landlord_share=request.landlord_share,
            penalty_rate=request.penalty_rate,
            next_due=now + request.period,
        )
        request.status = "approved"
        lot.pending_tenancy.pop(request_id, None)
        self.leases[lease_id] = contract
        lot.leases[lease_id] = contract
        # The tenant prices with the lot's tariff until it sets its own.
        self.operations[lease_id] = TenantOperation(
            id=lease_id, owner=request.tenant, policy=lot.policy, lease=contract
        )
        for index in contract.stall_subset:
            lot.stalls[index].controller = lease_id
        self.ledger.log(
            "TENANCY_APPROVED",
            {
                "request": request_id,
                "lease": lease_id,
                "lot": lot.id,
                "tenant": self.ledger.label_of(request.tenant),
                "stalls": list(contract.stall_subset),
                "next_due": contract.next_due,
            },
        )
        return lease_id

    def terminate_tenancy(self, caller: bytes, lease_id: str) -> None:
        contract = self.lease(lease_id)
        if caller not in contract.parties:
            raise Unauthorized("only the landlord or the tenant may terminate")
        if contract.status != "active":
            raise InvalidOperation("renting contract is not active")
        operation = self.operations[lease_id]
        if operation.active_sessions:
            raise InvalidOperation("tenant still has active parking sessions")
        contract.status = "terminated"
        lot = self.lots[contract.lot]
        for index in contract.stall_subset:
            lot.stalls[index].controller = lot.id
        self.ledger.log(
            "TENANCY_TERMINATED",
            {"lease": lease_id, "lot": lot.id, "stalls": list(contract.stall_subset)},
        )

    def pay_rent(self, caller: bytes, lease_id: str) -> dict:
        """Pay one rent period, plus a penalty for every whole period overdue."""
        contract = self.lease(lease_id)
        if caller != contract.tenant:
            raise Unauthorized("only the tenant pays the rent")
        if contract.status != "active":
            raise InvalidOperation("renting contract is not active")
        now = self.ledger.now
        late_periods = 0
        if now > contract.next_due:
            late_periods = (now - contract.next_due) // contract.period
        penalty = contract.rent_fee * contract.penalty_rate * late_periods // BASIS_POINTS
        amount = check_funds(contract.rent_fee + penalty)
        self.ledger.transfer(
            contract.tenant,
            contract.lot_owner,
            amount,
            detail={
                "reason": "rent",
                "lease": lease_id,
                "rent_fee": contract.rent_fee,
                "penalty": penalty,
                "late_periods": late_periods,
            },
        )
        contract.next_due += contract.period
        return {
            "amount": amount,
            "rent_fee": contract.rent_fee,
            "penalty": penalty,
            "late_periods": late_periods,
            "next_due": contract.next_due,
        }

    # -- provider configuration ------------------------------------------------

    def set_payment_policy(
        self, caller: bytes, provider_id: str, policy: PaymentPolicy
    ) -> None:
        provider = self.provider(provider_id)
        if caller != provider.owner:
            raise Unauthorized("only the provider's owner sets its tariff")
        provider.policy = policy
        self.ledger.log(
            "POLICY_SET", {"provider": provider_id, "policy": policy.digest()}
        )

    def register_service_provider(
        self, caller: bytes, provider_id: str, account: bytes, share: int
    ) -> str:
        provider = self.provider(provider_id)
        if caller != provider.owner:
            raise Unauthorized("only the provider's owner registers service providers")
        self.ledger.account(account)
        if not isinstance(share, int) or isinstance(share, bool) or not 0 <= share <= BASIS_POINTS:
            raise InvalidOperation(f"share out of range [0, {BASIS_POINTS}]")
        lot = self.lot_of(provider)
        landlord_share = (
            provider.lease.landlord_share
            if isinstance(provider, TenantOperation)
            else 0
        )
        total = share + landlord_share + lot.landlord_contract.tax_rate
        if total > BASIS_POINTS:
            raise InvalidOperation(
                f"share set would exceed the whole: {total} > {BASIS_POINTS} bp"
            )
        sp_id = self._ids.next("sp")
        provider.service_providers[sp_id] = ServiceProviderLink(sp_id, account, share)
        self.ledger.log(
            "SERVICE_PROVIDER_REGISTERED",
            {
                "sp": sp_id,
                "provider": provider_id,
                "account": self.ledger.label_of(account),
                "share": share,
            },
        )
        return sp_id

    # -- occupancy ------------------------------------------------------------

    def observe_occupancy(
        self, caller: bytes, lot_id: str, stall_index: int, plate: str | None = None
    ) -> object:
        """Record what the lot's tracking device reports for one stall.

        The report is matched against the stall's active session: a foreign
        plate (or any plate on a session-less stall) is a violation, a missing
        car on a session stall is a mismatch.
        """
        lot = self._lot(lot_id)
        if caller != lot.owner:
            raise Unauthorized("only the lot's landlord reports occupancy")
        if not isinstance(stall_index, int) or isinstance(stall_index, bool) \
                or not 0 <= stall_index < len(lot.stalls):
            raise NotFound(f"unknown stall: {stall_index}")
        stall = lot.stalls[stall_index]
        plate = plate or None
        controller = (
            lot if stall.controller == lot.id else self.operations[stall.controller]
        )
        session = controller.active_sessions.get(stall_index)
        stall.occupied_by = plate
        if session is None:
            kind = "OCCUPANCY_OK" if plate is None else "OCCUPANCY_VIOLATION"
        elif plate is None:
            kind = "OCCUPANCY_MISMATCH"
        elif plate == session.plate:
            kind = "OCCUPANCY_OK"
        else:
            kind = "OCCUPANCY_VIOLATION"
        return self.ledger.log(
            kind,
            {
                "lot": lot_id,
                "stall": stall_index,
                "plate": plate or "",
                "expected": session.plate if session else "",
                "session": session.channel if session else "",
            },
        )

    # -- internals ---------------------------------------------------------

    def _lot(self, lot_id: str) -> ParkingLot:
        lot = self.lots.get(lot_id)
        if lot is None:
            raise NotFound(f"unknown lot: {lot_id}")
        return lot

    @staticmethod
    def _check_subset(lot: ParkingLot, stalls) -> tuple[int, ...]:
        try:
            subset = tuple(sorted(set(int(s) for s in stalls)))
        except (TypeError, ValueError):
            raise InvalidOperation("stall subset must be a list of stall numbers") from None
        if not subset:
            raise InvalidOperation("stall subset must not be empty")
        for index in subset:
            if not 0 <= index < len(lot.stalls):
                raise InvalidOperation(f"unknown stall: {index}")
        return subset

    @staticmethod
    def _check_disjoint(lot: ParkingLot, subset: tuple[int, ...]) -> None:
        taken = set()
        for lease in lot.active_leases():
            taken.update(lease.stall_subset)
        overlap = taken.intersection(subset)
        if overlap:
            raise InvalidOperation(
                f"stalls already rented under an active contract: {sorted(overlap)}"
            )
