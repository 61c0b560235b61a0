"""In-process facade over the ledger, registry, providers, and channels.

The engine is what scenario steps (and tests) talk to: actors are referenced
by short string ids, every operation names its caller first, and all entity
ids are deterministic "kind:N" strings, so identical inputs replay to
byte-identical event logs. ``audit()`` cross-checks the structural invariants
and exact conservation of funds; the scenario runner calls it after every
step.
"""

from __future__ import annotations

from .channels import DEFAULT_GRACE, ChannelBook, SettlementBreakdown
from .errors import InvalidOperation, InvariantViolation, NotFound
from .ledger import EventRecord, Ledger
from .pricing import PaymentPolicy
from .providers import ProviderBook, TenantOperation
from .registry import Registry
from .vouchers import Voucher

ROLES = ("administrator", "landlord", "tenant", "driver", "service_provider")


class Engine:
    def __init__(self, grace: int = DEFAULT_GRACE, key_namespace: str | int = 0) -> None:
        self.ledger = Ledger()
        self.registry = Registry(self.ledger)
        self.providers = ProviderBook(self.ledger, self.registry)
        self.channels = ChannelBook(self.ledger, self.registry, self.providers, grace)
        self.registry.contract_resolver = self._find_contract
        self._ns = str(key_namespace)
        self._actors: dict[str, bytes] = {}
        self._roles: dict[str, str] = {}

    # -- actors and time -----------------------------------------------------

    def add_actor(self, actor_id: str, role: str = "driver", balance: int = 0) -> bytes:
        if role not in ROLES:
            raise InvalidOperation(f"unknown role: {role}")
        if actor_id in self._actors:
            raise InvalidOperation(f"actor already exists: {actor_id}")
        address = self.ledger.create_account(
            seed=f"{self._ns}/{actor_id}", initial_balance=balance, label=actor_id
        )
        if role == "administrator":
            self.registry.set_administrator(address)
        self._actors[actor_id] = address
        self._roles[actor_id] = role
        return address

    def addr(self, actor_id: str) -> bytes:
        address = self._actors.get(actor_id)
        if address is None:
            raise NotFound(f"unknown actor: {actor_id}")
        return address

    def keys_of(self, actor_id: str):
        return self.ledger.keys_of(self.addr(actor_id))

    def balance(self, actor_id: str) -> int:
        return self.ledger.balance(self.addr(actor_id))

    def seal_genesis(self) -> None:
        self.ledger.seal_genesis()

    def advance_time(self, delta: int) -> int:
        return self.ledger.advance_time(delta)

    @property
    def now(self) -> int:
        return self.ledger.now

    def events_since(self, index: int = 0) -> list[EventRecord]:
        return self.ledger.events_since(index)

    # -- ledger ops ---------------------------------------------------------

    def transfer(self, caller: str, to: str, amount: int) -> EventRecord:
        return self.ledger.transfer(self.addr(caller), self.addr(to), amount)

    # -- registry ops -----------------------------------------------------

    def request_landlord_registration(
        self, caller: str, tax_rate: int, land_info: str = "",
        valid_from: int = 0, valid_until: int = 0,
    ) -> str:
        return self.registry.request_landlord_registration(
            self.addr(caller), tax_rate, land_info, valid_from, valid_until
        )

    def decide_registration(self, caller: str, request: str, approve: bool) -> str | None:
        contract = self.registry.decide_registration(self.addr(caller), request, approve)
        return contract.id if contract else None

    def register_car(self, caller: str, plate: str) -> str:
        return self.registry.register_car(self.addr(caller), plate)

    def propose_amendment(self, caller: str, contract: str, changes: dict) -> str:
        return self.registry.propose_amendment(
            self.addr(caller), self._require_contract(contract), changes
        )

    def resolve_amendment(self, caller: str, amendment: str, accept: bool) -> str | None:
        contract = self.registry.resolve_amendment(self.addr(caller), amendment, accept)
        return contract.id if contract else None

    def _find_contract(self, contract_id: str):
        return self.registry.contracts.get(contract_id) or self.providers.leases.get(
            contract_id
        )

    def _require_contract(self, contract_id: str):
        contract = self._find_contract(contract_id)
        if contract is None:
            raise NotFound(f"unknown contract: {contract_id}")
        return contract

    # -- provider ops ------------------------------------------------------

    def create_parking_lot(
        self, caller: str, contract: str, stalls: int,
        policy: PaymentPolicy, location: str = "",
    ) -> str:
        contract_obj = self.registry.contracts.get(contract)
        if contract_obj is None:
            raise NotFound(f"unknown landlord contract: {contract}")
        return self.providers.create_parking_lot(
            self.addr(caller), contract_obj, stalls, policy, location
        )

    def request_tenancy(
        self, caller: str, lot: str, stalls, rent_fee: int,
        period: int, landlord_share: int, penalty_rate: int = 0,
    ) -> str:
        return self.providers.request_tenancy(
            self.addr(caller), lot, stalls, rent_fee, period,
            landlord_share, penalty_rate,
        )

    def approve_tenancy(self, caller: str, request: str) -> str:
        return self.providers.approve_tenancy(self.addr(caller), request)

    def terminate_tenancy(self, caller: str, lease: str) -> None:
        self.providers.terminate_tenancy(self.addr(caller), lease)

    def pay_rent(self, caller: str, lease: str) -> dict:
        return self.providers.pay_rent(self.addr(caller), lease)

    def set_payment_policy(self, caller: str, provider: str, policy: PaymentPolicy) -> None:
        self.providers.set_payment_policy(self.addr(caller), provider, policy)

    def register_service_provider(
        self, caller: str, provider: str, sp: str, share: int
    ) -> str:
        return self.providers.register_service_provider(
            self.addr(caller), provider, self.addr(sp), share
        )

    def observe_occupancy(
        self, caller: str, lot: str, stall: int, plate: str | None = None
    ) -> EventRecord:
        return self.providers.observe_occupancy(self.addr(caller), lot, stall, plate)

    # -- parking sessions --------------------------------------------------

    def start_parking(
        self, caller: str, car: str, provider: str, stall: int,
        until: int, deposit: int, sp: str | None = None,
    ) -> str:
        state = self.channels.open_channel(
            self.addr(caller), car, provider, stall, until, deposit, sp
        )
        return state.alias

    def emit_voucher(self, caller: str, channel: str) -> Voucher:
        return self.channels.next_voucher(self.addr(caller), channel)

    def accept_voucher(self, caller: str, channel: str, voucher: Voucher) -> bool:
        return self.channels.accept_voucher(self.addr(caller), channel, voucher)

    def accepted_voucher(self, channel: str) -> Voucher | None:
        return self.channels.session(channel).accepted_voucher

    def settle_channel(self, caller: str, channel: str, voucher: Voucher) -> SettlementBreakdown:
        return self.channels.settle_channel(self.addr(caller), channel, voucher)

    def timeout_refund(self, caller: str, channel: str) -> int:
        return self.channels.timeout_refund(self.addr(caller), channel)

    # -- structural audit ----------------------------------------------------

    def audit(self) -> None:
        """Check conservation and every structural invariant; raise on breakage."""
        ledger = self.ledger
        if ledger.total_supply() != ledger.minted:
            raise InvariantViolation(
                f"conservation broken: supply {ledger.total_supply()} != minted {ledger.minted}"
            )

        open_channels = {
            alias: ch for alias, ch in self.channels.channels.items()
            if ch.status == "open"
        }
        session_of: dict[str, tuple[str, int]] = {}
        parked_car_of: dict[str, str] = {}
        providers = list(self.providers.lots.values()) + [
            op for op in self.providers.operations.values()
            if op.lease.status == "active"
        ]
        for provider in providers:
            if isinstance(provider, TenantOperation):
                lease = provider.lease
                for index in lease.stall_subset:
                    controller = self.providers.lots[lease.lot].stalls[index].controller
                    if controller != lease.id:
                        raise InvariantViolation(
                            f"stall {index} of {lease.lot} not controlled by {lease.id}"
                        )
            for stall_index, ref in provider.active_sessions.items():
                if ref.channel in session_of:
                    raise InvariantViolation(f"channel {ref.channel} on two stalls")
                session_of[ref.channel] = (provider.id, stall_index)
                if ref.car in parked_car_of:
                    raise InvariantViolation(f"car {ref.car} double-parked")
                parked_car_of[ref.car] = ref.channel

        if set(session_of) != set(open_channels):
            raise InvariantViolation("open channels and active sessions disagree")
        for alias, state in open_channels.items():
            if session_of[alias] != (state.payee, state.stall):
                raise InvariantViolation(f"channel {alias} bound to the wrong stall")

        for car in self.registry.cars.values():
            if (car.parked is not None) != (car.id in parked_car_of):
                raise InvariantViolation(f"car {car.id} parked flag inconsistent")
            if car.parked is not None and car.parked.channel != parked_car_of[car.id]:
                raise InvariantViolation(f"car {car.id} bound to the wrong channel")

        for lot in self.providers.lots.values():
            claimed: dict[int, str] = {}
            for lease in lot.active_leases():
                for index in lease.stall_subset:
                    if not 0 <= index < len(lot.stalls):
                        raise InvariantViolation(f"lease {lease.id} holds unknown stall")
                    if index in claimed:
                        raise InvariantViolation(
                            f"stall {index} rented under {claimed[index]} and {lease.id}"
                        )
                    claimed[index] = lease.id
            for stall in lot.stalls:
                expected = claimed.get(stall.index, lot.id)
                if stall.controller != expected:
                    raise InvariantViolation(
                        f"stall {stall.index} controller {stall.controller}, expected {expected}"
                    )
