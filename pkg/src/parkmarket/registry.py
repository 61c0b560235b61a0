"""System registry: landlord onboarding, car records, two-party amendments.

The registry is administered by a single authority account. Landlords apply
with proposed terms, the administrator approves or rejects, and the approved
contract then gates everything the landlord may do. Either party to a
contract can propose amendments; they take effect only when the counterparty
accepts, and only for computations that happen after acceptance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import InvalidOperation, NotFound, Unauthorized
from .ledger import Ledger
from .util import IdSequence

BASIS_POINTS = 10_000


def validate_landlord_terms(tax_rate: int, valid_from: int, valid_until: int) -> None:
    if not isinstance(tax_rate, int) or isinstance(tax_rate, bool):
        raise InvalidOperation("tax rate must be an integer (basis points)")
    if not 0 <= tax_rate <= BASIS_POINTS:
        raise InvalidOperation(f"tax rate out of range [0, {BASIS_POINTS}]")
    if not (isinstance(valid_from, int) and isinstance(valid_until, int)):
        raise InvalidOperation("validity bounds must be integers (seconds)")
    if valid_from < 0 or not valid_from < valid_until:
        raise InvalidOperation("contract must start before it ends")


@dataclass
class LandlordContract:
    """Administrator-landlord agreement that authorizes parking lots."""

    id: str
    administrator: bytes
    landlord: bytes
    tax_rate: int
    land_info: str
    valid_from: int
    valid_until: int
    status: str = "active"

    AMENDABLE = frozenset({"tax_rate", "land_info", "valid_from", "valid_until"})

    @property
    def parties(self) -> tuple[bytes, bytes]:
        return (self.administrator, self.landlord)

    def is_active(self, now: int) -> bool:
        return self.status == "active" and self.valid_from <= now < self.valid_until

    def preview_changes(self, changes: dict) -> dict:
        """Validate an amendment against this contract; return the merged fields."""
        unknown = set(changes) - self.AMENDABLE
        if unknown:
            raise InvalidOperation(f"fields not amendable: {sorted(unknown)}")
        merged = {f: getattr(self, f) for f in self.AMENDABLE}
        merged.update(changes)
        validate_landlord_terms(
            merged["tax_rate"], merged["valid_from"], merged["valid_until"]
        )
        if not isinstance(merged["land_info"], str):
            raise InvalidOperation("land_info must be a string")
        return merged

    def apply_changes(self, changes: dict) -> None:
        merged = self.preview_changes(changes)
        for name, value in merged.items():
            setattr(self, name, value)


@dataclass
class RegistrationRequest:
    id: str
    requester: bytes
    tax_rate: int
    land_info: str
    valid_from: int
    valid_until: int
    status: str = "pending"


@dataclass
class ParkedInfo:
    provider: str
    stall: int
    channel: str


@dataclass
class CarRecord:
    id: str
    plate: str
    owner: bytes
    rating: int = 0
    parked: ParkedInfo | None = None
    history: list[dict] = field(default_factory=list)


@dataclass
class Amendment:
    id: str
    contract: str
    proposer: bytes
    changes: dict
    status: str = "proposed"


class Registry:
    def __init__(self, ledger: Ledger, administrator: bytes | None = None) -> None:
        self.ledger = ledger
        self.administrator = administrator
        self.requests: dict[str, RegistrationRequest] = {}
        self.contracts: dict[str, LandlordContract] = {}
        self.cars: dict[str, CarRecord] = {}
        self.amendments: dict[str, Amendment] = {}
        self._plates: dict[str, str] = {}
        self._ids = IdSequence()
        # The engine widens this to cover renting contracts as well.
        self.contract_resolver: Callable[[str], object | None] = self.contracts.get

    def set_administrator(self, address: bytes) -> None:
        if self.administrator is not None:
            raise InvalidOperation("the system already has an administrator")
        self.administrator = address

    # -- landlord onboarding ----------------------------------------------

    def request_landlord_registration(
        self,
        caller: bytes,
        tax_rate: int,
        land_info: str,
        valid_from: int,
        valid_until: int,
    ) -> str:
        self.ledger.account(caller)
        for request in self.requests.values():
            if request.requester == caller and request.status == "pending":
                raise InvalidOperation("landlord already has a pending request")
        validate_landlord_terms(tax_rate, valid_from, valid_until)
        request_id = self._ids.next("request")
        self.requests[request_id] = RegistrationRequest(
            request_id, caller, tax_rate, str(land_info), valid_from, valid_until
        )
        self.ledger.log(
            "REGISTRATION_REQUESTED",
            {
                "request": request_id,
                "landlord": self.ledger.label_of(caller),
                "tax_rate": tax_rate,
                "land_info": str(land_info),
                "valid_from": valid_from,
                "valid_until": valid_until,
            },
        )
        return request_id

    def decide_registration(
        self, caller: bytes, request_id: str, approve: bool
    ) -> LandlordContract | None:
        if caller != self.administrator:
            raise Unauthorized("only the administrator decides registrations")
        request = self.requests.get(request_id)
        if request is None:
            raise NotFound(f"unknown registration request: {request_id}")
        if request.status != "pending":
            raise InvalidOperation("request already decided")
        contract = None
        if approve:
            contract_id = self._ids.next("contract")
            contract = LandlordContract(
                id=contract_id,
                administrator=self.administrator,
                landlord=request.requester,
                tax_rate=request.tax_rate,
                land_info=request.land_info,
                valid_from=request.valid_from,
                valid_until=request.valid_until,
            )
            self.contracts[contract_id] = contract
            request.status = "approved"
        else:
            request.status = "rejected"
        self.ledger.log(
            "REGISTRATION_DECIDED",
            {
                "request": request_id,
                "approved": bool(approve),
                "contract": contract.id if contract else None,
            },
        )
        return contract

    # -- cars --------------------------------------------------------------

    def register_car(self, caller: bytes, plate: str) -> str:
        self.ledger.account(caller)
        if not isinstance(plate, str) or plate == "":
            raise InvalidOperation("plate must be a non-empty string")
        if plate in self._plates:
            raise InvalidOperation(f"plate already registered: {plate}")
        car_id = self._ids.next("car")
        self.cars[car_id] = CarRecord(car_id, plate, caller)
        self._plates[plate] = car_id
        self.ledger.log(
            "CAR_REGISTERED",
            {"car": car_id, "plate": plate, "owner": self.ledger.label_of(caller)},
        )
        return car_id

    def car(self, car_id: str) -> CarRecord:
        record = self.cars.get(car_id)
        if record is None:
            raise NotFound(f"unknown car: {car_id}")
        return record

    # -- amendments ----------------------------------------------------------

    def propose_amendment(self, caller: bytes, contract, changes: dict) -> str:
        """Propose field replacements on any two-party contract object."""
        if caller not in contract.parties:
            raise Unauthorized("only a contract party may propose amendments")
        if not contract.is_active(self.ledger.now):
            raise InvalidOperation("contract is not active")
        if not isinstance(changes, dict) or not changes:
            raise InvalidOperation("an amendment must change at least one field")
        contract.preview_changes(changes)
        amendment_id = self._ids.next("amendment")
        self.amendments[amendment_id] = Amendment(
            amendment_id, contract.id, caller, dict(changes)
        )
        self.ledger.log(
            "AMENDMENT_PROPOSED",
            {
                "amendment": amendment_id,
                "contract": contract.id,
                "proposer": self.ledger.label_of(caller),
                "changes": dict(changes),
            },
        )
        return amendment_id

    def resolve_amendment(self, caller: bytes, amendment_id: str, accept: bool):
        """Counterparty accepts or rejects; on accept the deltas apply atomically."""
        amendment = self.amendments.get(amendment_id)
        if amendment is None:
            raise NotFound(f"unknown amendment: {amendment_id}")
        contract = self.contract_resolver(amendment.contract)
        if contract is None:
            raise NotFound(f"contract vanished: {amendment.contract}")
        if caller not in contract.parties or caller == amendment.proposer:
            raise Unauthorized("only the counterparty may resolve an amendment")
        if amendment.status != "proposed":
            raise InvalidOperation("amendment already resolved")
        if accept:
            contract.apply_changes(amendment.changes)
            amendment.status = "accepted"
        else:
            amendment.status = "rejected"
        self.ledger.log(
            "AMENDMENT_RESOLVED",
            {
                "amendment": amendment_id,
                "contract": contract.id,
                "accepted": bool(accept),
            },
        )
        return contract if accept else None
