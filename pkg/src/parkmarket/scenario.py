"""Scenario files: schema validation and the deterministic step runner.

A scenario declares the genesis accounts and a time-ordered step list; each
step is one engine operation performed by one actor. Time only advances
through step timestamps. Voucher traffic (emit/accept) is off-ledger: the
runner records it in a separate trace, never in the ledger event log, so a
completed parking session shows exactly two ledger transactions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import ROLES, Engine
from .errors import EngineError, InvalidOperation
from .ledger import EventRecord
from .pricing import WeekHourPolicy
from .report import build_report
from .vouchers import Voucher

SCENARIO_VERSION = 1
DEFAULT_GRACE = 86_400

ACTION_NAMES = frozenset(
    {
        "transfer",
        "request_landlord_registration",
        "decide_registration",
        "register_car",
        "propose_amendment",
        "resolve_amendment",
        "create_parking_lot",
        "request_tenancy",
        "approve_tenancy",
        "terminate_tenancy",
        "pay_rent",
        "set_payment_policy",
        "register_service_provider",
        "observe_occupancy",
        "start_parking",
        "emit_voucher",
        "accept_voucher",
        "settle_channel",
        "timeout_refund",
    }
)

# Step args holding a tariff, converted from JSON before dispatch.
POLICY_ARGS = ("policy",)


@dataclass(frozen=True)
class GenesisActor:
    actor: str
    role: str
    balance: int


@dataclass(frozen=True)
class Step:
    at: int
    actor: str
    action: str
    args: dict


@dataclass(frozen=True)
class Scenario:
    version: int
    seed: int
    grace: int
    genesis: tuple[GenesisActor, ...]
    steps: tuple[Step, ...]


class StepFailure(EngineError):
    """A step aborted the run; carries the step index and the engine error."""

    def __init__(self, index: int, action: str, message: str) -> None:
        super().__init__(f"step {index} ({action}): {message}")
        self.index = index
        self.action = action
        self.message = message


def _is_uint(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def validate_scenario(data) -> list[str]:
    """Schema and referential checks only; an empty list means valid."""
    problems: list[str] = []
    if not isinstance(data, dict):
        return ["scenario must be a JSON object"]
    if data.get("version") != SCENARIO_VERSION:
        problems.append(f"unsupported version: {data.get('version')!r} (expected {SCENARIO_VERSION})")
    if "seed" in data and not isinstance(data["seed"], int):
        problems.append("seed must be an integer")
    if "grace" in data and not _is_uint(data["grace"]):
        problems.append("grace must be a non-negative integer")

    actors: set[str] = set()
    admins = 0
    genesis = data.get("genesis")
    if not isinstance(genesis, list):
        problems.append("genesis must be a list of actor declarations")
        genesis = []
    for i, entry in enumerate(genesis):
        where = f"genesis {i}"
        if not isinstance(entry, dict):
            problems.append(f"{where}: must be an object")
            continue
        actor = entry.get("actor")
        if not isinstance(actor, str) or not actor:
            problems.append(f"{where}: actor must be a non-empty string")
        elif actor in actors:
            problems.append(f"{where}: duplicate actor id {actor!r}")
        else:
            actors.add(actor)
        role = entry.get("role")
        if role not in ROLES:
            problems.append(f"{where}: unknown role {role!r}")
        elif role == "administrator":
            admins += 1
        if not _is_uint(entry.get("balance")):
            problems.append(f"{where}: balance must be a non-negative integer")
    if genesis and admins != 1:
        problems.append(f"exactly one administrator required, found {admins}")

    steps = data.get("steps")
    if not isinstance(steps, list):
        problems.append("steps must be a list")
        steps = []
    last_at = 0
    for i, step in enumerate(steps):
        where = f"step {i}"
        if not isinstance(step, dict):
            problems.append(f"{where}: must be an object")
            continue
        at = step.get("at")
        if not _is_uint(at):
            problems.append(f"{where}: at must be a non-negative integer")
        elif at < last_at:
            problems.append(f"{where}: timestamps out of order ({at} after {last_at})")
        else:
            last_at = at
        actor = step.get("actor")
        if not isinstance(actor, str) or actor not in actors:
            problems.append(f"{where}: undeclared actor {actor!r}")
        action = step.get("action")
        if action not in ACTION_NAMES:
            problems.append(f"{where}: unknown action {action!r}")
        if "args" in step and not isinstance(step["args"], dict):
            problems.append(f"{where}: args must be an object")
    return problems


def parse_scenario(data: dict) -> Scenario:
    """Build a Scenario from validated JSON data."""
    problems = validate_scenario(data)
    if problems:
        raise InvalidOperation("; ".join(problems))
    return Scenario(
        version=data["version"],
        seed=data.get("seed", 0),
        grace=data.get("grace", DEFAULT_GRACE),
        genesis=tuple(
            GenesisActor(g["actor"], g["role"], g["balance"]) for g in data["genesis"]
        ),
        steps=tuple(
            Step(s["at"], s["actor"], s["action"], dict(s.get("args", {})))
            for s in data["steps"]
        ),
    )


def policy_from_json(value) -> WeekHourPolicy:
    """A tariff in a scenario file: 168-entry array, or one integer (uniform)."""
    try:
        if isinstance(value, int) and not isinstance(value, bool):
            return WeekHourPolicy.uniform(value)
        if isinstance(value, list):
            return WeekHourPolicy.from_rates(value)
    except ValueError as exc:
        raise InvalidOperation(f"bad tariff: {exc}") from None
    raise InvalidOperation("tariff must be an integer or an array of 168 integers")


@dataclass
class RunResult:
    scenario: Scenario
    events: list[EventRecord]
    offchain: list[dict]
    report: dict


class ScenarioRunner:
    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.engine = Engine(grace=scenario.grace, key_namespace=scenario.seed)
        self.offchain: list[dict] = []
        self._emitted: dict[str, Voucher] = {}

    def run(self) -> RunResult:
        for actor in self.scenario.genesis:
            self.engine.add_actor(actor.actor, actor.role, actor.balance)
        self.engine.seal_genesis()
        for index, step in enumerate(self.scenario.steps):
            try:
                self.engine.advance_time(step.at - self.engine.now)
                self._dispatch(step)
                self.engine.audit()
            except EngineError as exc:
                raise StepFailure(index, step.action, str(exc)) from exc
        events = self.engine.events_since(0)
        report = build_report(
            [e.as_dict() for e in events],
            [(g.actor, g.balance) for g in self.scenario.genesis],
        )
        return RunResult(self.scenario, events, self.offchain, report)

    def _dispatch(self, step: Step) -> None:
        args = dict(step.args)
        for name in POLICY_ARGS:
            if name in args:
                args[name] = policy_from_json(args[name])
        if step.action == "emit_voucher":
            self._emit(step.actor, **args)
        elif step.action == "accept_voucher":
            self._accept(step.actor, **args)
        elif step.action == "settle_channel":
            self._settle(step.actor, **args)
        else:
            method = getattr(self.engine, step.action)
            try:
                method(step.actor, **args)
            except TypeError as exc:
                # Bad argument names/arity in the scenario file, not a bug.
                raise InvalidOperation(f"bad arguments: {exc}") from None

    def _trace(self, kind: str, channel: str, record: dict) -> None:
        self.offchain.append(
            {
                "seq": len(self.offchain),
                "time": self.engine.now,
                "kind": kind,
                "channel": channel,
                **record,
            }
        )

    def _emit(self, actor: str, channel: str) -> None:
        voucher = self.engine.emit_voucher(actor, channel)
        self._emitted[channel] = voucher
        self._trace(
            "VOUCHER_EMITTED",
            channel,
            {"cumulative": voucher.cumulative, "wire": voucher.to_wire().hex()},
        )

    def _accept(self, actor: str, channel: str) -> None:
        voucher = self._emitted.get(channel)
        if voucher is None:
            raise InvalidOperation(f"no voucher emitted on {channel}")
        accepted = self.engine.accept_voucher(actor, channel, voucher)
        self._trace(
            "VOUCHER_ACCEPTED",
            channel,
            {"cumulative": voucher.cumulative, "accepted": accepted},
        )

    def _settle(self, actor: str, channel: str) -> None:
        voucher = self.engine.accepted_voucher(channel)
        if voucher is None:
            raise InvalidOperation(f"no accepted voucher on {channel}")
        self.engine.settle_channel(actor, channel, voucher)


def run_scenario(scenario: Scenario) -> RunResult:
    return ScenarioRunner(scenario).run()
