"""End-of-run report, built by folding the ledger event log over genesis.

Only the genesis balances come from the scenario; every other number in the
report (balance movements, per-channel outcomes, totals, occupancy counts) is
recomputed from the events alone, which makes the report an independent
cross-check of the run.
"""

from __future__ import annotations

from collections import defaultdict

TOTAL_KEYS = (
    "claimed",
    "tax",
    "service",
    "landlord",
    "operator",
    "refunded",
    "rent_fees",
    "penalties",
)


def build_report(events: list[dict], genesis: list[tuple[str, int]]) -> dict:
    balances: dict[str, int] = defaultdict(int)
    for actor, balance in genesis:
        balances[actor] += balance
    channels: dict[str, dict] = {}
    totals = {key: 0 for key in TOTAL_KEYS}
    occupancy = {"ok": 0, "violation": 0, "mismatch": 0}

    for event in events:
        kind = event["kind"]
        payload = event["payload"]
        if kind == "TRANSFER":
            balances[payload["from"]] -= payload["amount"]
            balances[payload["to"]] += payload["amount"]
            if payload.get("reason") == "rent":
                totals["rent_fees"] += payload["rent_fee"]
                totals["penalties"] += payload["penalty"]
        elif kind == "CHANNEL_OPEN":
            balances[payload["payer"]] -= payload["locked"]
            channels[payload["alias"]] = {
                "status": "open",
                "payer": payload["payer"],
                "payee": payload["payee"],
                "locked": payload["locked"],
            }
        elif kind == "CHANNEL_SETTLE":
            for payout in payload["payouts"]:
                balances[payout["to"]] += payout["amount"]
            channels[payload["alias"]].update(
                status="settled",
                claimed=payload["claimed"],
                tax=payload["tax"],
                service=payload["service"],
                landlord=payload["landlord"],
                operator=payload["operator"],
                refund=payload["refund"],
            )
            for key in ("claimed", "tax", "service", "landlord", "operator"):
                totals[key] += payload[key]
            totals["refunded"] += payload["refund"]
        elif kind == "CHANNEL_REFUND":
            for payout in payload["payouts"]:
                balances[payout["to"]] += payout["amount"]
            channels[payload["alias"]].update(
                status="refunded", refund=payload["refund"]
            )
            totals["refunded"] += payload["refund"]
        elif kind == "OCCUPANCY_OK":
            occupancy["ok"] += 1
        elif kind == "OCCUPANCY_VIOLATION":
            occupancy["violation"] += 1
        elif kind == "OCCUPANCY_MISMATCH":
            occupancy["mismatch"] += 1

    totals["escrow_open"] = sum(
        c["locked"] for c in channels.values() if c["status"] == "open"
    )
    return {
        "final_balances": dict(sorted(balances.items())),
        "channels": channels,
        "totals": totals,
        "violations": occupancy,
    }
