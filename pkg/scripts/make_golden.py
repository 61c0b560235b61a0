#!/usr/bin/env python3
"""Regenerate scenarios/golden.json, the full-lifecycle reference scenario.

It exercises every protocol surface once: registration and approval, lot
creation, tenancy, tariff swap, service provider, two settled sessions (one
before and one after a tax amendment), an abandoned session reclaimed by
timeout, occupancy reports of all three kinds, late rent with penalties, and
tenancy termination.
"""

import json
from pathlib import Path

WEEK = 604_800


def step(at, actor, action, **args):
    return {"at": at, "actor": actor, "action": action, "args": args}


def golden() -> dict:
    return {
        "version": 1,
        "seed": 7,
        "grace": 86_400,
        "genesis": [
            {"actor": "city", "role": "administrator", "balance": 0},
            {"actor": "lena", "role": "landlord", "balance": 1_000_000},
            {"actor": "tom", "role": "tenant", "balance": 500_000},
            {"actor": "dana", "role": "driver", "balance": 200_000},
            {"actor": "dara", "role": "driver", "balance": 150_000},
            {"actor": "sflow", "role": "service_provider", "balance": 0},
        ],
        "steps": [
            step(0, "lena", "request_landlord_registration",
                 tax_rate=500, land_info="riverside gravel lot",
                 valid_from=0, valid_until=52 * WEEK),
            step(600, "city", "decide_registration", request="request:1", approve=True),
            step(1200, "lena", "create_parking_lot",
                 contract="contract:1", stalls=6, policy=1000, location="riverside"),
            step(1800, "tom", "request_tenancy",
                 lot="lot:1", stalls=[0, 1, 2], rent_fee=70_000, period=WEEK,
                 landlord_share=1000, penalty_rate=500),
            step(2400, "lena", "approve_tenancy", request="tenancy:1"),
            step(3000, "tom", "set_payment_policy", provider="lease:1", policy=1200),
            step(3600, "tom", "register_service_provider",
                 provider="lease:1", sp="sflow", share=200),
            step(3900, "dana", "register_car", plate="AB123"),
            step(4000, "dara", "register_car", plate="ZX999"),
            step(5000, "dana", "transfer", to="dara", amount=1),
            # Session 1: three hours on a tenant stall, service provider named.
            step(7200, "dana", "start_parking",
                 car="car:1", provider="lease:1", stall=0, until=18_000,
                 deposit=5000, sp="sp:1"),
            step(7300, "lena", "observe_occupancy", lot="lot:1", stall=0, plate="AB123"),
            step(7400, "lena", "observe_occupancy", lot="lot:1", stall=4, plate="QQ111"),
            step(10_800, "dana", "emit_voucher", channel="channel:1"),
            step(10_900, "tom", "accept_voucher", channel="channel:1"),
            step(14_400, "dana", "emit_voucher", channel="channel:1"),
            step(14_500, "tom", "accept_voucher", channel="channel:1"),
            step(15_000, "lena", "observe_occupancy", lot="lot:1", stall=0),
            step(18_000, "dana", "emit_voucher", channel="channel:1"),
            step(18_100, "tom", "accept_voucher", channel="channel:1"),
            step(18_200, "tom", "settle_channel", channel="channel:1"),
            # Session 2: lot-run stall, driver walks away, reclaims at expiry.
            step(20_000, "dara", "start_parking",
                 car="car:2", provider="lot:1", stall=3, until=27_200, deposit=2500),
            step(113_600, "dara", "timeout_refund", channel="channel:2"),
            # Tax amendment, then a session settled under the new rate.
            step(120_000, "lena", "propose_amendment",
                 contract="contract:1", changes={"tax_rate": 400}),
            step(121_000, "city", "resolve_amendment", amendment="amendment:1", accept=True),
            step(126_000, "dana", "start_parking",
                 car="car:1", provider="lease:1", stall=1, until=129_600, deposit=2000),
            step(129_600, "dana", "emit_voucher", channel="channel:3"),
            step(129_700, "tom", "accept_voucher", channel="channel:3"),
            step(129_800, "tom", "settle_channel", channel="channel:3"),
            # Rent: two whole periods late, then one.
            step(3 * WEEK + 2500, "tom", "pay_rent", lease="lease:1"),
            step(3 * WEEK + 2600, "tom", "pay_rent", lease="lease:1"),
            step(3 * WEEK + 90_000, "tom", "terminate_tenancy", lease="lease:1"),
            step(3 * WEEK + 90_100, "lena", "observe_occupancy", lot="lot:1", stall=0),
        ],
    }


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "scenarios" / "golden.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(golden(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
