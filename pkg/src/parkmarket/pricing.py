"""Time-of-week tariffs: a 168-slot integer rate grid and exact interval pricing.

The simulated epoch (t = 0) is Monday 00:00, so the tariff slot for a time t
is simply (t // 3600) mod 168, with slot 0 = Monday 00:00. Prices are exact:
seconds-weighted rate sums with a single ceiling division at the very end,
never per-slot rounding.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Protocol, Sequence

from .errors import InvalidOperation

HOURS_PER_WEEK = 168
SECONDS_PER_HOUR = 3600
SECONDS_PER_WEEK = HOURS_PER_WEEK * SECONDS_PER_HOUR

# Rate cap keeps any week-scale price comfortably inside unsigned 64 bits.
MAX_RATE = 2**32


class PaymentPolicy(Protocol):
    """What a provider's tariff must answer: spot rate and interval price."""

    def rate_at(self, t: int) -> int: ...

    def total_price(self, start: int, end: int) -> int: ...


@dataclass(frozen=True)
class WeekHourPolicy:
    """One hourly rate (minor units per hour) per hour of the week."""

    rates: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rates) != HOURS_PER_WEEK:
            raise ValueError(f"rate grid must have {HOURS_PER_WEEK} entries")
        for rate in self.rates:
            if not isinstance(rate, int) or isinstance(rate, bool):
                raise ValueError("rates must be integers")
            if not 0 <= rate <= MAX_RATE:
                raise ValueError(f"rate out of range [0, {MAX_RATE}]: {rate}")

    @classmethod
    def from_rates(cls, rates: Sequence[int]) -> "WeekHourPolicy":
        return cls(tuple(rates))

    @classmethod
    def uniform(cls, rate: int) -> "WeekHourPolicy":
        return cls((rate,) * HOURS_PER_WEEK)

    def rate_at(self, t: int) -> int:
        return self.rates[(t // SECONDS_PER_HOUR) % HOURS_PER_WEEK]

    def total_price(self, start: int, end: int) -> int:
        """Exact price of parking over [start, end), in minor units.

        Sums seconds-in-slot times slot rate over every hour slot the
        interval overlaps, then applies one final ceiling division by 3600.
        """
        if start > end:
            raise InvalidOperation("interval start is after its end")
        total = 0  # in rate-seconds
        t = start
        while t < end:
            slot_end = (t // SECONDS_PER_HOUR + 1) * SECONDS_PER_HOUR
            upto = min(end, slot_end)
            total += (upto - t) * self.rate_at(t)
            t = upto
        return -(-total // SECONDS_PER_HOUR)

    def to_list(self) -> list[int]:
        """JSON form: an array of 168 integers, index 0 = Monday 00:00."""
        return list(self.rates)

    def digest(self) -> str:
        """Short stable fingerprint of the grid, for event payloads."""
        body = json.dumps(self.to_list(), separators=(",", ":")).encode()
        return hashlib.sha256(body).hexdigest()[:16]
