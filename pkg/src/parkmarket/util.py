"""Small shared helpers."""

from __future__ import annotations


class IdSequence:
    """Deterministic "prefix:N" id generator, one counter per prefix."""

    def __init__(self) -> None:
        self._counters: dict[str, int] = {}

    def next(self, prefix: str) -> str:
        self._counters[prefix] = self._counters.get(prefix, 0) + 1
        return f"{prefix}:{self._counters[prefix]}"
