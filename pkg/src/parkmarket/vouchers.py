"""Keys, account addresses, and the signed voucher format of the payment channel.

A voucher is the off-ledger micro-payment unit: a fixed-width message binding
a channel id to a cumulative amount owed, signed by the paying side. Signing
uses Ed25519, which is deterministic, so equal inputs always yield identical
voucher bytes; the replay-determinism tests rely on that.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

CHANNEL_ID_BYTES = 32
AMOUNT_BYTES = 8
MESSAGE_BYTES = CHANNEL_ID_BYTES + AMOUNT_BYTES
MAX_AMOUNT = 2**64 - 1


@dataclass(frozen=True)
class KeyPair:
    """Ed25519 signing seed plus the raw 32-byte verification key."""

    secret: bytes
    public: bytes


def canonical_seed(seed: bytes | str | int) -> bytes:
    """Map any accepted seed spelling onto a fixed 32-byte signing seed.

    The spellings are namespaced by type so that e.g. 1, "1", and b"1"
    produce three distinct key pairs.
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, str, bytes, bytearray)):
        raise TypeError(f"unsupported seed type: {type(seed).__name__}")
    if isinstance(seed, int):
        tag, raw = b"int", str(seed).encode()
    elif isinstance(seed, str):
        tag, raw = b"str", seed.encode()
    else:
        tag, raw = b"bytes", bytes(seed)
    return hashlib.sha256(tag + b":" + raw).digest()


def derive_keypair(seed: bytes | str | int) -> KeyPair:
    secret = canonical_seed(seed)
    key = Ed25519PrivateKey.from_private_bytes(secret)
    public = key.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return KeyPair(secret=secret, public=public)


def address_of(public: bytes) -> bytes:
    """Account address: the 32-byte hash of the verification key."""
    return hashlib.sha256(public).digest()


def encode_voucher(channel_id: bytes, cumulative: int) -> bytes:
    """Canonical 40-byte message: channel id, then the amount big-endian."""
    if len(channel_id) != CHANNEL_ID_BYTES:
        raise ValueError(f"channel id must be {CHANNEL_ID_BYTES} bytes")
    if not 0 <= cumulative <= MAX_AMOUNT:
        raise ValueError("cumulative amount out of unsigned 64-bit range")
    return channel_id + cumulative.to_bytes(AMOUNT_BYTES, "big")


@dataclass(frozen=True)
class Voucher:
    channel_id: bytes
    cumulative: int
    signature: bytes

    def to_wire(self) -> bytes:
        """Wire form: the canonical 40-byte message followed by the signature."""
        return encode_voucher(self.channel_id, self.cumulative) + self.signature

    @classmethod
    def from_wire(cls, wire: bytes) -> "Voucher":
        if len(wire) < MESSAGE_BYTES:
            raise ValueError("voucher wire form shorter than the canonical message")
        return cls(
            channel_id=wire[:CHANNEL_ID_BYTES],
            cumulative=int.from_bytes(wire[CHANNEL_ID_BYTES:MESSAGE_BYTES], "big"),
            signature=wire[MESSAGE_BYTES:],
        )


def sign_voucher(keys: KeyPair, channel_id: bytes, cumulative: int) -> Voucher:
    message = encode_voucher(channel_id, cumulative)
    key = Ed25519PrivateKey.from_private_bytes(keys.secret)
    return Voucher(channel_id, cumulative, key.sign(message))


def verify_voucher(public: bytes, voucher: Voucher) -> bool:
    """True iff the signature covers the canonical message under ``public``.

    Malformed input of any kind yields False, never an exception.
    """
    try:
        message = encode_voucher(voucher.channel_id, voucher.cumulative)
        Ed25519PublicKey.from_public_bytes(public).verify(voucher.signature, message)
    except (InvalidSignature, ValueError, TypeError):
        return False
    return True
