"""Deterministic parking-marketplace protocol engine and scenario simulator."""

from .channels import SettlementBreakdown, compute_breakdown
from .engine import Engine
from .errors import (
    EngineError,
    InsufficientFunds,
    InvalidOperation,
    InvariantViolation,
    NotFound,
    Unauthorized,
)
from .ledger import Ledger
from .pricing import WeekHourPolicy
from .vouchers import KeyPair, Voucher, derive_keypair, sign_voucher, verify_voucher

__all__ = [
    "Engine",
    "EngineError",
    "InsufficientFunds",
    "InvalidOperation",
    "InvariantViolation",
    "KeyPair",
    "Ledger",
    "NotFound",
    "SettlementBreakdown",
    "Unauthorized",
    "Voucher",
    "WeekHourPolicy",
    "compute_breakdown",
    "derive_keypair",
    "sign_voucher",
    "verify_voucher",
]
