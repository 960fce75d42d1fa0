"""Certified enclosures of moment Lyapunov exponents and rate functions."""

from .errors import (
    ApproxFailure,
    BracketFailure,
    ClusterError,
    DomainError,
    HomotopyStalled,
    LyapcertError,
    OracleFailure,
    PositivityFailed,
    UsageError,
    VerificationError,
)
from .intervals import ComplexInterval, IArray, Interval

__version__ = "0.1.0"

__all__ = [
    "ApproxFailure",
    "BracketFailure",
    "ClusterError",
    "ComplexInterval",
    "DomainError",
    "HomotopyStalled",
    "IArray",
    "Interval",
    "LyapcertError",
    "OracleFailure",
    "PositivityFailed",
    "UsageError",
    "VerificationError",
    "__version__",
]
