"""Exact and asymptotic gcd/lcm sums of additive arithmetic functions."""

from .catalog import AdditiveFunctionSpec, ClassParams, builtin, parse_spec
from .errors import DomainError, RegimeError, SizeGuardError

__version__ = "0.1.0"

__all__ = [
    "AdditiveFunctionSpec", "ClassParams", "builtin", "parse_spec",
    "DomainError", "RegimeError", "SizeGuardError",
]
