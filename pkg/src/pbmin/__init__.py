"""Partial-bisimulation minimization of labeled transition systems."""

from .lts import (AutParseError, BisimActionSet, Lts, parse_aut,
                  parse_termination, serialize_aut, serialize_termination)

__version__ = "0.1.0"

__all__ = [
    "AutParseError",
    "BisimActionSet",
    "Lts",
    "parse_aut",
    "parse_termination",
    "serialize_aut",
    "serialize_termination",
    "__version__",
]
