"""Calculus on conformally flat backgrounds, exact or on a torus grid."""

from .backends import SymbolicBackend, TorusBackend
from .background import (
    ConfBackground,
    Sym2Field,
    blocktail_newtons,
    blocktail_sigma,
    blocktail_sigmas,
    symbolic_background,
    torus_background,
)
from .grid import AliasingError, GridField, coordinate_field, random_trig_field, trig_mode

__all__ = [
    "AliasingError",
    "ConfBackground",
    "GridField",
    "Sym2Field",
    "SymbolicBackend",
    "TorusBackend",
    "blocktail_newtons",
    "blocktail_sigma",
    "blocktail_sigmas",
    "coordinate_field",
    "random_trig_field",
    "symbolic_background",
    "torus_background",
    "trig_mode",
]
