"""Reciprocity of polarized-wave scattering with 2x2 matrix potentials."""

from .pauli2 import AntiunitaryOp, AxisAngleUnitary, PauliForm, compose, decompose, exp2
from .reciprocity import ReciprocityVerdict, VerdictClass, find_reciprocity_unitary

__all__ = [
    "AntiunitaryOp",
    "AxisAngleUnitary",
    "PauliForm",
    "ReciprocityVerdict",
    "VerdictClass",
    "compose",
    "decompose",
    "exp2",
    "find_reciprocity_unitary",
]

__version__ = "0.1.0"
