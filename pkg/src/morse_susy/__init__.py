"""Tridiagonal representation of the Morse oscillator, its supersymmetric
partner, the associated orthogonal polynomials and their spectral measures."""

from .morse import InvalidParameterError, MorseParams, derive_params
from .orthopoly import morse_family, partner_family
from .spectrum import bound_energies, bound_state_count, measure, partner_measure

__all__ = [
    "InvalidParameterError",
    "MorseParams",
    "bound_energies",
    "bound_state_count",
    "derive_params",
    "measure",
    "morse_family",
    "partner_family",
    "partner_measure",
]
__version__ = "0.1.0"
