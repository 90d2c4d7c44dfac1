"""Shortcut-to-adiabaticity pulse design for three-level Lambda systems."""

from .errors import (
    BranchAmbiguityError,
    NumericalAccuracyError,
    SearchError,
    SingularityError,
    StirsapError,
    ValidationError,
)
from .waveforms import GaussianPulseParams, PulsePair, Waveform, make_gaussian_pair

__all__ = [
    "BranchAmbiguityError",
    "GaussianPulseParams",
    "NumericalAccuracyError",
    "PulsePair",
    "SearchError",
    "SingularityError",
    "StirsapError",
    "ValidationError",
    "Waveform",
    "make_gaussian_pair",
]
