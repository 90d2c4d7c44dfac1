"""Reduction of the Lambda system to effective two-level problems.

Two regimes are supported: adiabatic elimination of the intermediate level at
large one-photon detuning, and the exact SU(2) correspondence on one-photon
resonance.  The two-level Hamiltonian convention used throughout is

    H_eff = 1/2 [[-detuning, rabi], [rabi, detuning]]      (hbar = 1)
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .waveforms import PulsePair, Waveform

LARGE_DETUNING = "large-detuning"
RESONANCE = "resonance"

#: max(pulse)/Delta above which adiabatic elimination is flagged as doubtful
VALIDITY_RATIO = 0.1

NORM_TOL = 1e-6


class ValidityWarning(UserWarning):
    """Adiabatic elimination used outside ``max(Omega)/Delta <= 0.1``."""


@dataclass(frozen=True)
class ThreeLevelSpec:
    """Pulses plus one-photon detuning ``delta`` and two-photon detuning ``delta_s``."""

    pulses: PulsePair
    delta: float
    delta_s: float = 0.0


@dataclass(frozen=True)
class EffectiveTwoLevel:
    rabi: Waveform
    detuning: Waveform
    regime: str
    delta: float = None

    @property
    def t_f(self):
        return self.rabi.t_f


def effective_large_detuning(spec, check_validity=True):
    """Adiabatically eliminate level |2> at large detuning.

    ``detuning = (Omega_p^2 - Omega_s^2) / (4 Delta)`` and
    ``rabi = -Omega_p Omega_s / (2 Delta)``; the sign of the Rabi frequency is
    kept because it fixes the gauge-phase branch downstream.
    """
    if spec.delta_s != 0:
        raise ValidationError("effective reduction requires two-photon resonance (delta_s = 0)")
    if not spec.delta > 0:
        raise ValidationError(f"large-detuning reduction needs delta > 0, got {spec.delta!r}")
    p, s = spec.pulses.pump, spec.pulses.stokes
    delta = float(spec.delta)
    if check_validity:
        ratio = spec.pulses.peak() / delta
        if ratio > VALIDITY_RATIO:
            warnings.warn(
                f"max(Omega)/Delta = {ratio:.3g} exceeds {VALIDITY_RATIO}; adiabatic elimination is doubtful",
                ValidityWarning,
                stacklevel=2,
            )
    detuning = (p * p - s * s) / (4 * delta)
    rabi = -(p * s) / (2 * delta)
    return EffectiveTwoLevel(rabi, detuning, LARGE_DETUNING, delta)


def effective_resonance(pair):
    """Exact two-level image of the resonant Lambda system: ``(Omega_p/2, -Omega_s/2)``."""
    return EffectiveTwoLevel(pair.pump * 0.5, pair.stokes * -0.5, RESONANCE)


def map_two_to_three(b, phi=0.0):
    """Map two-level amplitudes ``(b1, b2)`` to three-level amplitudes.

    ``c1 = |b1|^2 - |b2|^2``, ``c2 = 2i Im(b1* b2 e^{-i phi})``,
    ``c3 = -2 Re(b1* b2 e^{-i phi})``.  Accepts a single state of shape (2,) or
    a trajectory of shape (n, 2); ``phi`` broadcasts over the leading axis.
    """
    b = np.asarray(b, dtype=complex)
    single = b.ndim == 1
    b = np.atleast_2d(b)
    if b.shape[-1] != 2:
        raise ValidationError("two-level state must have two amplitudes")
    norms = np.sum(np.abs(b) ** 2, axis=-1)
    bad = np.abs(norms - 1.0) > NORM_TOL
    if bad.any():
        raise ValidationError(f"two-level state is not normalized (|b|^2 = {norms[bad][0]:.12g})")
    cross = np.conj(b[:, 0]) * b[:, 1] * np.exp(-1j * np.asarray(phi, dtype=float))
    c = np.empty((len(b), 3), dtype=complex)
    c[:, 0] = np.abs(b[:, 0]) ** 2 - np.abs(b[:, 1]) ** 2
    c[:, 1] = 2j * cross.imag
    c[:, 2] = -2 * cross.real
    return c[0] if single else c
