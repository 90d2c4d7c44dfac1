"""Counter-diabatic corrections and feasible pulse synthesis.

The counter-diabatic (CD) coupling is never applied directly.  A z-rotation on
the effective two-level problem (or a Gell-Mann rotation on resonance) folds
it into modified pump and Stokes pulses that drive the same populations.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import taylor
from .errors import BranchAmbiguityError, SingularityError, ValidationError
from .reduction import (
    LARGE_DETUNING,
    RESONANCE,
    VALIDITY_RATIO,
    EffectiveTwoLevel,
    ValidityWarning,
    effective_resonance,
)
from .waveforms import COMPOSITE, PulsePair, Waveform, cos, sin

L6 = "l6"
L1 = "l1"
VARIANTS = (L6, L1)

CHECK_POINTS = 4001
BRANCH_TOL = 1e-12
CLAMP_TOL = 1e-12

LAMBDA1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
LAMBDA5 = np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex)
LAMBDA6 = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)


def gellmann_hamiltonian(omega_p, omega_s, omega_a):
    """``1/2 [Omega_p l1 + Omega_s l6 - 2 Omega_a l5]`` for scalar or array inputs."""
    p, s, a = (np.asarray(x, dtype=float)[..., None, None] for x in (omega_p, omega_s, omega_a))
    return 0.5 * (p * LAMBDA1 + s * LAMBDA6 - 2 * a * LAMBDA5)


@dataclass(frozen=True)
class CDPackage:
    """Auxiliary coupling, gauge phase and bookkeeping for one regime."""

    omega_a: Waveform
    phi: Waveform
    regime: str
    variant: str = None

    @property
    def phi_dot(self):
        return self.phi.derivative()


@dataclass(frozen=True)
class SynthesizedPulses:
    pump: Waveform
    stokes: Waveform
    regime: str
    variant: str = None
    delta_tilde: float = None
    cd: CDPackage = None
    metadata: dict = field(default_factory=dict)

    @property
    def pair(self):
        return PulsePair(self.pump, self.stokes)


def _grid(t_f, n=CHECK_POINTS):
    return np.linspace(0.0, t_f, n)


def _wronskian_ratio(x, y, what):
    """``(x y' - x' y) / (x^2 + y^2)`` with a grid check on the denominator."""
    t = _grid(x.t_f)
    den = x(t) ** 2 + y(t) ** 2
    bad = np.flatnonzero(~(den > 0))
    if bad.size:
        t_bad = t[bad[0]]
        raise SingularityError(f"{what}: denominator vanishes at t = {t_bad:.6g} s", time=t_bad)
    num = x * y.derivative() - x.derivative() * y
    return num / (x * x + y * y)


def cd_rabi_two_level(eff):
    """Signed CD Rabi frequency of an effective two-level problem.

    ``Omega_a = (Omega_eff Delta_eff' - Omega_eff' Delta_eff) / (Delta_eff^2 + Omega_eff^2)``
    """
    return _wronskian_ratio(eff.rabi, eff.detuning, "two-level CD coupling")


def cd_rabi_three_level(pair):
    """Direct |1>-|3> CD coupling ``2 (Omega_p' Omega_s - Omega_s' Omega_p) / Omega^2``.

    This is twice the mixing-angle rate and twice the resonance-regime
    two-level CD frequency.
    """
    return 2.0 * _wronskian_ratio(pair.stokes, pair.pump, "three-level CD coupling")


def _phase(num, den):
    """Continuous principal-branch ``arctan(num / den)``.

    The principal value is unwrapped with period pi across a check grid; jump
    locations become fixed offsets, so the result is still an evaluator.
    """
    t = _grid(num.t_f)
    d = den(t)
    n = num(t)
    scale = np.max(np.abs(d))
    ambiguous = (np.abs(d) < BRANCH_TOL * scale) & (n != 0)
    if scale == 0 or ambiguous.any():
        t_bad = t[np.flatnonzero(ambiguous)[0]] if ambiguous.any() else 0.0
        raise BranchAmbiguityError(
            f"gauge phase branch ambiguous at t = {t_bad:.6g} s (reference coupling ~ 0)", time=t_bad
        )
    raw = np.arctan(n / d)
    jumps = np.round(np.diff(raw) / np.pi)
    where = np.flatnonzero(jumps)
    breaks = 0.5 * (t[where] + t[where + 1])
    steps = -np.pi * jumps[where]
    base = Waveform.arctan_ratio(num, den)
    if where.size == 0:
        return base
    base_jet = base._jet

    def jet(tt, k):
        out = base_jet(tt, k)
        out[0] = out[0] + np.sum(steps * (tt[..., None] > breaks), axis=-1)
        return out

    return Waveform(jet, num.t_f, COMPOSITE)


def gauge_phase(eff, omega_a):
    """Gauge phase ``phi = arctan(Omega_a / Omega_eff)`` and its rate.

    Uses the ratio form rather than a quadrant-aware angle, so ``phi`` stays
    near 0 wherever ``Omega_a`` vanishes even if ``Omega_eff < 0``.  Returns
    ``(phi, phi_dot)`` as waveforms; ``phi_dot`` is exact.
    """
    phi = _phase(omega_a, eff.rabi)
    return phi, phi.derivative()


def cd_large_detuning(eff):
    omega_a = cd_rabi_two_level(eff)
    phi, _ = gauge_phase(eff, omega_a)
    return CDPackage(omega_a, phi, LARGE_DETUNING)


def cd_resonance(pair, variant=L6):
    """CD package on one-photon resonance.

    ``l6``: ``phi = arctan(2 Omega_a / Omega_p)``.
    ``l1``: ``phi = -arctan(2 Omega_a / Omega_s)``, the angle that cancels the
    lambda-5 term under ``U = exp(i phi lambda_1)``.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    eff = effective_resonance(pair)
    omega_a = cd_rabi_two_level(eff)
    if variant == L6:
        phi, _ = gauge_phase(eff, omega_a)
    else:
        phi = _phase(-omega_a, pair.stokes * 0.5)
    return CDPackage(omega_a, phi, RESONANCE, variant)


def transformed_effective(eff, cd):
    """Effective fields after the z-rotation: ``(sqrt(Omega_eff^2 + Omega_a^2), Delta_eff + phi')``."""
    rabi = (eff.rabi * eff.rabi + cd.omega_a * cd.omega_a).sqrt()
    detuning = eff.detuning + cd.phi_dot
    return EffectiveTwoLevel(rabi, detuning, eff.regime, eff.delta)


def _radicands(d_jet, o_jet, two_delta):
    """Pump and Stokes radicands ``2D~(R +/- Delta~_eff)`` in cancellation-free form."""
    r = taylor.sqrt(taylor.mul(d_jet, d_jet) + taylor.mul(o_jet, o_jet))
    o2 = taylor.mul(o_jet, o_jet)
    plus = r + d_jet
    minus = r - d_jet
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = d_jet[0] >= 0
        p_rad = np.where(pos, two_delta * plus, two_delta * taylor.div(o2, minus))
        s_rad = np.where(pos, two_delta * taylor.div(o2, plus), two_delta * minus)
    return p_rad, s_rad


def _clamped_sqrt(rad):
    scale = np.max(np.abs(rad[0])) if rad[0].size else 0.0
    out = rad.copy()
    tiny = (out[0] < 0) & (out[0] >= -CLAMP_TOL * max(scale, 1.0))
    out[0] = np.where(tiny, 0.0, out[0])
    return taylor.sqrt(out)


def synthesize_large_detuning(transformed, delta_tilde=None, check_validity=True):
    """Invert the adiabatic-elimination map for the transformed fields.

    ``Omega_p~ = sqrt(2 D~ (sqrt(Delta~_eff^2 + Omega~_eff^2) + Delta~_eff))`` and
    the Stokes pulse with the minus sign.  ``delta_tilde`` defaults to the
    source detuning.
    """
    if transformed.regime != LARGE_DETUNING:
        raise ValidationError("synthesize_large_detuning needs large-detuning effective fields")
    if delta_tilde is None:
        delta_tilde = transformed.delta
    if delta_tilde is None or not delta_tilde > 0:
        raise ValidationError(f"delta_tilde must be positive, got {delta_tilde!r}")
    d, o = transformed.detuning._jet, transformed.rabi._jet
    two_delta = 2.0 * float(delta_tilde)
    t_f = transformed.t_f

    def pump(t, k):
        return _clamped_sqrt(_radicands(d(t, k), o(t, k), two_delta)[0])

    def stokes(t, k):
        return _clamped_sqrt(_radicands(d(t, k), o(t, k), two_delta)[1])

    out = SynthesizedPulses(
        Waveform(pump, t_f, COMPOSITE),
        Waveform(stokes, t_f, COMPOSITE),
        LARGE_DETUNING,
        delta_tilde=float(delta_tilde),
    )
    if check_validity:
        ratio = out.pair.peak() / delta_tilde
        out.metadata["validity_ratio"] = ratio
        if ratio > VALIDITY_RATIO:
            warnings.warn(
                f"synthesized pulses reach {ratio:.3g} x delta_tilde (limit {VALIDITY_RATIO})",
                ValidityWarning,
                stacklevel=2,
            )
    return out


def synthesize_resonance(pair, cd, variant=None):
    """Modified pulses on resonance.

    ``l6``: ``(sqrt(Omega_p^2 + 4 Omega_a^2), Omega_s - 2 phi')``;
    ``l1``: ``(Omega_p - 2 phi', sqrt(Omega_s^2 + 4 Omega_a^2))``.
    The subtraction forms may go negative; that is a pi phase flip of the
    field and is kept as a signed Rabi frequency.
    """
    variant = cd.variant if variant is None else variant
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    if cd.regime != RESONANCE or cd.variant != variant:
        raise ValidationError("CD package was not built for this resonance variant")
    a2 = 4.0 * cd.omega_a * cd.omega_a
    if variant == L6:
        pump = (pair.pump * pair.pump + a2).sqrt()
        stokes = pair.stokes - 2.0 * cd.phi_dot
    else:
        pump = pair.pump - 2.0 * cd.phi_dot
        stokes = (pair.stokes * pair.stokes + a2).sqrt()
    out = SynthesizedPulses(pump, stokes, RESONANCE, variant=variant, cd=cd)
    t = _grid(pair.t_f)
    out.metadata["signed_stokes"] = bool(np.any(stokes(t) < 0))
    out.metadata["signed_pump"] = bool(np.any(pump(t) < 0))
    return out


def gellmann_rotate(pair, omega_a, phi, generator=L6):
    """Apply ``U = exp(i phi lambda)`` (``psi -> U psi``) to ``1/2 [Op l1 + Os l6 - 2 Oa l5]``.

    Returns ``(Op~, Os~, Oa~)`` with ``H~ = 1/2 [Op~ l1 + Os~ l6 - Oa~ l5]``.
    ``phi`` may be a waveform or a constant angle.
    """
    if not isinstance(phi, Waveform):
        phi = Waveform.constant(float(phi), pair.t_f)
    c, s = cos(phi), sin(phi)
    phi_dot = phi.derivative()
    if generator == L6:
        p = pair.pump * c + 2.0 * omega_a * s
        st = pair.stokes - 2.0 * phi_dot
        a = 2.0 * omega_a * c - pair.pump * s
    elif generator == L1:
        p = pair.pump - 2.0 * phi_dot
        st = pair.stokes * c - 2.0 * omega_a * s
        a = 2.0 * omega_a * c + pair.stokes * s
    else:
        raise ValidationError(f"unknown generator {generator!r}")
    return p, st, a
