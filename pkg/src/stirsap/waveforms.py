"""Reference pump/Stokes pulses and the Waveform evaluator contract."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import taylor
from .errors import ValidationError

ANALYTIC_GAUSSIAN = "analytic-gaussian"
ANALYTIC_CONSTANT = "analytic-constant"
COMPOSITE = "synthesized-composite"
SAMPLED = "user-function"


class Waveform:
    """A real control on ``[0, t_f]`` with value and time derivatives.

    Waveforms are evaluators, not sample tables.  Each one wraps a jet function
    ``(t, order) -> coefficients`` (see :mod:`stirsap.taylor`); arithmetic on
    waveforms composes jet functions, so derivatives of synthesized pulses
    follow by the chain rule with no resampling.

    Parameters
    ----------
    jet : callable
        ``jet(t, order)`` returning normalized Taylor coefficients with shape
        ``(order + 1, *t.shape)``.
    t_f : float
        End of the domain in seconds.
    provenance : str
        ``"analytic-gaussian"``, ``"synthesized-composite"``, ...
    """

    __array_priority__ = 100

    def __init__(self, jet, t_f, provenance=COMPOSITE):
        self._jet = jet
        self.t_f = float(t_f)
        self.provenance = provenance

    def jet(self, t, order=0):
        return self._jet(np.asarray(t, dtype=float), order)

    def derivatives(self, t, order):
        """Plain derivatives ``f, f', ..., f^(order)`` stacked on axis 0."""
        return taylor.to_derivatives(self.jet(t, order))

    def __call__(self, t):
        return _unwrap(self.jet(t, 0)[0])

    def d1(self, t):
        return _unwrap(self.jet(t, 1)[1])

    def d2(self, t):
        return _unwrap(2.0 * self.jet(t, 2)[2])

    def derivative(self):
        parent = self._jet
        return Waveform(lambda t, k: taylor.derivative(parent(t, k + 1)), self.t_f, COMPOSITE)

    # composition -----------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, Waveform):
            f, g = self._jet, other._jet
            return Waveform(lambda t, k: op(f(t, k), g(t, k)), self.t_f, COMPOSITE)
        c = float(other)
        f = self._jet
        return Waveform(lambda t, k: op(f(t, k), taylor.constant(c, t.shape, k)), self.t_f, COMPOSITE)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        if not isinstance(other, Waveform):
            c = float(other)
            f = self._jet
            return Waveform(lambda t, k: c * f(t, k), self.t_f, self.provenance)
        return self._binary(other, taylor.mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Waveform):
            return self * (1.0 / float(other))
        return self._binary(other, taylor.div)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: taylor.div(b, a))

    def __neg__(self):
        return self * -1.0

    def sqrt(self):
        f = self._jet
        return Waveform(lambda t, k: taylor.sqrt(f(t, k)), self.t_f, COMPOSITE)

    def square(self):
        return self * self

    @staticmethod
    def arctan_ratio(num, den):
        """Principal-branch ``arctan(num / den)`` as a waveform."""
        f, g = num._jet, den._jet
        return Waveform(lambda t, k: taylor.arctan_ratio(f(t, k), g(t, k)), num.t_f, COMPOSITE)

    def sample(self, n=4001):
        t = np.linspace(0.0, self.t_f, n)
        return t, self.jet(t, 0)[0]

    def __repr__(self):
        return f"Waveform(t_f={self.t_f:g}, provenance={self.provenance!r})"

    # constructors ----------------------------------------------------------

    @classmethod
    def gaussian(cls, amplitude, center, width, t_f):
        """``amplitude * exp(-(t - center)^2 / width^2)`` with exact derivatives."""

        def jet(t, k):
            u = taylor.variable(t, k)
            u[0] = u[0] - center
            return amplitude * taylor.exp(-taylor.mul(u, u) / width**2)

        return cls(jet, t_f, ANALYTIC_GAUSSIAN)

    @classmethod
    def constant(cls, value, t_f):
        return cls(lambda t, k: taylor.constant(value, t.shape, k), t_f, ANALYTIC_CONSTANT)

    @classmethod
    def from_function(cls, func, t_f, step=None):
        """Wrap a vectorized value-only function.

        First and second derivatives come from Richardson-extrapolated central
        differences with step ``t_f * 1e-6``; higher orders are unavailable.
        """
        h = t_f * 1e-6 if step is None else step

        def jet(t, k):
            if k > 2:
                raise ValidationError("user-function waveforms provide derivatives up to order 2")
            out = np.zeros((k + 1,) + t.shape)
            out[0] = func(t)
            if k >= 1:
                out[1] = richardson_derivative(func, t, h, order=1)
            if k >= 2:
                out[2] = richardson_derivative(func, t, h, order=2) / 2.0
            return out

        return cls(jet, t_f, SAMPLED)


def _unwrap(v):
    return float(v) if np.ndim(v) == 0 else v


def richardson_derivative(func, t, h, order=1):
    """Central difference of ``func`` at ``t`` improved by one Richardson step."""
    t = np.asarray(t, dtype=float)

    def central(step):
        if order == 1:
            return (func(t + step) - func(t - step)) / (2 * step)
        if order == 2:
            return (func(t + step) - 2 * func(t) + func(t - step)) / step**2
        raise ValueError("order must be 1 or 2")

    return (4 * central(h / 2) - central(h)) / 3


@dataclass(frozen=True)
class GaussianPulseParams:
    """Reference Gaussian pulse parameters (rad/s and seconds).

    Pump peaks at ``t_f/2 + tau``, Stokes at ``t_f/2 - tau``; ``tau > 0`` gives
    the counterintuitive Stokes-first ordering.
    """

    omega0: float
    t_f: float
    tau: float
    sigma: float

    def __post_init__(self):
        for name in ("omega0", "t_f", "sigma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be positive, got {value!r}")
        if not np.isfinite(self.tau):
            raise ValidationError("tau must be finite")

    @classmethod
    def from_fractions(cls, omega0, t_f, tau_fraction, sigma_fraction):
        return cls(omega0, t_f, tau_fraction * t_f, sigma_fraction * t_f)

    def replace(self, **changes):
        fields = dict(omega0=self.omega0, t_f=self.t_f, tau=self.tau, sigma=self.sigma)
        fields.update(changes)
        return GaussianPulseParams(**fields)


@dataclass(frozen=True)
class PulsePair:
    pump: Waveform
    stokes: Waveform

    def __post_init__(self):
        if not np.isclose(self.pump.t_f, self.stokes.t_f, rtol=1e-12, atol=0):
            raise ValidationError("pump and Stokes waveforms must share the same domain")

    @property
    def t_f(self):
        return self.pump.t_f

    def scaled(self, factor):
        return PulsePair(self.pump * factor, self.stokes * factor)

    def peak(self, n=4001):
        """Largest absolute value of either pulse on a uniform grid."""
        t = np.linspace(0.0, self.t_f, n)
        return float(max(np.max(np.abs(self.pump(t))), np.max(np.abs(self.stokes(t)))))


def make_gaussian_pair(params):
    """Counterintuitively ordered Gaussian pump and Stokes pulses."""
    if not isinstance(params, GaussianPulseParams):
        raise ValidationError("expected GaussianPulseParams")
    mid = params.t_f / 2
    pump = Waveform.gaussian(params.omega0, mid + params.tau, params.sigma, params.t_f)
    stokes = Waveform.gaussian(params.omega0, mid - params.tau, params.sigma, params.t_f)
    return PulsePair(pump, stokes)


def constant_pair(omega_p, omega_s, t_f):
    return PulsePair(Waveform.constant(omega_p, t_f), Waveform.constant(omega_s, t_f))


class PulseFrame(NamedTuple):
    theta: np.ndarray
    omega: np.ndarray
    degenerate: np.ndarray


def pulse_frame(pair, t):
    """Mixing angle ``theta`` (tan theta = pump/Stokes) and total Rabi frequency.

    Where both pulses vanish the angle is undefined; those points take the
    angle of the nearest previous sample (0 if there is none) and are flagged.
    Scalar ``t`` gives scalar fields.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p = np.asarray(pair.pump(t), dtype=float)
    s = np.asarray(pair.stokes(t), dtype=float)
    theta = np.arctan2(p, s)
    omega = np.hypot(p, s)
    degenerate = (p == 0) & (s == 0)
    if degenerate.any():
        idx = np.where(~degenerate, np.arange(len(t)), -1)
        np.maximum.accumulate(idx, out=idx)
        theta = np.where(idx >= 0, theta[np.maximum(idx, 0)], 0.0)
    if scalar:
        return PulseFrame(float(theta[0]), float(omega[0]), bool(degenerate[0]))
    return PulseFrame(theta, omega, degenerate)


def pi_pulse_time(regime, omega0, delta=None):
    """Duration of the resonant pi pulse used as the speed reference.

    ``2*pi*Delta/omega0**2`` in the large-detuning regime, ``sqrt(2)*pi/omega0``
    on one-photon resonance.
    """
    if omega0 <= 0:
        raise ValidationError("omega0 must be positive")
    if regime == "large-detuning":
        if delta is None or delta <= 0:
            raise ValidationError("large-detuning pi-pulse time needs delta > 0")
        return 2 * np.pi * delta / omega0**2
    if regime == "resonance":
        return np.sqrt(2) * np.pi / omega0
    raise ValidationError(f"unknown regime {regime!r}")


def sin(w):
    f = w._jet
    return Waveform(lambda t, k: taylor.sincos(f(t, k))[0], w.t_f, COMPOSITE)


def cos(w):
    f = w._jet
    return Waveform(lambda t, k: taylor.sincos(f(t, k))[1], w.t_f, COMPOSITE)
