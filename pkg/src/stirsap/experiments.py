"""Named protocols, threshold-time search and robustness sweeps."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .counterdiabatic import (
    L6,
    VARIANTS,
    cd_large_detuning,
    cd_resonance,
    synthesize_large_detuning,
    synthesize_resonance,
    transformed_effective,
)
from .dynamics import DEFAULT_STEPS, propagate, three_level_hamiltonian, transfer_fidelity
from .errors import SearchError, StirsapError, ValidationError
from .reduction import ThreeLevelSpec, effective_large_detuning
from .units import GHZ, MHZ, US
from .waveforms import GaussianPulseParams, constant_pair, make_gaussian_pair

STIRAP = "stirap"
STIRSAP_LD = "stirsap-ld"
STIRSAP_RES = "stirsap-res"
PI_PULSE = "pi-pulse"
KINDS = (STIRAP, STIRSAP_LD, STIRSAP_RES, PI_PULSE)

AMPLITUDE = "amplitude"
DETUNING = "detuning"
SEPARATION = "separation"
SWEEP_PARAMETERS = (AMPLITUDE, DETUNING, SEPARATION)

# Parameter sets of the large-detuning and resonance demonstrations.
LD_DELTA = 2.5 * GHZ


def normalize_kind(kind):
    """Accept ``"STIRSAP-LD"``, ``"stirsap_ld"`` and similar spellings."""
    key = str(kind).strip().lower().replace("_", "-")
    if key not in KINDS:
        raise ValidationError(f"unknown protocol {kind!r}; expected one of {KINDS}")
    return key


def large_detuning_params(t_f=400 * US, omega0=5 * MHZ):
    return GaussianPulseParams.from_fractions(omega0, t_f, 1 / 10, 1 / 6)


def resonance_params(t_f=1 * US, omega0=5 * MHZ):
    return GaussianPulseParams.from_fractions(omega0, t_f, 1 / 8, 1 / 6)


@dataclass
class ProtocolSpec:
    """A fully materialized protocol: reference pulses, delivered pulses, detunings."""

    kind: str
    params: GaussianPulseParams
    delta: float
    reference: object
    delivered: object
    variant: str = None
    delta_tilde: float = None
    synthesized: object = None
    cd: object = None
    n_steps: int = DEFAULT_STEPS
    delta_s: float = 0.0

    @property
    def t_f(self):
        return self.delivered.t_f

    @property
    def omega_scale(self):
        """Amplitude used to dimension the resonance detuning sweep."""
        if self.kind == PI_PULSE:
            return math.sqrt(2) * math.pi / self.t_f
        return self.params.omega0

    @property
    def is_resonant(self):
        return self.delta == 0

    def hamiltonian(self, amplitude=1.0, delta=None):
        pulses = self.delivered if amplitude == 1.0 else self.delivered.scaled(amplitude)
        return three_level_hamiltonian(pulses, self.delta if delta is None else delta, self.delta_s)

    def run(self, amplitude=1.0, delta=None, n_steps=None):
        return propagate(self.hamiltonian(amplitude, delta), n_steps=n_steps or self.n_steps)

    def fidelity(self, amplitude=1.0, delta=None, n_steps=None):
        return transfer_fidelity(self.run(amplitude, delta, n_steps))

    def peak(self):
        return self.delivered.peak()

    def final_phase(self):
        """Gauge phase at ``t_f`` entering the resonance law ``P3 = cos^2(phi)``.

        For resonance protocols this is ``arctan(2 Omega_a / Omega_p)`` at
        ``t_f`` whichever rotation was used to synthesize the pulses.
        """
        if self.kind == STIRSAP_LD:
            return float(self.cd.phi(self.t_f))
        if self.kind == STIRSAP_RES:
            cd = self.cd if self.variant == L6 else cd_resonance(self.reference, L6)
            return float(cd.phi(self.t_f))
        return None


def build_protocol(
    kind, params=None, delta=0.0, variant=L6, delta_tilde=None, t_f=None, n_steps=DEFAULT_STEPS, delta_s=0.0
):
    """Materialize a named protocol.

    Parameters
    ----------
    kind : {"stirap", "stirsap-ld", "stirsap-res", "pi-pulse"}
    params : GaussianPulseParams
        Reference Gaussian pulses (the pi pulse only uses ``params.t_f``).
    delta : float
        One-photon detuning in rad/s.
    variant : {"l6", "l1"}
        Gell-Mann rotation for ``stirsap-res``.
    delta_tilde : float, optional
        Detuning assumed when inverting the large-detuning map; defaults to
        ``delta``.
    t_f : float, optional
        Duration for the pi pulse when ``params`` is omitted.
    delta_s : float
        Two-photon detuning; only plain STIRAP accepts a nonzero value.
    """
    kind = normalize_kind(kind)
    if delta_s != 0 and kind != STIRAP:
        raise ValidationError(f"{kind} assumes two-photon resonance (delta_s = 0)")
    if kind == PI_PULSE:
        duration = t_f if t_f is not None else (params.t_f if params is not None else None)
        if duration is None or not duration > 0:
            raise ValidationError("pi-pulse needs a positive duration")
        if delta != 0:
            raise ValidationError("pi-pulse is defined on one-photon resonance (delta = 0)")
        omega = math.sqrt(2) * math.pi / duration
        pair = constant_pair(omega, omega, duration)
        ref = GaussianPulseParams(omega, duration, 0.0, duration) if params is None else params
        return ProtocolSpec(kind, ref, 0.0, pair, pair, n_steps=n_steps)
    if not isinstance(params, GaussianPulseParams):
        raise ValidationError(f"{kind} needs GaussianPulseParams")
    ref = make_gaussian_pair(params)
    if kind == STIRAP:
        return ProtocolSpec(kind, params, float(delta), ref, ref, n_steps=n_steps, delta_s=float(delta_s))
    if kind == STIRSAP_LD:
        if not delta > 0:
            raise ValidationError("stirsap-ld needs delta > 0")
        eff = effective_large_detuning(ThreeLevelSpec(ref, float(delta)))
        cd = cd_large_detuning(eff)
        synth = synthesize_large_detuning(transformed_effective(eff, cd), delta_tilde or float(delta))
        return ProtocolSpec(
            kind, params, float(delta), ref, synth.pair,
            delta_tilde=synth.delta_tilde, synthesized=synth, cd=cd, n_steps=n_steps,
        )
    if delta != 0:
        raise ValidationError("stirsap-res is defined on one-photon resonance (delta = 0)")
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    cd = cd_resonance(ref, variant)
    synth = synthesize_resonance(ref, cd, variant)
    return ProtocolSpec(kind, params, 0.0, ref, synth.pair, variant=variant, synthesized=synth, cd=cd, n_steps=n_steps)


# threshold search ------------------------------------------------------------


@dataclass
class ThresholdResult:
    t_f: float
    omega0: float
    fidelity: float
    fidelity_below: float
    threshold: float
    omega_max: float
    evaluations: int = 0


@dataclass
class _BudgetPoint:
    t_f: float
    omega0: float
    fidelity: float
    feasible: bool


def _budget_point(kind, t_f, omega_max, delta, tau_fraction, sigma_fraction, n_steps, variant):
    """Fidelity at ``t_f`` with the reference amplitude set by the peak budget."""

    def params(omega0):
        return GaussianPulseParams.from_fractions(omega0, t_f, tau_fraction, sigma_fraction)

    def protocol(omega0):
        return build_protocol(kind, params(omega0), delta, variant=variant, n_steps=n_steps)

    if kind == STIRAP:
        return _BudgetPoint(t_f, omega_max, protocol(omega_max).fidelity(), True)

    def excess(log_omega0):
        return math.log(protocol(math.exp(log_omega0)).peak() / omega_max)

    lo, hi = math.log(omega_max * 1e-4), math.log(omega_max)
    f_lo = excess(lo)
    if f_lo > 0:
        return _BudgetPoint(t_f, float("nan"), 0.0, False)
    if excess(hi) < 0:
        raise SearchError(f"synthesized peak stays below the budget at omega0 = omega_max (t_f = {t_f:.6g} s)")
    # peak within 0.1% of the budget: |log ratio| < 1e-3
    root = brentq(excess, lo, hi, xtol=2e-4)
    omega0 = math.exp(root)
    return _BudgetPoint(t_f, omega0, protocol(omega0).fidelity(), True)


def threshold_time(
    kind,
    omega_max,
    threshold=0.99,
    bounds=(50 * US, 1000 * US),
    resolution=0.5 * US,
    delta=LD_DELTA,
    tau_fraction=1 / 10,
    sigma_fraction=1 / 6,
    n_steps=4000,
    scan_points=40,
    variant=L6,
):
    """Shortest duration whose budget-limited protocol reaches ``threshold``.

    The reference amplitude is chosen so the delivered peak equals
    ``omega_max`` (directly for STIRAP, by root-finding on the synthesized
    peak for STIRSAP).  A coarse scan locates the first passing duration and a
    bisection on the ``resolution`` lattice refines it, so the returned ``t_f``
    passes while ``t_f - resolution`` fails.
    """
    kind = normalize_kind(kind)
    if kind not in (STIRAP, STIRSAP_LD, STIRSAP_RES):
        raise ValidationError(f"threshold search is not defined for {kind!r}")
    if not 0 < threshold < 1:
        raise ValidationError("threshold must lie in (0, 1)")
    t_lo, t_hi = bounds
    if not 0 < t_lo < t_hi:
        raise ValidationError("bounds must satisfy 0 < lower < upper")
    cache = {}

    def fid(k):
        if k not in cache:
            cache[k] = _budget_point(kind, k * resolution, omega_max, delta, tau_fraction, sigma_fraction, n_steps, variant)
        return cache[k].fidelity

    k_lo, k_hi = math.ceil(t_lo / resolution - 1e-9), math.floor(t_hi / resolution + 1e-9)
    scan = np.unique(np.round(np.linspace(k_lo, k_hi, scan_points)).astype(int))
    first = next((i for i, k in enumerate(scan) if fid(int(k)) >= threshold), None)
    if first is None or first == 0:
        ends = (fid(int(scan[0])), fid(int(scan[-1])))
        reason = "no duration in bounds reaches" if first is None else "lower bound already reaches"
        raise SearchError(f"{reason} threshold {threshold}; endpoint fidelities {ends}", endpoint_fidelities=ends)
    a, b = int(scan[first - 1]), int(scan[first])
    while b - a > 1:
        m = (a + b) // 2
        if fid(m) >= threshold:
            b = m
        else:
            a = m
    point = cache[b]
    return ThresholdResult(
        t_f=b * resolution,
        omega0=point.omega0,
        fidelity=point.fidelity,
        fidelity_below=fid(b - 1),
        threshold=threshold,
        omega_max=omega_max,
        evaluations=len(cache),
    )


# robustness sweeps -------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    minimum: float
    maximum: float
    count: int

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValidationError(f"unknown sweep parameter {self.parameter!r}; expected one of {SWEEP_PARAMETERS}")
        if self.count < 1 or int(self.count) != self.count:
            raise ValidationError("sweep count must be a positive integer")
        if self.count > 1 and not self.maximum > self.minimum:
            raise ValidationError("sweep grid must be strictly increasing")

    @property
    def grid(self):
        return np.linspace(self.minimum, self.maximum, int(self.count))


@dataclass
class SweepResult:
    parameter: str
    deltas: np.ndarray
    fidelity: np.ndarray
    phi_tf: np.ndarray = None
    metadata: dict = field(default_factory=dict)


def _sweep_point(protocol, parameter, d):
    if parameter == AMPLITUDE:
        return protocol.fidelity(amplitude=1.0 + d), None
    if parameter == DETUNING:
        if protocol.is_resonant:
            return protocol.fidelity(delta=d * protocol.omega_scale), None
        return protocol.fidelity(delta=(1.0 + d) * protocol.delta), None
    if protocol.kind == PI_PULSE:
        raise ValidationError("separation sweep is undefined for the pi pulse")
    params = protocol.params.replace(tau=(1.0 + d) * protocol.params.tau)
    rebuilt = build_protocol(
        protocol.kind, params, protocol.delta, variant=protocol.variant or L6,
        delta_tilde=protocol.delta_tilde, n_steps=protocol.n_steps, delta_s=protocol.delta_s,
    )
    return rebuilt.fidelity(), rebuilt.final_phase()


def robustness_sweep(protocol, sweep, workers=1):
    """Final transfer versus a relative error ``delta`` on one parameter.

    ``amplitude`` scales every delivered pulse by ``1 + delta``;
    ``separation`` rebuilds (and re-synthesizes) with ``(1 + delta) tau``;
    ``detuning`` uses ``(1 + delta) Delta`` off resonance and an added
    one-photon detuning ``delta * Omega0`` on resonance.  Points are
    independent and may run on ``workers`` threads; results keep grid order.
    """
    grid = sweep.grid

    def task(d):
        try:
            return _sweep_point(protocol, sweep.parameter, float(d))
        except StirsapError as exc:
            raise type(exc)(f"sweep point delta = {d:g} failed: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, grid))
    else:
        results = [task(d) for d in grid]
    fidelity = np.array([r[0] for r in results])
    phi = None
    if sweep.parameter == SEPARATION:
        phi = np.array([np.nan if r[1] is None else r[1] for r in results])
    meta = {"protocol": protocol.kind, "t_f": protocol.t_f}
    if sweep.parameter == DETUNING:
        meta["detuning_model"] = "additive delta*omega0" if protocol.is_resonant else "multiplicative (1+delta)*Delta"
    return SweepResult(sweep.parameter, grid, fidelity, phi, meta)
