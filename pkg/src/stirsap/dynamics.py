"""Time-dependent Schroedinger propagation for two- and three-level systems.

All Hamiltonians are in angular-frequency units with hbar = 1.  The default
integrator is an exponential midpoint rule with a first-order correction in
the interaction frame of the midpoint Hamiltonian: every step is exactly
unitary, and the correction stays accurate when a large detuning makes
``|H| dt`` much larger than one, which is where the plain midpoint rule
aliases.  A fourth-order Runge-Kutta propagator is kept as an independent
cross-check.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalAccuracyError, ValidationError
from .reduction import map_two_to_three
from .waveforms import pulse_frame

DEFAULT_STEPS = 16000
MIN_STEPS = 100
NORM_WARN = 1e-6
HERMITIAN_TOL = 1e-12

FULL_THREE_LEVEL = "full-three-level"
RESONANT_THREE_LEVEL = "resonant-three-level"
THREE_LEVEL_CD = "three-level-with-cd"
EFFECTIVE_TWO_LEVEL = "effective-two-level"


@dataclass(frozen=True)
class HamiltonianSpec:
    """Vectorized Hamiltonian builder ``H(t) -> (len(t), d, d)``."""

    dimension: int
    builder: object
    form: str
    t_f: float

    def __call__(self, t):
        return self.builder(np.atleast_1d(np.asarray(t, dtype=float)))


def three_level_hamiltonian(pulses, delta=0.0, delta_s=0.0, cd_coupling=None):
    """``1/2 [[0, Op, i Oa], [Op, 2 Delta, Os], [-i Oa, Os, 2 delta_s]]``.

    ``cd_coupling`` is the direct |1>-|3> counter-diabatic waveform (the
    three-level form, twice the mixing-angle rate).
    """
    pump, stokes = pulses.pump, pulses.stokes

    def build(t):
        h = np.zeros(t.shape + (3, 3), dtype=complex)
        p = pump(t) / 2
        s = stokes(t) / 2
        h[..., 0, 1] = h[..., 1, 0] = p
        h[..., 1, 2] = h[..., 2, 1] = s
        h[..., 1, 1] = delta
        h[..., 2, 2] = delta_s
        if cd_coupling is not None:
            a = cd_coupling(t) / 2
            h[..., 0, 2] = 1j * a
            h[..., 2, 0] = -1j * a
        return h

    if cd_coupling is not None:
        form = THREE_LEVEL_CD
    elif delta_s != 0:
        form = FULL_THREE_LEVEL
    else:
        form = RESONANT_THREE_LEVEL
    return HamiltonianSpec(3, build, form, pulses.t_f)


def two_level_hamiltonian(eff, cd_rabi=None):
    """``1/2 [[-D, O - i Oa], [O + i Oa, D]]`` from effective fields plus optional CD term."""
    rabi, detuning = eff.rabi, eff.detuning

    def build(t):
        h = np.zeros(t.shape + (2, 2), dtype=complex)
        o = rabi(t) / 2
        d = detuning(t) / 2
        a = cd_rabi(t) / 2 if cd_rabi is not None else 0.0
        h[..., 0, 0] = -d
        h[..., 1, 1] = d
        h[..., 0, 1] = o - 1j * a
        h[..., 1, 0] = o + 1j * a
        return h

    return HamiltonianSpec(2, build, EFFECTIVE_TWO_LEVEL, eff.t_f)


@dataclass
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    norm_drift: np.ndarray

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    @property
    def final(self):
        return self.amplitudes[-1]

    @property
    def dimension(self):
        return self.amplitudes.shape[1]

    def mapped_to_three(self, phi=0.0):
        """Resonance SU(2) image of a two-level trajectory."""
        if self.dimension != 2:
            raise ValidationError("only two-level trajectories can be mapped")
        c = map_two_to_three(self.amplitudes, phi)
        return Trajectory(self.times, c, np.abs(np.linalg.norm(c, axis=1) - 1))

    def embedded_large_detuning(self):
        """Place ``(b1, b2)`` on levels |1> and |3> (adiabatic elimination picture)."""
        if self.dimension != 2:
            raise ValidationError("only two-level trajectories can be embedded")
        c = np.zeros((len(self.times), 3), dtype=complex)
        c[:, 0] = self.amplitudes[:, 0]
        c[:, 2] = self.amplitudes[:, 1]
        return Trajectory(self.times, c, self.norm_drift)


def _check_initial(initial, dim):
    psi = np.asarray(initial, dtype=complex)
    if psi.shape != (dim,):
        raise ValidationError(f"initial state must have {dim} amplitudes, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-9:
        raise ValidationError(f"initial state is not normalized (|psi| = {norm:.12g})")
    return psi


def _check_hermitian(h):
    scale = max(float(np.max(np.abs(h))), 1e-300)
    err = float(np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))))
    if err > HERMITIAN_TOL * scale:
        raise NumericalAccuracyError(f"Hamiltonian builder is not Hermitian (max |H - H^dag| = {err:.3g})")


def _dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def _expi(h, dt):
    """``exp(-i h dt)`` for a stack of Hermitian matrices."""
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * dt)[..., None, :]) @ _dagger(v)


def _moment1(w, h):
    """``int_{-h/2}^{h/2} s exp(i w s) ds``."""
    x = w * h / 2
    small = np.abs(x) < 1e-3
    ws = np.where(small, 1.0, w)
    exact = 2j * (np.sin(x) / ws**2 - (h / 2) * np.cos(x) / ws)
    series = 2j * w * (h / 2) ** 3 * (1 / 3 - x**2 / 30)
    return np.where(small, series, exact)


def _moment2(w, h):
    """``int_{-h/2}^{h/2} (s^2 / 2) exp(i w s) ds``."""
    a = h / 2
    x = w * a
    small = np.abs(x) < 1e-3
    ws = np.where(small, 1.0, w)
    exact = a**2 * np.sin(x) / ws + 2 * a * np.cos(x) / ws**2 - 2 * np.sin(x) / ws**3
    series = a**3 / 3 - w**2 * a**5 / 10
    return np.where(small, series, exact)


def step_propagators(h, t_f, n_steps, method="corrected"):
    """One-step propagators ``U_k`` mapping ``psi(t_k)`` to ``psi(t_{k+1})``."""
    dt = t_f / n_steps
    if method == "midpoint":
        hm = h((np.arange(n_steps) + 0.5) * dt)
        _check_hermitian(hm)
        return _expi(hm, dt)
    if method != "corrected":
        raise ValidationError(f"unknown propagation method {method!r}")
    hs = h(np.arange(2 * n_steps + 1) * (dt / 2))
    _check_hermitian(hs)
    hl, hm, hr = hs[0:-1:2], hs[1::2], hs[2::2]
    slope = (hr - hl) / dt
    curv = 4 * (hr - 2 * hm + hl) / dt**2
    e, v = np.linalg.eigh(hm)
    vh = _dagger(v)
    w = e[:, :, None] - e[:, None, :]
    gen = (vh @ slope @ v) * _moment1(w, dt) + (vh @ curv @ v) * _moment2(w, dt)
    gen = 0.5 * (gen + _dagger(gen))
    half = np.exp(-1j * e * dt / 2)
    core = _expi(gen, 1.0)
    return v @ (half[:, :, None] * core * half[:, None, :]) @ vh


def propagate(h, initial=None, t_f=None, n_steps=DEFAULT_STEPS, method="corrected"):
    """Integrate ``i d psi/dt = H(t) psi`` on a uniform grid of ``n_steps + 1`` points.

    Parameters
    ----------
    h : HamiltonianSpec
    initial : array_like, optional
        Normalized initial state; defaults to level |1>.
    t_f : float, optional
        Final time; defaults to ``h.t_f``.
    n_steps : int
    method : {"corrected", "midpoint"}
        ``"midpoint"`` is the plain exponential midpoint rule.

    Raises
    ------
    NumericalAccuracyError
        Non-Hermitian builder output, or norm drift above 1e-6.
    """
    t_f = h.t_f if t_f is None else float(t_f)
    if int(n_steps) != n_steps or n_steps < MIN_STEPS:
        raise ValidationError(f"n_steps must be an integer >= {MIN_STEPS}, got {n_steps!r}")
    n_steps = int(n_steps)
    if initial is None:
        initial = np.eye(h.dimension)[0]
    psi = _check_initial(initial, h.dimension)
    steps = step_propagators(h, t_f, n_steps, method)
    out = np.empty((n_steps + 1, h.dimension), dtype=complex)
    out[0] = psi
    for k in range(n_steps):
        psi = steps[k] @ psi
        out[k + 1] = psi
    return _finish(np.linspace(0.0, t_f, n_steps + 1), out)


def _finish(times, amps):
    drift = np.abs(np.linalg.norm(amps, axis=1) - 1.0)
    if drift.max() > NORM_WARN:
        raise NumericalAccuracyError(
            f"norm drift {drift.max():.3g} exceeds {NORM_WARN}; increase n_steps"
        )
    return Trajectory(times, amps, drift)


def propagate_rk4(h, initial=None, t_f=None, n_steps=4000, max_phase_step=1.5, chunk=200_000):
    """Classical fourth-order Runge-Kutta cross-check.

    Each output interval is split into enough substeps that
    ``substep * ||H||`` stays below ``max_phase_step`` (inside the RK4
    stability region).  Per-interval step matrices are multiplied with a
    pairwise tree product so large-detuning runs stay vectorized.
    """
    t_f = h.t_f if t_f is None else float(t_f)
    if initial is None:
        initial = np.eye(h.dimension)[0]
    psi = _check_initial(initial, h.dimension)
    dt = t_f / n_steps
    probe = h(np.linspace(0.0, t_f, n_steps + 1))
    norm = float(np.max(np.linalg.norm(probe, axis=(1, 2))))
    sub = max(1, int(np.ceil(dt * norm / max_phase_step)))
    hsub = dt / sub
    d = h.dimension
    eye = np.eye(d)
    per_chunk = max(1, chunk // sub)
    out = np.empty((n_steps + 1, d), dtype=complex)
    out[0] = psi
    k = 0
    while k < n_steps:
        m = min(per_chunk, n_steps - k)
        t0 = k * dt
        tt = t0 + np.arange(2 * m * sub + 1) * (hsub / 2)
        a = -1j * h(tt)
        a1, a2, a3 = a[0:-1:2], a[1::2], a[2::2]
        k1 = a1
        k2 = a2 @ (eye + hsub / 2 * k1)
        k3 = a2 @ (eye + hsub / 2 * k2)
        k4 = a3 @ (eye + hsub * k3)
        mats = (eye + hsub / 6 * (k1 + 2 * k2 + 2 * k3 + k4)).reshape(m, sub, d, d)
        while mats.shape[1] > 1:
            if mats.shape[1] % 2:
                pad = np.broadcast_to(eye, (m, 1, d, d))
                mats = np.concatenate([mats, pad], axis=1)
            mats = mats[:, 1::2] @ mats[:, 0::2]
        for j in range(m):
            psi = mats[j, 0] @ psi
            out[k + j + 1] = psi
        k += m
    drift = np.abs(np.linalg.norm(out, axis=1) - 1.0)
    return Trajectory(np.linspace(0.0, t_f, n_steps + 1), out, drift)


@dataclass
class Eigensystem3:
    """Instantaneous eigensystem of the two-photon-resonant Hamiltonian.

    ``energies`` are ``(E-, E0, E+)``; ``vectors[:, j]`` is the matching
    eigenvector and ``vectors[:, 1]`` is the dark state.  ``literal_energies``
    holds the often-quoted forms ``E+ = Omega cot(phi/2)``,
    ``E- = -Omega tan(phi/2)`` with ``tan(2 phi) = Omega / Delta``; they do not
    diagonalize H and are kept only for comparison.  ``closed_form_energies``
    uses ``tan(phi) = Omega / Delta`` and a factor 1/2, which does.
    """

    energies: np.ndarray
    vectors: np.ndarray
    degenerate: bool
    literal_energies: np.ndarray
    closed_form_energies: np.ndarray

    @property
    def dark_state(self):
        return self.vectors[:, 1]

    @property
    def literal_discrepancy(self):
        return float(np.max(np.abs(self.literal_energies - self.energies)))

    @property
    def closed_form_discrepancy(self):
        return float(np.max(np.abs(self.closed_form_energies - self.energies)))


def _fix_sign(v):
    ref = v[0] if abs(v[0]) > 1e-12 else -v[2] if abs(v[2]) > 1e-12 else v[1]
    return v * (abs(ref) / ref)


def instantaneous_eigensystem(h, t, degeneracy_tol=1e-9):
    """Numerically diagonalize a two-photon-resonant three-level Hamiltonian at ``t``."""
    if h.dimension != 3 or h.form != RESONANT_THREE_LEVEL:
        raise ValidationError("instantaneous_eigensystem needs a two-photon-resonant three-level Hamiltonian")
    m = h(t)[0]
    e, v = np.linalg.eigh(m)
    scale = max(float(np.max(np.abs(e))), 1e-300)
    dark = int(np.argmin(np.abs(e) + np.abs(v[1]) * scale))
    others = [j for j in range(3) if j != dark]
    order = [others[0], dark, others[1]]
    energies = e[order]
    vectors = np.column_stack([_fix_sign(v[:, j]) for j in order])
    degenerate = bool(np.min(np.diff(np.sort(e))) < degeneracy_tol * scale)

    p, s, delta = 2 * m[0, 1].real, 2 * m[1, 2].real, m[1, 1].real
    omega = np.hypot(p, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        half = 0.5 * np.arctan2(omega, delta)
        literal = np.array([-omega * np.tan(half / 2), 0.0, omega / np.tan(half / 2)])
        full = np.arctan2(omega, delta)
        closed = np.array([-0.5 * omega * np.tan(full / 2), 0.0, 0.5 * omega / np.tan(full / 2)])
    return Eigensystem3(energies, vectors, degenerate, literal, closed)


def transfer_fidelity(traj):
    """Final population of level |3>."""
    if traj.dimension != 3:
        raise ValidationError("transfer_fidelity needs a three-level trajectory; map two-level runs first")
    return float(np.clip(abs(traj.final[2]) ** 2, 0.0, 1.0))


def dark_state_overlap(traj, pair):
    """``|<n0(t)|psi(t)>|^2`` with ``n0 = cos(theta)|1> - sin(theta)|3>``."""
    theta = pulse_frame(pair, traj.times).theta
    c = traj.amplitudes
    amp = np.cos(theta) * c[:, 0] - np.sin(theta) * c[:, 2]
    return np.abs(amp) ** 2


def adiabatic_states(eff, t):
    """Instantaneous eigenvectors of the bare effective Hamiltonian, ascending energy."""
    rabi, det = eff.rabi(t), eff.detuning(t)
    h = np.zeros(np.shape(t) + (2, 2))
    h[..., 0, 0] = -det / 2
    h[..., 1, 1] = det / 2
    h[..., 0, 1] = h[..., 1, 0] = rabi / 2
    return np.linalg.eigh(h)


def adiabatic_overlap(traj, eff):
    """Overlap of a two-level trajectory with the adiabatic state it starts in.

    The branch is picked by energy order at ``t = 0``; the effective gap
    never closes for Gaussian references, so the order is preserved.
    """
    _, vecs = adiabatic_states(eff, traj.times)
    start = np.abs(np.conj(vecs[0]).T @ traj.amplitudes[0]) ** 2
    branch = int(np.argmax(start))
    chi = vecs[:, :, branch]
    return np.abs(np.sum(np.conj(chi) * traj.amplitudes, axis=1)) ** 2


def adiabatic_start(eff, initial=(1.0, 0.0)):
    """Eigenvector at ``t = 0`` with the largest overlap with ``initial``."""
    _, vecs = adiabatic_states(eff, np.array([0.0]))
    v = vecs[0]
    branch = int(np.argmax(np.abs(np.conj(v).T @ np.asarray(initial, dtype=complex))))
    return v[:, branch].astype(complex)


def p3_from_phase(phi_tf):
    """Resonance-regime final population of |3>: ``cos^2(phi(t_f))``."""
    return float(np.cos(phi_tf) ** 2)


def adiabaticity_report(pair, n=4001):
    """Raw local and global adiabaticity ratios (no pass/fail verdict).

    ``local_max`` is ``max |theta'| / Omega``; ``global`` is ``max(Omega) * t_f``.
    """
    t = np.linspace(0.0, pair.t_f, n)
    p, s = pair.pump(t), pair.stokes(t)
    dp, ds = pair.pump.d1(t), pair.stokes.d1(t)
    omega2 = p**2 + s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        theta_dot = (dp * s - ds * p) / omega2
        local = np.abs(theta_dot) / np.sqrt(omega2)
    return {
        "local_max": float(np.nanmax(local)),
        "global": float(np.sqrt(omega2).max() * pair.t_f),
    }
