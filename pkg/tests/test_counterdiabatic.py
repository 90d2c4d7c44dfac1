import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

import oracles
from stirsap.counterdiabatic import (
    L1,
    L6,
    LAMBDA1,
    LAMBDA5,
    LAMBDA6,
    cd_large_detuning,
    cd_rabi_three_level,
    cd_rabi_two_level,
    cd_resonance,
    gellmann_hamiltonian,
    gellmann_rotate,
    synthesize_large_detuning,
    synthesize_resonance,
    transformed_effective,
)
from stirsap.errors import BranchAmbiguityError, SingularityError, ValidationError
from stirsap.reduction import ThreeLevelSpec, effective_large_detuning, effective_resonance
from stirsap.units import GHZ, MHZ, US
from stirsap.waveforms import GaussianPulseParams, PulsePair, Waveform, make_gaussian_pair, pulse_frame

LD = GaussianPulseParams.from_fractions(5 * MHZ, 400 * US, 0.1, 1 / 6)
RES = GaussianPulseParams.from_fractions(5 * MHZ, 1 * US, 1 / 8, 1 / 6)
DELTA = 2.5 * GHZ


def ld_chain(params=LD):
    eff = effective_large_detuning(ThreeLevelSpec(make_gaussian_pair(params), DELTA))
    cd = cd_large_detuning(eff)
    return eff, cd, synthesize_large_detuning(transformed_effective(eff, cd))


def rel_err(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_two_level_cd_matches_symbolic():
    eff, cd, _ = ld_chain()
    p, s = oracles.gaussians(LD.omega0, LD.t_f, LD.tau, LD.sigma)
    expr = oracles.two_level_cd(-p * s / (2 * DELTA), (p**2 - s**2) / (4 * DELTA))
    t = np.linspace(0, LD.t_f, 41)
    assert rel_err(cd.omega_a(t), oracles.numeric(expr)(t)) < 1e-10


def test_three_level_cd_is_twice_mixing_rate():
    pair = make_gaussian_pair(RES)
    t = np.linspace(0.05, 0.95, 19) * RES.t_f
    h = 1e-12
    theta_dot = (pulse_frame(pair, t + h).theta - pulse_frame(pair, t - h).theta) / (2 * h)
    np.testing.assert_allclose(cd_rabi_three_level(pair)(t), 2 * theta_dot, rtol=1e-5)
    # on resonance the two-level CD frequency is half the three-level one
    two = cd_rabi_two_level(effective_resonance(pair))
    np.testing.assert_allclose(2 * two(t), cd_rabi_three_level(pair)(t), rtol=1e-12)


def test_resonance_midpoint_values():
    # frozen from the sympy oracle; the two-level CD frequency at t_f/2 is 2 tau / sigma^2
    pair = make_gaussian_pair(RES)
    cd = cd_resonance(pair, L6)
    out = synthesize_resonance(pair, cd)
    mid = RES.t_f / 2
    assert cd.omega_a(mid) == pytest.approx(9.0e6, rel=1e-12)
    assert cd_rabi_three_level(pair)(mid) == pytest.approx(4 * RES.tau / RES.sigma**2, rel=1e-12)
    assert cd.phi(mid) == pytest.approx(np.arctan(2 * 9.0e6 / pair.pump(mid)), rel=1e-12)
    assert out.pump(mid) == pytest.approx(25385411.99323834, rel=1e-10)
    assert out.stokes(mid) == pytest.approx(26900116.414880276, rel=1e-10)


@pytest.mark.parametrize("variant", [L6, L1])
def test_resonance_pulses_match_symbolic(variant):
    pair = make_gaussian_pair(RES)
    out = synthesize_resonance(pair, cd_resonance(pair, variant))
    mp, ms, oa, phi = oracles.resonance_pulses(RES.omega0, RES.t_f, RES.tau, RES.sigma, variant)
    t = np.linspace(0, RES.t_f, 57)
    assert rel_err(out.pump(t), oracles.numeric(mp)(t)) < 1e-9
    assert rel_err(out.stokes(t), oracles.numeric(ms)(t)) < 1e-9
    assert rel_err(out.cd.phi(t), oracles.numeric(phi)(t)) < 1e-9


def test_large_detuning_pulses_match_symbolic():
    _, cd, out = ld_chain()
    mp, ms, _, phi = oracles.large_detuning_pulses(LD.omega0, LD.t_f, LD.tau, LD.sigma, DELTA)
    t = np.linspace(0.02, 0.98, 49) * LD.t_f
    assert rel_err(out.pump(t), oracles.numeric(mp)(t)) < 1e-8
    assert rel_err(out.stokes(t), oracles.numeric(ms)(t)) < 1e-8
    assert rel_err(cd.phi(t), oracles.numeric(phi)(t)) < 1e-9
    # frozen oracle value at t_f/2, where the two modified pulses cross
    assert out.pump(LD.t_f / 2) == pytest.approx(35053898.1502267, rel=1e-9)
    assert out.stokes(LD.t_f / 2) == pytest.approx(35053898.1502267, rel=1e-9)


def test_modified_pulses_exceed_reference_peak():
    _, _, out = ld_chain()
    peak = out.pair.peak()
    assert peak > LD.omega0
    assert peak / MHZ == pytest.approx(5.7255, abs=2e-3)


def test_large_detuning_gauge_phase_at_boundaries():
    # the ratio form keeps phi near +pi/2 at both ends for these pulses; the
    # rotation there is diagonal, so populations are untouched
    _, cd, _ = ld_chain()
    assert cd.phi(0.0) == pytest.approx(np.pi / 2, abs=1e-3)
    assert cd.phi(LD.t_f) == pytest.approx(np.pi / 2, abs=1e-3)


@pytest.mark.parametrize("regime", ["ld", "res"])
def test_proportional_pulses_pass_through(regime):
    params = (LD if regime == "ld" else RES).replace(tau=0.0)
    pair = make_gaussian_pair(params)
    t = np.linspace(0, params.t_f, 101)
    if regime == "ld":
        eff = effective_large_detuning(ThreeLevelSpec(pair, DELTA))
        cd = cd_large_detuning(eff)
        out = synthesize_large_detuning(transformed_effective(eff, cd))
    else:
        cd = cd_resonance(pair, L6)
        out = synthesize_resonance(pair, cd)
    assert np.all(cd.omega_a(t) == 0)
    assert np.all(cd.phi(t) == 0)
    np.testing.assert_allclose(out.pump(t), pair.pump(t), rtol=1e-12)
    np.testing.assert_allclose(out.stokes(t), pair.stokes(t), rtol=1e-12)


def _numeric_rotation(pair, omega_a, phi, generator, t):
    lam = LAMBDA6 if generator == L6 else LAMBDA1
    u = expm(1j * phi(t) * lam)
    u_dot = 1j * phi.d1(t) * lam @ u
    h = gellmann_hamiltonian(pair.pump(t), pair.stokes(t), omega_a(t))
    return u @ h @ u.conj().T + 1j * u_dot @ u.conj().T


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-2.0, 2.0), st.floats(0.1, 0.4), st.sampled_from([L6, L1]))
def test_gellmann_rotation_matches_matrix_conjugation(x, amp, width, generator):
    pair = make_gaussian_pair(GaussianPulseParams(3.0, 1.0, 0.1, 0.2))
    omega_a = Waveform.gaussian(1.3, 0.45, 0.3, 1.0)
    phi = Waveform.gaussian(amp, 0.5, width, 1.0)
    p, s, a = gellmann_rotate(pair, omega_a, phi, generator)
    want = _numeric_rotation(pair, omega_a, phi, generator, x)
    got = 0.5 * (p(x) * LAMBDA1 + s(x) * LAMBDA6 - a(x) * LAMBDA5)
    np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("variant", [L6, L1])
def test_chosen_phase_cancels_auxiliary_coupling(variant):
    pair = make_gaussian_pair(RES)
    cd = cd_resonance(pair, variant)
    p, s, a = gellmann_rotate(pair, cd.omega_a, cd.phi, variant)
    out = synthesize_resonance(pair, cd)
    t = np.linspace(0, RES.t_f, 201)
    assert np.max(np.abs(a(t))) < 1e-6 * RES.omega0
    np.testing.assert_allclose(p(t), out.pump(t), rtol=1e-9, atol=1e-6 * RES.omega0)
    np.testing.assert_allclose(s(t), out.stokes(t), rtol=1e-9, atol=1e-6 * RES.omega0)


def test_constant_rotation_angle_is_accepted():
    pair = make_gaussian_pair(RES)
    zero = Waveform.constant(0.0, RES.t_f)
    p, s, a = gellmann_rotate(pair, zero, 0.0)
    t = np.linspace(0, RES.t_f, 5)
    np.testing.assert_allclose(p(t), pair.pump(t))
    np.testing.assert_allclose(a(t), 0.0)
    with pytest.raises(ValidationError):
        gellmann_rotate(pair, zero, 0.0, "l7")


def _fd_check(w, t, h):
    d1 = (w(t + h) - w(t - h)) / (2 * h)
    d2 = (w(t + h) - 2 * w(t) + w(t - h)) / h**2
    scale1 = np.max(np.abs(w.d1(t)))
    scale2 = np.max(np.abs(w.d2(t)))
    return np.max(np.abs(w.d1(t) - d1)) / scale1, np.max(np.abs(w.d2(t) - d2)) / scale2


@pytest.mark.parametrize("which", ["ld", "l6", "l1"])
def test_synthesized_derivatives_against_finite_differences(which):
    if which == "ld":
        _, _, out = ld_chain()
        t_f = LD.t_f
    else:
        pair = make_gaussian_pair(RES)
        out = synthesize_resonance(pair, cd_resonance(pair, which))
        t_f = RES.t_f
    t = np.linspace(0.01, 0.99, 99) * t_f
    for w in (out.pump, out.stokes):
        e1, e2 = _fd_check(w, t, t_f * 1e-4)
        assert e1 < 1e-5 and e2 < 1e-5


def test_vanishing_fields_raise_singularity():
    zero = PulsePair(Waveform.constant(0.0, 1.0), Waveform.constant(0.0, 1.0))
    eff = effective_large_detuning(ThreeLevelSpec(zero, 10.0))
    with pytest.raises(SingularityError) as info:
        cd_large_detuning(eff)
    assert info.value.time == 0.0


def test_reference_zero_crossing_is_branch_ambiguous():
    pump = Waveform.from_function(lambda t: np.sin(2 * np.pi * (t + 0.1)), 1.0)
    stokes = Waveform.gaussian(1.0, 0.3, 0.3, 1.0)
    with pytest.raises(BranchAmbiguityError) as info:
        cd_resonance(PulsePair(pump, stokes), L6)
    assert info.value.time == pytest.approx(0.4)


def test_synthesis_input_validation():
    eff, cd, _ = ld_chain()
    with pytest.raises(ValidationError):
        synthesize_large_detuning(transformed_effective(eff, cd), delta_tilde=-1.0)
    pair = make_gaussian_pair(RES)
    with pytest.raises(ValidationError):
        synthesize_resonance(pair, cd_resonance(pair, L6), L1)
    with pytest.raises(ValidationError):
        cd_resonance(pair, "l2")
    with pytest.raises(ValidationError):
        synthesize_large_detuning(effective_resonance(pair))
