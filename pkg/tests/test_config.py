import math

import pytest

from stirsap.config import ConfigError, parse_config

LARGE_DETUNING = """
# 400 us transfer at large detuning
[pulses]
omega0 = 5 MHz
t_f = 400 us
tau = tf/10
sigma = tf/6

[system]
delta = 2.5 GHz

[run]
protocol = STIRSAP-LD
"""


def test_large_detuning_config():
    cfg = parse_config(LARGE_DETUNING)
    assert cfg.omega0 == pytest.approx(2 * math.pi * 5e6)
    assert cfg.delta == pytest.approx(2 * math.pi * 2.5e9)
    assert cfg.t_f == pytest.approx(400e-6)
    p = cfg.pulse_params()
    assert p.tau == pytest.approx(40e-6)
    assert p.sigma == pytest.approx(400e-6 / 6)
    assert cfg.protocol == "stirsap-ld"
    assert cfg.threshold == 0.99


@pytest.mark.parametrize(
    "text, value",
    [("5 MHz", 2 * math.pi * 5e6), ("5MHz", 2 * math.pi * 5e6), ("500 kHz", 2 * math.pi * 5e5), ("1e3 Hz", 2 * math.pi * 1e3)],
)
def test_frequency_units(text, value):
    cfg = parse_config(LARGE_DETUNING.replace("omega0 = 5 MHz", f"omega0 = {text}"))
    assert cfg.omega0 == pytest.approx(value)


@pytest.mark.parametrize("text", ["0.4 ms", "400 μs", "400000 ns", "4e-4 s"])
def test_time_units(text):
    cfg = parse_config(LARGE_DETUNING.replace("t_f = 400 us", f"t_f = {text}"))
    assert cfg.t_f == pytest.approx(400e-6)


def test_absolute_and_fraction_forms():
    cfg = parse_config(LARGE_DETUNING.replace("tau = tf/10", "tau = 40 us"))
    assert cfg.pulse_params().tau == pytest.approx(40e-6)
    cfg = parse_config(LARGE_DETUNING.replace("tau = tf/10", "tau_fraction = 0.1"))
    assert cfg.pulse_params().tau == pytest.approx(40e-6)
    with pytest.raises(ConfigError, match="twice"):
        parse_config(LARGE_DETUNING.replace("tau = tf/10", "tau = tf/10\ntau_fraction = 0.1"))


def test_fraction_follows_tf_override():
    cfg = parse_config(LARGE_DETUNING).with_overrides(tf_us=100)
    assert cfg.pulse_params().tau == pytest.approx(10e-6)


def test_missing_tf_is_named():
    with pytest.raises(ConfigError, match="t_f"):
        parse_config(LARGE_DETUNING.replace("t_f = 400 us", ""))


@pytest.mark.parametrize(
    "old, new, line",
    [
        ("omega0 = 5 MHz", "omega0 = 5", 4),
        ("omega0 = 5 MHz", "omega0 = 5 furlongs", 4),
        ("delta = 2.5 GHz", "detuning = 2.5 GHz", 10),
        ("[system]", "[hardware]", 9),
        ("protocol = STIRSAP-LD", "protocol = rap", 13),
        ("tau = tf/10", "tau = tf/0", 6),
        ("sigma = tf/6", "sigma", 7),
    ],
)
def test_errors_carry_line_numbers(old, new, line):
    with pytest.raises(ConfigError) as info:
        parse_config(LARGE_DETUNING.replace(old, new))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_pi_pulse_needs_only_duration():
    cfg = parse_config("[pulses]\nt_f = 1 us\n[run]\nprotocol = pi-pulse\n")
    assert cfg.pulse_params() is None


def test_gaussian_protocol_needs_shape():
    with pytest.raises(ConfigError, match="sigma"):
        parse_config(LARGE_DETUNING.replace("sigma = tf/6", ""))


def test_sweep_block():
    cfg = parse_config(LARGE_DETUNING + "[sweep]\nparameter = amplitude\nmin = -0.1\nmax = 0.1\ncount = 21\nomega_max = 5, 10 MHz\n")
    assert cfg.sweep.parameter == "amplitude"
    assert cfg.sweep.count == 21
    assert cfg.sweep.omega_max == pytest.approx((2 * math.pi * 5e6, 2 * math.pi * 10e6))


def test_overrides():
    cfg = parse_config(LARGE_DETUNING).with_overrides(protocol="stirap", threshold=0.9999, variant="l1")
    assert (cfg.protocol, cfg.threshold, cfg.variant) == ("stirap", 0.9999, "l1")
    with pytest.raises(ConfigError):
        parse_config(LARGE_DETUNING).with_overrides(threshold=1.5)
