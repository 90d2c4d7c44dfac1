"""Run configuration files.

A config is a flat sectioned ``key = value`` document::

    [pulses]
    omega0 = 5 MHz
    t_f = 400 us
    tau = tf/10
    sigma = tf/6

    [system]
    delta = 2.5 GHz

    [run]
    protocol = stirsap-ld

Frequencies are linear (Hz, kHz, MHz, GHz) and multiplied by 2*pi; times take
s, ms, us (or μs) and ns.  ``tau`` and ``sigma`` also accept ``tf/N``.  The
parser is hand-written rather than built on :mod:`configparser` so every
error can point at its line.
"""

import re
from dataclasses import dataclass, field, replace

from .errors import ValidationError
from .experiments import KINDS, PI_PULSE, SWEEP_PARAMETERS, normalize_kind
from .units import TWO_PI
from .waveforms import GaussianPulseParams

FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "μs": 1e-6, "µs": 1e-6, "ns": 1e-9}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^({_NUMBER})\s*([^\s\d].*)?$")
_FRACTION = re.compile(rf"^t_?f\s*/\s*({_NUMBER})$", re.IGNORECASE)


class ConfigError(ValidationError):
    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class TimeSpec:
    """Either an absolute time or a fraction of ``t_f``."""

    seconds: float = None
    fraction: float = None

    def resolve(self, t_f):
        return self.fraction * t_f if self.fraction is not None else self.seconds


@dataclass(frozen=True)
class SweepConfig:
    parameter: str = None
    minimum: float = None
    maximum: float = None
    count: int = None
    omega_max: tuple = ()
    tf_min: float = None
    tf_max: float = None
    resolution: float = 0.5e-6


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration in rad/s and seconds."""

    protocol: str
    t_f: float
    omega0: float = None
    tau: TimeSpec = None
    sigma: TimeSpec = None
    delta: float = 0.0
    delta_s: float = 0.0
    variant: str = "l6"
    n_steps: int = None
    threshold: float = 0.99
    delta_tilde: float = None
    output: str = None
    workers: int = 1
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def pulse_params(self):
        if self.protocol == PI_PULSE:
            return None
        return GaussianPulseParams(self.omega0, self.t_f, self.tau.resolve(self.t_f), self.sigma.resolve(self.t_f))

    def with_overrides(self, protocol=None, tf_us=None, threshold=None, variant=None):
        changes = {}
        if protocol is not None:
            changes["protocol"] = normalize_kind(protocol)
        if tf_us is not None:
            if not tf_us > 0:
                raise ValidationError("--tf-us must be positive")
            changes["t_f"] = tf_us * 1e-6
        if threshold is not None:
            changes["threshold"] = _probability(threshold, None)
        if variant is not None:
            changes["variant"] = _variant(variant, None)
        out = replace(self, **changes)
        _check_complete(out)
        return out


# value parsers -------------------------------------------------------------------


def _quantity(text, units, line, what):
    m = _QUANTITY.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse {what} {text!r}", line)
    value, unit = float(m.group(1)), (m.group(2) or "").strip()
    if not unit:
        raise ConfigError(f"{what} {text!r} needs a unit suffix ({', '.join(units)})", line)
    scale = units.get(unit.lower())
    if scale is None:
        raise ConfigError(f"unknown unit {unit!r} in {what} {text!r}; expected one of {', '.join(units)}", line)
    return value * scale


def _frequency(text, line):
    return TWO_PI * _quantity(text, FREQ_UNITS, line, "frequency")


def _time(text, line):
    return _quantity(text, TIME_UNITS, line, "time")


def _time_spec(text, line):
    m = _FRACTION.match(text.strip())
    if m:
        n = float(m.group(1))
        if n == 0:
            raise ConfigError("division by zero in t_f fraction", line)
        return TimeSpec(fraction=1.0 / n)
    return TimeSpec(seconds=_time(text, line))


def _float(text, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", line) from None


def _int(text, line):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", line) from None


def _probability(value, line):
    value = _float(value, line) if isinstance(value, str) else float(value)
    if not 0 < value < 1:
        raise ConfigError(f"threshold must lie in (0, 1), got {value}", line)
    return value


def _variant(text, line):
    v = text.strip().lower().replace("λ", "l").replace("lambda", "l")
    if v not in ("l6", "l1"):
        raise ConfigError(f"variant must be l6 or l1, got {text!r}", line)
    return v


def _frequency_list(text, line):
    parts = [p.strip() for p in text.split(",")]
    unit = _QUANTITY.match(parts[-1])
    suffix = unit.group(2) if unit and unit.group(2) else ""
    out = []
    for p in parts:
        if _QUANTITY.match(p) and not _QUANTITY.match(p).group(2):
            p = f"{p} {suffix}"
        out.append(_frequency(p, line))
    return tuple(out)


# (section, key) -> (field name, parser)
_SCHEMA = {
    ("pulses", "omega0"): ("omega0", _frequency),
    ("pulses", "t_f"): ("t_f", _time),
    ("pulses", "tau"): ("tau", _time_spec),
    ("pulses", "sigma"): ("sigma", _time_spec),
    ("pulses", "tau_fraction"): ("tau", lambda v, n: TimeSpec(fraction=_float(v, n))),
    ("pulses", "sigma_fraction"): ("sigma", lambda v, n: TimeSpec(fraction=_float(v, n))),
    ("system", "delta"): ("delta", _frequency),
    ("system", "delta_s"): ("delta_s", _frequency),
    ("run", "protocol"): ("protocol", lambda v, n: _kind(v, n)),
    ("run", "variant"): ("variant", _variant),
    ("run", "n_steps"): ("n_steps", _int),
    ("run", "threshold"): ("threshold", _probability),
    ("run", "delta_tilde"): ("delta_tilde", _frequency),
    ("run", "output"): ("output", lambda v, n: v),
    ("run", "workers"): ("workers", _int),
    ("sweep", "parameter"): ("sweep.parameter", lambda v, n: _sweep_parameter(v, n)),
    ("sweep", "min"): ("sweep.minimum", _float),
    ("sweep", "max"): ("sweep.maximum", _float),
    ("sweep", "count"): ("sweep.count", _int),
    ("sweep", "omega_max"): ("sweep.omega_max", _frequency_list),
    ("sweep", "tf_min"): ("sweep.tf_min", _time),
    ("sweep", "tf_max"): ("sweep.tf_max", _time),
    ("sweep", "resolution"): ("sweep.resolution", _time),
}
_ALIASES = {"tf": "t_f", "omega_0": "omega0", "deltas": "delta_s"}


def _kind(text, line):
    try:
        return normalize_kind(text)
    except ValidationError:
        raise ConfigError(f"unknown protocol {text!r}; expected one of {', '.join(KINDS)}", line) from None


def _sweep_parameter(text, line):
    v = text.strip().lower()
    if v not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}, got {text!r}", line)
    return v


def parse_config(text):
    """Parse and validate a run configuration.

    Raises
    ------
    ConfigError
        Unknown section or key, duplicate key, malformed value or unit
        (with its line number), or a missing required key (named).
    """
    section = None
    values, lines = {}, {}
    for n, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"malformed section header {stripped!r}", n)
            section = stripped[1:-1].strip().lower()
            if section not in {s for s, _ in _SCHEMA}:
                raise ConfigError(f"unknown section [{section}]", n)
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", n)
        if section is None:
            raise ConfigError("key outside of any section", n)
        key, value = (p.strip() for p in stripped.split("=", 1))
        key = _ALIASES.get(key.lower(), key.lower())
        if (section, key) not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r} in [{section}]", n)
        if not value:
            raise ConfigError(f"empty value for {key!r}", n)
        name, parser = _SCHEMA[(section, key)]
        if name in values:
            raise ConfigError(f"{key!r} given twice (first on line {lines[name]})", n)
        values[name] = parser(value, n)
        lines[name] = n

    sweep = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("sweep.")}
    top = {k: v for k, v in values.items() if not k.startswith("sweep.")}
    for key in ("protocol", "t_f"):
        if key not in top:
            raise ConfigError(f"missing required key {key!r}")
    cfg = RunConfig(sweep=SweepConfig(**sweep), **top)
    _check_complete(cfg, lines)
    return cfg


def _check_complete(cfg, lines=None):
    lines = lines or {}

    def fail(msg, name=None):
        raise ConfigError(msg, lines.get(name))

    if not cfg.t_f > 0:
        fail("t_f must be positive", "t_f")
    if cfg.protocol != PI_PULSE:
        for key in ("omega0", "tau", "sigma"):
            if getattr(cfg, key) is None:
                fail(f"missing required key {key!r} for protocol {cfg.protocol}")
        if not cfg.omega0 > 0:
            fail("omega0 must be positive", "omega0")
        if not cfg.sigma.resolve(cfg.t_f) > 0:
            fail("sigma must be positive", "sigma")
    if cfg.delta < 0:
        fail("delta must be non-negative", "delta")
    if cfg.n_steps is not None and cfg.n_steps < 100:
        fail("n_steps must be at least 100", "n_steps")
    if cfg.workers < 1:
        fail("workers must be at least 1", "workers")
    if cfg.delta_tilde is not None and not cfg.delta_tilde > 0:
        fail("delta_tilde must be positive", "delta_tilde")
