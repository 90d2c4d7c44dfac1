"""``stirsap`` command-line front end.

    stirsap simulate   --config run.cfg --out traj.csv
    stirsap synthesize --config run.cfg --out pulses.csv
    stirsap sweep      --config run.cfg --out sweep.csv
    stirsap threshold  --config run.cfg --out threshold.csv

Exit status is 0 on success, 2 for invalid input, 3 when a numerical accuracy
guard trips and 1 for other failures (singular formulas, failed searches).
"""

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import parse_config
from .dynamics import DEFAULT_STEPS
from .errors import NumericalAccuracyError, StirsapError, ValidationError
from .experiments import (
    PI_PULSE,
    STIRSAP_LD,
    STIRSAP_RES,
    SweepSpec,
    build_protocol,
    robustness_sweep,
    threshold_time,
)
from .units import MHZ, US

COMMANDS = ("simulate", "synthesize", "sweep", "threshold")
FLOAT_FORMAT = ".12g"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(x):
    return format(float(x), FLOAT_FORMAT)


def _table(header, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _protocol(cfg):
    return build_protocol(
        cfg.protocol,
        cfg.pulse_params(),
        cfg.delta,
        variant=cfg.variant,
        delta_tilde=cfg.delta_tilde,
        t_f=cfg.t_f,
        n_steps=cfg.n_steps or DEFAULT_STEPS,
        delta_s=cfg.delta_s,
    )


def simulate(cfg):
    proto = _protocol(cfg)
    traj = proto.run()
    c = traj.amplitudes
    pops = traj.populations
    header = ["t_us", "P1", "P2", "P3"]
    cols = [traj.times / US, pops[:, 0], pops[:, 1], pops[:, 2]]
    for j in range(3):
        header += [f"Re_c{j + 1}", f"Im_c{j + 1}"]
        cols += [c[:, j].real, c[:, j].imag]
    return _table(header, cols), None


def synthesize(cfg):
    proto = _protocol(cfg)
    if proto.kind not in (STIRSAP_LD, STIRSAP_RES):
        raise ValidationError(f"synthesize needs a stirsap protocol, got {proto.kind}")
    t = np.linspace(0.0, proto.t_f, (cfg.n_steps or DEFAULT_STEPS) + 1)
    p = proto.delivered
    cols = [t / US, p.pump(t) / MHZ, p.stokes(t) / MHZ, proto.cd.omega_a(t) / MHZ, proto.cd.phi(t)]
    return _table(["t_us", "omega_p_MHz", "omega_s_MHz", "omega_a_MHz", "phi_rad"], cols), None


def sweep(cfg):
    s = cfg.sweep
    missing = [k for k in ("parameter", "minimum", "maximum", "count") if getattr(s, k) is None]
    if missing:
        raise ValidationError("sweep needs [sweep] keys: " + ", ".join(m.replace("imum", "") for m in missing))
    proto = _protocol(cfg)
    result = robustness_sweep(proto, SweepSpec(s.parameter, s.minimum, s.maximum, s.count), workers=cfg.workers)
    header, cols = ["delta", "fidelity"], [result.deltas, result.fidelity]
    if result.phi_tf is not None:
        header.append("phi_tf_rad")
        cols.append(result.phi_tf)
    meta = dict(result.metadata, parameter=result.parameter)
    return _table(header, cols), meta


def threshold(cfg):
    s = cfg.sweep
    if not s.omega_max:
        raise ValidationError("threshold needs [sweep] omega_max")
    if cfg.protocol == PI_PULSE:
        raise ValidationError("threshold search is not defined for the pi pulse")
    tau = cfg.tau.resolve(cfg.t_f) / cfg.t_f
    sigma = cfg.sigma.resolve(cfg.t_f) / cfg.t_f
    bounds = (s.tf_min or 10 * US, s.tf_max or 1000 * US)
    times = []
    for omega_max in s.omega_max:
        r = threshold_time(
            cfg.protocol,
            omega_max,
            cfg.threshold,
            bounds=bounds,
            resolution=s.resolution,
            delta=cfg.delta,
            tau_fraction=tau,
            sigma_fraction=sigma,
            n_steps=cfg.n_steps or 4000,
            variant=cfg.variant,
        )
        times.append(r.t_f)
    meta = {"threshold": cfg.threshold, "resolution_us": s.resolution / US}
    return _table(["omega_max_MHz", "tf_us"], [np.array(s.omega_max) / MHZ, np.array(times) / US]), meta


HANDLERS = {"simulate": simulate, "synthesize": synthesize, "sweep": sweep, "threshold": threshold}


def run(command, cfg, out=None):
    """Execute ``command`` for a parsed config; returns the CSV text.

    When ``out`` (or ``cfg.output``) names a file the CSV is written there
    and any run metadata goes to a ``.meta.json`` file beside it.
    """
    if command not in HANDLERS:
        raise ValidationError(f"unknown command {command!r}; expected one of {COMMANDS}")
    text, meta = HANDLERS[command](cfg)
    target = out or cfg.output
    if target:
        path = Path(target)
        path.write_text(text, encoding="utf-8", newline="\n")
        if meta:
            path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return text


def build_parser():
    parser = argparse.ArgumentParser(prog="stirsap", description="Simulate and design STIRAP/STIRSAP pulses.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--protocol", help="override [run] protocol")
        p.add_argument("--tf-us", type=float, help="override t_f in microseconds")
        p.add_argument("--threshold", type=float, help="override the fidelity threshold")
        p.add_argument("--variant", choices=("l6", "l1"), help="resonance rotation")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"stirsap: cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = parse_config(text).with_overrides(args.protocol, args.tf_us, args.threshold, args.variant)
            csv_text = run(args.command, cfg, args.out)
        for w in caught:
            print(f"stirsap: warning: {w.message}", file=sys.stderr)
    except ValidationError as exc:
        print(f"stirsap: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalAccuracyError as exc:
        print(f"stirsap: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except StirsapError as exc:
        print(f"stirsap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if not (args.out or cfg.output):
        sys.stdout.write(csv_text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
