"""ccfilter command line.

Exit codes: 0 success, 2 usage or parse error, 3 check or feasibility
failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from .circuit import validate
from .filter import (
    GAINS,
    PASSIVES,
    FilterDesign,
    FilterMode,
    InfeasibleTuningError,
    build_reference_netlist,
    design_params,
    nonideal_transfer_function,
    tune,
)
from .mna import FitError, SingularCircuitError, ac_sweep, characteristic_omega, extract_tf
from .netlist import NetlistSyntaxError, parse_netlist, parse_value
from .response import (
    FrequencyResponse,
    SweepTooNarrowError,
    UnclassifiableError,
    classify,
    log_grid,
    measure,
    sweep_grid,
)
from .sensitivity import numeric_sensitivities

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_NUMERIC = 0, 2, 3, 4
CHECK_RTOL = 1e-6
DEFAULT_DECADES = 3
# simulate must classify first-order sections too, whose skirts need more room
SIMULATE_DECADES = 4
DEFAULT_PPD = 200

_MODES = {m.value: m for m in FilterMode}


class UsageError(Exception):
    pass


def _engineering(flag: str, positive: bool = True):
    def convert(text: str) -> float:
        try:
            v = parse_value(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag}: malformed value {text!r}") from None
        if positive and v <= 0:
            raise argparse.ArgumentTypeError(f"{flag} must be positive")
        return v

    return convert


def _add_design_flags(p: argparse.ArgumentParser):
    defaults = FilterDesign()
    g = p.add_argument_group("design")
    for name in PASSIVES + GAINS:
        flag = name.lower()
        g.add_argument(
            f"--{flag}", type=_engineering(flag), default=getattr(defaults, name),
            metavar="VALUE", help=f"{name} (default {getattr(defaults, name):g})",
        )


def _add_sweep_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("sweep")
    g.add_argument("--wmin", type=_engineering("wmin"), help="lowest omega, rad/s")
    g.add_argument("--wmax", type=_engineering("wmax"), help="highest omega, rad/s")
    g.add_argument("--ppd", type=int, default=DEFAULT_PPD, help="points per decade (>= 8)")
    g.add_argument("-o", "--output", help="write CSV here ('-' for stdout)")
    g.add_argument("--format", choices=("csv", "table"), default="csv")


def _design(args) -> FilterDesign:
    try:
        return FilterDesign(**{n: getattr(args, n.lower()) for n in PASSIVES + GAINS})
    except ValueError as exc:
        raise UsageError(str(exc).lower()) from None


def _grid(args, center: float, decades: float = DEFAULT_DECADES) -> np.ndarray:
    if args.ppd < 8:
        raise UsageError("ppd must be at least 8")
    if args.wmin is None and args.wmax is None:
        return log_grid(center, decades, args.ppd)
    half = decades / 2
    lo = args.wmin if args.wmin is not None else center * 10**-half
    hi = args.wmax if args.wmax is not None else center * 10**half
    if not lo < hi:
        raise UsageError("wmin must be below wmax")
    return sweep_grid(lo, hi, args.ppd)


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def response_csv(resp: FrequencyResponse) -> str:
    buf = io.StringIO(newline="")
    buf.write("omega_rad_s,freq_hz,mag,mag_db,phase_deg\n")
    for row in zip(resp.omega, resp.freq_hz, resp.magnitude, resp.mag_db, resp.phase_deg):
        buf.write(",".join(_fmt(float(v)) for v in row) + "\n")
    return buf.getvalue()


def response_table(resp: FrequencyResponse) -> str:
    lines = [f"{'omega [rad/s]':>14} {'f [Hz]':>12} {'|H|':>12} {'|H| [dB]':>10} {'phase':>9}"]
    for w, f, m, db, ph in zip(resp.omega, resp.freq_hz, resp.magnitude, resp.mag_db, resp.phase_deg):
        lines.append(f"{w:14.6g} {f:12.6g} {m:12.6g} {db:10.3f} {ph:9.3f}")
    return "\n".join(lines) + "\n"


def _emit(resp: FrequencyResponse, args, out, default_stdout: bool):
    text = response_table(resp) if args.format == "table" else response_csv(resp)
    dest = args.output if args.output is not None else ("-" if default_stdout else None)
    if dest is None:
        return
    if dest == "-":
        out.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _sens_tables(design: FilterDesign) -> str:
    w0, q = numeric_sensitivities(design, 1e-6)
    lines = []
    for rep, label in ((w0, "omega0"), (q, "Q")):
        lines.append(f"Sensitivity of {label}")
        lines.append(f"  {'param':<6}{'analytic':>12}{'numeric':>14}{'|diff|':>11}")
        for name, e in rep.entries.items():
            lines.append(f"  {name:<6}{e.analytic:>12.6f}{e.numeric:>14.9f}{e.abs_diff:>11.2e}")
    return "\n".join(lines) + "\n"


def _params_text(design: FilterDesign) -> str:
    p = design_params(design)
    return (
        f"omega0    = {p.omega0:.2f} rad/s ({p.f0_hz:.1f} Hz)\n"
        f"Q         = {p.q:.4f}\n"
        f"bandwidth = {p.bandwidth:.2f} rad/s ({p.bandwidth / (2 * math.pi):.1f} Hz)\n"
    )


def cmd_design(args, out) -> int:
    d = _design(args)
    out.write(_params_text(d))
    out.write(_sens_tables(d))
    return EXIT_OK


def cmd_sens(args, out) -> int:
    out.write(_sens_tables(_design(args)))
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    if args.mode not in _MODES:
        raise UsageError(f"unknown mode {args.mode!r} (choose from {', '.join(_MODES)})")
    mode = _MODES[args.mode]
    d = _design(args)
    w = _grid(args, design_params(d).omega0)
    closed = FrequencyResponse.from_tf(nonideal_transfer_function(d, mode), w)
    mna = None
    if args.engine == "mna" or args.check:
        mna = ac_sweep(build_reference_netlist(d, mode), w)
    _emit(mna if args.engine == "mna" else closed, args, out, default_stdout=True)
    if args.check:
        a, b = closed.gain, mna.gain
        floor = 1e-12 * np.abs(a).max(initial=0.0)
        rel = np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        k = int(np.argmax(rel))
        if rel[k] > CHECK_RTOL:
            sys.stderr.write(
                f"engine disagreement {rel[k]:.3g} at omega={w[k]:.6g} rad/s\n"
            )
            return EXIT_CHECK
        sys.stderr.write(f"engines agree (max relative difference {rel[k]:.2e})\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    try:
        with open(args.netlist, "rb") as fh:
            source = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.netlist}: {exc.strerror}") from None
    nl = parse_netlist(source)
    problems = validate(nl)
    if problems:
        raise UsageError("invalid netlist:\n  " + "\n  ".join(problems))
    try:
        tf = extract_tf(nl)
        center = tf.den[0] ** (1.0 / tf.order) if tf.order and tf.den[0] > 0 else characteristic_omega(nl)
    except FitError:
        center = characteristic_omega(nl)
    resp = ac_sweep(nl, _grid(args, center, SIMULATE_DECADES))
    summary = sys.stderr if args.output == "-" else out
    _emit(resp, args, out, default_stdout=False)
    try:
        kind = classify(resp)
        m = measure(resp, kind)
    except (UnclassifiableError, SweepTooNarrowError) as exc:
        summary.write(f"{exc}\n")
        return EXIT_OK
    summary.write(
        f"{kind.title}, ω₀≈{m.omega0:.0f} rad/s ({m.omega0 / (2 * math.pi):.1f} Hz), "
        f"Q≈{m.q:.3g}, BW≈{m.bandwidth:.0f} rad/s\n"
    )
    summary.write(
        f"dc gain {m.dc_gain:.6g}, hf gain {m.hf_gain:.6g}, "
        f"gain at ω₀ {m.peak_or_null_gain:.6g}\n"
    )
    return EXIT_OK


def cmd_tune(args, out) -> int:
    d = _design(args)
    now = design_params(d)
    w0 = args.omega0 if args.omega0 is not None else now.omega0
    bw = args.bw if args.bw is not None else now.bandwidth
    new = tune(d, w0, bw)
    got = design_params(new)
    out.write(f"R3 = {new.R3:.6g} ohm (was {d.R3:.6g})\n")
    out.write(f"C5 = {new.C5:.6g} F (was {d.C5:.6g})\n")
    out.write(_params_text(new))
    err_w = abs(got.omega0 - w0) / w0
    err_b = abs(got.bandwidth - bw) / bw
    ok = err_w <= 1e-9 and err_b <= 1e-9
    out.write(f"targets {'met' if ok else 'MISSED'} (omega0 {err_w:.1e}, bandwidth {err_b:.1e} relative)\n")
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccfilter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("design", help="design parameters and sensitivities")
    _add_design_flags(sp)
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("sens", help="sensitivity tables only")
    _add_design_flags(sp)
    sp.set_defaults(func=cmd_sens)

    sp = sub.add_parser("sweep", help="frequency response of one filter mode")
    sp.add_argument("mode", help="lp, hp, bp or notch")
    _add_design_flags(sp)
    _add_sweep_flags(sp)
    sp.add_argument("--engine", choices=("closed-form", "mna"), default="closed-form")
    sp.add_argument("--check", action="store_true", help="fail (exit 3) if engines disagree")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="sweep, classify and measure a netlist file")
    sp.add_argument("netlist")
    _add_sweep_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("tune", help="retune omega0 (via C5) and bandwidth (via R3)")
    _add_design_flags(sp)
    sp.add_argument("--omega0", type=_engineering("omega0"), help="target omega0, rad/s")
    sp.add_argument("--bw", type=_engineering("bw"), help="target bandwidth omega0/Q, rad/s")
    sp.set_defaults(func=cmd_tune)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"ccfilter: error: {exc}\n")
        return EXIT_USAGE
    except NetlistSyntaxError as exc:
        sys.stderr.write("ccfilter: netlist errors:\n")
        for e in exc.errors:
            sys.stderr.write(f"  {e}\n")
        return EXIT_USAGE
    except InfeasibleTuningError as exc:
        sys.stderr.write(f"ccfilter: {exc}\n")
        return EXIT_CHECK
    except (SingularCircuitError, FitError) as exc:
        sys.stderr.write(f"ccfilter: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
