"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import io
import time

import pytest
from hypothesis import HealthCheck, Phase, given, settings

from ccfilter import (
    FilterMode,
    ac_sweep,
    analytic_sensitivities,
    build_reference_netlist,
    classify,
    design_params,
    evaluate,
    extract_tf,
    measure,
    nonideal_transfer_function,
    numeric_sensitivities,
    parse_netlist,
    serialize_netlist,
    transfer_function,
)
from ccfilter.circuit import tf_error
from ccfilter.cli import main
from ccfilter.response import log_grid

from conftest import random_design
from test_netlist import fuzz_parser, netlists

MODES = list(FilterMode)


@pytest.fixture
def record(acceptance_report):
    def _record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        acceptance_report.append(line)
        print(line)
        return ok

    return _record


def test_c1_design_point(reference_design, record):
    t0 = time.perf_counter()
    out = io.StringIO()
    code = main(["design", "--r1", "10k", "--r3", "14k", "--r4", "10k", "--r6", "10k",
                 "--c2", "10n", "--c5", "10n"], out)
    elapsed = time.perf_counter() - t0
    p = design_params(reference_design)
    text = out.getvalue()
    err_w = abs(p.omega0 / 14142.14 - 1)
    err_q = abs(p.q / 1.9799 - 1)
    ok = (
        code == 0 and err_w <= 1e-6 and err_q <= 1e-6 and elapsed < 1.0
        and "14142.14 rad/s (2250.8 Hz)" in text and "Q         = 1.9799" in text
    )
    assert record(1, ok, f"omega0={p.omega0:.6f} (rel {err_w:.1e}), Q={p.q:.6f} (rel {err_q:.1e}), {elapsed:.3f} s")


def test_c2_oracle_equivalence(rng, record):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        d = random_design(rng)
        for mode in MODES:
            got = extract_tf(build_reference_netlist(d, mode))
            worst = max(worst, tf_error(got, transfer_function(d, mode)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30.0
    assert record(2, ok, f"400 fits, worst coefficient error {worst:.1e}, {elapsed:.2f} s")


def test_c3_shared_denominator(reference_design, rng, record):
    designs = [reference_design] + [random_design(rng, gains=g) for g in (False, True) for _ in range(50)]
    ok = True
    for d in designs:
        for tf_of in (transfer_function, nonideal_transfer_function):
            dens = {tf_of(d, m).den for m in MODES}
            ok &= len(dens) == 1
    assert record(3, ok, f"{len(designs)} designs, ideal and non-ideal, one denominator per design")


def test_c4_unity_gains(rng, record):
    worst = 0.0
    for _ in range(50):
        d = random_design(rng)
        w0 = design_params(d).omega0
        lp, hp, bp, notch = (transfer_function(d, m) for m in
                             (FilterMode.LOWPASS, FilterMode.HIGHPASS, FilterMode.BANDPASS, FilterMode.NOTCH))
        # Asymptotic gain is the ratio of leading coefficients; the phase
        # approaches it only as 1/omega, so the sampled check uses |H|.
        high = w0 * 1e9
        errs = [
            abs(evaluate(lp, 0.0) - 1),
            abs(hp.num[-1] / hp.den[-1] - 1),
            abs(abs(evaluate(hp, high)) - 1),
            abs(evaluate(bp, w0) - 1),
            abs(evaluate(notch, w0)),
            abs(evaluate(notch, 0.0) - 1),
            abs(notch.num[-1] / notch.den[-1] - 1),
            abs(abs(evaluate(notch, high)) - 1),
        ]
        # The same invariants through the MNA engine at omega0.
        errs.append(abs(ac_sweep(build_reference_netlist(d, FilterMode.BANDPASS), [w0]).gain[0] - 1))
        errs.append(abs(ac_sweep(build_reference_netlist(d, FilterMode.NOTCH), [w0]).gain[0]))
        worst = max(worst, *errs)
    ok = worst <= 1e-9
    assert record(4, ok, f"50 designs, worst deviation {worst:.1e}")


def _reference_sensitivities(d):
    r1, r6 = d.R1, d.R6
    sr1, sr6 = -r6 / (2 * (r1 + r6)), -r1 / (2 * (r1 + r6))
    w0 = dict(R1=sr1, R3=0.0, R4=-0.5, R6=sr6, C2=-0.5, C5=-0.5, B1=-0.5, B2=-0.5, K1=-0.5, K2=-0.5)
    q = dict(R1=sr1, R3=1.0, R4=-0.5, R6=sr6, C2=0.5, C5=-0.5, B1=-0.5, B2=-0.5, K1=-0.5, K2=-0.5)
    return w0, q


def test_c5_sensitivities(rng, record):
    exact = bound = True
    worst_diff = worst_sum = 0.0
    for i in range(100):
        d = random_design(rng, gains=i % 2 == 1)
        ref_w0, ref_q = _reference_sensitivities(d)
        a_w0, a_q = analytic_sensitivities(d)
        exact &= a_w0.analytic() == ref_w0 and a_q.analytic() == ref_q
        n_w0, n_q = numeric_sensitivities(d, 1e-6)
        worst_diff = max(worst_diff, n_w0.max_abs_diff(), n_q.max_abs_diff())
        mags = {("w0", k): abs(v) for k, v in ref_w0.items()} | {("q", k): abs(v) for k, v in ref_q.items()}
        top = max(mags.values())
        bound &= top == 1.0 and [k for k, v in mags.items() if v == top] == [("q", "R3")]
        total = sum(a_w0[k].analytic for k in ("R1", "R4", "R6", "C2", "C5"))
        total_n = sum(n_w0[k].numeric for k in ("R1", "R4", "R6", "C2", "C5"))
        worst_sum = max(worst_sum, abs(total + 2), abs(total_n + 2))
    ok = exact and bound and worst_diff <= 1e-6 and worst_sum <= 1e-9
    assert record(5, ok, f"exact={exact}, bound={bound}, max |analytic-numeric|={worst_diff:.1e}, "
                         f"sum rule error {worst_sum:.1e}")


def test_c6_nonideal(reference_design, rng, record):
    reduces = all(
        nonideal_transfer_function(d.ideal(), m) == transfer_function(d, m)
        for d in [reference_design] + [random_design(rng, gains=True) for _ in range(20)]
        for m in MODES
    )
    ideal = design_params(reference_design)
    gain_sets = [
        dict(B1=0.9, B2=0.95, K1=0.98, K2=0.97),
        dict(B1=1.0, B2=1.0, K1=0.8, K2=1.0),
        dict(B1=1.05, B2=1.1, K1=1.02, K2=1.0),
        dict(B1=0.7, B2=1.0, K1=1.0, K2=0.9),
    ]
    worst_bw = worst_w0 = 0.0
    for gains in gain_sets:
        d = reference_design.with_(**gains)
        g = d.loop_gain
        w = log_grid(ideal.omega0 * g**-0.5, 4, 1000)
        m = measure(ac_sweep(build_reference_netlist(d, FilterMode.BANDPASS), w), FilterMode.BANDPASS)
        worst_bw = max(worst_bw, abs(m.bandwidth / ideal.bandwidth - 1))
        worst_w0 = max(worst_w0, abs(m.omega0 / (ideal.omega0 * g**-0.5) - 1))
    ok = reduces and worst_bw <= 5e-3 and worst_w0 <= 5e-3
    assert record(6, ok, f"ideal reduction exact={reduces}, bandwidth error {worst_bw:.1e}, "
                         f"omega0 vs G^-1/2 error {worst_w0:.1e} over {len(gain_sets)} gain sets")


def test_c7_end_to_end(reference_design, record):
    p = design_params(reference_design)
    w = log_grid(p.omega0, 4, 200)
    kinds, worst_w0, worst_q = [], 0.0, 0.0
    for mode in MODES:
        resp = ac_sweep(build_reference_netlist(reference_design, mode), w)
        kind = classify(resp)
        kinds.append(kind is mode)
        m = measure(resp, kind)
        worst_w0 = max(worst_w0, abs(m.omega0 / p.omega0 - 1))
        worst_q = max(worst_q, abs(m.q / p.q - 1))
    ok = all(kinds) and worst_w0 <= 5e-3 and worst_q <= 2e-2
    assert record(7, ok, f"classified {sum(kinds)}/4, omega0 error {worst_w0:.1e}, Q error {worst_q:.1e}")


def test_c8_parser(record):
    calls = {"n": 0, "bad": 0}

    @settings(max_examples=1000, deadline=None, database=None, derandomize=True,
              phases=[Phase.generate], suppress_health_check=list(HealthCheck))
    @given(netlists())
    def round_trip(nl):
        calls["n"] += 1
        if parse_netlist(serialize_netlist(nl)) != nl:
            calls["bad"] += 1

    round_trip()
    crashes = fuzz_parser(100_000, seed=2026)
    ok = calls["n"] >= 1000 and calls["bad"] == 0 and crashes == 0
    assert record(8, ok, f"{calls['n']} round-trips ({calls['bad']} mismatches), "
                         f"100000 fuzz inputs ({crashes} crashes)")
