import cmath
import math

import numpy as np
import pytest

from ccfilter import (
    CCII,
    Capacitor,
    FilterDesign,
    FilterMode,
    InfeasibleTuningError,
    Resistor,
    VSource,
    build_reference_netlist,
    design_params,
    evaluate,
    nonideal_transfer_function,
    transfer_function,
    tune,
    validate,
)

from conftest import random_design

MODES = list(FilterMode)


def test_mode_input_vectors():
    assert FilterMode.LOWPASS.inputs == (1, 0, 0, 1)
    assert FilterMode.HIGHPASS.inputs == (0, 1, 0, 0)
    assert FilterMode.BANDPASS.inputs == (0, 0, 1, 0)
    assert FilterMode.NOTCH.inputs == (1, 1, 0, 1)
    for m in MODES:
        assert FilterMode.from_inputs(m.inputs) is m
    with pytest.raises(ValueError):
        FilterMode.from_inputs((1, 1, 1, 1))


@pytest.mark.parametrize(
    "kw",
    [{"R1": 0.0}, {"C5": -1e-9}, {"R3": math.inf}, {"K1": 0.0}, {"B2": 2.5}, {"C2": math.nan}],
)
def test_design_validation(kw):
    with pytest.raises(ValueError):
        FilterDesign(**kw)


def test_reference_coefficients(reference_design):
    # Raw polynomial terms before normalization.
    d = reference_design
    den_raw = (d.R1 * d.R3 + d.R3 * d.R6, d.C5 * d.R1 * d.R4 * d.R6, d.C2 * d.C5 * d.R1 * d.R3 * d.R4 * d.R6)
    lead = den_raw[2]
    bp = transfer_function(d, FilterMode.BANDPASS)
    assert bp.den == pytest.approx(tuple(c / lead for c in den_raw), rel=1e-15)
    assert bp.num == pytest.approx((0.0, den_raw[1] / lead), rel=1e-15)


def test_reference_lowpass_dc_exactly_one(reference_design):
    assert evaluate(transfer_function(reference_design, FilterMode.LOWPASS), 0.0) == pytest.approx(1.0, abs=1e-15)


def test_reference_notch_zero_at_omega0(reference_design):
    w0 = 14142.135623730951
    assert abs(evaluate(transfer_function(reference_design, FilterMode.NOTCH), w0)) <= 1e-12


def test_reference_bandpass_unity_zero_phase(reference_design):
    g = evaluate(transfer_function(reference_design, FilterMode.BANDPASS), design_params(reference_design).omega0)
    assert abs(g) == pytest.approx(1.0, abs=1e-9)
    assert math.degrees(cmath.phase(g)) == pytest.approx(0.0, abs=1e-9)


def test_design_params_reference_point(reference_design):
    p = design_params(reference_design)
    assert p.omega0 == pytest.approx(14142.135623730951, rel=1e-12)
    assert p.q == pytest.approx(1.979898987322333, rel=1e-12)
    assert p.bandwidth == pytest.approx(7142.857142857143, rel=1e-12)
    assert p.f0_hz == pytest.approx(2250.79, abs=0.01)


def test_design_params_unit_case():
    p = design_params(FilterDesign(1, 1, 1, 1, 1, 1))
    assert p.omega0 == pytest.approx(math.sqrt(2), rel=1e-15)
    assert p.bandwidth == 1.0
    assert p.q == pytest.approx(math.sqrt(2), rel=1e-15)


def test_design_params_loop_gain_scaling(reference_design):
    d = reference_design.with_(K1=0.9)
    p = design_params(d)
    assert p.omega0 == pytest.approx(14142.135623730951 / math.sqrt(0.9), rel=1e-12)
    assert p.omega0 == pytest.approx(14907.1, abs=0.05)
    assert p.bandwidth == pytest.approx(7142.857142857143, rel=1e-15)


def test_nonideal_omega0_scaling(reference_design):
    d = reference_design.with_(K1=0.98, K2=0.98, B1=0.98, B2=0.98)
    for m in MODES:
        den = nonideal_transfer_function(d, m).den
        assert math.sqrt(den[0]) / design_params(reference_design).omega0 == pytest.approx(0.98**-2, rel=1e-12)
    assert 0.98**-2 == pytest.approx(1.0412, abs=1e-4)


@pytest.mark.parametrize("mode", MODES)
def test_nonideal_reduces_to_ideal(reference_design, rng, mode):
    for d in [reference_design] + [random_design(rng) for _ in range(20)]:
        assert nonideal_transfer_function(d, mode) == transfer_function(d, mode)


def test_nonideal_lowpass_dc_gain_unaffected(rng):
    for _ in range(20):
        d = random_design(rng, gains=True)
        g = evaluate(nonideal_transfer_function(d, FilterMode.LOWPASS), 0.0)
        assert g == pytest.approx(1.0, abs=1e-14)


def test_shared_denominator(rng):
    for _ in range(50):
        d = random_design(rng, gains=True)
        dens = {nonideal_transfer_function(d, m).den for m in MODES}
        assert len(dens) == 1


def test_notch_is_lowpass_plus_highpass(rng):
    for _ in range(50):
        d = random_design(rng)
        lp = transfer_function(d, FilterMode.LOWPASS).num
        hp = transfer_function(d, FilterMode.HIGHPASS).num
        notch = transfer_function(d, FilterMode.NOTCH).num
        assert notch == pytest.approx((lp[0] + hp[0], hp[1], hp[2]), rel=1e-15)


def test_gain_normalization(rng):
    for _ in range(50):
        d = random_design(rng)
        w0 = design_params(d).omega0
        big = w0 * 1e7
        tf = {m: transfer_function(d, m) for m in MODES}
        assert evaluate(tf[FilterMode.LOWPASS], 0.0) == pytest.approx(1.0, abs=1e-9)
        assert abs(evaluate(tf[FilterMode.HIGHPASS], big)) == pytest.approx(1.0, abs=1e-9)
        assert abs(evaluate(tf[FilterMode.BANDPASS], w0)) == pytest.approx(1.0, abs=1e-9)
        assert abs(evaluate(tf[FilterMode.NOTCH], w0)) <= 1e-9
        assert abs(evaluate(tf[FilterMode.NOTCH], 0.0)) == pytest.approx(1.0, abs=1e-9)
        assert abs(evaluate(tf[FilterMode.NOTCH], big)) == pytest.approx(1.0, abs=1e-9)


def test_design_params_match_pole_pair(rng):
    for _ in range(100):
        d = random_design(rng, gains=True)
        p = design_params(d)
        assert p.q == pytest.approx(p.omega0 / p.bandwidth, rel=1e-12)
        den = nonideal_transfer_function(d, FilterMode.BANDPASS).den
        roots = np.roots(den[::-1])
        if p.q > 0.5:
            np.testing.assert_allclose(np.abs(roots), p.omega0, rtol=1e-9)
        else:  # real pole pair: geometric mean is omega0
            assert math.sqrt(abs(roots[0] * roots[1])) == pytest.approx(p.omega0, rel=1e-9)
        assert -roots.real.sum() == pytest.approx(p.bandwidth, rel=1e-9)


def test_orthogonality(rng):
    for _ in range(30):
        d = random_design(rng)
        p = design_params(d)
        r3 = design_params(d.with_(R3=d.R3 * 3.7))
        c5 = design_params(d.with_(C5=d.C5 * 0.21))
        assert r3.omega0 == p.omega0
        assert c5.bandwidth == p.bandwidth


def test_tune_to_q_two(reference_design):
    w0 = design_params(reference_design).omega0
    new = tune(reference_design, w0, w0 / 2)
    assert new.R3 == pytest.approx(14142.1, abs=0.05)
    assert design_params(new).q == pytest.approx(2.0, rel=1e-12)
    assert new.C5 == pytest.approx(reference_design.C5, rel=1e-12)


def test_tune_fixed_point(rng):
    for d in [FilterDesign()] + [random_design(rng, gains=True) for _ in range(20)]:
        p = design_params(d)
        new = tune(d, p.omega0, p.bandwidth)
        assert new.R3 == pytest.approx(d.R3, rel=1e-12)
        assert new.C5 == pytest.approx(d.C5, rel=1e-12)


def test_tune_double_omega0_quarters_c5(reference_design):
    p = design_params(reference_design)
    new = tune(reference_design, 2 * p.omega0, p.bandwidth)
    assert new.C5 == pytest.approx(reference_design.C5 / 4, rel=1e-12)
    assert new.R3 == pytest.approx(reference_design.R3, rel=1e-12)


def test_tune_hits_random_targets(rng):
    for _ in range(50):
        d = random_design(rng, gains=True)
        w0, bw = 10 ** rng.uniform(2, 6), 10 ** rng.uniform(1, 5)
        p = design_params(tune(d, w0, bw))
        assert p.omega0 == pytest.approx(w0, rel=1e-9)
        assert p.bandwidth == pytest.approx(bw, rel=1e-9)


def test_tune_rejects_bad_targets(reference_design):
    with pytest.raises(ValueError):
        tune(reference_design, 0.0, 1.0)
    with pytest.raises(InfeasibleTuningError):
        tune(reference_design, 1e-300, 1.0)


@pytest.mark.parametrize("mode", MODES)
def test_builder_structure(reference_design, mode):
    nl = build_reference_netlist(reference_design, mode)
    assert validate(nl) == []
    assert nl.count(CCII) == 2 and nl.count(Resistor) == 4 and nl.count(Capacitor) == 2
    labels = sorted(nl.inputs)
    assert labels == [f"V{i + 1}" for i, on in enumerate(mode.inputs) if on]
    assert all(v.amplitude == 1.0 for v in nl.inputs.values())
    source_nodes = {v.npos for v in nl.inputs.values()}
    for el in nl.elements:
        if isinstance(el, Capacitor):
            # Grounded, or on an input terminal that is grounded when undriven.
            assert "0" in el.nodes or set(el.nodes) & source_nodes


def test_builder_capacitors_grounded_without_v2(reference_design):
    for mode in (FilterMode.LOWPASS, FilterMode.BANDPASS):
        nl = build_reference_netlist(reference_design, mode)
        assert all("0" in el.nodes for el in nl.elements if isinstance(el, Capacitor))
