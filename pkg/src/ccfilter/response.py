"""Frequency-response classification and parameter measurement.

Classification works on magnitudes in dB at the sweep edges and in the
interior. Measurement inverts the biquad design relations from sampled
data: peak or null location for band-pass and notch, phase crossing for
low-pass and high-pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitError, RationalTF, evaluate
from .filter import FilterMode

#: Minimum sample count for classify() and measure().
MIN_SAMPLES = 16

PASS_BAND_DB = 1.0
STOP_DB = -30.0
BP_SKIRT_DB = -20.0
NOTCH_DIP_DB = -30.0
HALF_POWER_DB = 10.0 * math.log10(0.5)


class UnclassifiableError(CircuitError):
    pass


class SweepTooNarrowError(CircuitError):
    pass


@dataclass(frozen=True)
class FrequencyResponse:
    """Ordered ``(omega, gain)`` samples; omega in rad/s, strictly increasing."""

    omega: np.ndarray
    gain: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float).ravel()
        g = np.asarray(self.gain, dtype=complex).ravel()
        if w.shape != g.shape:
            raise ValueError("omega and gain lengths differ")
        if w.size and (np.any(np.diff(w) <= 0) or w[0] < 0):
            raise ValueError("omegas must be non-negative and strictly increasing")
        w.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "gain", g)

    @classmethod
    def from_tf(cls, tf: RationalTF, omegas) -> "FrequencyResponse":
        w = np.asarray(omegas, dtype=float)
        return cls(w, evaluate(tf, w))

    def __len__(self):
        return self.omega.size

    @property
    def freq_hz(self) -> np.ndarray:
        return self.omega / (2 * np.pi)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.gain)

    @property
    def mag_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(self.magnitude)

    @property
    def phase_deg(self) -> np.ndarray:
        return np.degrees(np.angle(self.gain))

    def samples(self):
        return list(zip(self.omega.tolist(), self.gain.tolist()))


def log_grid(center: float, decades: float, points_per_decade: int) -> np.ndarray:
    """Log-spaced grid spanning ``decades`` around ``center``, center included."""
    half = int(round(decades * points_per_decade / 2))
    k = np.arange(-half, half + 1)
    return center * 10.0 ** (k / points_per_decade)


def sweep_grid(w_min: float, w_max: float, points_per_decade: int) -> np.ndarray:
    n = max(2, int(math.ceil(math.log10(w_max / w_min) * points_per_decade)) + 1)
    return np.logspace(math.log10(w_min), math.log10(w_max), n)


@dataclass(frozen=True)
class MeasuredParams:
    """Parameters read off a sweep.

    For a first-order low-pass/high-pass (``order == 1``) ``omega0`` is the
    corner frequency and ``q`` is the corner gain relative to the pass band
    (1/sqrt(2)).
    """

    kind: FilterMode
    omega0: float
    q: float
    bandwidth: float
    dc_gain: float
    hf_gain: float
    peak_or_null_gain: float
    order: int = 2


def _check_len(resp: FrequencyResponse):
    if len(resp) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(resp)}")


def classify(resp: FrequencyResponse) -> FilterMode:
    _check_len(resp)
    db = resp.mag_db
    dc, hf = db[0], db[-1]
    interior = db[1:-1]
    flat_dc = abs(dc) <= PASS_BAND_DB
    flat_hf = abs(hf) <= PASS_BAND_DB

    # Notch is tested first so it wins any tie with the band-pass rule.
    if flat_dc and flat_hf and interior.min() <= NOTCH_DIP_DB:
        return FilterMode.NOTCH
    if flat_dc and hf <= STOP_DB:
        return FilterMode.LOWPASS
    if flat_hf and dc <= STOP_DB:
        return FilterMode.HIGHPASS
    if dc <= BP_SKIRT_DB and hf <= BP_SKIRT_DB:
        i = int(np.argmax(db))
        if 0 < i < len(db) - 1 and db[i] > max(dc, hf):
            return FilterMode.BANDPASS
    raise UnclassifiableError(
        f"unclassifiable response (edges {dc:.1f} dB / {hf:.1f} dB)"
    )


def _vertex(x, y):
    """Abscissa of the parabola through three points."""
    x0, x1, x2 = x
    y0, y1, y2 = y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return x1
    return -b / (2 * a)


def _refine_extremum(logw, y, i):
    if i == 0 or i == len(y) - 1:
        return logw[i]
    v = _vertex(logw[i - 1:i + 2], y[i - 1:i + 2])
    return float(np.clip(v, logw[i - 1], logw[i + 1]))


def _crossing(logw, y, level, start, step):
    """Walk from ``start`` in direction ``step`` until ``y`` crosses ``level``.

    Returns the log-frequency of the crossing, linearly interpolated.
    """
    j = start
    while 0 <= j + step < len(y):
        a, b = y[j], y[j + step]
        if (a - level) * (b - level) <= 0 and a != b:
            t = (level - a) / (b - a)
            return logw[j] + t * (logw[j + step] - logw[j])
        j += step
    raise SweepTooNarrowError("sweep too narrow: -3 dB point outside the sweep range")


def _interp_mag(logw, mag, lw):
    return 10.0 ** np.interp(lw, logw, np.log10(np.maximum(mag, 1e-300)))


def measure(resp: FrequencyResponse, kind: FilterMode) -> MeasuredParams:
    _check_len(resp)
    kind = FilterMode(kind)
    logw = np.log10(resp.omega)
    mag = resp.magnitude
    db = resp.mag_db
    dc_gain, hf_gain = float(mag[0]), float(mag[-1])

    if kind is FilterMode.BANDPASS:
        i = int(np.argmax(mag))
        lw0 = _refine_extremum(logw, np.log10(mag), i)
        level = db[i] + HALF_POWER_DB
        lo = _crossing(logw, db, level, i, -1)
        hi = _crossing(logw, db, level, i, +1)
        w0 = 10.0 ** lw0
        bw = 10.0 ** hi - 10.0 ** lo
        return MeasuredParams(kind, w0, w0 / bw, bw, dc_gain, hf_gain,
                              float(_interp_mag(logw, mag, lw0)))

    if kind is FilterMode.NOTCH:
        i = int(np.argmin(mag))
        # |H|^2 is smooth through a transmission zero, log|H| is not.
        lw0 = _refine_extremum(logw, mag ** 2, i)
        level = 20.0 * math.log10(max(min(dc_gain, hf_gain), 1e-300)) + HALF_POWER_DB
        lo = _crossing(logw, db, level, i, -1)
        hi = _crossing(logw, db, level, i, +1)
        w0 = 10.0 ** lw0
        bw = 10.0 ** hi - 10.0 ** lo
        return MeasuredParams(kind, w0, w0 / bw, bw, dc_gain, hf_gain, float(mag[i]))

    # Low-pass / high-pass: the pass-band asymptote is a real constant, so
    # dividing out its sign starts the phase at 0 deg; omega0 is where the
    # phase has swung halfway to its final value.
    if kind is FilterMode.LOWPASS:
        norm = resp.gain * np.sign(resp.gain[0].real or 1.0)
        ref = dc_gain
    else:
        norm = resp.gain[::-1] * np.sign(resp.gain[-1].real or 1.0)
        ref = hf_gain
    phase = np.degrees(np.unwrap(np.angle(norm)))
    swing = abs(phase[-1])
    order = max(1, int(round(swing / 90.0)))
    target = -45.0 * order if np.mean(phase) < 0 else 45.0 * order
    if kind is FilterMode.HIGHPASS:
        phase = phase[::-1]
    crossings = np.nonzero(np.diff(np.sign(phase - target)) != 0)[0]
    if crossings.size == 0:
        raise SweepTooNarrowError("sweep too narrow: phase crossing outside the sweep range")
    knee_db = 20.0 * math.log10(ref) + HALF_POWER_DB
    knee = int(np.argmin(np.abs(db - knee_db)))
    j = int(crossings[np.argmin(np.abs(crossings - knee))])
    t = (target - phase[j]) / (phase[j + 1] - phase[j])
    lw0 = logw[j] + t * (logw[j + 1] - logw[j])
    w0 = 10.0 ** lw0
    g0 = float(_interp_mag(logw, mag, lw0))
    q = g0 / ref
    return MeasuredParams(kind, w0, q, w0 / q, dc_gain, hf_gain, g0, order)
