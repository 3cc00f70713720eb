"""Closed-form model of the two-CCII voltage-mode multifunction biquad.

Component names keep the circuit's numbering: R1, R3, R4, R6, C2, C5.
With G = K1*K2*B1*B2 the common denominator is::

    D(s) = G*(s^2*C2*C5*R1*R3*R4*R6 + s*C5*R1*R4*R6) + R3*(R1 + R6)

and the four inputs contribute::

    V1: R3*R6            V2: K1*K2*B2 * s^2*C2*C5*R1*R3*R4*R6
    V4: R1*R3            V3: K1*K2*B2 * s*C5*R1*R4*R6

Ideal conveyors (all gains 1) recover the textbook form. Frequencies are
angular (rad/s); the design point R1=R4=R6=10k, R3=14k, C2=C5=10n has
omega0 = 14142.14 rad/s (2250.8 Hz) and Q = 1.9799.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

from .circuit import CCII, Capacitor, CircuitError, GROUND, Netlist, RationalTF, Resistor, VSource

PASSIVES = ("R1", "R3", "R4", "R6", "C2", "C5")
GAINS = ("B1", "B2", "K1", "K2")
PARAMETERS = PASSIVES + GAINS


class InfeasibleTuningError(CircuitError):
    pass


class FilterMode(enum.Enum):
    LOWPASS = "lp"
    HIGHPASS = "hp"
    BANDPASS = "bp"
    NOTCH = "notch"

    @property
    def inputs(self) -> tuple[int, int, int, int]:
        """Which of (V1, V2, V3, V4) are driven."""
        return _MODE_INPUTS[self]

    @property
    def title(self) -> str:
        return _MODE_TITLES[self]

    @classmethod
    def from_inputs(cls, vector) -> "FilterMode":
        for mode, v in _MODE_INPUTS.items():
            if tuple(vector) == v:
                return mode
        raise ValueError(f"no filter response for input vector {tuple(vector)}")


_MODE_INPUTS = {
    FilterMode.LOWPASS: (1, 0, 0, 1),
    FilterMode.HIGHPASS: (0, 1, 0, 0),
    FilterMode.BANDPASS: (0, 0, 1, 0),
    FilterMode.NOTCH: (1, 1, 0, 1),
}
_MODE_TITLES = {
    FilterMode.LOWPASS: "LowPass",
    FilterMode.HIGHPASS: "HighPass",
    FilterMode.BANDPASS: "BandPass",
    FilterMode.NOTCH: "Notch",
}


@dataclass(frozen=True)
class FilterDesign:
    R1: float = 10e3
    R3: float = 14e3
    R4: float = 10e3
    R6: float = 10e3
    C2: float = 10e-9
    C5: float = 10e-9
    B1: float = 1.0
    B2: float = 1.0
    K1: float = 1.0
    K2: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{f.name} must be a finite number")
            if f.name in PASSIVES and v <= 0:
                raise ValueError(f"{f.name} must be positive")
            if f.name in GAINS and not 0 < v <= 2:
                raise ValueError(f"{f.name} must lie in (0, 2]")
            object.__setattr__(self, f.name, float(v))

    @property
    def loop_gain(self) -> float:
        return self.K1 * self.K2 * self.B1 * self.B2

    @property
    def is_ideal(self) -> bool:
        return all(getattr(self, g) == 1.0 for g in GAINS)

    def ideal(self) -> "FilterDesign":
        return replace(self, B1=1.0, B2=1.0, K1=1.0, K2=1.0)

    def with_(self, **changes) -> "FilterDesign":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAMETERS}


@dataclass(frozen=True)
class DesignParams:
    omega0: float
    bandwidth: float
    q: float

    @property
    def f0_hz(self) -> float:
        return self.omega0 / (2 * math.pi)


def _terms(d: FilterDesign, gain_factor: bool):
    g = d.loop_gain if gain_factor else 1.0
    fwd = d.K1 * d.K2 * d.B2 if gain_factor else 1.0
    s2 = d.C2 * d.C5 * d.R1 * d.R3 * d.R4 * d.R6
    s1 = d.C5 * d.R1 * d.R4 * d.R6
    den = (d.R1 * d.R3 + d.R3 * d.R6, g * s1, g * s2)
    per_input = (
        (d.R3 * d.R6, 0.0, 0.0),
        (0.0, 0.0, fwd * s2),
        (0.0, fwd * s1, 0.0),
        (d.R1 * d.R3, 0.0, 0.0),
    )
    return den, per_input


def _assemble(design: FilterDesign, mode: FilterMode, gain_factor: bool) -> RationalTF:
    den, per_input = _terms(design, gain_factor)
    num = [0.0, 0.0, 0.0]
    for active, term in zip(FilterMode(mode).inputs, per_input):
        if active:
            num = [a + b for a, b in zip(num, term)]
    return RationalTF(tuple(num), den)


def transfer_function(design: FilterDesign, mode: FilterMode) -> RationalTF:
    """Vout/Vin with ideal conveyors (conveyor gains in ``design`` are ignored)."""
    return _assemble(design, mode, gain_factor=False)


def nonideal_transfer_function(design: FilterDesign, mode: FilterMode) -> RationalTF:
    return _assemble(design, mode, gain_factor=True)


def design_params(design: FilterDesign) -> DesignParams:
    d = design
    omega0 = math.sqrt((d.R1 + d.R6) / (d.loop_gain * d.R1 * d.R4 * d.R6 * d.C2 * d.C5))
    bandwidth = 1.0 / (d.R3 * d.C2)
    return DesignParams(omega0, bandwidth, omega0 * d.R3 * d.C2)


def tune(design: FilterDesign, target_omega0: float, target_bandwidth: float) -> FilterDesign:
    """Hit both targets by moving R3 (bandwidth) and then C5 (omega0).

    R3 does not enter omega0 and C5 does not enter the bandwidth, so the
    two adjustments do not interact.
    """
    if not (target_omega0 > 0 and target_bandwidth > 0):
        raise ValueError("tuning targets must be positive")
    if not (math.isfinite(target_omega0) and math.isfinite(target_bandwidth)):
        raise ValueError("tuning targets must be finite")
    d = design
    try:
        r3 = 1.0 / (target_bandwidth * d.C2)
        c5 = (d.R1 + d.R6) / (d.loop_gain * d.R1 * d.R4 * d.R6 * d.C2 * target_omega0**2)
    except (ZeroDivisionError, OverflowError):
        raise InfeasibleTuningError("infeasible tuning: component value out of range") from None
    if not (math.isfinite(r3) and r3 > 0 and math.isfinite(c5) and c5 > 0):
        raise InfeasibleTuningError(f"infeasible tuning (R3={r3!r}, C5={c5!r})")
    return replace(d, R3=r3, C5=c5)


def build_reference_netlist(design: FilterDesign, mode: FilterMode) -> Netlist:
    """Behavioral netlist of the biquad with 1 V sources on the mode's inputs.

    Topology::

        out --R1-- in1      out --R6-- in4       (out also drives y of X1)
        x1  --R3-- in3      x1  --C2-- in2
        X1: y=out x=x1 z+=q  z-=0
        q   --R4-- 0
        X2: y=q   x=x2 z+=0  z-=out
        x2  --C5-- 0

    Undriven inputs are tied to ground, so both capacitors are grounded
    except C2 while V2 drives it.
    """
    mode = FilterMode(mode)
    d = design
    active = mode.inputs
    node = [f"in{i + 1}" if on else GROUND for i, on in enumerate(active)]
    elements = [
        Resistor("R1", "out", node[0], d.R1),
        Resistor("R6", "out", node[3], d.R6),
        Resistor("R3", "x1", node[2], d.R3),
        Capacitor("C2", "x1", node[1], d.C2),
        Resistor("R4", "q", GROUND, d.R4),
        Capacitor("C5", "x2", GROUND, d.C5),
        CCII("X1", "out", "x1", "q", GROUND, B=d.B1, K=d.K1),
        CCII("X2", "q", "x2", GROUND, "out", B=d.B2, K=d.K2),
    ]
    for i, on in enumerate(active):
        if on:
            elements.append(VSource(f"V{i + 1}", node[i], GROUND, 1.0, f"V{i + 1}"))
    return Netlist(tuple(elements), output="out", title=f"CCII multifunction biquad ({mode.value})")
