"""Classical sensitivities S_x^y = d(ln y)/d(ln x) of omega0 and Q.

The analytic values are closed-form; the numeric check perturbs one
parameter at a time and reads omega0 and Q back off the canonical
denominator of the non-ideal transfer function, so it shares no formula
with the analytic path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .filter import PARAMETERS, FilterDesign, FilterMode, nonideal_transfer_function


@dataclass(frozen=True)
class SensitivityEntry:
    analytic: float
    numeric: float = math.nan

    @property
    def abs_diff(self) -> float:
        return abs(self.analytic - self.numeric)


@dataclass(frozen=True)
class SensitivityReport:
    target: str  # "omega0" or "q"
    entries: dict[str, SensitivityEntry]

    def __post_init__(self):
        if self.target not in ("omega0", "q"):
            raise ValueError(f"unknown sensitivity target {self.target!r}")
        unknown = set(self.entries) - set(PARAMETERS)
        if unknown:
            raise ValueError(f"unknown parameters {sorted(unknown)}")

    def __getitem__(self, name: str) -> SensitivityEntry:
        return self.entries[name]

    def analytic(self) -> dict[str, float]:
        return {k: e.analytic for k, e in self.entries.items()}

    def numeric(self) -> dict[str, float]:
        return {k: e.numeric for k, e in self.entries.items()}

    def max_abs_diff(self) -> float:
        return max(e.abs_diff for e in self.entries.values())


def _analytic(design: FilterDesign) -> tuple[dict[str, float], dict[str, float]]:
    r1, r6 = design.R1, design.R6
    s_r1 = -r6 / (2 * (r1 + r6))
    s_r6 = -r1 / (2 * (r1 + r6))
    gains = {g: -0.5 for g in ("B1", "B2", "K1", "K2")}
    w0 = {"R1": s_r1, "R3": 0.0, "R4": -0.5, "R6": s_r6, "C2": -0.5, "C5": -0.5, **gains}
    q = {"R1": s_r1, "R3": 1.0, "R4": -0.5, "R6": s_r6, "C2": 0.5, "C5": -0.5, **gains}
    return w0, q


def analytic_sensitivities(design: FilterDesign) -> tuple[SensitivityReport, SensitivityReport]:
    w0, q = _analytic(design)
    return (
        SensitivityReport("omega0", {k: SensitivityEntry(v) for k, v in w0.items()}),
        SensitivityReport("q", {k: SensitivityEntry(v) for k, v in q.items()}),
    )


def _params_from_tf(design: FilterDesign) -> tuple[float, float]:
    # Canonical den = [w0^2, w0/Q, 1]; the mode does not affect it.
    den = nonideal_transfer_function(design, FilterMode.BANDPASS).den
    w0 = math.sqrt(den[0])
    return w0, w0 / den[1]


def numeric_sensitivities(
    design: FilterDesign, rel_step: float = 1e-6
) -> tuple[SensitivityReport, SensitivityReport]:
    """Central log-difference sensitivities, paired with the analytic values."""
    if not 1e-9 <= rel_step <= 1e-3:
        raise ValueError("rel_step must lie in [1e-9, 1e-3]")
    h = rel_step
    dlnx = math.log1p(h) - math.log1p(-h)
    w0_a, q_a = _analytic(design)
    w0_n, q_n = {}, {}
    for name in PARAMETERS:
        x = getattr(design, name)
        up = _params_from_tf(design.with_(**{name: x * (1 + h)}))
        dn = _params_from_tf(design.with_(**{name: x * (1 - h)}))
        # log of the ratio avoids cancelling two nearly equal logarithms
        w0_n[name] = math.log(up[0] / dn[0]) / dlnx
        q_n[name] = math.log(up[1] / dn[1]) / dlnx
    return (
        SensitivityReport("omega0", {k: SensitivityEntry(w0_a[k], w0_n[k]) for k in PARAMETERS}),
        SensitivityReport("q", {k: SensitivityEntry(q_a[k], q_n[k]) for k in PARAMETERS}),
    )
