"""Circuit and transfer-function data types.

Elements refer to nodes by name; ``"0"`` is ground. Values are SI
(ohms, farads, volts) and angular frequencies are in rad/s.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

GROUND = "0"
_GROUND_ALIASES = {"0", "gnd"}

#: Relative threshold below which polynomial coefficients are zeroed.
TRIM_RTOL = 1e-12


class CircuitError(Exception):
    """Base class for errors raised by ccfilter."""


class EvaluationAtPoleError(CircuitError):
    pass


def is_ground(name: str) -> bool:
    return name.lower() in _GROUND_ALIASES


def canonical_node(name: str) -> str:
    return GROUND if is_ground(name) else name


@dataclass(frozen=True)
class NodeId:
    name: str
    index: int


@dataclass(frozen=True)
class Resistor:
    name: str
    n1: str
    n2: str
    value: float

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.n1, self.n2)


@dataclass(frozen=True)
class Capacitor:
    name: str
    n1: str
    n2: str
    value: float

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.n1, self.n2)


@dataclass(frozen=True)
class VSource:
    """Independent AC voltage source; ``label`` names the filter input it drives."""

    name: str
    npos: str
    nneg: str
    amplitude: float = 1.0
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.name)

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.npos, self.nneg)


@dataclass(frozen=True)
class CCII:
    """Balanced-output second-generation current conveyor.

    Port law with all currents taken into the terminals::

        Vx = B * Vy,  Iy = 0,  Iz+ = K * Ix,  Iz- = -K * Ix
    """

    name: str
    y: str
    x: str
    zp: str
    zm: str
    B: float = 1.0
    K: float = 1.0

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.y, self.x, self.zp, self.zm)


Element = Union[Resistor, Capacitor, VSource, CCII]


@dataclass(frozen=True)
class Netlist:
    """An ordered element list plus the designated output node.

    ``nodes`` is the declared node table. When omitted it is derived from
    the elements, so only hand-built netlists can reference undeclared nodes.
    Construction does not validate; call :func:`validate`.
    """

    elements: tuple[Element, ...]
    output: str
    title: str = ""
    nodes: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.nodes is None:
            seen: dict[str, None] = {}
            for el in self.elements:
                for n in el.nodes:
                    if not is_ground(n):
                        seen.setdefault(n, None)
            if self.output and not is_ground(self.output):
                seen.setdefault(self.output, None)
            object.__setattr__(self, "nodes", tuple(seen))
        else:
            object.__setattr__(
                self, "nodes", tuple(n for n in self.nodes if not is_ground(n))
            )

    @property
    def inputs(self) -> dict[str, VSource]:
        return {el.label: el for el in self.elements if isinstance(el, VSource)}

    def node_table(self) -> dict[str, NodeId]:
        table = {GROUND: NodeId(GROUND, 0)}
        for i, n in enumerate(self.nodes, start=1):
            table[n] = NodeId(n, i)
        return table

    def count(self, kind: type) -> int:
        return sum(isinstance(el, kind) for el in self.elements)


def validate(netlist: Netlist) -> list[str]:
    """Return every invariant violation found in ``netlist``; empty means valid."""
    errors: list[str] = []
    declared = set(netlist.nodes)
    used: set[str] = set()

    names: set[str] = set()
    for el in netlist.elements:
        key = el.name.lower()
        if key in names:
            errors.append(f"{el.name}: duplicate element name")
        names.add(key)

        for n in el.nodes:
            if is_ground(n):
                continue
            used.add(n)
            if n not in declared:
                errors.append(f"{el.name}: unknown node {n!r}")

        if isinstance(el, (Resistor, Capacitor)):
            if not math.isfinite(el.value) or el.value <= 0:
                errors.append(f"{el.name}: nonpositive element value {el.value!r}")
        elif isinstance(el, VSource):
            if not math.isfinite(el.amplitude):
                errors.append(f"{el.name}: non-finite source amplitude")
            if canonical_node(el.npos) == canonical_node(el.nneg):
                errors.append(f"{el.name}: source terminals shorted")
        elif isinstance(el, CCII):
            if not (math.isfinite(el.B) and math.isfinite(el.K)):
                errors.append(f"{el.name}: non-finite CCII gain")

    if not any(isinstance(el, VSource) for el in netlist.elements):
        errors.append("no voltage source")
    if not netlist.output:
        errors.append("no output node designated")
    elif not is_ground(netlist.output) and netlist.output not in declared:
        errors.append(f"output: unknown node {netlist.output!r}")

    for n in netlist.nodes:
        if n not in used:
            errors.append(f"dangling node {n!r}: no element connects to it")

    # Union-find over element terminals; CCII ports count as connected.
    parent: dict[str, str] = {}

    def find(a: str) -> str:
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for el in netlist.elements:
        ns = [canonical_node(n) for n in el.nodes]
        for n in ns[1:]:
            parent[find(ns[0])] = find(n)
    ground_root = find(GROUND)
    for n in sorted(used):
        if find(n) != ground_root:
            errors.append(f"node {n!r} has no path to ground")
    return errors


def natural_scale(den: Sequence[float]) -> float:
    """Frequency at which the outer denominator coefficients balance.

    ``|d0 / dn| ** (1/n)`` for a denominator of degree n with nonzero ends,
    otherwise 1. Coefficient magnitudes are compared as ``|c_k| * scale**k``
    so the comparison does not depend on the units of s.
    """
    d = [float(v) for v in den]
    while len(d) > 1 and d[-1] == 0.0:
        d.pop()
    n = len(d) - 1
    if n < 1 or d[0] == 0.0 or not all(map(math.isfinite, d)):
        return 1.0
    return abs(d[0] / d[-1]) ** (1.0 / n)


def _trim(coeffs: Sequence[float], scale: float = 1.0) -> tuple[float, ...]:
    c = [float(v) for v in coeffs]
    mags = [abs(v) * scale**k for k, v in enumerate(c)]
    top = max(mags, default=0.0)
    c = [0.0 if m < TRIM_RTOL * top else v for v, m in zip(c, mags)]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c) if c else (0.0,)


@dataclass(frozen=True)
class RationalTF:
    """num(s)/den(s) with real coefficients stored in ascending powers of s.

    Instances are canonical: coefficients below ``TRIM_RTOL`` of their
    polynomial's largest coefficient are zeroed, trailing zeros dropped and
    the highest-order denominator coefficient scaled to exactly 1.
    "Below" is judged on ``|c_k| * w**k`` with ``w`` the denominator's
    :func:`natural_scale`.
    """

    num: tuple[float, ...]
    den: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self):
        if not all(map(math.isfinite, tuple(self.num) + tuple(self.den))):
            raise ValueError("non-finite transfer-function coefficient")
        w = natural_scale(self.den)
        num, den = _trim(self.num, w), _trim(self.den, w)
        lead = den[-1]
        if lead == 0.0:
            raise ValueError("denominator is the zero polynomial")
        if lead != 1.0:
            # "+ 0.0" folds -0.0 into 0.0
            num = tuple(c / lead + 0.0 for c in num)
            den = tuple(c / lead + 0.0 for c in den[:-1]) + (1.0,)
        if len(num) > len(den):
            raise ValueError("improper transfer function: deg(num) > deg(den)")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def order(self) -> int:
        return len(self.den) - 1

    def __call__(self, omega):
        return evaluate(self, omega)


def canonicalize(tf: RationalTF) -> RationalTF:
    return RationalTF(tf.num, tf.den)


def _polyval_asc(coeffs: Iterable[float], s):
    acc = 0
    for c in reversed(tuple(coeffs)):
        acc = acc * s + c
    return acc


def evaluate(tf: RationalTF, omega):
    """Complex gain num(jw)/den(jw); accepts a scalar or an array of w."""
    if np.ndim(omega) == 0:
        s = 1j * float(omega)
        d = _polyval_asc(tf.den, s)
        if abs(d) < 1e-14 * max(abs(c) for c in tf.den):
            raise EvaluationAtPoleError(f"evaluation at pole (omega={omega!r})")
        return complex(_polyval_asc(tf.num, s) / d)
    s = 1j * np.asarray(omega, dtype=float)
    d = np.polyval(tf.den[::-1], s)
    if np.any(np.abs(d) < 1e-14 * max(abs(c) for c in tf.den)):
        raise EvaluationAtPoleError("evaluation at pole")
    return np.polyval(tf.num[::-1], s) / d


def coefficient_error(a: Sequence[float], b: Sequence[float], scale: float = 1.0) -> float:
    """Largest per-coefficient relative error of ``a`` against reference ``b``.

    Where ``b`` has a zero, the error is taken relative to ``TRIM_RTOL``
    times the largest scaled reference coefficient instead.
    """
    n = max(len(a), len(b))
    a = list(a) + [0.0] * (n - len(a))
    b = list(b) + [0.0] * (n - len(b))
    w = [scale**k for k in range(n)]
    floor = TRIM_RTOL * max(abs(v) * wk for v, wk in zip(b, w))
    return max(abs(x - y) * wk / max(abs(y) * wk, floor) for x, y, wk in zip(a, b, w))


def tf_error(a: RationalTF, b: RationalTF) -> float:
    """Per-coefficient relative error of ``a`` against reference ``b``."""
    w = natural_scale(b.den)
    return max(coefficient_error(a.num, b.num, w), coefficient_error(a.den, b.den, w))


def phase_deg(z: complex) -> float:
    return math.degrees(cmath.phase(z))
