"""Small-signal AC modified nodal analysis.

Unknowns are the non-ground node voltages, then one branch current per
voltage source, then one x-port current per conveyor. The system matrix
splits as ``A(w) = G + jw*C`` so a sweep stamps the netlist once and
solves every frequency in a single batched LU call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .circuit import CCII, Capacitor, CircuitError, Netlist, RationalTF, Resistor, VSource, is_ground
from .response import FrequencyResponse

RESIDUAL_RTOL = 1e-9
PIVOT_RTOL = 1e-13
FIT_COND_LIMIT = 1e12


class SingularCircuitError(CircuitError):
    def __init__(self, message, unknown=None, omega=None):
        super().__init__(message)
        self.unknown = unknown
        self.omega = omega


class FitError(CircuitError):
    pass


@dataclass(frozen=True)
class MnaSystem:
    A: np.ndarray
    b: np.ndarray
    labels: tuple[str, ...]
    omega: float

    @property
    def dimension(self) -> int:
        return len(self.labels)

    @property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}


@dataclass(frozen=True)
class _Stamps:
    G: np.ndarray
    C: np.ndarray
    b: np.ndarray
    labels: tuple[str, ...]
    out: int  # -1 when the output is ground
    ref_amplitude: float


def _stamp(netlist: Netlist) -> _Stamps:
    nodes = netlist.nodes
    vsrcs = [el for el in netlist.elements if isinstance(el, VSource)]
    cciis = [el for el in netlist.elements if isinstance(el, CCII)]
    labels = (
        tuple(f"V({n})" for n in nodes)
        + tuple(f"I({v.name})" for v in vsrcs)
        + tuple(f"Ix({x.name})" for x in cciis)
    )
    n = len(labels)
    pos = {name: i for i, name in enumerate(nodes)}

    def idx(name):
        return -1 if is_ground(name) else pos[name]

    G = np.zeros((n, n))
    C = np.zeros((n, n))
    b = np.zeros(n)

    def admittance(M, a, c, y):
        i, j = idx(a), idx(c)
        if i >= 0:
            M[i, i] += y
        if j >= 0:
            M[j, j] += y
        if i >= 0 and j >= 0:
            M[i, j] -= y
            M[j, i] -= y

    branch = len(nodes)
    for el in netlist.elements:
        if isinstance(el, Resistor):
            admittance(G, el.n1, el.n2, 1.0 / el.value)
        elif isinstance(el, Capacitor):
            admittance(C, el.n1, el.n2, el.value)

    for v in vsrcs:
        p, m = idx(v.npos), idx(v.nneg)
        if p >= 0:
            G[p, branch] += 1.0
            G[branch, p] += 1.0
        if m >= 0:
            G[m, branch] -= 1.0
            G[branch, m] -= 1.0
        b[branch] = v.amplitude
        branch += 1

    # Terminal currents flow into the device: Ix leaves node x, K*Ix leaves
    # z+, -K*Ix leaves z-. Constraint row: Vx - B*Vy = 0. Iy = 0 adds nothing.
    for x in cciis:
        ix, iy, izp, izm = idx(x.x), idx(x.y), idx(x.zp), idx(x.zm)
        if ix >= 0:
            G[ix, branch] += 1.0
            G[branch, ix] += 1.0
        if iy >= 0:
            G[branch, iy] -= x.B
        if izp >= 0:
            G[izp, branch] += x.K
        if izm >= 0:
            G[izm, branch] -= x.K
        branch += 1

    amps = [abs(v.amplitude) for v in vsrcs]
    ref = max(amps) if amps and max(amps) > 0 else 1.0
    return _Stamps(G, C, b, labels, idx(netlist.output), ref)


def assemble(netlist: Netlist, omega: float) -> MnaSystem:
    if omega < 0:
        raise ValueError("omega must be non-negative")
    st = _stamp(netlist)
    return MnaSystem(st.G + 1j * omega * st.C, st.b.astype(complex), st.labels, float(omega))


def _solve_batch(A, b, labels, omegas):
    x, bad = _kernels.lu_solve_batch(A, b, PIVOT_RTOL)
    failed = np.nonzero(bad >= 0)[0]
    if failed.size:
        k = int(failed[0])
        row = labels[int(bad[k])]
        raise SingularCircuitError(
            f"singular circuit at omega={omegas[k]:.6g} rad/s (pivot on {row})",
            unknown=row, omega=float(omegas[k]),
        )
    r = np.einsum("kij,kj->ki", A, x) - b
    rnorm = np.abs(r).max(axis=1)
    bnorm = np.abs(b).max(axis=1)
    worst = np.nonzero(rnorm > RESIDUAL_RTOL * np.maximum(bnorm, np.finfo(float).tiny))[0]
    if worst.size:
        k = int(worst[0])
        raise SingularCircuitError(
            f"residual bound violated at omega={omegas[k]:.6g} rad/s "
            f"({rnorm[k]:.3g} > {RESIDUAL_RTOL:g} * {bnorm[k]:.3g})",
            omega=float(omegas[k]),
        )
    return x


def solve(system: MnaSystem) -> np.ndarray:
    """LU-solve one assembled system; raises :class:`SingularCircuitError`."""
    x = _solve_batch(system.A[None], system.b[None], system.labels, [system.omega])
    return x[0]


def residual(system: MnaSystem, x: np.ndarray) -> float:
    """``|Ax - b|_inf / |b|_inf``."""
    bn = np.abs(system.b).max(initial=0.0)
    return float(np.abs(system.A @ x - system.b).max(initial=0.0) / (bn or 1.0))


def ac_sweep(netlist: Netlist, omegas) -> FrequencyResponse:
    """Output voltage per volt of source amplitude at each frequency."""
    w = np.asarray(omegas, dtype=float).ravel()
    if w.size == 0 or np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ValueError("omegas must be positive and strictly increasing")
    st = _stamp(netlist)
    if st.out < 0:
        return FrequencyResponse(w, np.zeros(w.size, dtype=complex))
    A = st.G[None, :, :] + 1j * w[:, None, None] * st.C[None, :, :]
    b = np.broadcast_to(st.b.astype(complex), (w.size, st.b.size))
    x = _solve_batch(A, np.ascontiguousarray(b), st.labels, w)
    return FrequencyResponse(w, x[:, st.out] / st.ref_amplitude)


def characteristic_omega(netlist: Netlist) -> float:
    """1/(mean R * mean C); 1 rad/s when the netlist lacks R or C."""
    rs = [el.value for el in netlist.elements if isinstance(el, Resistor)]
    cs = [el.value for el in netlist.elements if isinstance(el, Capacitor)]
    if not cs:
        return 1.0
    r = float(np.mean(rs)) if rs else 1.0
    return 1.0 / (r * float(np.mean(cs)))


def _fit_rational(s, h, n, weights=None):
    """Null vector of ``[V, -h*V]`` with V the Vandermonde matrix in ``s``.

    Returns (num, den) ascending, unit-norm jointly, plus the condition
    estimate ``sigma_max / sigma_(second smallest)``.
    """
    V = s[:, None] ** np.arange(n + 1)[None, :]
    M = np.hstack([V, -h[:, None] * V])
    if weights is not None:
        M = M * weights[:, None]
    M = np.vstack([M.real, M.imag])
    scale = np.linalg.norm(M, axis=0)
    scale[scale == 0] = 1.0
    _, sv, vt = np.linalg.svd(M / scale, full_matrices=False)
    coef = vt[-1] / scale
    cond = sv[0] / sv[-2] if sv.size > 1 and sv[-2] > 0 else math.inf
    return coef[: n + 1], coef[n + 1:], cond


def extract_tf(netlist: Netlist, max_degree: int | None = None) -> RationalTF:
    """Recover the output transfer function from sampled MNA solutions.

    Samples ``2*(2n+1)`` log-spaced frequencies over four decades around
    :func:`characteristic_omega`, fits num/den of degree <= n, then does one
    Sanathanan-Koerner reweighted least-squares pass on a 10x denser grid.
    """
    if max_degree is None:
        max_degree = netlist.count(Capacitor)
    n = int(max_degree)
    if n < 0:
        raise ValueError("max_degree must be non-negative")
    w_est = characteristic_omega(netlist)
    m = 2 * (2 * n + 1)

    def samples(count):
        w = np.logspace(math.log10(w_est / 100), math.log10(w_est * 100), count)
        return 1j * w / w_est, ac_sweep(netlist, w).gain

    s, h = samples(m)
    num, den, cond = _fit_rational(s, h, n)
    if not cond < FIT_COND_LIMIT:
        raise FitError(f"degree overestimate or degenerate circuit (condition {cond:.3g})")

    s, h = samples(10 * m)
    d0 = np.polyval(den[::-1], s)
    if np.any(d0 == 0):
        raise FitError("degree overestimate or degenerate circuit (pole on the fit grid)")
    num, den, cond = _fit_rational(s, h, n, weights=1.0 / np.abs(d0))
    if not cond < FIT_COND_LIMIT:
        raise FitError(f"degree overestimate or degenerate circuit (condition {cond:.3g})")

    unscale = w_est ** -np.arange(n + 1, dtype=float)
    return RationalTF(tuple(num * unscale), tuple(den * unscale))
