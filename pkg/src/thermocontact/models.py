"""Closed-form equilibrium families: diluted lattice gas and mean-field magnet.

A front f over a scalar intensive coordinate cuts out the graphical
Legendrian {z = f(q), p = f'(q)}.  The gas family uses

    phi_T(x) = -T ln(-x/T)          (x < 0)

shifted by a background pressure; on it p = f'(q) is the volume, q = -P,
and (P + P_back) p = T holds identically.  The magnet family is defined by
the self-consistency p = tanh((q + H_back + b p)/T) together with

    z = T ln(2 cosh((q + H_back + b p)/T)) - b p^2 / 2,

parameterized globally by the magnetization p (the equilibrium set is
multivalued over q once b/T > 1).  Both families admit a change of
variables to "barred" coordinates that preserves the reduced contact form
and flattens the reference family onto the zero section; the second family
then becomes the graph of a difference of fronts, which is where chords are
located.

Everything here is a pure function; FrontFunction evaluators are immutable
and shareable across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .phase_space import ReducedPoint

SELF_CONSISTENCY_TOL = 1e-10


class DomainError(ValueError):
    """A front was evaluated outside its open domain."""


@dataclass(frozen=True)
class FrontFunction:
    """A scalar generating function f with derivative and open domain."""

    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    label: str = ""

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"domain must be a non-empty open interval, got {self.domain}")

    def contains(self, x) -> bool:
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > lo) & (x < hi)))

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise DomainError(
                f"argument outside the open domain {self.domain} of front {self.label!r}"
            )
        return x

    def value(self, x):
        out = self.f(self._check(x))
        return float(out) if np.ndim(x) == 0 else np.asarray(out, dtype=float)

    def slope(self, x):
        out = self.fprime(self._check(x))
        return float(out) if np.ndim(x) == 0 else np.asarray(out, dtype=float)


def constant_front(
    value: float = 0.0, domain: tuple[float, float] = (-math.inf, math.inf)
) -> FrontFunction:
    c = float(value)
    return FrontFunction(
        f=lambda x: np.full_like(np.asarray(x, dtype=float), c),
        fprime=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        domain=domain,
        label=f"constant {c}",
    )


# ---------------------------------------------------------------------------
# building-block fronts

def gas_phi(T: float, x):
    """-T ln(-x/T) for x < 0."""
    return -T * np.log(-np.asarray(x, dtype=float) / T)


def gas_dphi(T: float, x):
    return -T / np.asarray(x, dtype=float)


def cw_phi(T: float, x):
    """T ln(2 cosh(x/T)), evaluated overflow-safe as T logaddexp(x/T, -x/T)."""
    u = np.asarray(x, dtype=float) / T
    return T * np.logaddexp(u, -u)


def cw_dphi(T: float, x):
    return np.tanh(np.asarray(x, dtype=float) / T)


@dataclass(frozen=True)
class IdealGasParams:
    T: float
    P_back: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class CurieWeissParams:
    T: float
    H_back: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("temperature must be positive")
        if not self.b > 0:
            raise ValueError("spin interaction b must be positive")


@dataclass(frozen=True)
class CWBranchPoint:
    """An equilibrium magnetization branch point (p, q, z) with its stability."""

    p: float
    q: float
    z: float
    stability: str  # 'global_min' | 'local_min' | 'unstable'


def gas_front(par: IdealGasParams) -> FrontFunction:
    """Equilibrium front of the gas at temperature T and background pressure.

    f(q) = phi_T(q - P_back) on q < P_back, so p = f'(q) is the volume and
    the state equation (P + P_back) p = T holds with q = -P.
    """
    T, pb = par.T, par.P_back
    return FrontFunction(
        f=lambda q: gas_phi(T, np.asarray(q, dtype=float) - pb),
        fprime=lambda q: gas_dphi(T, np.asarray(q, dtype=float) - pb),
        domain=(-math.inf, pb),
        label=f"gas front T={T:g}, P_back={pb:g}",
    )


def cw_entropy(p: float) -> float:
    """Mixing entropy of a magnetization p in (-1, 1); value in (0, ln 2]."""
    if not -1.0 < p < 1.0:
        raise ValueError(f"magnetization must lie in (-1, 1), got {p}")
    lo, hi = (1.0 - p) / 2.0, (1.0 + p) / 2.0
    out = 0.0
    if lo > 0:
        out -= lo * math.log(lo)
    if hi > 0:
        out -= hi * math.log(hi)
    return out


def _cw_z(p: float, q: float, par: CurieWeissParams) -> float:
    return float(cw_phi(par.T, q + par.H_back + par.b * p)) - par.b * p * p / 2.0


def cw_magnetization_roots(
    q: float,
    par: CurieWeissParams,
    scan_points: int = 10_000,
    tol: float = 1e-12,
) -> list[CWBranchPoint]:
    """All magnetizations solving p = tanh((q + H_back + b p)/T), with labels.

    Substituting p = tanh(y) turns the fixed-point equation into
    T y - b tanh(y) = q + H_back, whose roots are bracketed by a sign-change
    scan (default 10^4 nodes) and refined to ``tol``.  The substitution keeps
    near-saturated roots resolvable.  A root is unstable iff
    1 - (b/T)(1 - p^2) < 0; among the stable ones the largest z (smallest
    free energy) is the global minimum, ties resolved to the non-negative
    branch.
    """
    T, b = par.T, par.b
    target = q + par.H_back

    def resid(y: float) -> float:
        return T * y - b * math.tanh(y) - target

    y_lo = (target - b) / T - 1.0
    y_hi = (target + b) / T + 1.0
    ys = np.linspace(y_lo, y_hi, scan_points)
    vals = T * ys - b * np.tanh(ys) - target

    roots_y: list[float] = []
    for i in range(scan_points - 1):
        a, c = vals[i], vals[i + 1]
        if a == 0.0:
            roots_y.append(float(ys[i]))
        elif a * c < 0.0:
            roots_y.append(float(brentq(resid, ys[i], ys[i + 1], xtol=tol)))
    if vals[-1] == 0.0:
        roots_y.append(float(ys[-1]))

    deduped: list[float] = []
    for y in sorted(roots_y):
        if not deduped or abs(y - deduped[-1]) > 10 * tol:
            deduped.append(y)

    points = []
    for y in deduped:
        p = math.tanh(y)
        residual = abs(p - math.tanh((q + par.H_back + b * p) / T))
        if residual > SELF_CONSISTENCY_TOL:
            raise RuntimeError(
                f"self-consistency residual {residual:.3e} exceeds "
                f"{SELF_CONSISTENCY_TOL} at p={p!r}"
            )
        unstable = 1.0 - (b / T) * (1.0 - p * p) < 0.0
        points.append([p, _cw_z(p, q, par), unstable])

    stable = [pt for pt in points if not pt[2]]
    best = None
    if stable:
        z_max = max(pt[1] for pt in stable)
        candidates = [pt for pt in stable if pt[1] >= z_max - 1e-12 * max(1.0, abs(z_max))]
        best = max(candidates, key=lambda pt: pt[0] >= 0)

    out = []
    for pt in sorted(points, key=lambda pt: pt[0]):
        if pt[2]:
            label = "unstable"
        elif pt is best:
            label = "global_min"
        else:
            label = "local_min"
        out.append(CWBranchPoint(pt[0], q, pt[1], label))
    return out


def select_equilibrium(points: list[CWBranchPoint]) -> CWBranchPoint:
    """The branch point labeled global_min (falls back to the largest z)."""
    if not points:
        raise ValueError("no branch points to select from")
    for pt in points:
        if pt.stability == "global_min":
            return pt
    return max(points, key=lambda pt: pt.z)


def cw_point_from_p(p: float, par: CurieWeissParams) -> CWBranchPoint:
    """Equilibrium point over magnetization p: q = -b p + T atanh(p) - H_back."""
    if not -1.0 < p < 1.0:
        raise ValueError(f"magnetization must lie in (-1, 1), got {p}")
    q = -par.b * p + par.T * math.atanh(p) - par.H_back
    z = _cw_z(p, q, par)
    residual = abs(p - math.tanh((q + par.H_back + par.b * p) / par.T))
    if residual > SELF_CONSISTENCY_TOL:
        raise RuntimeError(f"self-consistency residual {residual:.3e} too large")
    roots = cw_magnetization_roots(q, par)
    nearest = min(roots, key=lambda r: abs(r.p - p))
    return CWBranchPoint(p, q, z, nearest.stability)


def difference_front(model: str, t0: float, t1: float, c: float) -> FrontFunction:
    """Front of the hotter family over the flattened colder one.

    gas: psi(x) = phi_{t1}(x - c) - phi_{t0}(x) on x < min(0, c);
    cw:  psi(Q) = Phi_{t1}(Q + c) - Phi_{t0}(Q) on all of R, with
    Phi_T(x) = T ln(2 cosh(x/T)).  The magnet's spin interaction cancels in
    the barred picture, so it does not enter here.
    """
    if not 0 < t0 < t1:
        raise ValueError("need t1 > t0 > 0")
    if model == "gas":
        return FrontFunction(
            f=lambda x: gas_phi(t1, np.asarray(x, dtype=float) - c) - gas_phi(t0, x),
            fprime=lambda x: gas_dphi(t1, np.asarray(x, dtype=float) - c)
            - gas_dphi(t0, x),
            domain=(-math.inf, min(0.0, c)),
            label=f"gas difference front t0={t0:g}, t1={t1:g}, c={c:g}",
        )
    if model == "cw":
        return FrontFunction(
            f=lambda x: cw_phi(t1, np.asarray(x, dtype=float) + c) - cw_phi(t0, x),
            fprime=lambda x: cw_dphi(t1, np.asarray(x, dtype=float) + c)
            - cw_dphi(t0, x),
            domain=(-math.inf, math.inf),
            label=f"cw difference front t0={t0:g}, t1={t1:g}, c={c:g}",
        )
    raise ValueError(f"unknown model {model!r}, expected 'gas' or 'cw'")


# ---------------------------------------------------------------------------
# barred changes of variables

def _scalar_point(pt: ReducedPoint) -> tuple[float, float, float]:
    if pt.k != 1:
        raise ValueError("barred changes of variables expect scalar (k=1) points")
    return pt.z, float(pt.p[0]), float(pt.q[0])


def gas_to_barred(pt: ReducedPoint, t0: float) -> ReducedPoint:
    """(z, p, q) -> (z - phi_{t0}(q), p - phi'_{t0}(q), q); needs q < 0."""
    z, p, q = _scalar_point(pt)
    if not q < 0:
        raise DomainError(f"gas barred map needs q < 0, got q={q}")
    return ReducedPoint(z - float(gas_phi(t0, q)), [p - float(gas_dphi(t0, q))], [q])


def gas_from_barred(pt: ReducedPoint, t0: float) -> ReducedPoint:
    z, p, q = _scalar_point(pt)
    if not q < 0:
        raise DomainError(f"gas barred map needs q < 0, got q={q}")
    return ReducedPoint(z + float(gas_phi(t0, q)), [p + float(gas_dphi(t0, q))], [q])


def cw_to_barred(pt: ReducedPoint, t0: float, b: float) -> ReducedPoint:
    """(z, p, q) -> (Z, P, Q) with Q = q + b p, P = p - Phi'_{t0}(Q),
    Z = z - Phi_{t0}(Q) + b p^2/2.  Preserves dz - p dq."""
    z, p, q = _scalar_point(pt)
    Q = q + b * p
    return ReducedPoint(
        z - float(cw_phi(t0, Q)) + b * p * p / 2.0,
        [p - float(cw_dphi(t0, Q))],
        [Q],
    )


def cw_from_barred(pt: ReducedPoint, t0: float, b: float) -> ReducedPoint:
    Z, P, Q = _scalar_point(pt)
    p = P + float(cw_dphi(t0, Q))
    return ReducedPoint(
        Z + float(cw_phi(t0, Q)) - b * p * p / 2.0,
        [p],
        [Q - b * p],
    )


# ---------------------------------------------------------------------------
# derivative identities of the magnet family

def cw_coupling_derivatives(p: float, T: float, q: float) -> tuple[float, float]:
    """Equilibrium-branch derivatives in the coupling b at fixed (T, q).

    Returns (dz/db, db/dp) with u(p) = atanh(p):

        dz/db = p^2 / 2,
        db/dp = T ((p u'(p) - u(p)) + q/T) / p^2.

    Both are positive for p in (0, 1) and q >= 0.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"magnetization must lie in (0, 1), got {p}")
    if not T > 0:
        raise ValueError("temperature must be positive")
    u = math.atanh(p)
    du = 1.0 / (1.0 - p * p)
    dz_db = p * p / 2.0
    db_dp = T * ((p * du - u) + q / T) / (p * p)
    return dz_db, db_dp


def cw_dz_dT(p: float, q: float, T: float, b: float) -> float:
    """d/dT of the magnet z-formula at fixed (p, q), with A = q + b p:

        ln 2 + ln cosh(A/T) - (A/T) tanh(A/T),

    which equals the mixing entropy of tanh(A/T) and is strictly positive
    for finite A/T.  Evaluated as 2sw/(1+w) + log1p(w) with s = |A/T| and
    w = exp(-2s), which keeps the exponentially small tail representable
    instead of being absorbed by the large cosh term.
    """
    if not -1.0 < p < 1.0:
        raise ValueError(f"magnetization must lie in (-1, 1), got {p}")
    if not T > 0:
        raise ValueError("temperature must be positive")
    s = abs(q + b * p) / T
    w = math.exp(-2.0 * s)
    return 2.0 * s * w / (1.0 + w) + math.log1p(w)


# ---------------------------------------------------------------------------
# sampling helpers

def sample_gas_legendrian(par: IdealGasParams, q_grid) -> np.ndarray:
    """Columns (q, p, z) of the gas equilibrium family over a q grid."""
    front = gas_front(par)
    q = np.asarray(q_grid, dtype=float)
    return np.column_stack([q, front.slope(q), front.value(q)])


def sample_cw_legendrian(par: CurieWeissParams, p_grid) -> np.ndarray:
    """Columns (q, p, z, S) of the magnet equilibrium family over a p grid."""
    rows = []
    for p in np.asarray(p_grid, dtype=float):
        pt = cw_point_from_p(float(p), par)
        rows.append([pt.q, pt.p, pt.z, cw_entropy(pt.p)])
    return np.array(rows)
