"""Slow, fast and ultrafast process simulation.

Three process classes are covered:

* slow isotopies of a whole equilibrium family under a temperature/background
  schedule, traced per point of the initial family;
* fast relaxations of a single density under the projected free-energy
  gradient flow on the simplex (explicit Euler with positivity and Lyapunov
  safeguards);
* ultrafast two-stage jumps, where an abrupt parameter change re-prices the
  free energy at frozen extensive variables and the relaxation stage may be
  void.

A four-segment constant-temperature / constant-volume loop of the gas model
(the classic regenerative engine cycle) is assembled from the same pieces,
with the isochoric corners carried by closed-form chords.

Per-point paths of an isotopy and independent relaxation runs are
embarrassingly parallel; each run is internally sequential and outputs are
ordered deterministically by input index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import microstate as ms
from .chords import Chord, DegenerateChordError, gas_chord
from .models import (
    CurieWeissParams,
    cw_magnetization_roots,
    cw_phi,
    gas_dphi,
    gas_phi,
)
from .phase_space import (
    NonnegReport,
    ReducedPoint,
    ReductionSpec,
    SampledPath,
    check_path_nonnegative,
    reduce,
)


class BranchLossError(RuntimeError):
    """A tracked equilibrium branch disappeared during an isotopy."""


class IntegrationError(RuntimeError):
    """The adaptive integrator could not take an acceptable step."""


@dataclass(frozen=True)
class Schedule:
    """A time grid with a temperature and a background value per node."""

    times: np.ndarray
    temperatures: np.ndarray
    backgrounds: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True).reshape(-1)
        T = np.array(self.temperatures, dtype=float, copy=True).reshape(-1)
        bg = np.array(self.backgrounds, dtype=float, copy=True).reshape(-1)
        for arr in (t, T, bg):
            arr.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "temperatures", T)
        object.__setattr__(self, "backgrounds", bg)
        if not (t.size == T.size == bg.size and t.size >= 2):
            raise ValueError("schedule needs >= 2 nodes of equal length")
        if not np.all(np.diff(t) > 0):
            raise ValueError("schedule times must be strictly increasing")
        if not np.all(T > 0):
            raise ValueError("schedule temperatures must be positive")

    @classmethod
    def linear(
        cls,
        n_nodes: int,
        T_start: float,
        T_end: float,
        bg_start: float = 0.0,
        bg_end: float = 0.0,
        duration: float = 1.0,
    ) -> "Schedule":
        t = np.linspace(0.0, duration, n_nodes)
        return cls(
            t,
            np.linspace(T_start, T_end, n_nodes),
            np.linspace(bg_start, bg_end, n_nodes),
        )

    @property
    def temperature_nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.temperatures) >= 0))


@dataclass(frozen=True)
class IsotopyTrace:
    """Per-point traces of an equilibrium family under a schedule."""

    model: str
    b: float | None
    schedule: Schedule
    x_grid: np.ndarray
    paths: tuple[SampledPath, ...]
    reports: tuple[NonnegReport, ...]

    def slice_points(self, j: int) -> list[ReducedPoint]:
        """The family sample at time node j."""
        return [path.points[j] for path in self.paths]

    def legendrian_residual(self) -> float:
        """Max distance of any sample from the scheduled equilibrium family."""
        worst = 0.0
        sched = self.schedule
        for path in self.paths:
            for j, pt in enumerate(path.points):
                T = sched.temperatures[j]
                bg = sched.backgrounds[j]
                p, q = float(pt.p[0]), float(pt.q[0])
                if self.model == "gas":
                    worst = max(
                        worst,
                        abs(p - float(gas_dphi(T, q - bg))),
                        abs(pt.z - float(gas_phi(T, q - bg))),
                    )
                else:
                    arg = q + bg + self.b * p
                    worst = max(
                        worst,
                        abs(p - math.tanh(arg / T)),
                        abs(pt.z - (float(cw_phi(T, arg)) - self.b * p * p / 2.0)),
                    )
        return worst


def run_slow_isotopy(
    model: str,
    sched: Schedule,
    x_grid,
    b: float | None = None,
    slack: float = 1e-8,
    scan_points: int = 10_000,
    branch_jump_tol: float = 0.1,
) -> IsotopyTrace:
    """Trace the scheduled equilibrium family point by point.

    Each x is a chart parameter of the initial family: an intensive value q
    for the gas, a magnetization p for the magnet.  The intensive coordinate
    of every traced point is held fixed while the family moves, so the gas
    point follows p = phi'_T(q - bg) directly and the magnet point tracks
    the self-consistency root nearest to its previous magnetization.  A
    magnetization jump above ``branch_jump_tol`` means the tracked branch
    disappeared (a fold of the family); this raises
    :class:`BranchLossError` naming the time node rather than silently
    hopping branches.
    """
    if model not in ("gas", "cw"):
        raise ValueError(f"unknown model {model!r}, expected 'gas' or 'cw'")
    x_grid = np.asarray(x_grid, dtype=float).reshape(-1)
    if x_grid.size == 0:
        raise ValueError("x_grid must not be empty")
    times = sched.times
    temps = sched.temperatures
    bgs = sched.backgrounds

    paths: list[SampledPath] = []
    if model == "gas":
        for x in x_grid:
            if not np.all(x - bgs < 0):
                raise ValueError(
                    f"gas chart value q={x} leaves the front domain under the schedule"
                )
            pts = []
            for j in range(times.size):
                arg = x - bgs[j]
                pts.append(
                    ReducedPoint(
                        float(gas_phi(temps[j], arg)),
                        [float(gas_dphi(temps[j], arg))],
                        [x],
                    )
                )
            paths.append(SampledPath(times, tuple(pts)))
    else:
        if b is None or not b > 0:
            raise ValueError("the magnet model needs a positive spin interaction b")
        for x in x_grid:
            if not -1.0 < x < 1.0:
                raise ValueError(f"magnet chart value p={x} must lie in (-1, 1)")
            q = -b * x + temps[0] * math.atanh(x) - bgs[0]
            p_prev = float(x)
            pts = []
            for j in range(times.size):
                par = CurieWeissParams(T=temps[j], H_back=bgs[j], b=b)
                roots = cw_magnetization_roots(q, par, scan_points=scan_points)
                nearest = min(roots, key=lambda r: abs(r.p - p_prev))
                if abs(nearest.p - p_prev) > branch_jump_tol:
                    raise BranchLossError(
                        f"equilibrium branch lost at time node {j} "
                        f"(t={times[j]:.6g}): magnetization jumped from "
                        f"{p_prev:.6g} to {nearest.p:.6g}"
                    )
                p_prev = nearest.p
                pts.append(ReducedPoint(nearest.z, [nearest.p], [q]))
            paths.append(SampledPath(times, tuple(pts)))

    reports = tuple(check_path_nonnegative(path, slack=slack) for path in paths)
    return IsotopyTrace(model, b, sched, x_grid, tuple(paths), reports)


# ---------------------------------------------------------------------------
# ultrafast jumps

@dataclass(frozen=True)
class JumpRecord:
    """Stage-1 outcome of an abrupt parameter change at frozen density."""

    before: ReducedPoint
    after_stage1: ReducedPoint
    is_ultrafast: bool
    gibbs_residual: float


def ultrafast_jump(
    sp: ms.MicrostateSpace,
    h: ms.AffineHamiltonian,
    T0: float,
    T1: float,
    q,
    background_jump,
    coincidence_tol: float = 1e-8,
) -> JumpRecord:
    """Jump the temperature T0 -> T1 and the background by c at frozen state.

    The system starts in the free-energy minimizer at (T0, q).  The jump
    leaves the density (hence the extensive variables p and the coordinate
    q) untouched; only z is re-priced against the new parameters, the
    background entering the Hamiltonian as an internal-energy shift
    c . v_bar.  The jump is ultrafast when the frozen density already is the
    minimizer of the post-jump parameters, measured in total variation
    against ``coincidence_tol``; otherwise stage 2 is a relaxation
    (:func:`fokker_planck_relax`).
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    c = np.asarray(background_jump, dtype=float).reshape(-1)
    if q.size != c.size:
        raise ValueError("background jump must match the dimension of q")
    rho0 = ms.gibbs(sp, h, T0, q).rho_g
    p0 = ms.pressures(sp, h, rho0)
    z0 = -ms.free_energy(sp, h, T0, q, rho0)
    z1 = -ms.free_energy(sp, h, T1, q + c, rho0)
    before = ReducedPoint(z0, p0, q)
    after = ReducedPoint(z1, p0, q)
    residual = ms.total_variation(sp, rho0, ms.gibbs(sp, h, T1, q + c).rho_g)
    return JumpRecord(before, after, residual <= coincidence_tol, residual)


# ---------------------------------------------------------------------------
# fast relaxation

@dataclass(frozen=True)
class RelaxTrace:
    """Nodes of a simplex gradient-flow relaxation.

    ``temperatures[j]`` is the coefficient used over the step leaving node
    j, so the per-step Lyapunov contract compares G at that temperature.
    """

    t_grid: np.ndarray
    densities: tuple[ms.Density, ...]
    temperatures: np.ndarray
    reduced_path: SampledPath
    form_values: np.ndarray
    G_values: np.ndarray

    def spectral_gap_estimate(self) -> float:
        """Decay-rate estimate fitted to the free-energy tail.

        G - G_end decays like exp(-2 gap t) on the linear regime; returns
        the fitted gap, or nan when the trace has no usable tail.
        """
        g_rel = self.G_values - self.G_values[-1]
        mask = g_rel > max(1e-13, 1e-10 * abs(self.G_values[0] - self.G_values[-1]))
        if mask.sum() < 3:
            return float("nan")
        t = self.t_grid[mask]
        y = np.log(g_rel[mask])
        slope = np.polyfit(t, y, 1)[0]
        return float(-slope / 2.0)


def fokker_planck_relax(
    sp: ms.MicrostateSpace,
    h: ms.AffineHamiltonian,
    q,
    T_of_t: Callable[[float], float],
    rho0: ms.Density,
    dt0: float,
    t_end: float,
    rho_floor: float = 1e-14,
    lyapunov_tol: float = 1e-12,
) -> RelaxTrace:
    """Integrate the projected free-energy gradient flow of the density.

    The descent direction is the variational derivative
    g_i = T (1 + ln rho_i) + H(q, m_i) recentred by its weighted mean, so
    mass is conserved exactly and the free energy is a Lyapunov function at
    fixed temperature.  Explicit Euler steps are halved whenever an entry
    would drop below ``rho_floor`` or G would rise (beyond ``lyapunov_tol``)
    at the step temperature; a step below 1e-15 aborts the run.  The
    temperature schedule must be positive and non-decreasing; the intensive
    variables q stay fixed.  The trace carries the reduced (z, p, q) path,
    per-step contact-form estimates (z difference quotients, q being
    constant) and the free-energy values.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if not dt0 > 0:
        raise ValueError("dt0 must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    ms.check_density(sp, rho0)
    if float(rho0.rho.min()) <= rho_floor:
        raise ValueError("initial density must be strictly positive (above the floor)")

    w = sp.weights
    w_total = sp.total_weight
    energies = h.energies(q)

    def G_of(T: float, rho: np.ndarray) -> float:
        return float(T * np.dot(w, rho * np.log(rho)) + np.dot(w * energies, rho))

    t = 0.0
    rho = rho0.rho.copy()
    T = float(T_of_t(0.0))
    if not T > 0:
        raise ValueError("temperature schedule must be positive")

    ts = [0.0]
    rhos = [rho.copy()]
    temps = [T]
    last_T = T
    dt = min(dt0, t_end)
    while t < t_end - 1e-12 * t_end:
        T = float(T_of_t(t))
        if not T > 0:
            raise ValueError(f"temperature schedule must be positive at t={t:.6g}")
        if T < last_T - 1e-12:
            raise ValueError(
                f"temperature schedule must be non-decreasing (drops at t={t:.6g})"
            )
        last_T = T
        g = T * (1.0 + np.log(rho)) + energies
        g = g - np.dot(w, g) / w_total
        g_curr = G_of(T, rho)
        dt = min(dt, t_end - t)
        while True:
            trial = rho - dt * g
            if float(trial.min()) > rho_floor and G_of(T, trial) <= g_curr + lyapunov_tol:
                break
            dt *= 0.5
            if dt < 1e-15:
                raise IntegrationError(
                    f"step size underflow at t={t:.6g} (dt={dt:.3e}); "
                    "the flow cannot keep the density positive"
                )
        t += dt
        rho = trial
        ts.append(t)
        rhos.append(rho.copy())
        temps.append(float(T_of_t(t)))
        dt = min(dt * 2.0, dt0)

    t_grid = np.array(ts)
    temperatures = np.array(temps)
    densities = tuple(ms.Density(r) for r in rhos)
    reduced_pts = []
    G_values = np.empty(t_grid.size)
    n = q.size
    for j, d in enumerate(densities):
        T_j = temperatures[j]
        ext = ms.lift_to_extended(sp, h, T_j, q, d)
        reduced_pts.append(reduce(ext, ReductionSpec(k=n, T0=T_j)))
        G_values[j] = -ext.z
    reduced_path = SampledPath(t_grid, tuple(reduced_pts))
    z = np.array([pt.z for pt in reduced_pts])
    form_values = np.diff(z) / np.diff(t_grid)
    return RelaxTrace(
        t_grid, densities, temperatures, reduced_path, form_values, G_values
    )


# ---------------------------------------------------------------------------
# the four-segment engine cycle

@dataclass(frozen=True)
class CycleSegment:
    name: str
    path: SampledPath
    delta_G: float
    form_sign: str  # 'zero' | 'positive' | 'negative'
    chord: Chord | None
    temperature_decreasing: bool
    degenerate: bool


@dataclass(frozen=True)
class StirlingCycleTrace:
    T_C: float
    T_H: float
    v_min: float
    v_max: float
    segments: tuple[CycleSegment, ...]

    @property
    def closure_residual(self) -> float:
        first = self.segments[0].path.points[0]
        last = self.segments[-1].path.points[-1]
        return max(
            abs(float(first.p[0]) - float(last.p[0])),
            abs(float(first.q[0]) - float(last.q[0])),
        )

    @property
    def total_delta_G(self) -> float:
        return float(sum(seg.delta_G for seg in self.segments))


def _gas_state(T: float, v: float) -> ReducedPoint:
    # physical chart: q is minus the total pressure T/v, z = T ln v
    return ReducedPoint(T * math.log(v), [v], [-T / v])


def stirling_cycle(
    T_C: float, T_H: float, v_min: float, v_max: float, n_samples: int = 101
) -> StirlingCycleTrace:
    """Assemble the four-segment cycle of the gas between two isotherms.

    Segments, in order: isotherm at T_H from v_max down to v_min, isochoric
    cooling at v_min, isotherm at T_C from v_min up to v_max, isochoric
    heating at v_max, closing the loop.  The trace lives in the physical
    chart (p = volume, q = minus total pressure), which makes the loop close
    exactly; each isochoric corner additionally carries its closed-form
    chord record, i.e. the same jump written in the chart where the
    background pressure absorbs the pressure change and the corner is a
    vertical z segment.  The heating corner has a positive form sign and the
    cooling corner a negative one (for volumes above 1/e); the cooling
    corner is flagged temperature-decreasing since it runs against the
    admissibility convention for reduced processes.  Corners at volume 1 are
    degenerate (the chord shrinks to a point) and carry no chord record.
    """
    if not 0 < T_C < T_H:
        raise ValueError("need T_H > T_C > 0")
    if not 0 < v_min < v_max:
        raise ValueError("need v_max > v_min > 0")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")

    def isotherm(T: float, v_from: float, v_to: float, t0: float, name: str):
        vs = np.linspace(v_from, v_to, n_samples)
        pts = tuple(_gas_state(T, float(v)) for v in vs)
        path = SampledPath(np.linspace(t0, t0 + 1.0, n_samples), pts)
        delta_G = -(pts[-1].z - pts[0].z)
        return CycleSegment(name, path, delta_G, "zero", None, False, False)

    def corner(T_from: float, T_to: float, v: float, t0: float, name: str):
        a = _gas_state(T_from, v)
        bpt = _gas_state(T_to, v)
        path = SampledPath(np.array([t0, t0 + 1.0]), (a, bpt))
        delta_G = -(bpt.z - a.z)
        # form increment dz - p dq along the straight corner segment
        increment = (bpt.z - a.z) - float(a.p[0]) * (float(bpt.q[0]) - float(a.q[0]))
        if abs(increment) <= 1e-12:
            sign = "zero"
        else:
            sign = "positive" if increment > 0 else "negative"
        c = abs(T_to - T_from) / v
        try:
            chord = gas_chord(min(T_from, T_to), max(T_from, T_to), c)
            degenerate = False
        except DegenerateChordError:
            chord = None
            degenerate = True
        return CycleSegment(
            name, path, delta_G, sign, chord, T_to < T_from, degenerate
        )

    segments = (
        isotherm(T_H, v_max, v_min, 0.0, "isotherm_hot"),
        corner(T_H, T_C, v_min, 1.0, "cooling_corner"),
        isotherm(T_C, v_min, v_max, 2.0, "isotherm_cold"),
        corner(T_C, T_H, v_max, 3.0, "heating_corner"),
    )
    return StirlingCycleTrace(T_C, T_H, v_min, v_max, segments)
