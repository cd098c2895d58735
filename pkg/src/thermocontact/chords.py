"""Reeb chord detection between graphical equilibrium families.

A chord is a segment parallel to the z-axis joining two Legendrians over a
common (p, q) point; it is non-trivial when its length is positive.  For two
fronts f0, f1 over one chart, chords sit exactly at the critical points of
the difference psi = f1 - f0: there the slopes agree and the z gap is
psi(x).  Closed forms are provided for the gas and magnet family pairs and a
generic scan-and-bisect finder handles arbitrary front pairs.  All
functions are pure; finder results are ordered by abscissa, so grid scans
could be farmed out in parallel with a deterministic merge.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .models import FrontFunction, cw_phi

TRIVIAL_LENGTH_TOL = 1e-10


class DegenerateChordError(RuntimeError):
    """The requested chord has zero length."""


class DegenerateFamilyError(RuntimeError):
    """The front difference is constant: every point carries a chord."""


@dataclass(frozen=True)
class Chord:
    """A vertical segment between two fronts over the common point (q, p)."""

    q: float
    p: float
    z_start: float
    z_end: float
    tangential: bool = False

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "z_start", float(self.z_start))
        object.__setattr__(self, "z_end", float(self.z_end))
        if self.z_end == self.z_start:
            raise DegenerateChordError("chord endpoints coincide (zero length)")

    @property
    def length(self) -> float:
        return abs(self.z_end - self.z_start)

    @property
    def direction(self) -> int:
        return 1 if self.z_end > self.z_start else -1


def gas_chord(t0: float, t1: float, c: float) -> Chord:
    """The unique chord between the gas families (t0, 0) and (t1, c).

    The common point has volume p = (t1 - t0)/c and pressure
    P = -q = c t0/(t1 - t0); the endpoints are z = t0 ln p and t1 ln p, so
    the chord points up exactly when p > 1 (c below the temperature gap).
    Degenerate at c = t1 - t0 where the families touch.
    """
    if not 0 < t0 < t1:
        raise ValueError("need t1 > t0 > 0")
    if not c > 0:
        raise ValueError("pressure jump c must be positive")
    v = (t1 - t0) / c
    if v == 1.0:
        raise DegenerateChordError(
            "c equals the temperature gap: the families touch (zero-length chord)"
        )
    q = -c * t0 / (t1 - t0)
    return Chord(q=q, p=v, z_start=t0 * math.log(v), z_end=t1 * math.log(v))


def cw_chord(t0: float, t1: float, c: float, b: float) -> Chord:
    """The unique chord between the magnet families (t0, 0) and (t1, c).

    The common point is p = tanh(c/(t1 - t0)), q = c t0/(t1 - t0) - b p, and
    the endpoints follow the magnet z-formula at background fields 0 and c.
    The chord always points up for t1 > t0 (z grows with T at fixed (p, q)).
    """
    if not 0 < t0 < t1:
        raise ValueError("need t1 > t0 > 0")
    if not b > 0:
        raise ValueError("spin interaction b must be positive")
    p = math.tanh(c / (t1 - t0))
    q = c * t0 / (t1 - t0) - b * p
    half = b * p * p / 2.0
    z0 = float(cw_phi(t0, q + b * p)) - half
    z1 = float(cw_phi(t1, q + c + b * p)) - half
    return Chord(q=q, p=p, z_start=z0, z_end=z1)


def find_chords(
    f0: FrontFunction,
    f1: FrontFunction,
    scan_lo: float,
    scan_hi: float,
    grid_n: int = 4096,
    tol: float = 1e-12,
    trivial_tol: float = TRIVIAL_LENGTH_TOL,
) -> list[Chord]:
    """All chords between the fronts f0 and f1 inside [scan_lo, scan_hi].

    Scans the slope difference psi' = f1' - f0' on a uniform grid, refines
    every sign change by bracketing bisection to within tol in the abscissa,
    and turns each root x into a chord (z from f0, f1; p from the common
    slope).  Roots where |psi| <= trivial_tol are intersections of the
    fronts, not chords, and are dropped.  Grid nodes where psi' dips below
    tol without changing sign are polished by a bounded scalar minimization
    and flagged tangential (they mark bifurcations of the chord count).  An
    identically vanishing psi' is reported as a degenerate family.  An empty
    result is a valid outcome.  Roots closer than half a grid cell collapse
    to one; pick grid_n accordingly.
    """
    if grid_n < 3:
        raise ValueError("grid_n must be at least 3")
    if not scan_lo < scan_hi:
        raise ValueError("need scan_lo < scan_hi")
    for front in (f0, f1):
        if not (front.contains(scan_lo) and front.contains(scan_hi)):
            raise ValueError(
                f"scan window [{scan_lo}, {scan_hi}] leaves the domain of "
                f"front {front.label!r}"
            )

    xs = np.linspace(scan_lo, scan_hi, grid_n)
    dpsi = np.asarray(f1.slope(xs) - f0.slope(xs), dtype=float)
    if np.all(np.abs(dpsi) < 1e-15):
        raise DegenerateFamilyError(
            "front difference has identically vanishing slope on the grid; "
            "every point of the window carries a chord"
        )

    def slope_gap(x: float) -> float:
        return float(f1.slope(x) - f0.slope(x))

    # An exact zero of psi' at a grid node is a root only when isolated
    # (both neighbours nonzero); runs of exact zeros are underflowed tails
    # of nearly parallel fronts, not chord families, and are skipped.
    roots: list[tuple[float, bool]] = []  # (abscissa, tangential)
    for i in range(grid_n - 1):
        a, c = dpsi[i], dpsi[i + 1]
        if a == 0.0:
            if 0 < i and dpsi[i - 1] != 0.0 and c != 0.0:
                roots.append((float(xs[i]), dpsi[i - 1] * c > 0.0))
        elif a * c < 0.0:
            roots.append((float(brentq(slope_gap, xs[i], xs[i + 1], xtol=tol)), False))

    # Touching roots: strict local minima of |psi'| under tol without a sign
    # change.  The refined minimum must sit well below the flank values,
    # which rejects float-quantization stairs in nearly flat tails.
    for i in range(1, grid_n - 1):
        a, mid, c = dpsi[i - 1], dpsi[i], dpsi[i + 1]
        if mid != 0.0 and abs(mid) < tol and a * c > 0.0 and abs(mid) < min(abs(a), abs(c)):
            res = minimize_scalar(
                lambda x: abs(slope_gap(x)),
                bounds=(float(xs[i - 1]), float(xs[i + 1])),
                method="bounded",
                options={"xatol": 1e-10},
            )
            if abs(res.fun) < tol and 10.0 * abs(res.fun) < min(abs(a), abs(c)):
                roots.append((float(res.x), True))

    spacing = (scan_hi - scan_lo) / (grid_n - 1)
    out: list[Chord] = []
    seen: list[float] = []
    for x, tangential in sorted(roots):
        if seen and abs(x - seen[-1]) < 0.5 * spacing:
            continue
        seen.append(x)
        z0 = f0.value(x)
        z1 = f1.value(x)
        if abs(z1 - z0) <= trivial_tol:
            continue
        out.append(Chord(q=x, p=f0.slope(x), z_start=z0, z_end=z1, tangential=tangential))
    return out


# ---------------------------------------------------------------------------
# serialization

def _chord_dict(ch: Chord) -> dict:
    return {
        "q": ch.q,
        "p": ch.p,
        "z_start": ch.z_start,
        "z_end": ch.z_end,
        "length": ch.length,
        "direction": ch.direction,
        "tangential": ch.tangential,
    }


def chords_to_json(chords: Sequence[Chord]) -> str:
    return json.dumps([_chord_dict(ch) for ch in chords], sort_keys=True)


def chords_to_csv(chords: Sequence[Chord], dest: str | IO[str]) -> None:
    header = ["q", "p", "z_start", "z_end", "length", "direction", "tangential"]

    def write(fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for ch in chords:
            writer.writerow(
                ["%.17g" % v for v in (ch.q, ch.p, ch.z_start, ch.z_end, ch.length)]
                + [str(ch.direction), str(int(ch.tangential))]
            )

    if isinstance(dest, str):
        with open(dest, "w", newline="") as fh:
            write(fh)
    else:
        write(dest)
