"""Finite-microstate statistical mechanics.

A system is a finite set of microstates carrying positive measure weights
w_i, together with an affine Hamiltonian

    H(q, m_i) = v_int[i] + sum_j q_j * v_bar[j, i].

Probability densities are normalized against the weights, sum_i w_i rho_i = 1.
Entropy, internal energy, generalized pressures and free energy are weighted
sums over the states; the Gibbs density exp(-H/T)/Z minimizes the free energy
and is evaluated through log-sum-exp so that small temperatures do not
overflow.  The partition function is kept as its logarithm.

Systems with a general (non-affine) dependence on q can be handled at a fixed
q by tabulating H(q, .) into ``v_int`` with ``v_bar = 0``; pressures then need
a caller-supplied dH/dq tabulation and are out of scope here.

All operations are pure functions; safe for unrestricted concurrent use.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy.special import logsumexp

from .phase_space import ExtendedPoint

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class MicrostateSpace:
    """A finite microstate set with strictly positive weights."""

    labels: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if w.size < 1:
            raise ValueError("need at least one microstate")
        if len(self.labels) != w.size:
            raise ValueError("labels and weights must have equal length")
        if not np.all(np.isfinite(w)) or not np.all(w > 0):
            raise ValueError("weights must be finite and strictly positive")

    @property
    def m(self) -> int:
        return self.weights.size

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class Density:
    """A probability density rho >= 0 on a microstate space.

    Normalization (sum_i w_i rho_i = 1) depends on the weights and is
    checked against a space by :func:`check_density`.
    """

    rho: np.ndarray

    def __post_init__(self):
        r = np.array(self.rho, dtype=float, copy=True).reshape(-1)
        r.flags.writeable = False
        object.__setattr__(self, "rho", r)
        if r.size < 1:
            raise ValueError("density must have length >= 1")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValueError("density entries must be finite and non-negative")

    @property
    def m(self) -> int:
        return self.rho.size


def check_density(sp: MicrostateSpace, d: Density) -> None:
    if d.m != sp.m:
        raise ValueError(f"density has {d.m} entries for a space of {sp.m} states")
    mass = float(np.dot(sp.weights, d.rho))
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"density mass is {mass!r}, not 1 within {NORMALIZATION_TOL}")


def uniform_density(sp: MicrostateSpace) -> Density:
    return Density(np.full(sp.m, 1.0 / sp.total_weight))


def normalized_density(sp: MicrostateSpace, values) -> Density:
    """Rescale non-negative values so that sum_i w_i rho_i = 1."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if np.any(v < 0):
        raise ValueError("density values must be non-negative")
    mass = float(np.dot(sp.weights, v))
    if mass <= 0:
        raise ValueError("density values must have positive total mass")
    return Density(v / mass)


def total_variation(sp: MicrostateSpace, a: Density, b: Density) -> float:
    """Total-variation distance (1/2) sum_i w_i |a_i - b_i|."""
    check_density(sp, a)
    check_density(sp, b)
    return 0.5 * float(np.dot(sp.weights, np.abs(a.rho - b.rho)))


@dataclass(frozen=True)
class AffineHamiltonian:
    """H(q, m_i) = v_int[i] + sum_j q_j v_bar[j, i] on m states, q in R^n."""

    v_int: np.ndarray
    v_bar: np.ndarray

    def __post_init__(self):
        vi = np.array(self.v_int, dtype=float, copy=True).reshape(-1)
        vb = np.array(self.v_bar, dtype=float, copy=True)
        if vb.ndim != 2:
            raise ValueError("v_bar must be an n x m matrix")
        vi.flags.writeable = False
        vb.flags.writeable = False
        object.__setattr__(self, "v_int", vi)
        object.__setattr__(self, "v_bar", vb)
        if vb.shape[1] != vi.size:
            raise ValueError(
                f"v_bar has {vb.shape[1]} columns for {vi.size} states"
            )
        if vb.shape[0] < 1:
            raise ValueError("need at least one intensive variable")
        if not (np.all(np.isfinite(vi)) and np.all(np.isfinite(vb))):
            raise ValueError("Hamiltonian entries must be finite")

    @property
    def m(self) -> int:
        return self.v_int.size

    @property
    def n(self) -> int:
        return self.v_bar.shape[0]

    def energies(self, q) -> np.ndarray:
        """Per-state energies H(q, m_i)."""
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.size != self.n:
            raise ValueError(f"q has length {q.size}, expected {self.n}")
        return self.v_int + q @ self.v_bar


@dataclass(frozen=True)
class GibbsResult:
    rho_g: Density
    log_z: float


def _check_dims(sp: MicrostateSpace, h: AffineHamiltonian | None, d: Density | None):
    if h is not None and h.m != sp.m:
        raise ValueError(f"Hamiltonian has {h.m} states, space has {sp.m}")
    if d is not None:
        check_density(sp, d)


def entropy(sp: MicrostateSpace, d: Density) -> float:
    """- sum_i w_i rho_i ln rho_i, with the 0 ln 0 := 0 convention."""
    _check_dims(sp, None, d)
    r = d.rho
    terms = np.where(r > 0, r * np.log(np.where(r > 0, r, 1.0)), 0.0)
    return -float(np.dot(sp.weights, terms))


def internal_energy(sp: MicrostateSpace, h: AffineHamiltonian, d: Density) -> float:
    """Mean of the internal-energy table: sum_i w_i v_int[i] rho_i."""
    _check_dims(sp, h, d)
    return float(np.dot(sp.weights * h.v_int, d.rho))


def pressures(sp: MicrostateSpace, h: AffineHamiltonian, d: Density) -> np.ndarray:
    """Generalized pressures p_j = - sum_i w_i v_bar[j, i] rho_i."""
    _check_dims(sp, h, d)
    return -(h.v_bar @ (sp.weights * d.rho))


def free_energy(
    sp: MicrostateSpace, h: AffineHamiltonian, T: float, q, d: Density
) -> float:
    """G(T, q, rho) = -T S(rho) + sum_i w_i H(q, m_i) rho_i.

    Equals U - T S - sum_j p_j q_j; the two routes agree to roundoff.
    """
    if not T > 0:
        raise ValueError("temperature must be positive")
    _check_dims(sp, h, d)
    return float(-T * entropy(sp, d) + np.dot(sp.weights * h.energies(q), d.rho))


def gibbs(sp: MicrostateSpace, h: AffineHamiltonian, T: float, q) -> GibbsResult:
    """Free-energy minimizer exp(-H(q, .)/T)/Z and log Z (weighted)."""
    if not T > 0:
        raise ValueError("temperature must be positive")
    _check_dims(sp, h, None)
    a = -h.energies(q) / T
    log_z = float(logsumexp(a, b=sp.weights))
    return GibbsResult(Density(np.exp(a - log_z)), log_z)


def lift_to_extended(
    sp: MicrostateSpace, h: AffineHamiltonian, T: float, q, d: Density
) -> ExtendedPoint:
    """Macroscopic state as the phase-space point (-G, S, T, p, q)."""
    z = -free_energy(sp, h, T, q, d)
    return ExtendedPoint(z, entropy(sp, d), T, pressures(sp, h, d), q)


# ---------------------------------------------------------------------------
# serialization

def load_system(source) -> tuple[MicrostateSpace, AffineHamiltonian]:
    """Build a system from a JSON document.

    Accepts a dict, a path, or an open file.  Schema:
    {"labels": [...], "weights": [...], "v_int": [...], "v_bar": [[...]]}.
    """
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, str):
        with open(source) as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    required = {"labels", "weights", "v_int", "v_bar"}
    missing = required - set(doc)
    if missing:
        raise ValueError(f"system document is missing keys: {sorted(missing)}")
    sp = MicrostateSpace(tuple(doc["labels"]), doc["weights"])
    h = AffineHamiltonian(doc["v_int"], doc["v_bar"])
    if h.m != sp.m:
        raise ValueError("v_int/v_bar state count does not match labels/weights")
    return sp, h


def save_system(
    sp: MicrostateSpace, h: AffineHamiltonian, dest: str | IO[str]
) -> None:
    doc = {
        "labels": list(sp.labels),
        "weights": sp.weights.tolist(),
        "v_int": h.v_int.tolist(),
        "v_bar": h.v_bar.tolist(),
    }
    if isinstance(dest, str):
        with open(dest, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
    else:
        json.dump(doc, dest, sort_keys=True, indent=2)


def densities_to_csv(densities: Sequence[Density], dest: str | IO[str]) -> None:
    """One density per row, columns rho_1..rho_m."""
    if not densities:
        raise ValueError("nothing to write")
    m = densities[0].m

    def write(fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"rho_{i + 1}" for i in range(m)])
        for d in densities:
            writer.writerow(["%.17g" % v for v in d.rho])

    if isinstance(dest, str):
        with open(dest, "w", newline="") as fh:
            write(fh)
    else:
        write(dest)


def densities_from_csv(src: str | IO[str]) -> list[Density]:
    def read(fh: IO[str]) -> list[Density]:
        reader = csv.reader(fh)
        next(reader)  # header
        return [Density([float(x) for x in row]) for row in reader if row]

    if isinstance(src, str):
        with open(src, newline="") as fh:
            return read(fh)
    return read(src)
