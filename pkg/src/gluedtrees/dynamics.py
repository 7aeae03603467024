"""Exact propagation on the line model and the observables built on it."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse
from scipy.sparse.linalg import expm_multiply

from .eigen import eigh_tridiagonal, fix_signs
from .line import ClassicalChain, LineHamiltonian

NORM_TOL = 1e-9
# For a profile P_j ~ exp(-2j/l) this quantile sits exactly at column l.
LOCALIZATION_QUANTILE = 1.0 - math.exp(-2.0)
PROFILE_SCHEMA = "# schema: gluedtrees.profile/v1"


@dataclass(frozen=True)
class SpectralDecomposition:
    energies: np.ndarray  # ascending
    vectors: np.ndarray  # columns are orthonormal eigenvectors

    @property
    def size(self) -> int:
        return self.energies.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.T

    def amplitudes(self, state) -> np.ndarray:
        return self.vectors.T @ np.asarray(state)


def eigendecompose(h: LineHamiltonian, method: str = "lapack") -> SpectralDecomposition:
    if h.length > 20001:
        raise ValueError(f"chain of length {h.length} exceeds the 20001-site limit")
    w, V = eigh_tridiagonal(h.diagonal, h.offdiag, method=method)
    return SpectralDecomposition(w, fix_signs(V))


@dataclass(frozen=True)
class ProbabilityProfile:
    time: float
    probabilities: np.ndarray
    kind: str  # "quantum" or "classical"
    amplitudes: np.ndarray | None = None

    def clipped(self) -> np.ndarray:
        p = self.probabilities.copy()
        p[(p < 0) & (p >= -1e-12)] = 0.0
        p[(p > 1) & (p <= 1 + 1e-12)] = 1.0
        return p


def _check_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    return t


def propagate(decomp: SpectralDecomposition, state, t: float) -> np.ndarray:
    """exp(-iHt)|state> for any real t (negative t runs backwards)."""
    c = decomp.amplitudes(np.asarray(state, dtype=complex))
    return decomp.vectors @ (np.exp(-1j * decomp.energies * t) * c)


def evolve_quantum(decomp: SpectralDecomposition, initial, times: Sequence[float]) -> list[ProbabilityProfile]:
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (decomp.size,):
        raise ValueError(f"initial state has shape {psi0.shape}, expected ({decomp.size},)")
    norm = float(np.vdot(psi0, psi0).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"initial state is not normalized (norm^2 = {norm})")
    t = _check_times(times)
    c = decomp.vectors.T @ psi0
    phases = np.exp(-1j * np.outer(t, decomp.energies)) * c
    psi = phases @ decomp.vectors.T  # (times, sites)
    return [
        ProbabilityProfile(float(ti), np.abs(row) ** 2, "quantum", row)
        for ti, row in zip(t, psi)
    ]


def basis_state(size: int, site: int = 0) -> np.ndarray:
    psi = np.zeros(size, dtype=complex)
    psi[site] = 1.0
    return psi


def evolve_classical(chain: ClassicalChain, initial, times: Sequence[float]) -> list[ProbabilityProfile]:
    """p(t) = exp(-M t) p(0) for the lumped chain.

    The stationary weights span 2^n, so a similarity transform to a symmetric
    matrix would amplify roundoff by up to 2^(n/2).  The action of the
    exponential is computed directly on the sparse generator instead.
    """
    p0 = np.asarray(initial, dtype=float)
    if p0.shape != (chain.length,):
        raise ValueError(f"initial distribution has shape {p0.shape}, expected ({chain.length},)")
    t = _check_times(times)
    M = scipy.sparse.csr_matrix(chain.generator)
    out = []
    for ti in t:
        p = p0.copy() if ti == 0 else np.maximum(expm_multiply(-ti * M, p0), 0.0)
        out.append(ProbabilityProfile(float(ti), p, "classical"))
    return out


def packet_extent(profile: ProbabilityProfile | np.ndarray, quantile: float) -> int:
    """Smallest column c with sum_{j<=c} P_j >= quantile."""
    if not 0 < quantile < 1:
        raise ValueError("quantile must lie in (0, 1)")
    p = profile.probabilities if isinstance(profile, ProbabilityProfile) else np.asarray(profile)
    idx = int(np.searchsorted(np.cumsum(p), quantile, side="left"))
    return min(idx, p.shape[0] - 1)


@dataclass(frozen=True)
class HittingResult:
    probability: float
    time: float


def hitting_probability(
    decomp: SpectralDecomposition, initial, target: int, time_grid: Iterable[float]
) -> HittingResult:
    """Largest |<target|psi(t)>|^2 over a fixed grid of times."""
    if not 0 <= target < decomp.size:
        raise ValueError(f"target {target} outside 0..{decomp.size - 1}")
    t = np.asarray(list(time_grid), dtype=float)
    c = decomp.amplitudes(np.asarray(initial, dtype=complex)) * decomp.vectors[target]
    best_p, best_t = -1.0, 0.0
    # chunked so large grids do not materialize a (times x L) array at once
    for lo in range(0, t.shape[0], 4096):
        tt = t[lo:lo + 4096]
        amp = np.exp(-1j * np.outer(tt, decomp.energies)) @ c
        p = np.abs(amp) ** 2
        k = int(np.argmax(p))
        if p[k] > best_p:
            best_p, best_t = float(p[k]), float(tt[k])
    return HittingResult(best_p, best_t)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    steps = int(math.floor(horizon / dt + 1e-9))
    return dt * np.arange(steps + 1)


def write_profiles_csv(profiles: Sequence[ProbabilityProfile], path: str | Path, columns: slice | None = None) -> None:
    """Rows of (time, column, probability), time-major then column."""
    with open(path, "w", newline="") as fh:
        fh.write(PROFILE_SCHEMA + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "column", "probability"])
        for prof in profiles:
            p = prof.clipped()
            idx = np.arange(p.shape[0])
            if columns is not None:
                p, idx = p[columns], idx[columns]
            for j, pj in zip(idx, p):
                w.writerow([repr(prof.time), int(j), repr(float(pj))])


def read_profiles_csv(path: str | Path) -> dict[float, np.ndarray]:
    out: dict[float, list[float]] = {}
    with open(path, newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for r in rows:
            out.setdefault(float(r["time"]), []).append(float(r["probability"]))
    return {t: np.array(v) for t, v in out.items()}
