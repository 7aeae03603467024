"""Reduction of G_n to a walk on a line of 2n+1 column states, plus disorder.

The clean walk restricted to the span of the uniform column superpositions is
a tridiagonal chain with hopping -sqrt(2)*gamma and on-site energy 2*gamma at
sites 0, n, 2n (3*gamma elsewhere).  Disorder adds an independent random
energy eps_j to every site of that chain.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import ndtri

from . import rng
from .graph import DENSE_MAX_N, GluedTreeGraph, quantum_hamiltonian_full

FAMILIES = ("cauchy", "gaussian", "uniform")


@dataclass(frozen=True)
class ColumnBasis:
    n: int
    coefficients: np.ndarray  # per column: 2**(-min(j, 2n-j)/2)
    column_index: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 2 * self.n + 1

    def matrix(self) -> sp.csr_matrix:
        """V x (2n+1) isometry whose columns are the states |j~>."""
        V = self.column_index.shape[0]
        vals = self.coefficients[self.column_index]
        return sp.csr_matrix((vals, (np.arange(V), self.column_index)), shape=(V, self.size))

    def lift(self, line_state: np.ndarray) -> np.ndarray:
        """Map amplitudes on the line back to vertex amplitudes."""
        return self.coefficients[self.column_index] * np.asarray(line_state)[self.column_index]


def column_basis(graph: GluedTreeGraph) -> ColumnBasis:
    n = graph.n
    exps = np.minimum(np.arange(2 * n + 1), 2 * n - np.arange(2 * n + 1))
    return ColumnBasis(n, 2.0 ** (-exps / 2.0), graph.column_index)


def compress(graph: GluedTreeGraph, basis: ColumnBasis, gamma: float) -> np.ndarray:
    """<j~|H|k~> for the full clean Hamiltonian, as a dense (2n+1)^2 array."""
    B = basis.matrix()
    H = quantum_hamiltonian_full(graph, gamma).matrix
    return np.asarray((B.T @ (H @ B)).todense()) if sp.issparse(H) else B.T @ (H @ B.toarray())


def verify_subspace_closure(graph: GluedTreeGraph, basis: ColumnBasis, gamma: float) -> float:
    """Largest norm of the part of H|j~> lying outside span{|k~>}."""
    if graph.n > DENSE_MAX_N:
        raise ValueError(f"closure check is dense; n must be <= {DENSE_MAX_N}")
    H = quantum_hamiltonian_full(graph, gamma).toarray()
    B = basis.matrix().toarray()
    HB = H @ B
    residual = HB - B @ (B.T @ HB)
    return float(np.max(np.linalg.norm(residual, axis=0)))


@dataclass(frozen=True)
class LineHamiltonian:
    """Real symmetric tridiagonal Hamiltonian on the 2n+1 column sites."""

    n: int
    gamma: float
    base_diagonal: np.ndarray
    epsilon: np.ndarray

    @property
    def length(self) -> int:
        return 2 * self.n + 1

    @property
    def diagonal(self) -> np.ndarray:
        return self.base_diagonal + self.epsilon

    @property
    def offdiag(self) -> np.ndarray:
        return np.full(self.length - 1, -math.sqrt(2.0) * self.gamma)

    @property
    def hopping(self) -> float:
        return -math.sqrt(2.0) * self.gamma

    def dense(self) -> np.ndarray:
        e = self.offdiag
        return np.diag(self.diagonal) + np.diag(e, 1) + np.diag(e, -1)

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        out = self.diagonal * psi
        out[:-1] += self.hopping * psi[1:]
        out[1:] += self.hopping * psi[:-1]
        return out


def reduced_hamiltonian(n: int, gamma: float) -> LineHamiltonian:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    d = np.full(2 * n + 1, 3.0 * gamma)
    d[[0, n, 2 * n]] = 2.0 * gamma
    return LineHamiltonian(int(n), float(gamma), d, np.zeros(2 * n + 1))


@dataclass(frozen=True)
class DisorderSpec:
    """On-site disorder law.

    ``delta`` is the Cauchy half-width for ``cauchy`` and the standard
    deviation for ``gaussian`` and ``uniform`` (support +-delta*sqrt(3)).
    """

    family: str = "cauchy"
    delta: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown disorder family {self.family!r}; expected one of {FAMILIES}")
        if not self.delta >= 0:
            raise ValueError(f"disorder width must be >= 0, got {self.delta}")

    def density(self, eps):
        eps = np.asarray(eps, dtype=float)
        d = self.delta
        if self.family == "cauchy":
            return d / (np.pi * (eps**2 + d**2))
        if self.family == "gaussian":
            return np.exp(-0.5 * (eps / d) ** 2) / (d * math.sqrt(2 * np.pi))
        half = d * math.sqrt(3.0)
        return np.where(np.abs(eps) <= half, 1.0 / (2 * half), 0.0)


def transform_uniform(spec: DisorderSpec, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF map from U(0,1) draws to the disorder law."""
    d = spec.delta
    if spec.family == "cauchy":
        return d * np.tan(np.pi * (u - 0.5))
    if spec.family == "gaussian":
        return d * ndtri(u)
    return d * math.sqrt(3.0) * (2.0 * u - 1.0)


def sample_disorder(spec: DisorderSpec, count: int, seed: int, offset: int = 0) -> np.ndarray:
    """Disorder values for sites ``offset .. offset+count-1`` of stream ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if spec.delta == 0:
        return np.zeros(count)
    return transform_uniform(spec, rng.uniform_open(seed, offset, count))


def apply_disorder(h: LineHamiltonian, spec: DisorderSpec, seed: int) -> LineHamiltonian:
    """Replace the disorder field of ``h`` with a fresh realization (never accumulates)."""
    if spec.delta == 0:
        return replace(h, epsilon=np.zeros(h.length))
    return replace(h, epsilon=sample_disorder(spec, h.length, seed))


def write_disorder_csv(h: LineHamiltonian, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site", "epsilon"])
        for j, e in enumerate(h.epsilon):
            w.writerow([j, repr(float(e))])


def read_disorder_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["epsilon"]) for r in rows])


@dataclass(frozen=True)
class ClassicalChain:
    """Column-lumped Markov chain of the classical walk on G_n.

    ``generator`` follows the same sign convention as the full M:
    dp/dt = -generator @ p, with zero column sums.
    """

    n: int
    gamma: float
    generator: np.ndarray

    @property
    def length(self) -> int:
        return 2 * self.n + 1

    def rate(self, src: int, dst: int) -> float:
        return -float(self.generator[dst, src])

    def stationary(self) -> np.ndarray:
        j = np.arange(self.length)
        pi = 2.0 ** np.minimum(j, 2 * self.n - j)
        return pi / pi.sum()


def lumped_classical_chain(n: int, gamma: float) -> ClassicalChain:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    L = 2 * n + 1
    right = np.zeros(L)
    left = np.zeros(L)
    for j in range(L):
        if j < n:
            right[j], left[j] = 2.0, (1.0 if j > 0 else 0.0)
        elif j == n:
            right[j], left[j] = 1.0, 1.0
        else:
            right[j], left[j] = (1.0 if j < 2 * n else 0.0), 2.0
    M = np.zeros((L, L))
    for j in range(L):
        M[j, j] = (right[j] + left[j]) * gamma
        if j + 1 < L:
            M[j + 1, j] = -right[j] * gamma
        if j > 0:
            M[j - 1, j] = -left[j] * gamma
    return ClassicalChain(int(n), float(gamma), M)
