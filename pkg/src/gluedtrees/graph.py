"""The glued binary trees graph G_n and its full-space generators.

Two complete binary trees of depth ``n`` share their leaf column, giving
``2n+1`` columns and ``3*2**n - 2`` vertices.  Vertices are numbered column by
column (left to right); inside a column they follow binary-heap order, so the
children of vertex ``k`` in column ``j < n`` are ``2k`` and ``2k+1`` of column
``j+1``, and mirror-wise on the right tree.  With this pairing every vertex of
the centre column has one neighbour on each side.

The full graph is only used to validate the reduced line model, so sizes are
capped: dense linear algebra up to ``DENSE_MAX_N``, sparse up to ``N_MAX``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

N_MAX = 14
DENSE_MAX_N = 8


class GraphSizeError(ValueError):
    pass


def column_size(n: int, j: int) -> int:
    return 2 ** min(j, 2 * n - j)


@dataclass(frozen=True)
class GluedTreeGraph:
    n: int
    column_index: np.ndarray  # column of each vertex, 0..2n
    column_offsets: np.ndarray  # first vertex of each column, length 2n+2
    edges: np.ndarray  # (E, 2) int array, edges[:, 0] in the lower column
    adjacency: sp.csr_matrix = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return int(self.column_index.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def num_columns(self) -> int:
        return 2 * self.n + 1

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def column_sizes(self) -> np.ndarray:
        return np.diff(self.column_offsets)

    def column(self, j: int) -> np.ndarray:
        return np.arange(self.column_offsets[j], self.column_offsets[j + 1])

    def neighbors(self, v: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    @property
    def leftmost(self) -> int:
        return 0

    @property
    def rightmost(self) -> int:
        return self.num_vertices - 1


def build_glued_tree(n: int) -> GluedTreeGraph:
    """Construct G_n with deterministic column-major vertex numbering."""
    if not isinstance(n, (int, np.integer)) or n < 1 or n > N_MAX:
        raise GraphSizeError(f"n must be an integer in [1, {N_MAX}], got {n!r}")
    n = int(n)
    sizes = np.array([column_size(n, j) for j in range(2 * n + 1)], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    column_index = np.repeat(np.arange(2 * n + 1), sizes)

    blocks = []
    for j in range(2 * n):
        if j < n:
            # parent k in column j feeds children 2k, 2k+1 in column j+1
            parent = np.arange(sizes[j])
            lo = offsets[j] + np.repeat(parent, 2)
            hi = offsets[j + 1] + np.arange(sizes[j + 1])
        else:
            parent = np.arange(sizes[j + 1])
            lo = offsets[j] + np.arange(sizes[j])
            hi = offsets[j + 1] + np.repeat(parent, 2)
        blocks.append(np.stack([lo, hi], axis=1))
    edges = np.concatenate(blocks).astype(np.int64)

    V = int(offsets[-1])
    data = np.ones(2 * len(edges))
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adjacency = sp.csr_matrix((data, (rows, cols)), shape=(V, V))
    adjacency.sort_indices()
    return GluedTreeGraph(n, column_index, offsets, edges, adjacency)


@dataclass(frozen=True)
class DenseGenerator:
    """Markov generator M (or, with ``role="hamiltonian"``, H = M) of G_n.

    ``matrix`` is a dense ndarray for n <= DENSE_MAX_N and a CSR matrix beyond.
    """

    matrix: np.ndarray | sp.csr_matrix
    gamma: float
    n: int
    role: str = "markov"

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def toarray(self) -> np.ndarray:
        return self.matrix if self.is_dense else self.matrix.toarray()


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return gamma


def classical_generator(graph: GluedTreeGraph, gamma: float) -> DenseGenerator:
    """M_ij = -gamma on edges, d_i*gamma on the diagonal, 0 elsewhere."""
    gamma = _check_gamma(gamma)
    A = graph.adjacency
    M = (sp.diags(graph.degrees.astype(float)) - A).tocsr() * gamma
    if graph.n <= DENSE_MAX_N:
        M = M.toarray()
    return DenseGenerator(M, gamma, graph.n, "markov")


def quantum_hamiltonian_full(graph: GluedTreeGraph, gamma: float) -> DenseGenerator:
    """The walk Hamiltonian <a|H|b> = M_ab; same matrix, Hamiltonian role."""
    M = classical_generator(graph, gamma)
    return DenseGenerator(M.matrix, M.gamma, M.n, "hamiltonian")


def _as_times(times: Sequence[float]) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    return t


def classical_evolve_full(gen: DenseGenerator, p0, times: Sequence[float]) -> list[np.ndarray]:
    """p(t) = exp(-M t) p0 on the full graph.

    Dense generators use the eigendecomposition of the symmetric M, which is
    exact for every requested time; sparse ones fall back to a Krylov action of
    the matrix exponential.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (gen.dimension,):
        raise ValueError(f"p0 has shape {p0.shape}, expected ({gen.dimension},)")
    t = _as_times(times)
    if gen.is_dense:
        w, U = np.linalg.eigh(gen.matrix)
        c = U.T @ p0
        return [U @ (np.exp(-w * ti) * c) for ti in t]
    return [spla.expm_multiply(-gen.matrix * ti, p0) if ti > 0 else p0.copy() for ti in t]


def quantum_evolve_full(gen: DenseGenerator, psi0, times: Sequence[float]) -> list[np.ndarray]:
    """|psi(t)> = exp(-i H t)|psi0> on the full graph (hbar = 1)."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (gen.dimension,):
        raise ValueError(f"psi0 has shape {psi0.shape}, expected ({gen.dimension},)")
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if gen.is_dense:
        w, U = scipy.linalg.eigh(gen.matrix)
        c = U.T @ psi0
        return [U @ (np.exp(-1j * w * ti) * c) for ti in t]
    H = gen.matrix.astype(complex)
    return [spla.expm_multiply(-1j * H * ti, psi0) for ti in t]


def column_sums(graph: GluedTreeGraph, values: np.ndarray) -> np.ndarray:
    """Sum a per-vertex quantity over each column."""
    return np.add.reduceat(np.asarray(values), graph.column_offsets[:-1])
