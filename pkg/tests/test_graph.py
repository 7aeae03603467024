import numpy as np
import pytest
import scipy.linalg

from gluedtrees.graph import (
    GraphSizeError,
    build_glued_tree,
    classical_evolve_full,
    classical_generator,
    column_sums,
    quantum_evolve_full,
    quantum_hamiltonian_full,
)


def edge_count_by_enumeration(n):
    # every vertex of column j < n has two children; on the right tree every
    # vertex of column j+1 (j >= n) has two children in column j
    count = 0
    for j in range(n):
        count += 2 * 2**j
    for j in range(n, 2 * n):
        count += 2 * 2 ** (2 * n - j - 1)
    return count


class TestBuild:
    def test_g4_vertex_count(self):
        assert build_glued_tree(4).num_vertices == 2**5 + 2**4 - 2 == 46

    def test_g4_columns(self):
        assert build_glued_tree(4).column_sizes().tolist() == [1, 2, 4, 8, 16, 8, 4, 2, 1]

    def test_g4_edges(self):
        g = build_glued_tree(4)
        assert edge_count_by_enumeration(4) == 60
        assert g.num_edges == 60

    def test_g1(self):
        g = build_glued_tree(1)
        assert g.num_vertices == 4
        assert g.column_sizes().tolist() == [1, 2, 1]
        assert sorted(map(tuple, g.edges.tolist())) == [(0, 1), (0, 2), (1, 3), (2, 3)]

    @pytest.mark.parametrize("n", [0, -1, 15])
    def test_size_limit(self, n):
        with pytest.raises(GraphSizeError):
            build_glued_tree(n)

    def test_indexing_is_deterministic(self):
        a, b = build_glued_tree(5), build_glued_tree(5)
        assert np.array_equal(a.edges, b.edges)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_invariants(self, n):
        g = build_glued_tree(n)
        V = 3 * 2**n - 2
        assert g.num_vertices == V
        for j in range(2 * n + 1):
            assert len(g.column(j)) == 2 ** min(j, 2 * n - j)
        deg = g.degrees
        special = np.isin(g.column_index, [0, n, 2 * n])
        assert np.all(deg[special] == 2)
        assert np.all(deg[~special] == 3)
        assert int(np.sum(deg == 2)) == 2 + 2**n
        assert int(np.sum(deg == 3)) == V - 2 - 2**n
        ci = g.column_index
        assert np.all(np.abs(ci[g.edges[:, 0]] - ci[g.edges[:, 1]]) == 1)

    def test_connected(self):
        from scipy.sparse.csgraph import connected_components
        ncomp, _ = connected_components(build_glued_tree(6).adjacency)
        assert ncomp == 1

    def test_centre_vertices_one_neighbour_each_side(self):
        g = build_glued_tree(4)
        for v in g.column(4):
            cols = sorted(g.column_index[g.neighbors(v)].tolist())
            assert cols == [3, 5]


class TestGenerators:
    def test_entries(self):
        g = build_glued_tree(3)
        M = classical_generator(g, 1.5).matrix
        assert M[0, 0] == 3.0
        A = g.adjacency.toarray()
        off = ~np.eye(g.num_vertices, dtype=bool)
        assert np.all(M[off & (A == 0)] == 0)
        assert np.all(M[off & (A == 1)] == -1.5)

    @pytest.mark.parametrize("n", [1, 4, 8])
    def test_column_sums_exactly_zero(self, n):
        M = classical_generator(build_glued_tree(n), 1.0).matrix
        assert np.all(M.sum(axis=0) == 0.0)
        assert np.array_equal(M, M.T)

    def test_sparse_beyond_dense_cap(self):
        gen = classical_generator(build_glued_tree(10), 1.0)
        assert not gen.is_dense
        assert abs(gen.matrix.sum(axis=0)).max() == 0.0

    def test_n1_conserves_probability(self):
        M = classical_generator(build_glued_tree(1), 1.0).matrix
        p = np.array([0.4, 0.3, 0.2, 0.1])
        assert (scipy.linalg.expm(-M) @ p).sum() == pytest.approx(1.0, abs=1e-14)

    def test_hamiltonian_equals_generator(self):
        g = build_glued_tree(2)
        H = quantum_hamiltonian_full(g, 1.0)
        M = classical_generator(g, 1.0)
        assert H.role == "hamiltonian"
        assert np.array_equal(H.matrix, M.matrix)
        assert np.array_equal(H.matrix, H.matrix.T)

    def test_n1_spectrum_against_hand_built_matrix(self):
        # G_1 is the 4-cycle 0-1-3-2-0
        hand = 2 * np.eye(4) - np.array(
            [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]], dtype=float
        )
        H = quantum_hamiltonian_full(build_glued_tree(1), 1.0).matrix
        assert np.allclose(np.linalg.eigvalsh(H), np.linalg.eigvalsh(hand), atol=1e-14)
        assert np.allclose(np.linalg.eigvalsh(H), [0, 2, 2, 4], atol=1e-14)

    def test_uniform_is_the_zero_mode(self):
        H = quantum_hamiltonian_full(build_glued_tree(3), 1.0).matrix
        u = np.ones(H.shape[0])
        assert np.allclose(H @ u, 0)
        assert np.linalg.eigvalsh(H)[0] == pytest.approx(0, abs=1e-12)

    @pytest.mark.parametrize("gamma", [0.0, -1.0])
    def test_rejects_bad_gamma(self, gamma):
        with pytest.raises(ValueError):
            classical_generator(build_glued_tree(2), gamma)


class TestClassicalEvolution:
    def test_t0_identity(self):
        gen = classical_generator(build_glued_tree(3), 1.0)
        p0 = np.zeros(gen.dimension)
        p0[0] = 1
        assert np.allclose(classical_evolve_full(gen, p0, [0.0])[0], p0, atol=1e-14)

    def test_uniform_stationary(self):
        gen = classical_generator(build_glued_tree(3), 1.0)
        u = np.full(gen.dimension, 1.0 / gen.dimension)
        for p in classical_evolve_full(gen, u, [0.5, 7.0]):
            assert np.allclose(p, u, atol=1e-14)

    def test_matches_expm_oracle(self):
        gen = classical_generator(build_glued_tree(2), 1.0)
        p0 = np.zeros(gen.dimension)
        p0[0] = 1
        (p,) = classical_evolve_full(gen, p0, [5.0])
        oracle = scipy.linalg.expm(-5.0 * gen.matrix) @ p0
        assert np.max(np.abs(p - oracle)) <= 1e-10

    def test_conservation_positivity_and_relaxation(self):
        gen = classical_generator(build_glued_tree(3), 1.0)
        p0 = np.zeros(gen.dimension)
        p0[0] = 1
        u = np.full(gen.dimension, 1.0 / gen.dimension)
        p1, p10 = classical_evolve_full(gen, p0, [1.0, 10.0])
        for p in (p1, p10):
            assert abs(p.sum() - 1) <= 1e-9
            assert p.min() >= -1e-12
        assert np.linalg.norm(p10 - u) < np.linalg.norm(p1 - u)

    def test_sparse_path_conserves(self):
        g = build_glued_tree(9)
        gen = classical_generator(g, 1.0)
        p0 = np.zeros(gen.dimension)
        p0[0] = 1
        (p,) = classical_evolve_full(gen, p0, [3.0])
        assert abs(p.sum() - 1) <= 1e-9
        assert p.min() >= -1e-12

    def test_dimension_mismatch(self):
        gen = classical_generator(build_glued_tree(2), 1.0)
        with pytest.raises(ValueError):
            classical_evolve_full(gen, np.ones(3) / 3, [1.0])


def test_full_quantum_evolution_is_unitary():
    g = build_glued_tree(5)
    H = quantum_hamiltonian_full(g, 1.0)
    psi0 = np.zeros(g.num_vertices)
    psi0[0] = 1
    for psi in quantum_evolve_full(H, psi0, [0.0, 2.0, 9.0]):
        assert abs(np.vdot(psi, psi).real - 1) < 1e-12
    assert column_sums(g, np.ones(g.num_vertices)).tolist() == g.column_sizes().tolist()
