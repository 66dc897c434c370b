import numpy as np
import pytest
import scipy.sparse as sp

from stype_sdfem.assembly import assemble_sdfem, stabilization_parameters
from stype_sdfem.fe_space import build_space
from stype_sdfem.mesh import build_stype_mesh
from stype_sdfem.problem import model_problem
from stype_sdfem.sparse_linalg import SolverError, as_csr, matvec, relative_residual, solve


def test_identity_and_triangular():
    b = np.array([3.0, -1.0, 2.0])
    np.testing.assert_allclose(solve(sp.identity(3), b), b)
    np.testing.assert_allclose(solve(sp.csr_matrix([[2.0, 1.0], [0.0, 1.0]]), [3.0, 1.0]), [1.0, 1.0])


def test_zero_rhs():
    np.testing.assert_array_equal(solve(sp.identity(4), np.zeros(4)), np.zeros(4))


def test_matvec_matches_dense(rng):
    for _ in range(5):
        A = sp.random(50, 50, density=0.2, random_state=rng.integers(1 << 30))
        x = rng.normal(size=50)
        np.testing.assert_allclose(matvec(A, x), A.toarray() @ x, atol=1e-13)


def test_recovers_solution(rng):
    for _ in range(5):
        n = 200
        A = sp.random(n, n, density=0.03, random_state=rng.integers(1 << 30)) + 5 * sp.identity(n)
        x = rng.normal(size=n)
        np.testing.assert_allclose(solve(A, A @ x), x, rtol=1e-10)


def test_duplicates_summed():
    A = sp.coo_matrix(([1.0, 2.0, 4.0], ([0, 0, 1], [0, 0, 1])), shape=(2, 2))
    C = as_csr(A)
    assert C.nnz == 2 and C[0, 0] == 3.0


def test_singular_and_nonsquare():
    with pytest.raises(SolverError):
        solve(sp.csr_matrix(np.zeros((3, 3))), np.ones(3))
    with pytest.raises(ValueError):
        solve(sp.csr_matrix(np.ones((2, 3))), np.ones(2))


def test_assembled_system_residual():
    m = build_stype_mesh(8, 5, 1e-6)
    V = build_space(m, 3)
    prob = model_problem(1e-6)
    S = assemble_sdfem(V, prob, stabilization_parameters(m, 1e-6))
    x = solve(S.matrix, S.rhs)
    assert relative_residual(S.matrix, x, S.rhs) <= 1e-12
