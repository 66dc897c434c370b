import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stype_sdfem.fe_space import (FEFunction, Line1D, build_space, dump_fe_function, eval_fe,
                                  load_fe_dump)
from stype_sdfem.interpolation import gl_interpolate
from stype_sdfem.mesh import build_stype_mesh


@pytest.fixture(scope="module")
def mesh():
    return build_stype_mesh(8, 5, 1e-6, 1.0, "bakhvalov-shishkin")


def test_dof_counts(mesh):
    V = build_space(mesh, 3)
    assert V.ndofs == 625
    # 4 (pN+1) - 4 nodes on the boundary
    assert int(V.boundary_mask.sum()) == 4 * 25 - 4 == 96
    assert len(V.interior_dofs) == 23 * 23
    assert build_space(mesh, 2).ndofs == 289
    with pytest.raises(ValueError):
        build_space(mesh, 1)


def test_shared_edge_dofs(mesh):
    V = build_space(mesh, 3)
    a = V.cell_dofs(1, 1).reshape(4, 4)
    b = V.cell_dofs(2, 1).reshape(4, 4)
    np.testing.assert_array_equal(a[:, -1], b[:, 0])
    c = V.cell_dofs(1, 2).reshape(4, 4)
    np.testing.assert_array_equal(a[-1, :], c[0, :])
    allc = V.all_cell_dofs()
    np.testing.assert_array_equal(allc[1, 0], c.ravel())


def test_constant_and_linear(mesh):
    V = build_space(mesh, 3)
    one = V.function(np.ones(V.ndofs))
    v, (gx, gy) = eval_fe(one, 0.3, 0.7)
    assert v == pytest.approx(1.0, abs=1e-13)
    assert abs(gx) < 1e-9 and abs(gy) < 1e-9
    u = gl_interpolate(V, lambda x, y: x + 0 * y)
    v, (gx, gy) = eval_fe(u, 0.5, 0.5)
    assert v == pytest.approx(0.5, abs=1e-12)
    assert gx == pytest.approx(1.0, abs=1e-9) and abs(gy) < 1e-9


@pytest.mark.parametrize("p", [2, 3, 4])
def test_reproduces_qp(mesh, p, rng):
    V = build_space(mesh, p)
    g = lambda x, y: (x**p - 0.3 * x + 1) * (y**p + 2 * y)
    u = gl_interpolate(V, g)
    x, y = rng.random(50), rng.random(50)
    np.testing.assert_allclose(u(x, y), g(x, y), atol=1e-11)
    # the grid evaluator agrees with scattered evaluation
    val, gx, gy = u.on_grid(np.sort(x), np.sort(y))
    np.testing.assert_allclose(val, g(np.sort(x)[None, :], np.sort(y)[:, None]), atol=1e-11)


def test_nodal_basis(mesh):
    V = build_space(mesh, 3)
    u = V.function(np.arange(V.ndofs, dtype=float))
    X, Y = np.meshgrid(V.line_x.nodes, V.line_y.nodes)
    np.testing.assert_allclose(u(X, Y).ravel(), u.coeffs, atol=1e-9)


def test_gradient_matches_finite_differences(mesh, rng):
    V = build_space(mesh, 3)
    u = V.function(rng.normal(size=V.ndofs))
    cx = V.line_x.locate(rng.random(100) * 0.98 + 0.01)
    cy = V.line_y.locate(rng.random(100) * 0.98 + 0.01)
    # points strictly inside cells
    tx, ty = rng.uniform(0.1, 0.9, 100), rng.uniform(0.1, 0.9, 100)
    x = mesh.xs[cx] + tx * mesh.h[cx]
    y = mesh.ys[cy] + ty * mesh.k[cy]
    hx, hy = 1e-6 * mesh.h[cx], 1e-6 * mesh.k[cy]
    _, (gx, gy) = u.evaluate(x, y)
    fdx = (u(x + hx, y) - u(x - hx, y)) / (2 * hx)
    fdy = (u(x, y + hy) - u(x, y - hy)) / (2 * hy)
    np.testing.assert_allclose(gx, fdx, rtol=1e-4, atol=1e-4 * np.max(np.abs(gx)))
    np.testing.assert_allclose(gy, fdy, rtol=1e-4, atol=1e-4 * np.max(np.abs(gy)))


def test_locate_right_closed():
    line = Line1D(np.array([0.0, 0.25, 1.0]), 2)
    np.testing.assert_array_equal(line.locate([0.0, 0.25, 0.5, 1.0]), [0, 1, 1, 1])
    with pytest.raises(ValueError):
        line.locate([1.5])


def test_outside_and_shape_errors(mesh):
    V = build_space(mesh, 2)
    with pytest.raises(ValueError):
        eval_fe(V.function(), 1.2, 0.5)
    with pytest.raises(ValueError):
        FEFunction(V, np.zeros(3))
    W = build_space(mesh, 3)
    with pytest.raises(ValueError):
        V.function() - W.function()


@settings(max_examples=20)
@given(st.floats(-5, 5))
def test_linearity(alpha):
    m = build_stype_mesh(8, 5, 1e-6)
    V = build_space(m, 2)
    r = np.random.default_rng(0)
    a, b = V.function(r.normal(size=V.ndofs)), V.function(r.normal(size=V.ndofs))
    c = alpha * a + b
    np.testing.assert_allclose(c(0.3, 0.4), alpha * a(0.3, 0.4) + b(0.3, 0.4), atol=1e-10)


def test_dump_round_trip(mesh, rng):
    V = build_space(mesh, 3)
    u = V.function(rng.normal(size=V.ndofs))
    header, vals = load_fe_dump(dump_fe_function(u))
    assert header["N"] == "8" and header["p"] == "3"
    np.testing.assert_array_equal(vals, u.coeffs)
