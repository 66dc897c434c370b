"""Interpolation onto V^N: Gauss-Lobatto nodal, vertex-edge-cell and equidistant-point operators."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fe_space import FEFunction, FESpace, Line1D, TensorFunction, build_space
from .poly import LagrangeBasis1D, gauss_legendre_rule, gauss_lobatto_nodes, legendre_eval


def _eval_on_grid(g, X, Y) -> np.ndarray:
    """Evaluate g on the tensor grid Y x X; g is a callable or a TensorFunction."""
    if isinstance(g, TensorFunction):
        return g.on_grid(X, Y)[0]
    out = g(np.asarray(X)[None, :], np.asarray(Y)[:, None])
    return np.broadcast_to(out, (len(Y), len(X))).astype(float)


def cellwise_projection(line_x: Line1D, line_y: Line1D, g, Px, Rx, Py, Ry, return_mismatch=False):
    """Nodal coefficients of a cell-by-cell tensor projection.

    Px: physical sample points per cell, shape (ncells_x, npts); Rx maps sample
    values to nodal coefficients, shape (d+1, npts) or (ncells_x, d+1, npts).
    On each cell the coefficient block is Ry G Rx^T. Shared nodes are written
    once per neighbouring cell; with `return_mismatch` the largest disagreement
    between those writes is also returned.
    """
    nx, mx = Px.shape
    ny, my = Py.shape
    Rx = np.broadcast_to(Rx, (nx,) + np.shape(Rx)[-2:])
    Ry = np.broadcast_to(Ry, (ny,) + np.shape(Ry)[-2:])
    G = _eval_on_grid(g, Px.ravel(), Py.ravel()).reshape(ny, my, nx, mx)
    blocks = np.einsum("jbl,jlik,iak->jiba", Ry, G, Rx, optimize=True)
    grid = np.zeros((line_y.nnodes, line_x.nnodes))
    iy = line_y.cell_dofs()[:, None, :, None]
    ix = line_x.cell_dofs()[None, :, None, :]
    grid[iy, ix] = blocks
    if return_mismatch:
        return grid, float(np.max(np.abs(grid[iy, ix] - blocks)))
    return grid


def _physical_points(line: Line1D, ref_pts) -> np.ndarray:
    ref_pts = np.asarray(ref_pts, dtype=float)
    return line.edges[:-1, None] + 0.5 * line.widths[:, None] * (ref_pts[None, :] + 1.0)


def gl_interpolate(space: FESpace, g) -> FEFunction:
    """I_p^N g: nodal values at the mapped Gauss-Lobatto points."""
    grid = _eval_on_grid(g, space.line_x.nodes, space.line_y.nodes)
    return FEFunction(space, grid.ravel())


@dataclass(frozen=True)
class VertexEdgeCellOperator1D:
    """1D factor of the vertex-edge-cell functionals: values at -1 and 1 plus
    moments against Legendre polynomials L_0 .. L_{d-2}.

    The 2D functional set (vertex values, edge moments, cell moments) is the
    tensor product of two copies of this set.
    """

    degree: int
    nquad: int
    points: np.ndarray     # [-1, 1, gauss points]
    F: np.ndarray          # functionals as weights on `points`, (d+1, npts)
    M: np.ndarray          # functionals applied to the nodal basis, (d+1, d+1)
    R: np.ndarray          # M^{-1} F

    @property
    def count_2d(self) -> int:
        return (self.degree + 1) ** 2


@lru_cache(maxsize=None)
def vertex_edge_cell_operator(degree: int, nquad: int | None = None) -> VertexEdgeCellOperator1D:
    nquad = degree + 4 if nquad is None else nquad
    rule = gauss_legendre_rule(nquad)
    pts = np.concatenate([[-1.0, 1.0], rule.nodes])
    F = np.zeros((degree + 1, len(pts)))
    F[0, 0] = F[1, 1] = 1.0
    for m in range(degree - 1):
        F[2 + m, 2:] = rule.weights * legendre_eval(m, rule.nodes)[0]
    B = LagrangeBasis1D.gauss_lobatto(degree).values(pts)
    M = F @ B
    if np.linalg.cond(M) > 1e12:
        raise np.linalg.LinAlgError(f"vertex-edge-cell system for degree {degree} is singular")
    R = np.linalg.solve(M, F)
    for a in (pts, F, M, R):
        a.flags.writeable = False
    return VertexEdgeCellOperator1D(degree, nquad, pts, F, M, R)


def vec_interpolate(space: FESpace, g, degree: int | None = None, nquad: int | None = None) -> FEFunction:
    """pi_d^N g on the mesh of `space`; a degree other than space.p returns a
    function in the Q_degree space on the same mesh."""
    degree = space.p if degree is None else degree
    target = space if degree == space.p else build_space(space.mesh, degree)
    op = vertex_edge_cell_operator(degree, nquad)
    Px = _physical_points(target.line_x, op.points)
    Py = _physical_points(target.line_y, op.points)
    grid = cellwise_projection(target.line_x, target.line_y, g, Px, op.R, Py, op.R)
    return FEFunction(target, grid.ravel())


@lru_cache(maxsize=None)
def _equidistant_operator(p: int) -> np.ndarray:
    ref = np.linspace(-1.0, 1.0, p + 1)
    R = LagrangeBasis1D(ref).values(gauss_lobatto_nodes(p).nodes)
    R.flags.writeable = False
    return R


def equidistant_nodes(p: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, p + 1)


def equidistant_interpolate(space: FESpace, g) -> FEFunction:
    """J_p^N g: cellwise Lagrange interpolation at uniformly spaced points."""
    ref = equidistant_nodes(space.p)
    R = _equidistant_operator(space.p)
    Px = _physical_points(space.line_x, ref)
    Py = _physical_points(space.line_y, ref)
    grid = cellwise_projection(space.line_x, space.line_y, g, Px, R, Py, R)
    return FEFunction(space, grid.ravel())


# reference-element operators -------------------------------------------------

class RefPoly:
    """A polynomial on [-1,1]^2 held as nodal values on a tensor node set."""

    def __init__(self, nodes_x, nodes_y, values):
        self.bx = LagrangeBasis1D(nodes_x)
        self.by = LagrangeBasis1D(nodes_y)
        self.values = np.asarray(values, dtype=float)

    def __call__(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        shape = s.shape
        Vx = self.bx.values(s.ravel())
        Vy = self.by.values(t.ravel())
        out = np.einsum("kb,ba,ka->k", Vy, self.values, Vx)
        return out.reshape(shape)


def ref_vec(degree: int, g, nquad: int | None = None) -> RefPoly:
    """pi_hat_degree g on the reference square."""
    op = vertex_edge_cell_operator(degree, nquad)
    G = _eval_on_grid(g, op.points, op.points)
    nodes = gauss_lobatto_nodes(degree).nodes
    return RefPoly(nodes, nodes, op.R @ G @ op.R.T)


def ref_lagrange(nodes, g) -> RefPoly:
    nodes = np.asarray(nodes, dtype=float)
    return RefPoly(nodes, nodes, _eval_on_grid(g, nodes, nodes))


def ref_gl(degree: int, g) -> RefPoly:
    """I_hat_degree g."""
    return ref_lagrange(gauss_lobatto_nodes(degree).nodes, g)


def lemma_identity_discrepancies(p: int, g, extra_node: float = 0.37, nquad: int | None = None,
                                 samples: int = 20):
    """Max sampled discrepancies of pi_p = I_p pi_{p+1} and I_p = pi_p I*_{p+1}.

    I*_{p+1} interpolates at the p+1 Gauss-Lobatto nodes plus `extra_node`.
    The same Gauss rule is used for the moments of every operator.
    """
    if not -1.0 < extra_node < 1.0:
        raise ValueError("extra node must lie in (-1, 1)")
    nodes = gauss_lobatto_nodes(p).nodes
    if np.min(np.abs(nodes - extra_node)) < 1e-12:
        raise ValueError("extra node coincides with a Gauss-Lobatto node")
    nquad = p + 4 if nquad is None else nquad
    s = np.linspace(-1.0, 1.0, samples)
    S, T = np.meshgrid(s, s)

    lhs1 = ref_vec(p, g, nquad)(S, T)
    rhs1 = ref_gl(p, ref_vec(p + 1, g, nquad))(S, T)

    star = np.sort(np.concatenate([nodes, [extra_node]]))
    lhs2 = ref_gl(p, g)(S, T)
    rhs2 = ref_vec(p, ref_lagrange(star, g), nquad)(S, T)
    return float(np.max(np.abs(lhs1 - rhs1))), float(np.max(np.abs(lhs2 - rhs2)))


def verify_lemma_identity(p: int, g, extra_node: float = 0.37, nquad: int | None = None) -> float:
    """Largest discrepancy over both operator identities on a 20x20 sample grid."""
    return max(lemma_identity_discrepancies(p, g, extra_node, nquad))
