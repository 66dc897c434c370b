"""Continuous tensor-product Q_p spaces on rectangular grids and functions living in them.

Coefficient arrays are stored as (ny, nx) grids of nodal values, so that the
flattened vector follows a lexicographic numbering with x running fastest.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .mesh import TensorMesh
from .poly import LagrangeBasis1D


class Line1D:
    """Continuous piecewise polynomials of degree d on the breakpoints `edges`,
    with a nodal basis at the mapped Gauss-Lobatto points of each interval."""

    def __init__(self, edges, degree: int):
        self.edges = np.asarray(edges, dtype=float)
        self.degree = degree
        self.ncells = len(self.edges) - 1
        self.basis = LagrangeBasis1D.gauss_lobatto(degree)
        self.widths = np.diff(self.edges)
        ref = self.basis.nodes
        nodes = (self.edges[:-1, None] + 0.5 * self.widths[:, None] * (ref[None, :] + 1.0))
        glob = np.empty(self.ncells * degree + 1)
        glob[:-1] = nodes[:, :-1].ravel()
        glob[-1] = self.edges[-1]
        # keep the breakpoints bit-exact
        glob[::degree] = self.edges
        self.nodes = glob
        self.nnodes = len(glob)

    def cell_dofs(self) -> np.ndarray:
        """Global node indices of each cell, shape (ncells, d+1)."""
        return self.degree * np.arange(self.ncells)[:, None] + np.arange(self.degree + 1)[None, :]

    def locate(self, pts) -> np.ndarray:
        """Cell index of each point; interior breakpoints go to the right-hand cell."""
        pts = np.asarray(pts, dtype=float)
        lo, hi = self.edges[0], self.edges[-1]
        if np.any(pts < lo) or np.any(pts > hi):
            raise ValueError(f"point outside [{lo}, {hi}]")
        cells = np.searchsorted(self.edges, pts, side="right") - 1
        return np.clip(cells, 0, self.ncells - 1)

    def to_reference(self, pts, cells) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return 2.0 * (pts - self.edges[cells]) / self.widths[cells] - 1.0

    def tables(self, pts, cells=None):
        """Local basis values and physical first/second derivatives at `pts`.

        Returns (cells, V, D, D2), each table of shape (npts, d+1).
        """
        pts = np.atleast_1d(np.asarray(pts, dtype=float))
        if cells is None:
            cells = self.locate(pts)
        t = self.to_reference(pts, cells)
        V, D, D2 = self.basis.eval(t)
        scale = 2.0 / self.widths[cells]
        return cells, V, D * scale[:, None], D2 * (scale**2)[:, None]

    def matrices(self, pts, cells=None):
        """Sparse evaluation matrices (value, derivative), each (npts, nnodes)."""
        cells, V, D, _ = self.tables(pts, cells)
        npts, nloc = V.shape
        rows = np.repeat(np.arange(npts), nloc)
        cols = (self.degree * cells[:, None] + np.arange(nloc)[None, :]).ravel()
        shape = (npts, self.nnodes)
        return (sp.csr_matrix((V.ravel(), (rows, cols)), shape=shape),
                sp.csr_matrix((D.ravel(), (rows, cols)), shape=shape))


class TensorFunction:
    """A continuous piecewise tensor polynomial given by nodal values on line_x x line_y."""

    def __init__(self, line_x: Line1D, line_y: Line1D, grid):
        grid = np.asarray(grid, dtype=float)
        if grid.shape != (line_y.nnodes, line_x.nnodes):
            raise ValueError(f"coefficient grid has shape {grid.shape}, expected {(line_y.nnodes, line_x.nnodes)}")
        self.line_x = line_x
        self.line_y = line_y
        self.grid = grid

    def __call__(self, x, y):
        return self.evaluate(x, y)[0]

    def evaluate(self, x, y):
        """Value and gradient at scattered points (x, y)."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        x, y = x.ravel(), y.ravel()
        cx, Vx, Dx, _ = self.line_x.tables(x)
        cy, Vy, Dy, _ = self.line_y.tables(y)
        px, py = self.line_x.degree, self.line_y.degree
        ix = px * cx[:, None] + np.arange(px + 1)[None, :]
        iy = py * cy[:, None] + np.arange(py + 1)[None, :]
        local = self.grid[iy[:, :, None], ix[:, None, :]]
        val = np.einsum("kb,kba,ka->k", Vy, local, Vx)
        gx = np.einsum("kb,kba,ka->k", Vy, local, Dx)
        gy = np.einsum("kb,kba,ka->k", Dy, local, Vx)
        if shape == ():
            return float(val[0]), (float(gx[0]), float(gy[0]))
        return val.reshape(shape), (gx.reshape(shape), gy.reshape(shape))

    def on_grid(self, xq, yq, cells_x=None, cells_y=None):
        """Value, d/dx, d/dy on the tensor grid yq x xq, each shaped (len(yq), len(xq))."""
        Ex, DEx = self.line_x.matrices(xq, cells_x)
        Ey, DEy = self.line_y.matrices(yq, cells_y)
        C = self.grid
        CEx = (Ex @ C.T).T
        val = Ey @ CEx
        gy = DEy @ CEx
        gx = Ey @ (DEx @ C.T).T
        return val, gx, gy


@dataclass(frozen=True)
class FESpace:
    mesh: TensorMesh
    p: int
    line_x: Line1D = field(repr=False)
    line_y: Line1D = field(repr=False)

    @property
    def nx(self) -> int:
        return self.line_x.nnodes

    @property
    def ny(self) -> int:
        return self.line_y.nnodes

    @property
    def ndofs(self) -> int:
        return self.nx * self.ny

    @property
    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.ny, self.nx), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m.ravel()

    @property
    def interior_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    def cell_dofs(self, i: int, j: int) -> np.ndarray:
        """Global dofs of cell (i, j), 1-based, ordered with the local x index fastest."""
        p = self.p
        gx = p * (i - 1) + np.arange(p + 1)
        gy = p * (j - 1) + np.arange(p + 1)
        return (gy[:, None] * self.nx + gx[None, :]).ravel()

    def all_cell_dofs(self) -> np.ndarray:
        """Shape (N, N, (p+1)^2), indexed [j-1, i-1, local]."""
        dx = self.line_x.cell_dofs()
        dy = self.line_y.cell_dofs()
        full = dy[:, None, :, None] * self.nx + dx[None, :, None, :]
        N = self.mesh.N
        return full.reshape(N, N, -1)

    def function(self, coeffs=None) -> "FEFunction":
        if coeffs is None:
            coeffs = np.zeros(self.ndofs)
        return FEFunction(self, np.asarray(coeffs, dtype=float))


def build_space(mesh: TensorMesh, p: int) -> FESpace:
    if p < 2:
        raise ValueError(f"polynomial degree must be >= 2 (got {p})")
    return FESpace(mesh, p, Line1D(mesh.xs, p), Line1D(mesh.ys, p))


class FEFunction(TensorFunction):
    def __init__(self, space: FESpace, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.ndofs,):
            raise ValueError(f"expected {space.ndofs} coefficients, got shape {coeffs.shape}")
        super().__init__(space.line_x, space.line_y, coeffs.reshape(space.ny, space.nx))
        self.space = space

    @property
    def coeffs(self) -> np.ndarray:
        return self.grid.ravel()

    def __sub__(self, other: "FEFunction") -> "FEFunction":
        _check_same_space(self, other)
        return FEFunction(self.space, self.coeffs - other.coeffs)

    def __add__(self, other: "FEFunction") -> "FEFunction":
        _check_same_space(self, other)
        return FEFunction(self.space, self.coeffs + other.coeffs)

    def __rmul__(self, alpha: float) -> "FEFunction":
        return FEFunction(self.space, alpha * self.coeffs)


def _check_same_space(u: FEFunction, v: FEFunction):
    if u.space is not v.space and (u.space.p != v.space.p or u.space.mesh is not v.space.mesh):
        raise ValueError("FE functions live in different spaces")


def eval_fe(u: FEFunction, x: float, y: float):
    """Value and gradient of u at one point of the closed unit square."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError(f"point ({x}, {y}) lies outside the unit square")
    return u.evaluate(x, y)


def dump_fe_function(u: FEFunction) -> str:
    mesh = u.space.mesh
    lines = [f"# N = {mesh.N}", f"# p = {u.space.p}", f"# kind = {mesh.kind.value}",
             f"# sigma = {mesh.sigma!r}", f"# eps = {mesh.eps!r}", f"# ndofs = {u.space.ndofs}"]
    lines += [repr(float(c)) for c in u.coeffs]
    return "\n".join(lines) + "\n"


def load_fe_dump(text: str):
    header, values = {}, []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            header[key.strip()] = val.strip()
        else:
            values.append(float(line))
    return header, np.array(values)
