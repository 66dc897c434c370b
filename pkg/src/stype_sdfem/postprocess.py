"""Macro-element postprocessing: lift a Q_p function to continuous piecewise Q_{p+1}
on the 2x2 macro mesh, by point values (P_GL) or by values plus integrals (P_vec)."""
from __future__ import annotations

import warnings

import numpy as np

from .fe_space import FEFunction, Line1D, TensorFunction
from .interpolation import cellwise_projection
from .mesh import MacroMesh, mesh_ratio_q
from .poly import LagrangeBasis1D, gauss_legendre_rule, gauss_lobatto_nodes, legendre_eval

Q_WARN = 10.0


class MacroFEFunction(TensorFunction):
    """Continuous piecewise Q_{p+1} on a macro mesh, nodal at each macro's Gauss-Lobatto points."""

    cells_per_element = 2

    def __init__(self, macro: MacroMesh, degree: int, grid, line_x=None, line_y=None):
        line_x = line_x or Line1D(macro.xs, degree)
        line_y = line_y or Line1D(macro.ys, degree)
        super().__init__(line_x, line_y, grid)
        self.macro = macro
        self.degree = degree

    @property
    def mesh(self):
        return self.macro.mesh

    @property
    def coeffs(self) -> np.ndarray:
        return self.grid.ravel()


def gl_macro_indices(p: int) -> np.ndarray:
    """Indices into the 2p+1 ordered Gauss-Lobatto points of two neighbouring cells:
    0, the odd ones, and 2p."""
    return np.concatenate([[0], np.arange(1, 2 * p, 2), [2 * p]])


def _macro_reference(edges: np.ndarray, pts: np.ndarray) -> np.ndarray:
    left, right = edges[:-1, None], edges[1:, None]
    return 2.0 * (pts - left) / (right - left) - 1.0


def _pgl_direction(fine_edges, p: int):
    """Sample points (ncells_macro, p+2) and maps to macro nodal coefficients."""
    ref = gauss_lobatto_nodes(p).nodes
    fine_edges = np.asarray(fine_edges)
    left, mid, right = fine_edges[0:-2:2, None], fine_edges[1:-1:2, None], fine_edges[2::2, None]
    first = left + 0.5 * (mid - left) * (ref[None, :] + 1.0)
    second = mid + 0.5 * (right - mid) * (ref[None, :] + 1.0)
    allpts = np.concatenate([first, second[:, 1:]], axis=1)          # 2p+1 per macro
    allpts[:, p] = mid[:, 0]
    pts = allpts[:, gl_macro_indices(p)]
    xi = _macro_reference(fine_edges[::2], pts)
    basis = LagrangeBasis1D.gauss_lobatto(p + 1)
    R = np.stack([np.linalg.inv(basis.values(row)) for row in xi])
    return pts, R


def _check_degree(mm: MacroMesh, u, p):
    if isinstance(u, FEFunction):
        if u.space.mesh is not mm.mesh:
            raise ValueError("FE function and macro mesh come from different meshes")
        if p is not None and p != u.space.p:
            raise ValueError(f"degree mismatch: FE function has p={u.space.p}, requested {p}")
        return u.space.p
    if p is None:
        raise ValueError("degree p is required when applying to a plain function")
    return p


def pgl_apply(mm: MacroMesh, u, p: int | None = None) -> MacroFEFunction:
    """P_GL: Q_{p+1} interpolation on each macro at p+2 of its 2p+1 Gauss-Lobatto points
    per direction. `u` may be an FEFunction or a callable g(x, y) (then pass p)."""
    p = _check_degree(mm, u, p)
    Px, Rx = _pgl_direction(mm.mesh.xs, p)
    Py, Ry = _pgl_direction(mm.mesh.ys, p)
    out = MacroFEFunction(mm, p + 1, np.zeros(((p + 1) * mm.n + 1,) * 2))
    out.grid = cellwise_projection(out.line_x, out.line_y, u, Px, Rx, Py, Ry)
    return out


def pvec_functionals_1d(a: float, p: int, nquad: int | None = None):
    """Sample points on [-1, 1] and functional weights for the 1D P_vec operator.

    Functionals: values at -1, a, 1; for p >= 3 the integrals over [-1, a] and
    [a, 1] plus moments against L_1 .. L_{p-3}. Exactly p+2 functionals, matching
    dim P_{p+1}. Moments against L_2 .. L_{p-2} would miss an odd kernel
    function when a = 0 and p is even.

    For p = 2 one integral condition is left. The full integral does not separate
    (t+1)(t-a)(t-1) from zero when a = 0, so the difference of the two
    subinterval integrals is used; it is nonzero on that function for every a.
    """
    if not abs(a) < 1.0 - 1e-12:
        raise ValueError(f"degenerate macro element: interior node offset a={a!r}")
    nquad = p + 4 if nquad is None else nquad
    rule = gauss_legendre_rule(nquad)
    left = -1.0 + 0.5 * (a + 1.0) * (rule.nodes + 1.0)
    right = a + 0.5 * (1.0 - a) * (rule.nodes + 1.0)
    wl = 0.5 * (a + 1.0) * rule.weights
    wr = 0.5 * (1.0 - a) * rule.weights
    pts = np.concatenate([[-1.0, a, 1.0], left, right])
    n = len(pts)
    rows = []
    for idx in range(3):
        r = np.zeros(n)
        r[idx] = 1.0
        rows.append(r)
    wl_full = np.concatenate([np.zeros(3), wl, np.zeros(nquad)])
    wr_full = np.concatenate([np.zeros(3), np.zeros(nquad), wr])
    if p == 2:
        rows.append(wl_full - wr_full)
    else:
        rows += [wl_full, wr_full]
        for m in range(1, p - 2):
            rows.append((wl_full + wr_full) * legendre_eval(m, pts)[0])
    F = np.array(rows)
    assert F.shape[0] == p + 2
    return pts, F


def pvec_reference_operator(a: float, p: int, nquad: int | None = None):
    """(points, R) with R mapping sample values to macro nodal coefficients of degree p+1."""
    pts, F = pvec_functionals_1d(a, p, nquad)
    M = F @ LagrangeBasis1D.gauss_lobatto(p + 1).values(pts)
    return pts, np.linalg.solve(M, F)


def _pvec_direction(macro_edges, offsets, p, nquad):
    pts, Rs = [], []
    for a, lo, hi in zip(offsets, macro_edges[:-1], macro_edges[1:]):
        ref, R = pvec_reference_operator(float(a), p, nquad)
        phys = lo + 0.5 * (hi - lo) * (ref + 1.0)
        phys[0], phys[2] = lo, hi
        pts.append(phys)
        Rs.append(R)
    return np.array(pts), np.array(Rs)


def pvec_apply(mm: MacroMesh, u, p: int | None = None, nquad: int | None = None) -> MacroFEFunction:
    """P_vec: per macro and direction, match values at the three fine vertices and
    the integral functionals; tensor product in 2D."""
    p = _check_degree(mm, u, p)
    q = mesh_ratio_q(mm.mesh)
    if q > Q_WARN:
        warnings.warn(f"mesh ratio q={q:.3g} is large; P_vec may be poorly conditioned")
    Px, Rx = _pvec_direction(mm.xs, mm.a_x, p, nquad)
    Py, Ry = _pvec_direction(mm.ys, mm.a_y, p, nquad)
    # the interior vertex must be the fine mesh point itself
    Px[:, 1] = mm.mesh.xs[1:-1:2]
    Py[:, 1] = mm.mesh.ys[1:-1:2]
    out = MacroFEFunction(mm, p + 1, np.zeros(((p + 1) * mm.n + 1,) * 2))
    out.grid = cellwise_projection(out.line_x, out.line_y, u, Px, Rx, Py, Ry)
    return out
