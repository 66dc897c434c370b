"""Streamline-diffusion (and plain Galerkin) assembly for Q_p elements on tensor meshes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fe_space import FESpace
from .mesh import Subdomain, TensorMesh, subdomain_codes
from .poly import LagrangeBasis1D, gauss_legendre_rule
from .problem import ProblemData


@dataclass(frozen=True)
class StabilizationParams:
    d11: float
    d12: float
    d21: float
    d22: float
    C: float = 1.0

    def __post_init__(self):
        for name in ("d11", "d12", "d21", "d22"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"stabilization parameter {name}={v!r} must be finite and >= 0")

    @classmethod
    def zero(cls) -> "StabilizationParams":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    def by_subdomain(self) -> dict:
        return {Subdomain.OMEGA11: self.d11, Subdomain.OMEGA12: self.d12,
                Subdomain.OMEGA21: self.d21, Subdomain.OMEGA22: self.d22}

    def cell_values(self, mesh: TensorMesh) -> np.ndarray:
        codes = subdomain_codes(mesh)
        out = np.full(codes.shape, np.nan)
        for sub, val in self.by_subdomain().items():
            out[codes == sub.value] = val
        if np.isnan(out).any():
            raise ValueError("some cells were not assigned to a subdomain")
        return out


def stabilization_parameters(mesh: TensorMesh, eps: float, C: float = 1.0,
                             sharper: bool = False) -> StabilizationParams:
    """delta_11 = C/N, delta_12 = delta_22 = 0 and delta_21 at its upper bound

        C * max(1, eps^-1/2 * mu) * mu^2,  mu = max|psi'| / N,

    or C * mu^2 when `sharper` is set.
    """
    if not C > 0:
        raise ValueError("stabilization scale C must be positive")
    N = mesh.N
    mu = mesh.max_psi_prime / N
    d21 = C * mu**2 if sharper else C * max(1.0, mu / math.sqrt(eps)) * mu**2
    return StabilizationParams(C / N, 0.0, d21, 0.0, C)


@dataclass
class AssembledSystem:
    matrix: sp.csr_matrix        # interior rows/columns only
    rhs: np.ndarray
    interior: np.ndarray         # full-space index of each unknown
    full_matrix: sp.csr_matrix   # before Dirichlet elimination
    full_rhs: np.ndarray
    space: FESpace

    def expand(self, x) -> np.ndarray:
        """Insert the interior solution into a full coefficient vector (zero boundary values)."""
        u = np.zeros(self.space.ndofs)
        u[self.interior] = x
        return u


def _reference_tables(p: int, nq: int):
    rule = gauss_legendre_rule(nq)
    V, D, D2 = LagrangeBasis1D.gauss_lobatto(p).eval(rule.nodes)
    return rule, V, D, D2


def _chunks(N: int, per_row: int, budget: int = 4_000_000):
    rows = max(1, budget // max(per_row, 1))
    for start in range(0, N, rows):
        yield start, min(N, start + rows)


def assemble_sdfem(space: FESpace, prob: ProblemData, delta: StabilizationParams | None,
                   quad_order: int | None = None) -> AssembledSystem:
    """Assemble a_SD(u, v) = f_SD(v) with cell-wise constant delta; delta=None gives Galerkin."""
    p = space.p
    nq = p + 2 if quad_order is None else int(quad_order)
    if nq < p + 2:
        raise ValueError(f"quad_order must be >= p+2 = {p + 2} points per direction (got {nq})")
    mesh = space.mesh
    N = mesh.N
    eps = prob.eps
    dcell = np.zeros((N, N)) if delta is None else delta.cell_values(mesh)

    rule, V, D, D2 = _reference_tables(p, nq)
    L = (p + 1) ** 2
    Q = nq * nq
    # reference tensor tables, quadrature index (r, q) = (y, x), local index (b, a) = (y, x)
    phi = np.einsum("rb,qa->rqba", V, V).reshape(Q, L)
    phi_xi = np.einsum("rb,qa->rqba", V, D).reshape(Q, L)
    phi_eta = np.einsum("rb,qa->rqba", D, V).reshape(Q, L)
    phi_xixi = np.einsum("rb,qa->rqba", V, D2).reshape(Q, L)
    phi_etaeta = np.einsum("rb,qa->rqba", D2, V).reshape(Q, L)

    h, k = mesh.h, mesh.k
    xq = mesh.xs[:-1, None] + 0.5 * h[:, None] * (rule.nodes[None, :] + 1.0)   # (N, nq)
    yq = mesh.ys[:-1, None] + 0.5 * k[:, None] * (rule.nodes[None, :] + 1.0)
    wref = np.outer(rule.weights, rule.weights).ravel()                          # (Q,)

    dofs = space.all_cell_dofs()                                                 # (N, N, L)
    data_blocks, rhs = [], np.zeros(space.ndofs)

    for j0, j1 in _chunks(N, N * Q * L):
        nj = j1 - j0
        X = np.broadcast_to(xq[None, :, None, :], (nj, N, nq, nq))
        Y = np.broadcast_to(yq[j0:j1, None, :, None], (nj, N, nq, nq))
        bq = np.broadcast_to(prob.b(X, Y), X.shape).reshape(nj, N, Q)
        cq = np.broadcast_to(prob.c(X, Y), X.shape).reshape(nj, N, Q)
        fq = np.broadcast_to(prob.f(X, Y), X.shape).reshape(nj, N, Q)

        sx = (2.0 / h)[None, :, None, None]
        sy = (2.0 / k[j0:j1])[:, None, None, None]
        jac = (0.25 * k[j0:j1, None] * h[None, :])[:, :, None]
        W = jac * wref[None, None, :]                                            # (nj, N, Q)

        gx = np.broadcast_to(sx * phi_xi, (nj, N, Q, L))
        gy = np.broadcast_to(sy * phi_eta, (nj, N, Q, L))
        ph = phi[None, None]

        d = dcell[j0:j1][:, :, None]
        # test-side factors carry the quadrature weights
        Wphi = (W[..., None] * ph)
        trial_mass = cq[..., None] * ph - bq[..., None] * gx
        A = np.matmul(np.swapaxes(Wphi, -1, -2), trial_mass)
        A += eps * (np.matmul(np.swapaxes(W[..., None] * gx, -1, -2), gx)
                    + np.matmul(np.swapaxes(W[..., None] * gy, -1, -2), gy))
        Fl = (W * fq) @ phi
        if np.any(d > 0):
            lap = sx**2 * phi_xixi + sy**2 * phi_etaeta
            resid = eps * lap + bq[..., None] * gx - cq[..., None] * ph
            test = (d * W * bq)[..., None] * gx
            A += np.matmul(np.swapaxes(test, -1, -2), resid)
            Fl -= np.einsum("jiq,jiql->jil", d * W * fq * bq, gx)

        cell_dofs = dofs[j0:j1]
        data_blocks.append((cell_dofs, A))
        rhs += np.bincount(cell_dofs.ravel(), weights=Fl.ravel(), minlength=space.ndofs)

    rows = np.concatenate([np.repeat(cd, L, axis=-1).ravel() for cd, _ in data_blocks])
    cols = np.concatenate([np.tile(cd, (1, 1, L)).ravel() for cd, _ in data_blocks])
    vals = np.concatenate([A.ravel() for _, A in data_blocks])
    full = sp.coo_matrix((vals, (rows, cols)), shape=(space.ndofs, space.ndofs)).tocsr()
    full.sum_duplicates()
    full.sort_indices()
    interior = space.interior_dofs
    mat = full[interior][:, interior].tocsr()
    mat.sort_indices()
    return AssembledSystem(mat, rhs[interior].copy(), interior, full, rhs, space)


def assemble_galerkin(space: FESpace, prob: ProblemData, quad_order: int | None = None) -> AssembledSystem:
    return assemble_sdfem(space, prob, None, quad_order)


def dump_matrix_coo(A) -> str:
    A = sp.coo_matrix(A)
    lines = [f"# {A.shape[0]} {A.shape[1]} {A.nnz}"]
    lines += [f"{r} {c} {v!r}" for r, c, v in zip(A.row.tolist(), A.col.tolist(), A.data.tolist())]
    return "\n".join(lines) + "\n"
