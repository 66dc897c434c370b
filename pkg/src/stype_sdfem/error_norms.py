"""Energy-norm errors (eps |.|_1^2 + gamma |.|_0^2)^(1/2) on the fine mesh."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fe_space import FEFunction, TensorFunction
from .poly import gauss_legendre_rule


@dataclass(frozen=True)
class EnergyNorm:
    eps: float
    gamma: float

    def __post_init__(self):
        if not (self.eps > 0 and self.gamma > 0):
            raise ValueError("energy norm needs eps > 0 and gamma > 0")

    @classmethod
    def of(cls, prob) -> "EnergyNorm":
        return cls(prob.eps, prob.gamma)


def fine_quadrature(edges, nq: int):
    """Gauss points/weights on every interval of `edges`, with the owning interval index."""
    edges = np.asarray(edges, dtype=float)
    rule = gauss_legendre_rule(nq)
    w = np.diff(edges)
    pts = edges[:-1, None] + 0.5 * w[:, None] * (rule.nodes[None, :] + 1.0)
    wts = 0.5 * w[:, None] * rule.weights[None, :]
    cells = np.repeat(np.arange(len(w)), nq)
    return pts.ravel(), wts.ravel(), cells


def _fine_mesh(u: TensorFunction):
    return u.mesh if hasattr(u, "mesh") else u.space.mesh


def _cells_of(u: TensorFunction, fine_cells):
    return fine_cells // getattr(u, "cells_per_element", 1)


def _energy(eps, gamma, wx, wy, dv, dgx, dgy) -> float:
    dens = eps * (dgx**2 + dgy**2) + gamma * dv**2
    return float(np.sqrt(wy @ dens @ wx))


def energy_error_exact(u_h: TensorFunction, sol, norm: EnergyNorm, nq: int | None = None,
                       mesh=None) -> float:
    """||u - u_h||_E with Gauss quadrature (nq points per direction) on each fine cell."""
    fine = _fine_mesh(u_h)
    if mesh is not None and mesh is not fine:
        raise ValueError("function lives on a different mesh")
    nq = u_h.line_x.degree + 3 if nq is None else nq
    xq, wx, cx = fine_quadrature(fine.xs, nq)
    yq, wy, cy = fine_quadrature(fine.ys, nq)
    v, gx, gy = u_h.on_grid(xq, yq, _cells_of(u_h, cx), _cells_of(u_h, cy))
    ue, uex, uey = sol.on_grid(xq, yq)
    return _energy(norm.eps, norm.gamma, wx, wy, ue - v, uex - gx, uey - gy)


def energy_diff_fe(u_h: FEFunction, v_h: FEFunction, norm: EnergyNorm, nq: int | None = None) -> float:
    """||u_h - v_h||_E for two functions of the same space."""
    if u_h.space.mesh is not v_h.space.mesh or u_h.space.p != v_h.space.p:
        raise ValueError("FE functions live in different spaces")
    return energy_norm(u_h - v_h, norm, nq)


def energy_norm(u_h: TensorFunction, norm: EnergyNorm, nq: int | None = None) -> float:
    fine = _fine_mesh(u_h)
    nq = u_h.line_x.degree + 3 if nq is None else nq
    xq, wx, cx = fine_quadrature(fine.xs, nq)
    yq, wy, cy = fine_quadrature(fine.ys, nq)
    v, gx, gy = u_h.on_grid(xq, yq, _cells_of(u_h, cx), _cells_of(u_h, cy))
    return _energy(norm.eps, norm.gamma, wx, wy, v, gx, gy)
