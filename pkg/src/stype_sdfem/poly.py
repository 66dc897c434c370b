"""Legendre polynomials, Gauss-Lobatto / Gauss-Legendre rules and 1D Lagrange bases."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def legendre_eval(p: int, t):
    """Value and first derivative of the Legendre polynomial L_p at t.

    Works on scalars and arrays (three-term recurrence for both).
    """
    if p < 0:
        raise ValueError("degree must be nonnegative")
    t = np.asarray(t, dtype=float)
    l0, d0 = np.ones_like(t), np.zeros_like(t)
    if p == 0:
        return _unwrap(l0), _unwrap(d0)
    l1, d1 = t.copy(), np.ones_like(t)
    for n in range(1, p):
        l2 = ((2 * n + 1) * t * l1 - n * l0) / (n + 1)
        d2 = d0 + (2 * n + 1) * l1
        l0, l1 = l1, l2
        d0, d1 = d1, d2
    return _unwrap(l1), _unwrap(d1)


def _unwrap(a):
    return float(a) if np.ndim(a) == 0 else a


@dataclass(frozen=True)
class NodeSet1D:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


_MAX_NEWTON = 100


@lru_cache(maxsize=None)
def gauss_lobatto_nodes(p: int) -> NodeSet1D:
    """The p+1 zeros of (1-t^2) L_p'(t) with their quadrature weights."""
    if p < 1:
        raise ValueError("Gauss-Lobatto rule needs p >= 1")
    k = np.arange(p + 1)
    t = -np.cos(np.pi * k / p)
    interior = t[1:-1].copy()
    for _ in range(_MAX_NEWTON):
        lp, dlp = legendre_eval(p, interior)
        # L_p'' from the Legendre ODE, valid away from +-1
        d2lp = (2.0 * interior * dlp - p * (p + 1) * lp) / (1.0 - interior**2)
        step = dlp / d2lp
        interior = interior - step
        if np.all(np.abs(step) < 1e-14):
            break
    else:
        raise RuntimeError(f"Newton iteration for Gauss-Lobatto nodes (p={p}) did not converge")
    t[1:-1] = interior
    t[0], t[-1] = -1.0, 1.0
    t = 0.5 * (t - t[::-1])
    if p % 2 == 0:
        t[p // 2] = 0.0
    lp, _ = legendre_eval(p, t)
    w = 2.0 / (p * (p + 1) * lp**2)
    w = 0.5 * (w + w[::-1])
    t.flags.writeable = False
    w.flags.writeable = False
    return NodeSet1D(p, t, w)


@lru_cache(maxsize=None)
def gauss_legendre_rule(n: int) -> NodeSet1D:
    """n-point Gauss-Legendre rule on [-1, 1]; exact up to degree 2n-1."""
    if n < 1:
        raise ValueError("Gauss-Legendre rule needs n >= 1")
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    t.flags.writeable = False
    w.flags.writeable = False
    return NodeSet1D(n - 1, t, w)


def barycentric_weights(nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def differentiation_matrix(nodes) -> np.ndarray:
    """D[i, j] = l_j'(t_i) for the Lagrange basis on `nodes`."""
    nodes = np.asarray(nodes, dtype=float)
    w = barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


class LagrangeBasis1D:
    """Lagrange basis on an arbitrary node set (Gauss-Lobatto by default).

    `eval(t)` returns arrays of shape (len(t), n_nodes) holding values, first and
    second derivatives. Derivatives go through the exact nodal differentiation
    matrix, so they carry no finite-difference error.
    """

    def __init__(self, nodes):
        self.nodes = np.array(nodes, dtype=float)
        self.nodes.flags.writeable = False
        self.degree = len(self.nodes) - 1
        self._bw = barycentric_weights(self.nodes)
        self.D = differentiation_matrix(self.nodes)
        self.D2 = self.D @ self.D

    @classmethod
    def gauss_lobatto(cls, p: int) -> "LagrangeBasis1D":
        return cls(gauss_lobatto_nodes(p).nodes)

    @classmethod
    def equidistant(cls, p: int) -> "LagrangeBasis1D":
        return cls(np.linspace(-1.0, 1.0, p + 1))

    def values(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        diff = t[:, None] - self.nodes[None, :]
        hit = diff == 0.0
        diff[hit] = 1.0
        terms = self._bw[None, :] / diff
        out = terms / terms.sum(axis=1, keepdims=True)
        rows = hit.any(axis=1)
        if rows.any():
            out[rows] = hit[rows].astype(float)
        return out

    def eval(self, t):
        V = self.values(t)
        # l_j^{(k)} lies in P_p, so interpolating its nodal values is exact
        return V, V @ self.D, V @ self.D2
