"""Self-verification suites: operator identities, postprocessing consistency and
quadrature exactness. Each suite returns a list of CheckResult."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fe_space import build_space
from .interpolation import gl_interpolate, lemma_identity_discrepancies, vec_interpolate
from .mesh import build_macro_mesh, build_stype_mesh
from .poly import gauss_legendre_rule, gauss_lobatto_nodes
from .postprocess import pgl_apply, pvec_apply


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.value:.3e} (tol {self.tol:.0e})"


def random_smooth(rng: np.random.Generator, terms: int = 3):
    """A random trigonometric-polynomial-times-exponential function of (x, y)."""
    a = rng.normal(size=terms)
    w = rng.uniform(0.5, 3.0, size=(terms, 2))
    ph = rng.uniform(0.0, 2 * np.pi, size=(terms, 2))
    k = rng.uniform(-1.0, 1.0, size=2)

    def g(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = 0.0
        for i in range(terms):
            out = out + a[i] * np.sin(w[i, 0] * x + ph[i, 0]) * np.cos(w[i, 1] * y + ph[i, 1])
        return out * np.exp(k[0] * x + k[1] * y)

    return g


def lemma_suite(degrees=(2, 3, 4), count: int = 50, extra_nodes=(-0.61, 0.37, 0.83),
                tol: float = 1e-9, seed: int = 1) -> list:
    rng = np.random.default_rng(seed)
    gs = [random_smooth(rng) for _ in range(count)]
    out = []
    for p in degrees:
        for t in extra_nodes:
            worst = max(max(lemma_identity_discrepancies(p, g, t)) for g in gs)
            out.append(CheckResult(f"reference identities p={p} extra node {t:+.2f}", worst, tol))
    return out


def consistency_suite(kinds=("shishkin", "bakhvalov-shishkin"), Ns=(8, 16), p: int = 3,
                      count: int = 20, tol: float = 1e-10, sigma: float = 5.0, eps: float = 1e-6,
                      seed: int = 2) -> list:
    """P_GL I_p g = P_GL g and P_vec pi_p g = P_vec g, compared in nodal coefficients
    relative to the size of the result."""
    rng = np.random.default_rng(seed)
    gs = [random_smooth(rng) for _ in range(count)]
    out = []
    for kind in kinds:
        for N in Ns:
            mesh = build_stype_mesh(N, sigma, eps, 1.0, kind)
            space = build_space(mesh, p)
            mm = build_macro_mesh(mesh)
            d_gl = d_vec = 0.0
            for g in gs:
                a = pgl_apply(mm, gl_interpolate(space, g)).grid
                b = pgl_apply(mm, g, p).grid
                d_gl = max(d_gl, np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))
                a = pvec_apply(mm, vec_interpolate(space, g)).grid
                b = pvec_apply(mm, g, p).grid
                d_vec = max(d_vec, np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))
            out.append(CheckResult(f"P_GL consistency {kind} N={N}", d_gl, tol))
            out.append(CheckResult(f"P_vec consistency {kind} N={N}", d_vec, tol))
    return out


def _monomial_error(nodes, weights, k: int) -> float:
    exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
    return abs(float(weights @ nodes**k) - exact)


def quadrature_suite(max_lobatto: int = 6, max_legendre: int = 8, tol: float = 1e-13) -> list:
    out = []
    for p in range(1, max_lobatto + 1):
        r = gauss_lobatto_nodes(p)
        err = max(_monomial_error(r.nodes, r.weights, k) for k in range(2 * p))
        out.append(CheckResult(f"Gauss-Lobatto p={p} exact to degree {2 * p - 1}", err, tol))
    for n in range(1, max_legendre + 1):
        r = gauss_legendre_rule(n)
        err = max(_monomial_error(r.nodes, r.weights, k) for k in range(2 * n))
        out.append(CheckResult(f"Gauss-Legendre n={n} exact to degree {2 * n - 1}", err, tol))
    return out


def run_all() -> list:
    return quadrature_suite() + lemma_suite() + consistency_suite()
