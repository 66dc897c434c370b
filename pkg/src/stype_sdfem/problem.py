"""Problem data for -eps*Lap(u) - b u_x + c u = f on the unit square, u = 0 on the boundary."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Factor1D:
    """A 1D factor with hand-coded first and second derivatives."""

    f: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExactSolution:
    """Separable exact solution u(x, y) = X(x) Y(y)."""

    X: Factor1D
    Y: Factor1D

    def value(self, x, y):
        return self.X.f(x) * self.Y.f(y)

    def __call__(self, x, y):
        return self.value(x, y)

    def grad(self, x, y):
        return self.X.d1(x) * self.Y.f(y), self.X.f(x) * self.Y.d1(y)

    def laplacian(self, x, y):
        return self.X.d2(x) * self.Y.f(y) + self.X.f(x) * self.Y.d2(y)

    def on_grid(self, xq, yq):
        """u, u_x, u_y on the tensor grid yq x xq, shaped (len(yq), len(xq))."""
        X, Xp = self.X.f(xq), self.X.d1(xq)
        Y, Yp = self.Y.f(yq), self.Y.d1(yq)
        return np.outer(Y, X), np.outer(Y, Xp), np.outer(Yp, X)


def exact_eval(sol: ExactSolution, x: float, y: float):
    """(u, u_x, u_y) at a point."""
    ux, uy = sol.grad(x, y)
    return float(sol.value(x, y)), float(ux), float(uy)


def _grid(n=100):
    t = (np.arange(n) + 0.5) / n
    return np.meshgrid(t, t)


@dataclass(frozen=True)
class ProblemData:
    eps: float
    b: Field
    b_x: Field
    c: Field
    f: Field
    gamma: float
    beta: float
    exact: Optional[ExactSolution] = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        X, Y = _grid()
        bv = np.broadcast_to(self.b(X, Y), X.shape)
        if not self.beta > 0 or bv.min() < self.beta * (1 - 1e-12):
            raise ValueError(f"need b >= beta > 0; sampled min b = {bv.min():g}, beta = {self.beta:g}")
        react = np.broadcast_to(self.c(X, Y) + 0.5 * self.b_x(X, Y), X.shape)
        if not self.gamma > 0 or react.min() < self.gamma * (1 - 1e-12):
            raise ValueError(f"need c + b_x/2 >= gamma > 0; sampled min = {react.min():g}, gamma = {self.gamma:g}")

    @classmethod
    def from_coefficients(cls, eps, b, b_x, c, f, exact=None, gamma=None, beta=None):
        """Build problem data, taking beta and gamma from grid samples when omitted."""
        X, Y = _grid()
        if beta is None:
            beta = float(np.min(np.broadcast_to(b(X, Y), X.shape)))
        if gamma is None:
            gamma = float(np.min(np.broadcast_to(c(X, Y) + 0.5 * b_x(X, Y), X.shape)))
        return cls(eps, b, b_x, c, f, gamma, beta, exact)

    @classmethod
    def manufactured(cls, eps, b, b_x, c, exact: ExactSolution, gamma=None, beta=None):
        """Right-hand side generated from an exact solution: f = -eps*Lap(u) - b u_x + c u."""

        def f(x, y):
            ux, _ = exact.grad(x, y)
            return -eps * exact.laplacian(x, y) - b(x, y) * ux + c(x, y) * exact.value(x, y)

        return cls.from_coefficients(eps, b, b_x, c, f, exact, gamma, beta)


def _const(v):
    return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(v))


def layer_factor_x(eps: float) -> Factor1D:
    """X(x) = cos(pi x/2) - (exp(-x/eps) - exp(-1/eps)) / (1 - exp(-1/eps))."""
    e1 = math.exp(-1.0 / eps)
    den = 1.0 - e1
    h = 0.5 * math.pi

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.cos(h * x) - (np.exp(-x / eps) - e1) / den

    def d1(x):
        x = np.asarray(x, dtype=float)
        return -h * np.sin(h * x) + np.exp(-x / eps) / (eps * den)

    def d2(x):
        x = np.asarray(x, dtype=float)
        return -h * h * np.cos(h * x) - np.exp(-x / eps) / (eps * eps * den)

    return Factor1D(f, d1, d2)


def layer_factor_y(eps: float) -> Factor1D:
    """Y(y) = (1 - exp(-y/s)) (1 - exp(-(1-y)/s)) / (1 - exp(-1/s)), s = sqrt(eps)."""
    s = math.sqrt(eps)
    den = 1.0 - math.exp(-1.0 / s)

    def parts(y):
        y = np.asarray(y, dtype=float)
        ea = np.exp(-y / s)
        eb = np.exp(-(1.0 - y) / s)
        return 1.0 - ea, 1.0 - eb, ea / s, -eb / s, -ea / (s * s), -eb / (s * s)

    def f(y):
        A, B, *_ = parts(y)
        return A * B / den

    def d1(y):
        A, B, Ap, Bp, _, _ = parts(y)
        return (Ap * B + A * Bp) / den

    def d2(y):
        A, B, Ap, Bp, App, Bpp = parts(y)
        return (App * B + 2.0 * Ap * Bp + A * Bpp) / den

    return Factor1D(f, d1, d2)


def model_solution(eps: float) -> ExactSolution:
    return ExactSolution(layer_factor_x(eps), layer_factor_y(eps))


def model_problem(eps: float) -> ProblemData:
    """-eps*Lap(u) - (2-x) u_x + 3/2 u = f with exponential layer at x=0 and
    characteristic layers at y=0, y=1; beta = gamma = 1."""
    if not 0 < eps <= 1e-2:
        raise ValueError(f"model problem expects 0 < eps <= 1e-2 (got {eps:g})")
    sol = model_solution(eps)
    X, Y = sol.X, sol.Y

    def b(x, y):
        return np.broadcast_to(2.0 - np.asarray(x, dtype=float), np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        Xv, Xp, Xpp = X.f(x), X.d1(x), X.d2(x)
        Yv, Ypp = Y.f(y), Y.d2(y)
        return -eps * (Xpp * Yv + Xv * Ypp) - (2.0 - x) * Xp * Yv + 1.5 * Xv * Yv

    return ProblemData(eps, b, _const(-1.0), _const(1.5), f, gamma=1.0, beta=1.0, exact=sol)


def polynomial_solution() -> ExactSolution:
    """u = x(1-x) y(1-y), a global Q_2 function vanishing on the boundary."""
    fac = Factor1D(lambda t: np.asarray(t, dtype=float) * (1.0 - np.asarray(t, dtype=float)),
                   lambda t: 1.0 - 2.0 * np.asarray(t, dtype=float),
                   lambda t: np.full(np.shape(t), -2.0))
    return ExactSolution(fac, fac)


def polynomial_problem(eps=1.0, b=1.0, c=1.0) -> ProblemData:
    """Constant coefficients with the Q_2 exact solution of `polynomial_solution`."""
    return ProblemData.manufactured(eps, _const(b), _const(0.0), _const(c), polynomial_solution())
