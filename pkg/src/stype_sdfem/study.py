"""Convergence studies on the layer-adapted model problem: solve for a list of N,
collect error columns, compute experimental rates and format the results."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .assembly import assemble_sdfem, stabilization_parameters
from .error_norms import EnergyNorm, energy_diff_fe, energy_error_exact
from .fe_space import FEFunction, build_space
from .interpolation import equidistant_interpolate, gl_interpolate, vec_interpolate
from .mesh import MeshKind, build_macro_mesh, build_stype_mesh
from .postprocess import pgl_apply, pvec_apply
from .problem import model_problem
from .sparse_linalg import solve

COLUMNS = ("convergence", "supercloseness-vec", "supercloseness-gl", "supercloseness-equi",
           "post-vec", "post-gl")
LABELS = {
    "convergence": "|u-u^N|",
    "supercloseness-vec": "|pi u-u^N|",
    "supercloseness-gl": "|I u-u^N|",
    "supercloseness-equi": "|J u-u^N|",
    "post-vec": "|u-Pvec u^N|",
    "post-gl": "|u-PGL u^N|",
}
EXTENDED_N = (128, 256)
METHODS = ("sdfem", "galerkin")


class StudyError(RuntimeError):
    """A failure inside one run of a study, tagged with its N."""

    def __init__(self, N: int, cause: Exception):
        super().__init__(f"N={N}: {cause}")
        self.N = N
        self.cause = cause


@dataclass
class StudyConfig:
    mesh: MeshKind = MeshKind.SHISHKIN
    p: int = 3
    sigma: float = 5.0
    epsilon: float = 1e-6
    C: float = 1.0
    N: tuple = (8, 16, 32, 64)
    method: str = "sdfem"
    sharper_delta21: bool = False
    columns: tuple = ("convergence", "supercloseness-vec", "supercloseness-gl", "supercloseness-equi")
    quad_order: int | None = None      # assembly Gauss points per direction
    error_quad: int | None = None      # error Gauss points per direction and fine cell
    format: str = "text"

    def __post_init__(self):
        self.mesh = MeshKind.parse(self.mesh)
        self.N = tuple(sorted(int(n) for n in self.N))
        self.columns = tuple(self.columns)
        self.validate()

    def validate(self):
        if not self.N:
            raise ValueError("N list is empty")
        if any(n < 8 or n % 8 for n in self.N):
            raise ValueError(f"every N must be >= 8 and divisible by 8 (got {list(self.N)})")
        if len(set(self.N)) != len(self.N):
            raise ValueError(f"N list has duplicates (got {list(self.N)})")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if not (self.sigma > 0 and self.epsilon > 0 and self.C > 0):
            raise ValueError("sigma, epsilon and C must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS} (got {self.method!r})")
        bad = [c for c in self.columns if c not in COLUMNS]
        if bad or not self.columns:
            raise ValueError(f"unknown columns {bad}; choose from {', '.join(COLUMNS)}")
        if self.format not in ("text", "csv"):
            raise ValueError("format must be 'text' or 'csv'")

    @property
    def extended(self) -> tuple:
        return tuple(n for n in self.N if n in EXTENDED_N)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, MeshKind):
                v = v.value
            out[f.name] = v
        return out


@dataclass
class StudyReport:
    config: StudyConfig
    N: list
    errors: dict                      # column -> list of errors, aligned with N
    rates: dict = field(default_factory=dict)   # column -> list of len(N)-1 rates

    def row(self, k: int) -> dict:
        return {c: self.errors[c][k] for c in self.config.columns}

    def to_csv(self) -> str:
        cols = self.config.columns
        buf = io.StringIO()
        header = ["N"] + [f"err_{c}" for c in cols] + [f"rate_{c}" for c in cols]
        buf.write(",".join(header) + "\n")
        for k, n in enumerate(self.N):
            vals = [str(n)] + ["%.5e" % self.errors[c][k] for c in cols]
            vals += ["%.5e" % self.rates[c][k] if k < len(self.N) - 1 else "" for c in cols]
            buf.write(",".join(vals) + "\n")
        return buf.getvalue()

    def to_text(self) -> str:
        cfg = self.config
        suffix = "S" if cfg.mesh is MeshKind.SHISHKIN else "B"
        lines = [f"# mesh={cfg.mesh.value} p={cfg.p} sigma={cfg.sigma:g} eps={cfg.epsilon:g} "
                 f"C={cfg.C:g} method={cfg.method}" + (" sharper-delta21" if cfg.sharper_delta21 else "")]
        head = f"{'N':>5}"
        for c in cfg.columns:
            head += f"  {LABELS[c]:>13} {'rate_' + suffix:>6}"
        lines.append(head)
        lines.append("-" * len(head))
        for k, n in enumerate(self.N):
            s = f"{n:>5}"
            for c in cfg.columns:
                r = "%6.2f" % self.rates[c][k] if k < len(self.N) - 1 else " " * 6
                s += f"  {self.errors[c][k]:>13.3e} {r}"
            if n in EXTENDED_N:
                s += "  (extended)"
            lines.append(s)
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        return self.to_csv() if self.config.format == "csv" else self.to_text()


def convergence_rate(eN: float, e2N: float, N: int, kind) -> float:
    """Experimental order between N and 2N.

    Shishkin: errors assumed ~ (N^-1 ln N)^r, so r = ln(eN/e2N) / ln(2 ln N / ln 2N).
    Bakhvalov-Shishkin: errors assumed ~ N^-r, so r = log2(eN/e2N).
    """
    if not (eN > 0 and e2N > 0):
        raise ValueError(f"errors must be positive (got {eN!r}, {e2N!r})")
    if N < 2:
        raise ValueError("N must be >= 2")
    kind = MeshKind.parse(kind)
    num = math.log(eN / e2N)
    if kind is MeshKind.SHISHKIN:
        return num / math.log(2.0 * math.log(N) / math.log(2 * N))
    return num / math.log(2.0)


@dataclass
class Solution:
    """One discrete solve and everything needed to measure it."""

    prob: object
    mesh: object
    space: object
    u: FEFunction
    delta: object = None


def solve_model(kind, N: int, p: int = 3, sigma: float = 5.0, eps: float = 1e-6, C: float = 1.0,
                method: str = "sdfem", sharper: bool = False, quad_order: int | None = None) -> Solution:
    prob = model_problem(eps)
    mesh = build_stype_mesh(N, sigma, eps, prob.beta, kind)
    space = build_space(mesh, p)
    delta = None
    if method == "sdfem":
        delta = stabilization_parameters(mesh, eps, C, sharper)
    elif method != "galerkin":
        raise ValueError(f"unknown method {method!r}")
    system = assemble_sdfem(space, prob, delta, quad_order)
    x = solve(system.matrix, system.rhs)
    return Solution(prob, mesh, space, FEFunction(space, system.expand(x)), delta)


def measure(sol: Solution, columns, nq: int | None = None) -> dict:
    """Energy-norm errors for the requested columns."""
    exact = sol.prob.exact
    norm = EnergyNorm.of(sol.prob)
    u = sol.u
    out = {}
    for c in columns:
        if c == "convergence":
            out[c] = energy_error_exact(u, exact, norm, nq)
        elif c == "supercloseness-vec":
            out[c] = energy_diff_fe(vec_interpolate(sol.space, exact), u, norm, nq)
        elif c == "supercloseness-gl":
            out[c] = energy_diff_fe(gl_interpolate(sol.space, exact), u, norm, nq)
        elif c == "supercloseness-equi":
            out[c] = energy_diff_fe(equidistant_interpolate(sol.space, exact), u, norm, nq)
        elif c == "post-vec":
            out[c] = energy_error_exact(pvec_apply(build_macro_mesh(sol.mesh), u), exact, norm, nq)
        elif c == "post-gl":
            out[c] = energy_error_exact(pgl_apply(build_macro_mesh(sol.mesh), u), exact, norm, nq)
        else:
            raise ValueError(f"unknown column {c!r}")
    return out


def _run_one(cfg: StudyConfig, N: int) -> dict:
    try:
        sol = solve_model(cfg.mesh, N, cfg.p, cfg.sigma, cfg.epsilon, cfg.C, cfg.method,
                          cfg.sharper_delta21, cfg.quad_order)
        return measure(sol, cfg.columns, cfg.error_quad)
    except Exception as exc:  # noqa: BLE001 - re-raised with context
        raise StudyError(N, exc) from exc


def run_study(cfg: StudyConfig, threads: int = 1) -> StudyReport:
    """Run every N of the config; rows come back sorted by N."""
    cfg.validate()
    Ns = sorted(cfg.N)
    if threads > 1 and len(Ns) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda n: _run_one(cfg, n), Ns))
    else:
        results = [_run_one(cfg, n) for n in Ns]
    errors = {c: [r[c] for r in results] for c in cfg.columns}
    rates = {c: [convergence_rate(e[k], e[k + 1], Ns[k], cfg.mesh) for k in range(len(Ns) - 1)]
             for c, e in errors.items()}
    return StudyReport(cfg, Ns, errors, rates)


def observed_slope(errors, Ns) -> float:
    """Least-squares slope of -log(e) against log(N)."""
    return float(-np.polyfit(np.log(Ns), np.log(errors), 1)[0])


def with_overrides(cfg: StudyConfig, **kw) -> StudyConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
