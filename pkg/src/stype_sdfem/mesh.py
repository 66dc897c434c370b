"""S-type layer-adapted tensor meshes, subdomain classification and macro meshes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class MeshKind(str, enum.Enum):
    SHISHKIN = "shishkin"
    BAKHVALOV_SHISHKIN = "bakhvalov-shishkin"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value) -> "MeshKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"s": "shishkin", "bs": "bakhvalov-shishkin", "b-s": "bakhvalov-shishkin",
                   "bakhvalovshishkin": "bakhvalov-shishkin"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown mesh kind {value!r}; use 'shishkin' or 'bakhvalov-shishkin'") from None


@dataclass(frozen=True)
class MeshGeneratingFunction:
    """phi: [0, 1/2] -> [0, ln N] together with psi = exp(-phi) and max |psi'|."""

    kind: MeshKind
    N: int
    phi: Callable[[np.ndarray], np.ndarray]
    max_psi_prime: float

    def psi(self, t):
        return np.exp(-self.phi(np.asarray(t, dtype=float)))

    @classmethod
    def shishkin(cls, N: int) -> "MeshGeneratingFunction":
        lnN = math.log(N)
        return cls(MeshKind.SHISHKIN, N, lambda t: 2.0 * np.asarray(t, dtype=float) * lnN, 2.0 * lnN)

    @classmethod
    def bakhvalov_shishkin(cls, N: int) -> "MeshGeneratingFunction":
        s = 1.0 - 1.0 / N
        return cls(MeshKind.BAKHVALOV_SHISHKIN, N,
                   lambda t: -np.log(1.0 - 2.0 * np.asarray(t, dtype=float) * s), 2.0 * s)

    @classmethod
    def custom(cls, N: int, phi, max_psi_prime: Optional[float] = None) -> "MeshGeneratingFunction":
        """User-supplied phi. Without an explicit max |psi'| it is estimated by sampling."""
        if max_psi_prime is None:
            t = np.linspace(0.0, 0.5, 20001)
            psi = np.exp(-phi(t))
            max_psi_prime = float(np.max(np.abs(np.diff(psi) / np.diff(t))))
        return cls(MeshKind.CUSTOM, N, phi, float(max_psi_prime))

    @classmethod
    def for_kind(cls, kind, N: int) -> "MeshGeneratingFunction":
        kind = MeshKind.parse(kind)
        if kind is MeshKind.SHISHKIN:
            return cls.shishkin(N)
        if kind is MeshKind.BAKHVALOV_SHISHKIN:
            return cls.bakhvalov_shishkin(N)
        raise ValueError("custom meshes need an explicit phi")


class Subdomain(str, enum.Enum):
    """The four mesh regions; first digit 2 = inside a characteristic (y) layer,
    second digit 2 = inside the exponential (x) layer."""

    OMEGA11 = "11"
    OMEGA12 = "12"
    OMEGA21 = "21"
    OMEGA22 = "22"


@dataclass(frozen=True)
class TensorMesh:
    N: int
    xs: np.ndarray
    ys: np.ndarray
    lam_x: float
    lam_y: float
    sigma: float
    eps: float
    beta: float
    generator: MeshGeneratingFunction = field(repr=False)

    @property
    def kind(self) -> MeshKind:
        return self.generator.kind

    @property
    def max_psi_prime(self) -> float:
        return self.generator.max_psi_prime

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.xs)

    @property
    def k(self) -> np.ndarray:
        return np.diff(self.ys)

    @property
    def hbar(self) -> float:
        return float(self.h[: self.N // 2].max())

    @property
    def kbar(self) -> float:
        return float(self.k[: self.N // 4].max())

    @property
    def hmin(self) -> float:
        return float(self.h[: self.N // 2].min())

    def cell_centers(self):
        return 0.5 * (self.xs[1:] + self.xs[:-1]), 0.5 * (self.ys[1:] + self.ys[:-1])


def eps_threshold(N: int, sigma: float) -> float:
    return 1.0 / (4.0 * sigma * math.log(N)) ** 2


def build_stype_mesh(N: int, sigma: float, eps: float, beta: float = 1.0, kind="shishkin",
                     phi=None) -> TensorMesh:
    """Tensor mesh fine near x=0 (N/2 cells) and near y=0, y=1 (N/4 cells each).

    `kind` selects the mesh-generating function; pass kind="custom" with `phi`
    (a callable or a MeshGeneratingFunction) for other S-type meshes.
    """
    if N < 8 or N % 8:
        raise ValueError(f"N must be a positive multiple of 8 (got {N})")
    if sigma <= 0 or beta <= 0 or eps <= 0:
        raise ValueError("sigma, beta and eps must be positive")
    thr = eps_threshold(N, sigma)
    if eps > thr:
        raise ValueError(f"eps={eps:g} violates eps <= 1/(4 sigma ln N)^2 = {thr:.6g} for N={N}, sigma={sigma:g}")
    kind = MeshKind.parse(kind)
    if isinstance(phi, MeshGeneratingFunction):
        gen = phi
    elif kind is MeshKind.CUSTOM:
        if phi is None:
            raise ValueError("custom mesh kind requires phi")
        gen = MeshGeneratingFunction.custom(N, phi)
    else:
        gen = MeshGeneratingFunction.for_kind(kind, N)

    lnN = math.log(N)
    lam_x = sigma * eps / beta * lnN
    lam_y = sigma * math.sqrt(eps) * lnN
    if lam_x > 0.5:
        raise ValueError(f"transition point lambda_x={lam_x:g} exceeds 1/2")
    if lam_y > 0.25:
        raise ValueError(f"transition point lambda_y={lam_y:g} exceeds 1/4")

    i = np.arange(N + 1)
    xs = np.empty(N + 1)
    half = N // 2
    xs[: half + 1] = sigma * eps / beta * gen.phi(i[: half + 1] / N)
    xs[half:] = 1.0 - 2.0 * (1.0 - lam_x) * (1.0 - i[half:] / N)
    xs[0], xs[half], xs[N] = 0.0, lam_x, 1.0

    ys = np.empty(N + 1)
    q, q3 = N // 4, 3 * N // 4
    se = sigma * math.sqrt(eps)
    ys[: q + 1] = se * gen.phi(2.0 * i[: q + 1] / N)
    ys[q: q3 + 1] = (1.0 - 2.0 * lam_y) * (2.0 * i[q: q3 + 1] / N - 1.0) + 0.5
    ys[q3:] = 1.0 - se * gen.phi(2.0 - 2.0 * i[q3:] / N)
    ys[0], ys[q], ys[q3], ys[N] = 0.0, lam_y, 1.0 - lam_y, 1.0

    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise ValueError("mesh points are not strictly increasing; check phi")
    xs.flags.writeable = False
    ys.flags.writeable = False
    return TensorMesh(N, xs, ys, lam_x, lam_y, float(sigma), float(eps), float(beta), gen)


def subdomain_codes(mesh: TensorMesh) -> np.ndarray:
    """Array of shape (N, N), indexed [j-1, i-1], holding Subdomain values."""
    xc, yc = mesh.cell_centers()
    in_x_layer = xc < mesh.lam_x
    in_y_layer = (yc < mesh.lam_y) | (yc > 1.0 - mesh.lam_y)
    first = np.where(in_y_layer, "2", "1")
    second = np.where(in_x_layer, "2", "1")
    return np.char.add(first[:, None], second[None, :])


def classify_cell(mesh: TensorMesh, i: int, j: int) -> Subdomain:
    """Subdomain of cell tau_ij = [x_{i-1}, x_i] x [y_{j-1}, y_j] (1-based)."""
    N = mesh.N
    if not (1 <= i <= N and 1 <= j <= N):
        raise IndexError(f"cell index ({i}, {j}) outside 1..{N}")
    xc = 0.5 * (mesh.xs[i - 1] + mesh.xs[i])
    yc = 0.5 * (mesh.ys[j - 1] + mesh.ys[j])
    first = "2" if (yc < mesh.lam_y or yc > 1.0 - mesh.lam_y) else "1"
    second = "2" if xc < mesh.lam_x else "1"
    return Subdomain(first + second)


@dataclass(frozen=True)
class MacroMesh:
    """2x2 blocks of fine cells; macro m in x covers fine cells 2m+1, 2m+2 (1-based)."""

    mesh: TensorMesh
    xs: np.ndarray
    ys: np.ndarray
    a_x: np.ndarray
    a_y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.xs) - 1

    @property
    def num_macros(self) -> int:
        return self.n * self.n


def _interior_offsets(pts: np.ndarray) -> np.ndarray:
    left, mid, right = pts[0:-2:2], pts[1:-1:2], pts[2::2]
    return (2.0 * mid - left - right) / (right - left)


def build_macro_mesh(mesh: TensorMesh) -> MacroMesh:
    if mesh.N % 8:
        raise ValueError("macro mesh needs N divisible by 8")
    a_x = _interior_offsets(mesh.xs)
    a_y = _interior_offsets(mesh.ys)
    for arr in (a_x, a_y):
        arr.flags.writeable = False
    xs = mesh.xs[::2].copy()
    ys = mesh.ys[::2].copy()
    return MacroMesh(mesh, xs, ys, a_x, a_y)


def _pair_ratios(widths: np.ndarray) -> np.ndarray:
    a, b = widths[:-1], widths[1:]
    return np.maximum(a, b) / np.minimum(a, b)


def mesh_ratio_q(mesh: TensorMesh, direction: Optional[str] = None) -> float:
    """Largest ratio of neighbouring cell widths inside the fine layer regions.

    `direction` restricts the check to "x" or "y"; by default both count.
    """
    N = mesh.N
    h, k = mesh.h, mesh.k
    rx = _pair_ratios(h[: N // 2]).max()
    ry = max(_pair_ratios(k[: N // 4]).max(), _pair_ratios(k[3 * N // 4:]).max())
    if direction == "x":
        return float(rx)
    if direction == "y":
        return float(ry)
    if direction is not None:
        raise ValueError("direction must be 'x', 'y' or None")
    return float(max(rx, ry))


def dump_mesh(mesh: TensorMesh) -> str:
    lines = [f"# N = {mesh.N}", f"# sigma = {mesh.sigma!r}", f"# eps = {mesh.eps!r}",
             f"# beta = {mesh.beta!r}", f"# kind = {mesh.kind.value}", "X"]
    lines += [repr(float(v)) for v in mesh.xs]
    lines.append("Y")
    lines += [repr(float(v)) for v in mesh.ys]
    return "\n".join(lines) + "\n"


def load_mesh_dump(text: str):
    """Parse a mesh dump back into (header dict, xs, ys)."""
    header, xs, ys, target = {}, [], [], None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            header[key.strip()] = val.strip()
        elif line in ("X", "Y"):
            target = xs if line == "X" else ys
        else:
            target.append(float(line))
    return header, np.array(xs), np.array(ys)
