import math

import numpy as np
import pytest

from stype_sdfem.error_norms import EnergyNorm, energy_diff_fe, energy_error_exact
from stype_sdfem.interpolation import gl_interpolate, vec_interpolate
from stype_sdfem.mesh import MeshKind
from stype_sdfem.study import (COLUMNS, StudyConfig, StudyError, convergence_rate, observed_slope,
                               run_study, solve_model)


def test_rate_examples():
    assert convergence_rate(2.270e-02, 7.926e-03, 8, "shishkin") == pytest.approx(2.595, abs=5e-3)
    assert convergence_rate(1.0, 1 / 16, 64, "bakhvalov-shishkin") == pytest.approx(4.0, abs=1e-14)
    assert convergence_rate(0.3, 0.3, 8, "shishkin") == 0.0
    assert convergence_rate(0.3, 0.3, 8, "bakhvalov-shishkin") == 0.0
    with pytest.raises(ValueError):
        convergence_rate(0.0, 1.0, 8, "shishkin")
    with pytest.raises(ValueError):
        convergence_rate(1.0, -1.0, 8, "shishkin")


def test_rate_inverts_model():
    # e_N = C (N^-1 ln N)^r on Shishkin meshes
    r = 3.3
    e = lambda N: 2.0 * (math.log(N) / N) ** r
    assert convergence_rate(e(16), e(32), 16, "shishkin") == pytest.approx(r, rel=1e-12)


def test_default_config_is_table_one():
    cfg = StudyConfig()
    assert cfg.mesh is MeshKind.SHISHKIN and cfg.p == 3 and cfg.sigma == 5 and cfg.epsilon == 1e-6
    assert cfg.C == 1 and cfg.N == (8, 16, 32, 64) and cfg.method == "sdfem"
    assert not cfg.sharper_delta21


def test_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(N=(8, 12))
    with pytest.raises(ValueError):
        StudyConfig(N=(8, 8))
    with pytest.raises(ValueError):
        StudyConfig(columns=("nope",))
    with pytest.raises(ValueError):
        StudyConfig(method="upwind")
    with pytest.raises(ValueError):
        StudyConfig(mesh="uniform")
    assert StudyConfig(N=(32, 8, 16)).N == (8, 16, 32)
    assert StudyConfig(N=(8, 128, 256)).extended == (128, 256)


@pytest.fixture(scope="module")
def full_reports():
    out = {}
    for kind in ("shishkin", "bakhvalov-shishkin"):
        out[kind] = run_study(StudyConfig(mesh=kind, columns=COLUMNS))
    return out


def test_monotone_columns(full_reports):
    for rep in full_reports.values():
        for c in COLUMNS:
            e = rep.errors[c]
            assert all(a > b > 0 for a, b in zip(e, e[1:])), c
            assert len(rep.rates[c]) == len(rep.N) - 1


def test_determinism(full_reports):
    again = run_study(StudyConfig(mesh="bakhvalov-shishkin", columns=COLUMNS), threads=3)
    assert again.to_csv() == full_reports["bakhvalov-shishkin"].to_csv()


def test_convergence_rate_bakhvalov_shishkin(full_reports):
    rep = full_reports["bakhvalov-shishkin"]
    assert observed_slope(rep.errors["convergence"][1:], rep.N[1:]) >= 3 - 0.2


def test_csv_layout(full_reports):
    rep = full_reports["shishkin"]
    lines = rep.to_csv().splitlines()
    assert lines[0] == "N," + ",".join(f"err_{c}" for c in COLUMNS) + "," + ",".join(f"rate_{c}" for c in COLUMNS)
    assert len(lines) == 5
    first = lines[1].split(",")
    assert first[0] == "8"
    assert float(first[1]) == pytest.approx(rep.errors["convergence"][0], rel=1e-5)
    assert all(len(v.split("e")[0].replace(".", "").lstrip("-")) == 6 for v in first[1:])
    assert lines[-1].endswith("," * len(COLUMNS)) or lines[-1].split(",")[-1] == ""


def test_text_table(full_reports):
    text = full_reports["bakhvalov-shishkin"].to_text()
    assert "rate_B" in text and "bakhvalov-shishkin" in text
    assert len(text.splitlines()) == 3 + 4


def test_errors_carry_n(monkeypatch):
    import stype_sdfem.study as study

    def boom(*a, **k):
        raise RuntimeError("bad")

    monkeypatch.setattr(study, "solve_model", boom)
    with pytest.raises(StudyError) as info:
        run_study(StudyConfig(N=(16,)))
    assert info.value.N == 16


class _Difference:
    """w = F - u, evaluated like an exact solution."""

    def __init__(self, F, u):
        self.F, self.u = F, u

    def on_grid(self, xq, yq):
        v, gx, gy = self.F.on_grid(xq, yq)
        ue, ux, uy = self.u.on_grid(xq, yq)
        return v - ue, gx - ux, gy - uy


@pytest.mark.parametrize("kind", ["shishkin", "bakhvalov-shishkin"])
def test_gl_closeness_triangle_inequality(kind):
    sol = solve_model(kind, 16)
    u, norm, p = sol.prob.exact, EnergyNorm.of(sol.prob), 3
    lhs = energy_diff_fe(gl_interpolate(sol.space, u), sol.u, norm)
    pi_p1 = vec_interpolate(sol.space, u, degree=p + 1)
    w = _Difference(pi_p1, u)
    # I_p w - w with I_p w = I_p pi_{p+1} u - I_p u
    Iw = gl_interpolate(sol.space, pi_p1) - gl_interpolate(sol.space, u)
    rn = energy_error_exact(Iw, w, norm)
    rhs = energy_diff_fe(vec_interpolate(sol.space, u), sol.u, norm) + rn + energy_error_exact(pi_p1, u, norm)
    assert lhs <= rhs
