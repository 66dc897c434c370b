"""Command line: `study`, `solve` and `verify`.

Exit codes: 0 ok, 1 bad configuration, 2 verification failure, 3 solver failure.
"""
from __future__ import annotations

import argparse
import sys

from .fe_space import dump_fe_function
from .sparse_linalg import SolverError
from .study import COLUMNS, METHODS, StudyConfig, StudyError, run_study, solve_model

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_SOLVER = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in str(text).replace(" ", "").split(",") if t)
    except ValueError:
        raise ConfigError(f"N: expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> tuple:
    return tuple(t.strip() for t in str(text).split(",") if t.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _opt_int(text):
    return None if text in (None, "", "none", "None") else int(text)


# key -> parser for config-file values (and flag strings)
_PARSERS = {
    "mesh": str, "p": int, "sigma": float, "epsilon": float, "C": float, "N": _int_list,
    "method": str, "sharper_delta21": _bool, "columns": _str_list, "quad_order": _opt_int,
    "error_quad": _opt_int, "format": str,
}


def _convert(key: str, value):
    try:
        return _PARSERS[key](value)
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"--{key.replace('_', '-')}: cannot parse {value!r}") from None


def read_config(path: str) -> dict:
    """`key = value` lines; '#' starts a comment. Keys may use '-' or '_'."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _convert(key, value)
    return out


def write_config(cfg: StudyConfig, path: str):
    lines = []
    for key, v in cfg.as_dict().items():
        if isinstance(v, (tuple, list)):
            v = ",".join(str(t) for t in v)
        elif v is None:
            v = "none"
        lines.append(f"{key} = {v!r}" if isinstance(v, float) else f"{key} = {v}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stype-sdfem", allow_abbrev=False,
                                 description="High-order SDFEM on layer-adapted meshes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--mesh", help="shishkin | bakhvalov-shishkin")
        p.add_argument("--p", help="polynomial degree")
        p.add_argument("--sigma", help="mesh transition parameter")
        p.add_argument("--epsilon", help="perturbation parameter")
        p.add_argument("--C", help="stabilization scale")
        p.add_argument("--N", help="comma-separated cell counts, each divisible by 8")
        p.add_argument("--method", help=" | ".join(METHODS))
        p.add_argument("--sharper-delta21", action="store_true", default=None,
                       help="use C*(max|psi'|/N)^2 in the characteristic layer")
        p.add_argument("--quad-order", help="assembly Gauss points per direction (>= p+2)")
        p.add_argument("--error-quad", help="error Gauss points per direction and cell")
        p.add_argument("--output", help="write to this file instead of stdout")
        p.add_argument("--threads", type=int, default=1, help="worker threads over N")

    st = sub.add_parser("study", help="run a convergence study")
    common(st)
    st.add_argument("--columns", help="comma-separated subset of: " + ", ".join(COLUMNS))
    st.add_argument("--format", help="text | csv")
    st.add_argument("--save-config", help="write the effective configuration to this file")

    so = sub.add_parser("solve", help="solve once and dump the FE solution")
    common(so)

    sub.add_parser("verify", help="run the identity, consistency and quadrature suites")
    return ap


def config_from_args(args) -> StudyConfig:
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for key in _PARSERS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag)
    try:
        return StudyConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_study(args) -> int:
    cfg = config_from_args(args)
    if args.save_config:
        write_config(cfg, args.save_config)
    report = run_study(cfg, threads=max(1, args.threads))
    _emit(report.render(), args.output)
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg = config_from_args(args)
    if len(cfg.N) != 1:
        raise ConfigError("solve takes a single N")
    N = cfg.N[0]
    try:
        sol = solve_model(cfg.mesh, N, cfg.p, cfg.sigma, cfg.epsilon, cfg.C, cfg.method,
                          cfg.sharper_delta21, cfg.quad_order)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    header = f"# mesh={cfg.mesh.value} method={cfg.method}\n"
    _emit(header + dump_fe_function(sol.u), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .checks import run_all

    results = run_all()
    for r in results:
        print(r.line())
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return {"study": _cmd_study, "solve": _cmd_solve, "verify": _cmd_verify}[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, StudyError) as exc:
        cause = getattr(exc, "cause", exc)
        if isinstance(cause, ValueError) and not isinstance(cause, SolverError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
