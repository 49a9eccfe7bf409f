"""Command-line interface: config-driven solves and operator utilities.

Subcommands:
  solve CONFIG            solve a weighted Cauchy-type problem from an
                          INI-style config and write series + report files
  integral|derivative|generalized
                          apply one fractional operator to an expression in u
                          and print nodes and values as CSV on stdout

Exit codes: 0 converged, 1 usage/config/evaluation error, 2 solver reached
max_iter without converging.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expressions
from .operators import (
    FracParams,
    GridFunction,
    _to_t_raw,
    generalized_derivative_grid,
    katugampola_derivative_grid,
    katugampola_integral_grid,
)
from .quadrature import MeshError, build_mesh
from .solver import (
    BallViolationError,
    DegenerateSeriesError,
    HypothesisData,
    ProblemSpec,
    SolverConfig,
    apriori_log_terms,
    picard_solve,
    ratio_sequence,
)

_REPORT_TERMS = 20


class ConfigError(ValueError):
    """Config file problem, with a line-precise message."""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the documented contract is 1
    def error(self, message):
        raise _UsageError(message)


def _fmt(value: float) -> str:
    """17 significant digits: round-trip safe and byte-deterministic."""
    return format(float(value), ".17g")


# --- config reading --------------------------------------------------------


def read_config(path: str) -> dict:
    """INI-style sections of key = value pairs; '#' starts a comment.

    Returns {section: {key: (raw_value, line_number)}}.
    """
    sections: dict = {}
    current = None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in ("problem", "solver", "output"):
                raise ConfigError(f"line {lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value, lineno)
    return sections


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "on": True,
               "false": False, "no": False, "0": False, "off": False}


class _Section:
    def __init__(self, name, entries):
        self.name = name
        self.entries = dict(entries)

    def take(self, key, convert, default=None, required=False):
        if key not in self.entries:
            if required:
                raise ConfigError(f"[{self.name}] is missing required key {key!r}")
            return default
        raw, lineno = self.entries.pop(key)
        try:
            return convert(raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: [{self.name}] {key}: {exc}") from None

    def line_of(self, key, fallback=0):
        return self.entries.get(key, (None, fallback))[1]

    def reject_unknown(self):
        if self.entries:
            key = next(iter(self.entries))
            _, lineno = self.entries[key]
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{self.name}]")


def _bool(raw: str) -> bool:
    word = raw.lower()
    if word not in _BOOL_WORDS:
        raise ValueError(f"expected a boolean, got {raw!r}")
    return _BOOL_WORDS[word]


@dataclass
class RunConfig:
    spec: ProblemSpec
    solver: SolverConfig
    fmt: str
    path: Path
    emit_iterates: bool
    emit_bounds: bool


def load_run_config(path: str) -> RunConfig:
    sections = read_config(path)
    for name in ("problem", "output"):
        if name not in sections:
            raise ConfigError(f"config {path!r} has no [{name}] section")

    prob = _Section("problem", sections["problem"])
    line = {key: prob.line_of(key) for key in list(prob.entries)}

    alpha = prob.take("alpha", float, required=True)
    if not 0 < alpha < 1:
        raise ConfigError(
            f"line {line.get('alpha', 0)}: [problem] alpha must be strictly "
            f"between 0 and 1, got {alpha}"
        )
    beta = prob.take("beta", float, required=True)
    if not 0 <= beta <= 1:
        raise ConfigError(
            f"line {line.get('beta', 0)}: [problem] beta must lie in [0, 1], got {beta}"
        )
    rho = prob.take("rho", float, default=1.0)
    a = prob.take("a", float, default=0.0)
    x_a = prob.take("x_a", float, required=True)
    f_text = prob.take("f", str, required=True)
    bound_m = prob.take("M", float, required=True)
    exponent_k = prob.take("k", float, required=True)
    lipschitz_a = prob.take("A", float, required=True)
    ball = prob.take("ball_radius", float, required=True)
    horizon = prob.take("horizon_h", float, required=True)
    prob.reject_unknown()
    for key, value, good in (
        ("rho", rho, rho > 0),
        ("M", bound_m, bound_m >= 0),
        ("A", lipschitz_a, lipschitz_a > 0),
        ("ball_radius", ball, ball > 0),
        ("horizon_h", horizon, horizon > 0),
    ):
        if not good:
            raise ConfigError(
                f"line {line.get(key, 0)}: [problem] {key} = {value} is out of range"
            )

    try:
        params = FracParams(alpha=alpha, beta_type=beta, rho=rho, a=a)
        hyp = HypothesisData(
            bound_M=bound_m,
            exponent_k=exponent_k,
            lipschitz_A=lipschitz_a,
            ball_radius=ball,
            horizon_h=horizon,
        )
        spec = ProblemSpec(params=params, x_a=x_a, f=f_text, hyp=hyp)
    except (ValueError, expressions.ParseError, expressions.EvalError) as exc:
        raise ConfigError(f"[problem] (near line {line.get('alpha', 0)}): {exc}") from None

    out = _Section("output", sections["output"])
    fmt = out.take("format", str, default="csv").lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(
            f"line {out.line_of('format')}: [output] format must be csv or json, got {fmt!r}"
        )
    out_path = out.take("path", str, required=True)
    emit_iterates = out.take("emit_iterates", _bool, default=False)
    emit_bounds = out.take("emit_bounds", _bool, default=True)
    out.reject_unknown()

    solv = _Section("solver", sections.get("solver", {}))
    try:
        solver_cfg = SolverConfig(
            node_count=solv.take("N", int, default=1024),
            grading=solv.take("grading_r", float, default=3.0),
            tol=solv.take("tol", float, default=1e-8),
            max_iter=solv.take("max_iter", int, default=50),
            store_iterates=emit_iterates,
        )
    except ValueError as exc:
        raise ConfigError(f"[solver]: {exc}") from None
    solv.reject_unknown()

    return RunConfig(
        spec=spec,
        solver=solver_cfg,
        fmt=fmt,
        path=Path(out_path),
        emit_iterates=emit_iterates,
        emit_bounds=emit_bounds,
    )


# --- solve subcommand -------------------------------------------------------


def _series_columns(result, spec):
    p = spec.params
    u = result.mesh.nodes
    w = result.weighted_solution
    t = _to_t_raw(u, p.rho, p.a)
    x = np.empty_like(w)
    x[1:] = u[1:] ** (p.gamma_w - 1.0) * w[1:]
    x0_defined = p.gamma_w == 1.0
    x[0] = w[0] if x0_defined else np.nan
    return t, u, w, x, x0_defined


def _write_series_csv(path, result, spec):
    t, u, w, x, x0_defined = _series_columns(result, spec)
    lines = ["t,u,w,x"]
    for i in range(len(u)):
        x_text = _fmt(x[i]) if (i > 0 or x0_defined) else ""
        lines.append(f"{_fmt(t[i])},{_fmt(u[i])},{_fmt(w[i])},{x_text}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_series_json(path, result, spec):
    t, u, w, x, x0_defined = _series_columns(result, spec)
    x_list = [float(v) for v in x]
    if not x0_defined:
        x_list[0] = None
    doc = {
        "t": [float(v) for v in t],
        "u": [float(v) for v in u],
        "w": [float(v) for v in w],
        "x": x_list,
    }
    path.write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8", newline="\n"
    )


def _write_iterates_csv(path, result):
    iterates = result.iterates or []
    header = ["u"] + [f"w{k}" for k in range(len(iterates))]
    lines = [",".join(header)]
    for i, ui in enumerate(result.mesh.nodes):
        row = [_fmt(ui)] + [_fmt(w[i]) for w in iterates]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def build_report(result, spec, emit_bounds: bool) -> dict:
    """The machine-readable run report; key set is fixed."""
    terms: list = []
    ratios: list = []
    if emit_bounds:
        logs = apriori_log_terms(_REPORT_TERMS - 1, spec.params, spec.hyp, result.radius_l)
        terms = [float(v) for v in np.exp(logs)]
        try:
            seq = ratio_sequence(_REPORT_TERMS, spec.params, spec.hyp, result.radius_l)
            ratios = [float(v) for v in seq]
        except DegenerateSeriesError:
            ratios = []
    return {
        "l": float(result.radius_l),
        "L": float(result.length_L),
        "iterations": int(result.iterations_used),
        "final_increment": float(result.final_increment),
        "residual_sup": float(result.residual_sup),
        "apriori_terms": terms,
        "ratio_sequence": ratios,
        "converged": bool(result.converged),
    }


def report_path_for(path: Path) -> Path:
    return path.with_name(path.stem + ".report.json")


def iterates_path_for(path: Path) -> Path:
    return path.with_name(path.stem + ".iterates.csv")


def run_solve(config_path: str) -> int:
    cfg = load_run_config(config_path)
    result = picard_solve(cfg.spec, cfg.solver)

    cfg.path.parent.mkdir(parents=True, exist_ok=True)
    if cfg.fmt == "csv":
        _write_series_csv(cfg.path, result, cfg.spec)
    else:
        _write_series_json(cfg.path, result, cfg.spec)
    report = build_report(result, cfg.spec, cfg.emit_bounds)
    report_path_for(cfg.path).write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    if cfg.emit_iterates:
        _write_iterates_csv(iterates_path_for(cfg.path), result)

    status = "converged" if result.converged else "did NOT converge"
    print(
        f"{status} after {result.iterations_used} iteration(s); "
        f"final increment {result.final_increment:.3e}, "
        f"residual {result.residual_sup:.3e}; wrote {cfg.path}",
        file=sys.stderr,
    )
    return 0 if result.converged else 2


# --- operator subcommands ---------------------------------------------------


def _sample_expression(expr, mesh, rho, a):
    """Sample an expression of u (and t) on the mesh.

    Node 0 falls back to linear extrapolation from nodes 1 and 2 when the
    expression is singular there, matching the grid sampling convention.
    """
    values = np.empty(mesh.N + 1)
    for i in range(1, mesh.N + 1):
        u = float(mesh.nodes[i])
        values[i] = expressions.evaluate(expr, t=_to_t_raw(u, rho, a), u=u)
    try:
        v0 = expressions.evaluate(expr, t=_to_t_raw(0.0, rho, a), u=0.0)
    except expressions.EvalError:
        v0 = math.nan
    if math.isfinite(v0):
        values[0] = v0
    else:
        u1, u2 = mesh.nodes[1], mesh.nodes[2]
        values[0] = values[1] - u1 * (values[2] - values[1]) / (u2 - u1)
    return values


def run_operator(args) -> int:
    subcommand = args.command
    beta = getattr(args, "beta", 0.0)
    if subcommand == "integral":
        if not 0 < args.alpha <= 1:
            raise _UsageError(f"--alpha must be in (0, 1] for integral, got {args.alpha}")
    else:
        if not 0 < args.alpha < 1:
            raise _UsageError(f"--alpha must be in (0, 1) for {subcommand}, got {args.alpha}")
    if not 0 <= beta <= 1:
        raise _UsageError(f"--beta must be in [0, 1], got {beta}")

    expr = expressions.parse(args.expr)
    mesh = build_mesh(args.L, args.N, args.r)
    values = _sample_expression(expr, mesh, args.rho, args.a)
    g = GridFunction(mesh, values)

    if subcommand == "integral":
        out = katugampola_integral_grid(g, args.alpha)
    elif subcommand == "derivative":
        out = katugampola_derivative_grid(g, args.alpha)
    else:
        params = FracParams(alpha=args.alpha, beta_type=beta, rho=args.rho, a=args.a)
        out = generalized_derivative_grid(g, params)

    lines = ["u,value"]
    for ui, vi in zip(mesh.nodes, out.values):
        lines.append(f"{_fmt(ui)},{_fmt(vi)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


# --- entry point -------------------------------------------------------------


def _add_operator_flags(sub, with_beta):
    sub.add_argument("--alpha", type=float, required=True, help="operator order")
    if with_beta:
        sub.add_argument("--beta", type=float, required=True,
                         help="operator type in [0, 1]")
    sub.add_argument("--rho", type=float, default=1.0, help="scale exponent (default 1)")
    sub.add_argument("--a", type=float, default=0.0, help="left endpoint (default 0)")
    sub.add_argument("--expr", type=str, required=True,
                     help="expression in u (t also available)")
    sub.add_argument("--N", type=int, default=1024, help="mesh panels (default 1024)")
    sub.add_argument("--r", type=float, default=3.0, help="mesh grading (default 3)")
    sub.add_argument("--L", type=float, required=True, help="mesh length in u")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gkfrac", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="solve a weighted Cauchy-type problem")
    solve.add_argument("config", help="path to the INI-style run config")

    for name, with_beta in (("integral", False), ("derivative", False), ("generalized", True)):
        sub = subs.add_parser(name, help=f"{name} operator values on a mesh")
        _add_operator_flags(sub, with_beta)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return run_solve(args.config)
        return run_operator(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, MeshError, ValueError, ArithmeticError, BallViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
