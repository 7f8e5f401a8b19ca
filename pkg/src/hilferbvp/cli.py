"""Command-line front end: ``solve``, ``certify``, ``verify``, ``sweep``.

Exit codes: 0 success, 1 configuration or usage error, 2 degenerate problem,
3 Picard iteration did not converge, 4 verification failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from hilferbvp.bvp import BvpSpec, DegenerateProblemError
from hilferbvp.calculus import GridFunction, OrderParams
from hilferbvp.certificates import (
    Certificate,
    check_theorems,
    compare_published,
    estimate_lipschitz,
    phi_constant,
)
from hilferbvp.expr import EvalError, ParseError, compile_rhs, evaluate, is_constant, parse
from hilferbvp.fixed_point import EvaluationError, SolveReport, picard_solve
from hilferbvp.special import DomainError, gamma_fault
from hilferbvp.verify import run_suites

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DEGENERATE = 2
EXIT_NOT_CONVERGED = 3
EXIT_VERIFY = 4

SWEEP_PARAMS = ("alpha", "beta", "nu", "epsilon")


class ConfigError(ValueError):
    def __init__(self, message: str, field_name: str | None = None, line: int | None = None,
                 path: str | None = None) -> None:
        self.field_name = field_name
        self.line = line
        where = path or ""
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


# {{{ configuration


@dataclass(frozen=True)
class ProblemConfig:
    alpha: float
    beta: float
    nu: float
    zeta: float
    epsilon: float
    rhs: str
    grid_points: int = 201
    s_min: float = 1.0e-3
    quad_nodes: int = 32
    tol: float = 1.0e-10
    max_iter: int = 200
    lipschitz_c: float | None = None
    bound_c1: float | None = None
    mu: float | None = None
    published_phi: float | None = None
    published_c_phi: float | None = None
    lines: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    path: str | None = field(default=None, compare=False, repr=False)

    def error(self, name: str, message: str) -> ConfigError:
        return ConfigError(message, name, self.lines.get(name), self.path)

    def to_spec(self) -> BvpSpec:
        """Build the problem; range violations become :class:`ConfigError`."""
        try:
            orders = OrderParams(self.alpha, self.beta)
        except DomainError as exc:
            name = "alpha" if "alpha" in str(exc) else "beta"
            raise self.error(name, str(exc)) from None
        try:
            return BvpSpec(orders, self.epsilon, self.nu, self.zeta, compile_rhs(self.rhs))
        except DomainError as exc:
            name = str(exc).split(" ", 1)[0]
            raise self.error(name, str(exc)) from None

    def grid(self, spec: BvpSpec) -> np.ndarray:
        return spec.default_grid(self.grid_points, self.s_min)


_REQUIRED = ("alpha", "beta", "nu", "zeta", "epsilon", "rhs")
_INTEGER = ("grid_points", "quad_nodes", "max_iter")
_FIELD_NAMES = tuple(f.name for f in fields(ProblemConfig) if f.name not in ("lines", "path"))

_LEGAL = {
    "alpha": (lambda v: 1.0 < v <= 2.0, "(1, 2]"),
    "beta": (lambda v: 0.0 <= v <= 1.0, "[0, 1]"),
    "nu": (lambda v: 0.0 <= v < 1.0, "[0, 1)"),
    "zeta": (lambda v: 1.0 < v < math.e, "(1, e)"),
    "epsilon": (lambda v: 0.0 < v < 1.0, "(0, 1)"),
    "grid_points": (lambda v: v >= 3, ">= 3"),
    "s_min": (lambda v: 0.0 < v < 1.0, "(0, 1)"),
    "quad_nodes": (lambda v: v >= 2, ">= 2"),
    "tol": (lambda v: v > 0.0, "> 0"),
    "max_iter": (lambda v: v >= 1, ">= 1"),
    "lipschitz_c": (lambda v: v >= 0.0, ">= 0"),
    "bound_c1": (lambda v: v >= 0.0, ">= 0"),
    "mu": (lambda v: True, "any finite value"),
    "published_phi": (lambda v: True, "any finite value"),
    "published_c_phi": (lambda v: True, "any finite value"),
}


def check_value(name: str, value) -> str | None:
    """Return an error message if *value* is outside the legal range of *name*."""
    ok, legal = _LEGAL[name]
    if not (math.isfinite(value) and ok(value)):
        return f"{name} = {value!r} is outside its legal range {legal}"
    return None


def _numeric(name: str, text: str) -> float:
    """A literal or a constant expression such as ``1/16`` or ``exp(1) - 1``."""
    try:
        e = parse(text)
    except ParseError as exc:
        raise ValueError(f"{name}: not a number or constant expression ({exc})") from None
    if not is_constant(e):
        raise ValueError(f"{name}: must not reference t or x")
    try:
        value = evaluate(e, 1.0, 0.0)
    except EvalError as exc:
        raise ValueError(f"{name}: {exc}") from None
    if name in _INTEGER:
        if value != int(value):
            raise ValueError(f"{name}: expected an integer, got {text!r}")
        return int(value)
    return value


def parse_config(text: str, path: str | None = None) -> ProblemConfig:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", None, lineno, path)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown key {key!r}", key, lineno, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})",
                              key, lineno, path)
        if not value:
            raise ConfigError(f"{key}: missing value", key, lineno, path)

        if key == "rhs":
            try:
                parse(value)
            except ParseError as exc:
                raise ConfigError(f"rhs: {exc}", key, lineno, path) from None
            values[key] = value
        else:
            try:
                number = _numeric(key, value)
            except ValueError as exc:
                raise ConfigError(str(exc), key, lineno, path) from None
            msg = check_value(key, number)
            if msg:
                raise ConfigError(msg, key, lineno, path)
            values[key] = number
        lines[key] = lineno

    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}",
                          missing[0], None, path)
    return ProblemConfig(**values, lines=lines, path=path)


def load_config(path: str | Path) -> ProblemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}", None, None, str(path)) from None
    return parse_config(text, str(path))


def bundled_config_text() -> str:
    return resources.files("hilferbvp").joinpath("data/reference.cfg").read_text("utf-8")


# }}}


# {{{ output helpers


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(out, key: str, value) -> None:
    print(f"{key}={_fmt(value)}", file=out)


def _prepare_output(out_dir: Path, name: str, force: bool) -> Path:
    target = out_dir / name
    if target.exists() and not force:
        raise ConfigError(f"refusing to overwrite {target} (use --force)")
    return target


def write_solution_csv(path: Path, x: GridFunction) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "log_t", "x"])
        for s, t, v in zip(x.s_values, x.t_values, x.values):
            w.writerow([repr(float(t)), repr(float(s)), repr(float(v))])


def read_solution_csv(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    cols = [np.array([float(r[k]) for r in rows]) for k in ("t", "log_t", "x")]
    return cols[0], cols[1], cols[2]


def _certificate_lines(cfg: ProblemConfig, cert: Certificate, out) -> None:
    _emit(out, "computed_phi", cert.phi)
    if cfg.published_phi is not None:
        report = compare_published("phi", cfg.published_phi, cert.phi)
        _emit(out, "paper_phi", cfg.published_phi)
        _emit(out, "phi_discrepancy", not report.agrees)
        for line in report.as_lines():
            print(line, file=out)
    _emit(out, "lipschitz_c", cert.lipschitz_c)
    _emit(out, "c_phi", cert.c_phi)
    if cfg.published_c_phi is not None and cert.c_phi is not None:
        report = compare_published("c_phi", cfg.published_c_phi, cert.c_phi)
        _emit(out, "c_phi_discrepancy", not report.agrees)
        for line in report.as_lines():
            print(line, file=out)
    _emit(out, "bound_c1", cert.bound_c1)
    _emit(out, "c2", cert.c2)
    _emit(out, "c3", cert.c3)
    _emit(out, "m", cert.m_bound)
    _emit(out, "mu", cert.mu)
    _emit(out, "mu_phi", None if cert.mu is None else cert.mu * cert.phi)
    for name, v in cert.verdicts.items():
        _emit(out, f"verdict.{name}", v.status.value)
        _emit(out, f"verdict.{name}.value", v.value)


# }}}


# {{{ commands


def _solve(cfg: ProblemConfig, spec: BvpSpec, residual: bool = True) -> SolveReport:
    return picard_solve(
        spec,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        grid=cfg.grid(spec),
        n_quad=cfg.quad_nodes,
        compute_residual=residual,
    )


def cmd_solve(args, out) -> int:
    cfg = load_config(args.config)
    spec = cfg.to_spec()
    target = _prepare_output(Path(args.out), "solution.csv", args.force)

    report = _solve(cfg, spec)
    write_solution_csv(target, report.solution)

    cert = check_theorems(spec, cfg.lipschitz_c, cfg.bound_c1, cfg.mu)
    _emit(out, "converged", report.converged)
    _emit(out, "iterations", report.iterations)
    _emit(out, "final_delta", report.final_delta)
    _emit(out, "residual_sup", report.residual_sup)
    _emit(out, "computed_phi", cert.phi)
    _emit(out, "c_phi", cert.c_phi)
    _emit(out, "verdict.contraction", cert.verdicts["contraction"].status.value)
    _emit(out, "solution", str(target))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_certify(args, out) -> int:
    cfg = load_config(args.config)
    spec = cfg.to_spec()
    cert = check_theorems(spec, cfg.lipschitz_c, cfg.bound_c1, cfg.mu)
    _certificate_lines(cfg, cert, out)
    if cfg.lipschitz_c is None:
        estimate = estimate_lipschitz(spec.rhs, cfg.grid(spec))
        _emit(out, "lipschitz_c_estimate", estimate)
        _emit(out, "lipschitz_c_estimate.rigorous", False)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    ctx = gamma_fault(args.gamma_fault) if args.gamma_fault else contextlib.nullcontext()
    with ctx:
        results = run_suites(args.level)
    for r in results:
        print(r.line(), file=out)
    passed = all(r.passed for r in results)
    _emit(out, "verify", "pass" if passed else "fail")
    return EXIT_OK if passed else EXIT_VERIFY


def sweep_values(cfg: ProblemConfig, param: str, start: float, stop: float, steps: int):
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}")
    if steps < 1:
        raise ConfigError(f"steps must be >= 1: got {steps}")
    values = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    for v in values:
        msg = check_value(param, float(v))
        if msg:
            raise ConfigError(f"sweep leaves the legal range: {msg}", param)
    return [float(v) for v in values]


def cmd_sweep(args, out) -> int:
    cfg = load_config(args.config)
    cfg.to_spec()
    values = sweep_values(cfg, args.param, args.start, args.stop, args.steps)
    target = _prepare_output(Path(args.out), "sweep.csv", args.force)

    rows = []
    all_converged = True
    for v in values:
        c = replace(cfg, **{args.param: v})
        spec = c.to_spec()
        report = _solve(c, spec, residual=False)
        all_converged &= report.converged
        phi = phi_constant(spec)
        c_phi = None if c.lipschitz_c is None else c.lipschitz_c * phi
        rows.append((v, phi, c_phi, report.iterations, float(report.solution.values[-1])))

    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["param_value", "phi", "c_phi", "iterations", "x_at_e"])
        for v, phi, c_phi, its, x_e in rows:
            w.writerow([repr(v), repr(phi), "" if c_phi is None else repr(c_phi), its, repr(x_e)])

    _emit(out, "param", args.param)
    _emit(out, "rows", len(rows))
    _emit(out, "all_converged", all_converged)
    _emit(out, "sweep", str(target))
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


def cmd_example(args, out) -> int:
    print(bundled_config_text(), end="", file=out)
    return EXIT_OK


# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hilferbvp",
        description="Solve and certify Hilfer-Hadamard three-point boundary value problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Picard-solve the problem and write solution.csv")
    p.add_argument("config")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--force", action="store_true", help="overwrite existing output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="print the bounding constants and verdicts")
    p.add_argument("config")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="run the built-in oracle suites")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--gamma-fault", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="re-solve across a linear sweep of one parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--force", action="store_true", help="overwrite existing output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("example", help="print the bundled reference config")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateProblemError as exc:
        print(f"error: degenerate problem: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (EvaluationError, EvalError) as exc:
        print(f"error: right-hand side cannot be evaluated: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
