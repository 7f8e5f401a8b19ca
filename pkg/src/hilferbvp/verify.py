"""Built-in verification suites comparing the numerics with closed forms."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from hilferbvp import oracles
from hilferbvp.bvp import BvpSpec, DegenerateProblemError, LinearSolution, eta_coeffs
from hilferbvp.calculus import (
    GridFunction,
    LogSpaceFunction,
    OrderParams,
    caputo_hadamard_derivative,
    delta_op,
    hadamard_derivative,
    hadamard_integral,
    hilfer_function,
    hilfer_hadamard_derivative,
    integral_function,
)
from hilferbvp.certificates import phi_constant
from hilferbvp.expr import compile_rhs
from hilferbvp.fixed_point import empirical_lipschitz, picard_solve, rho_apply
from hilferbvp.reference import PUBLISHED_LIPSCHITZ_C, reference_spec

MONOMIAL_TOL = 1.0e-10
SEMIGROUP_TOL = 1.0e-8
INVERSION_TOL = 1.0e-5
REDUCTION_TOL = 1.0e-6
LEFT_BC_TOL = 1.0e-9
RIGHT_BC_TOL = 1.0e-6
RESIDUAL_TOL = 1.0e-4
SUPERPOSITION_TOL = 1.0e-10
PATH_TOL = 1.0e-11
CONTRACTION_SLACK = 1.0e-6

SEMIGROUP_PAIRS = ((0.5, 0.5), (0.75, 0.75), (1.0, 0.5))
INVERSION_ORDERS = ((1.5, 0.5), (1.2, 0.3), (1.9, 0.8))
REDUCTION_ALPHAS = (1.25, 1.5, 1.8)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    seconds: float
    detail: str = ""

    def line(self) -> str:
        status = "pass" if self.passed else "fail"
        text = (
            f"suite.{self.name}={status} max_error={self.max_error:.3e} "
            f"tol={self.tolerance:.1e} seconds={self.seconds:.2f}"
        )
        return f"{text} {self.detail}" if self.detail else text


def _log_power(p: float) -> LogSpaceFunction:
    return LogSpaceFunction(lambda u: u**p)


def sample_points(count: int, lo: float = 0.05, hi: float = 1.0) -> np.ndarray:
    """*count* points ``t = exp(s)`` with ``s`` uniform in ``[lo, hi]``."""
    return np.exp(np.linspace(lo, hi, count))


# {{{ operator suites


def monomial_errors() -> float:
    t = sample_points(20)
    worst = 0.0
    for p in range(4):
        for order in (0.5, 1.5):
            got = hadamard_integral(order, _log_power(p), t)
            worst = max(worst, float(np.max(np.abs(got - oracles.monomial_integral(p, order, t)))))
    return worst


def semigroup_errors() -> float:
    t = sample_points(20)
    phi = _log_power(2)
    worst = 0.0
    for p, q in SEMIGROUP_PAIRS:
        inner = integral_function(q, phi)
        composed = hadamard_integral(p, inner, t)
        direct = hadamard_integral(p + q, phi, t)
        exact = oracles.monomial_integral(2, p + q, t)
        worst = max(
            worst,
            float(np.max(np.abs(composed - direct))),
            float(np.max(np.abs(composed - exact))),
        )
    return worst


def inversion_errors(orders=INVERSION_ORDERS) -> float:
    """``I^alpha D^{alpha,beta} phi`` against ``phi`` minus boundary terms."""
    t = sample_points(10, 0.1, 1.0)
    phi = _log_power(2)
    worst = 0.0
    for alpha, beta in orders:
        d = hilfer_function(OrderParams(alpha, beta), phi)
        lhs = hadamard_integral(alpha, d, t)
        rhs = phi(t) - oracles.inversion_boundary_terms(2, alpha, beta, t)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def reduction_errors() -> float:
    """Hilfer endpoints against the Hadamard and Caputo-Hadamard paths and their oracles."""
    t = sample_points(10, 0.1, 1.0)
    phi = _log_power(3)
    worst = 0.0
    for alpha in REDUCTION_ALPHAS:
        h0 = hilfer_hadamard_derivative(OrderParams(alpha, 0.0), phi, t)
        h1 = hilfer_hadamard_derivative(OrderParams(alpha, 1.0), phi, t)
        worst = max(
            worst,
            float(np.max(np.abs(h0 - hadamard_derivative(alpha, phi, t)))),
            float(np.max(np.abs(h1 - caputo_hadamard_derivative(alpha, phi, t)))),
            float(np.max(np.abs(h0 - oracles.monomial_derivative(3, alpha, t)))),
            float(np.max(np.abs(h1 - oracles.monomial_caputo(3, alpha, t)))),
        )
    return worst


# }}}


# {{{ boundary value corpus


@dataclass(frozen=True)
class CorpusCase:
    spec: BvpSpec
    coeffs: tuple[float, ...]
    """Coefficients of the forcing as a polynomial in ``log t``."""

    @property
    def forcing(self) -> LogSpaceFunction:
        c = np.asarray(self.coeffs)
        return LogSpaceFunction(lambda u: npoly.polyval(u, c))


def random_corpus(count: int = 50, seed: int = 2024) -> list[CorpusCase]:
    """Random valid specs with log-polynomial forcings of degree at most 3.

    Near-degenerate boundary data (``|eta_0 + eta_1| < 0.01``) is redrawn.
    """
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        params = (
            rng.uniform(1.0, 2.0),
            rng.uniform(0.0, 1.0),
            rng.uniform(0.01, 0.99),
            rng.uniform(0.0, 0.95),
            rng.uniform(1.02, math.e - 0.02),
        )
        if params[0] == 1.0:
            continue
        try:
            spec = BvpSpec.from_params(*params)
        except DegenerateProblemError:
            continue
        if abs(eta_coeffs(spec)[2]) < 0.01:
            continue
        coeffs = rng.uniform(-1.0, 1.0, size=int(rng.integers(1, 5)))
        cases.append(CorpusCase(spec, tuple(float(c) for c in coeffs)))
    return cases


@dataclass(frozen=True)
class CaseErrors:
    left_bc: float
    right_bc: float
    residual: float
    superposition: float
    paths: float


def corpus_case_errors(case: CorpusCase, residual_stride: int = 1) -> CaseErrors:
    spec = case.spec
    phi = case.forcing
    s = spec.default_grid()
    sol = LinearSolution(spec, phi)

    left = abs(sol(1.0 + spec.epsilon))
    right = abs(delta_op(sol, math.e) - spec.nu * delta_op(sol, spec.zeta))

    t = np.exp(s[1:-1][::residual_stride])
    res = np.abs(hilfer_hadamard_derivative(spec.orders, sol, t) + phi(t))

    # superposition against a second forcing
    psi = LogSpaceFunction(lambda u: np.sin(3.0 * u) + 0.5)
    a, b = 0.7, -1.3
    mix = LogSpaceFunction(lambda u: a * phi.log_eval(u) + b * psi.log_eval(u))
    x_mix = LinearSolution(spec, mix).log_eval(s)
    x_lin = a * sol.log_eval(s) + b * LinearSolution(spec, psi).log_eval(s)
    scale = np.maximum(1.0, np.abs(x_mix))

    direct = LinearSolution(spec, phi, path="direct").log_eval(s)
    assembled = sol.log_eval(s)
    return CaseErrors(
        left_bc=float(left),
        right_bc=float(right),
        residual=float(np.max(res)),
        superposition=float(np.max(np.abs(x_mix - x_lin) / scale)),
        paths=float(np.max(np.abs(direct - assembled) / np.maximum(1.0, np.abs(assembled)))),
    )


# }}}


# {{{ fixed point suites


def contraction_ratios(trials: int = 200, radius: float = 5.0) -> list[tuple[str, float, float]]:
    """``(label, empirical ratio, C * phi)`` for Lipschitz right-hand sides."""
    base = reference_spec()
    phi = phi_constant(base)
    cases = [("reference", base, PUBLISHED_LIPSCHITZ_C)]
    for k in (0.1, 0.5):
        cases.append((f"x*{k}", base.with_rhs(compile_rhs(f"x*{k}")), k))
    return [
        (label, empirical_lipschitz(spec, trials, radius), c * phi)
        for label, spec, c in cases
    ]


def picard_checks(seed: int = 7, starts: int = 5, tol: float = 1.0e-10) -> dict[str, float]:
    """Errors of the Picard solver on checkable cases (all must be small)."""
    base = reference_spec()
    s = base.default_grid()
    out = {}

    forced = base.with_rhs(lambda t, x: np.log(t) ** 2 - 0.5 + 0.0 * x)
    rep = picard_solve(forced, tol=tol, compute_residual=False)
    direct = LinearSolution(forced, lambda t: np.log(t) ** 2 - 0.5).log_eval(s)
    out["x_independent_second_delta"] = rep.deltas[1] if len(rep.deltas) > 1 else math.inf
    out["x_independent_vs_linear"] = float(np.max(np.abs(rep.solution.values - direct)))

    rng = np.random.default_rng(seed)
    finals = []
    fixed = 0.0
    for _ in range(starts):
        x0 = GridFunction(s, rng.uniform(-10.0, 10.0, s.size))
        rep = picard_solve(base, x0, tol=tol, compute_residual=False)
        if not rep.converged:
            return {"reference_converged": math.inf}
        finals.append(rep.solution.values)
        fixed = max(fixed, float(np.max(np.abs(rho_apply(base, rep.solution).values
                                                - rep.solution.values))) - tol)
    out["reference_pairwise"] = max(
        float(np.max(np.abs(a - b))) for i, a in enumerate(finals) for b in finals[i + 1:]
    )
    out["reference_fixed_point_excess"] = max(0.0, fixed)
    return out


# }}}


# {{{ suite runner


def _timed(name: str, tol: float, fn: Callable[[], float], detail: str = "") -> SuiteResult:
    start = time.perf_counter()
    try:
        err = fn()
    except Exception as exc:  # a crash is a failed suite, reported as such
        return SuiteResult(name, False, math.inf, tol, time.perf_counter() - start,
                           f"error={type(exc).__name__}")
    return SuiteResult(name, bool(err <= tol), err, tol, time.perf_counter() - start, detail)


def _boundary_suite(count: int) -> SuiteResult:
    start = time.perf_counter()
    errs = [corpus_case_errors(c) for c in random_corpus(count)]
    checks = {
        "left_bc": (max(e.left_bc for e in errs), LEFT_BC_TOL),
        "right_bc": (max(e.right_bc for e in errs), RIGHT_BC_TOL),
        "residual": (max(e.residual for e in errs), RESIDUAL_TOL),
        "superposition": (max(e.superposition for e in errs), SUPERPOSITION_TOL),
        "paths": (max(e.paths for e in errs), PATH_TOL),
    }
    passed = all(v <= tol for v, tol in checks.values())
    # report the error closest to its tolerance
    name, (worst, tol) = max(checks.items(), key=lambda kv: kv[1][0] / kv[1][1])
    detail = " ".join(f"{k}={v:.2e}" for k, (v, _) in checks.items())
    return SuiteResult("boundary", passed, worst, tol, time.perf_counter() - start,
                       f"cases={count} {detail}")


def _contraction_suite() -> SuiteResult:
    start = time.perf_counter()
    rows = contraction_ratios()
    excess = max(ratio - bound for _, ratio, bound in rows)
    detail = " ".join(f"{label}:{ratio:.4f}<={bound:.4f}" for label, ratio, bound in rows)
    return SuiteResult("contraction", excess <= CONTRACTION_SLACK, max(excess, 0.0),
                       CONTRACTION_SLACK, time.perf_counter() - start, detail)


def _picard_suite() -> SuiteResult:
    start = time.perf_counter()
    checks = picard_checks()
    limits = {
        "x_independent_second_delta": 1.0e-12,
        "x_independent_vs_linear": 1.0e-12,
        "reference_pairwise": 1.0e-8,
        "reference_fixed_point_excess": 1.0e-10,
    }
    passed = all(checks.get(k, math.inf) <= v for k, v in limits.items())
    worst = max(checks.values())
    detail = " ".join(f"{k}={v:.2e}" for k, v in checks.items())
    return SuiteResult("picard", passed, worst, 1.0e-8, time.perf_counter() - start, detail)


def run_suites(level: str = "quick", corpus_size: int = 50) -> list[SuiteResult]:
    """Run the ``quick`` (operator identities) or ``full`` set of suites."""
    if level not in ("quick", "full"):
        raise ValueError(f"unknown verification level: {level!r}")

    results = [
        _timed("monomial", MONOMIAL_TOL, monomial_errors),
        _timed("semigroup", SEMIGROUP_TOL, semigroup_errors),
    ]
    if level == "full":
        results += [
            _timed("inversion", INVERSION_TOL, inversion_errors),
            _timed("reduction", REDUCTION_TOL, reduction_errors),
            _boundary_suite(corpus_size),
            _contraction_suite(),
            _picard_suite(),
        ]
    return results


# }}}
