"""Picard iteration for the nonlinear problem ``D^{alpha,beta} x + f(t, x) = 0``.

Each step solves the linear problem with the forcing ``f(t, x_k(t))`` frozen,
which is the fixed-point operator ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from hilferbvp.bvp import BvpSpec, LinearSolution, _as_grid
from hilferbvp.calculus import (
    DEFAULT_QUAD_NODES,
    GridFunction,
    LogSpaceFunction,
    hilfer_hadamard_derivative,
)

DEFAULT_TOL = 1.0e-10
DEFAULT_MAX_ITER = 200


class EvaluationError(ValueError):
    """Raised when the right-hand side is undefined at a sample point."""


def _nonlinear_rhs(spec: BvpSpec) -> Callable:
    if spec.rhs is None:
        raise ValueError("the problem carries no right-hand side f(t, x)")
    return spec.rhs


def _checked(values, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise EvaluationError(f"{what} is not finite at some sample point")
    return values


def frozen_forcing(f: Callable, x: GridFunction) -> LogSpaceFunction:
    """The forcing ``phi(t) = f(t, x(t))`` for a fixed grid function *x*."""

    def phi_u(u):
        u = np.asarray(u, dtype=np.float64)
        vals = np.broadcast_to(f(np.exp(u), x.at_s(u)), u.shape)
        return _checked(vals, "f(t, x(t))")

    return LogSpaceFunction(phi_u)


def _rho_solution(spec: BvpSpec, x: GridFunction, n_quad: int) -> LinearSolution:
    return LinearSolution(spec, frozen_forcing(_nonlinear_rhs(spec), x), n_quad)


def rho_apply(
    spec: BvpSpec, x: GridFunction, n_quad: int = DEFAULT_QUAD_NODES
) -> GridFunction:
    """Apply the fixed-point operator to *x*, on the grid of *x*."""
    return _rho_solution(spec, x, n_quad).on_grid(x.s_values)


@dataclass(frozen=True)
class SolveReport:
    solution: GridFunction
    iterations: int
    """Number of applications of ``rho``, including the one confirming convergence."""
    final_delta: float
    residual_sup: float | None
    """Sup over interior grid points of ``|D^{alpha,beta} x + f(t, x)|``."""
    converged: bool
    deltas: tuple[float, ...] = field(default=())
    """``sup |x_k - x_(k-1)|`` for ``k = 1, ..., iterations``."""


def residual(
    spec: BvpSpec,
    x: GridFunction,
    solution: LinearSolution,
    n_quad: int = DEFAULT_QUAD_NODES,
    stride: int = 1,
) -> float:
    """Sup of ``|D^{alpha,beta} x + f(t, x(t))|`` over interior grid points.

    *solution* is the closed form whose grid values are *x*; the derivative is
    taken of it rather than of the interpolant.
    """
    s = x.s_values[1:-1][::stride]
    if s.size == 0:
        return 0.0
    t = np.exp(s)
    f = _nonlinear_rhs(spec)

    worst = 0.0
    for chunk in np.array_split(np.arange(s.size), max(1, s.size // 16)):
        d = hilfer_hadamard_derivative(spec.orders, solution, t[chunk], n_quad)
        r = d + np.asarray(f(t[chunk], x.values[1:-1][::stride][chunk]))
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def picard_solve(
    spec: BvpSpec,
    x0: GridFunction | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    grid=None,
    n_quad: int = DEFAULT_QUAD_NODES,
    compute_residual: bool = True,
    residual_stride: int = 1,
) -> SolveReport:
    """Iterate ``x_(k+1) = rho x_k`` until ``sup |x_(k+1) - x_k| <= tol``.

    The grid is that of *x0* when given, else *grid* (see
    :func:`~hilferbvp.bvp.solve_linear`), with ``x0 = 0`` by default.
    Non-convergence is reported, not raised.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive: got {tol}")
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValueError(f"max_iter must be a positive integer: got {max_iter}")

    if x0 is None:
        s = _as_grid(grid, spec)
        x0 = GridFunction(s, np.zeros_like(s))

    x = x0
    deltas: list[float] = []
    solution = None
    converged = False
    for _ in range(int(max_iter)):
        solution = _rho_solution(spec, x, n_quad)
        x_next = solution.on_grid(x.s_values)
        deltas.append(float(np.max(np.abs(x_next.values - x.values))))
        x = x_next
        if deltas[-1] <= tol:
            converged = True
            break

    res = None
    if compute_residual:
        res = residual(spec, x, solution, n_quad, stride=residual_stride)

    return SolveReport(
        solution=x,
        iterations=len(deltas),
        final_delta=deltas[-1],
        residual_sup=res,
        converged=converged,
        deltas=tuple(deltas),
    )


def smoothed_random_function(
    s_values: np.ndarray, radius: float, rng: np.random.Generator
) -> GridFunction:
    """Uniform values in ``[-radius, radius]`` after one pass of 3-point averaging."""
    v = rng.uniform(-radius, radius, size=s_values.size)
    padded = np.concatenate(([v[0]], v, [v[-1]]))
    smooth = (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0
    return GridFunction(s_values, smooth)


def empirical_lipschitz(
    spec: BvpSpec,
    trials: int = 200,
    radius: float = 5.0,
    grid=None,
    n_quad: int = DEFAULT_QUAD_NODES,
    seed: int = 0,
) -> float:
    """Largest observed ``|rho x - rho y| / |x - y|`` (sup norms) over random pairs.

    Pairs closer than ``1e-10`` are skipped.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1: got {trials}")
    if not radius > 0.0:
        raise ValueError(f"radius must be positive: got {radius}")

    s = _as_grid(grid, spec)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        x = smoothed_random_function(s, radius, rng)
        y = smoothed_random_function(s, radius, rng)
        dist = float(np.max(np.abs(x.values - y.values)))
        if dist < 1.0e-10:
            continue
        diff = rho_apply(spec, x, n_quad).values - rho_apply(spec, y, n_quad).values
        best = max(best, float(np.max(np.abs(diff))) / dist)
    return best
