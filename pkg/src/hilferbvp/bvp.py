r"""Closed-form solution of the linear three-point problem

.. math::

    {}_H D^{\alpha, \beta} x(t) + \varphi(t) = 0, \qquad t \in (1, e],

    x(1 + \epsilon) = 0, \qquad \delta x(e) = \nu \, \delta x(\zeta),

and of its Caputo-Hadamard counterpart with ``x(1) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from hilferbvp.calculus import (
    DEFAULT_QUAD_NODES,
    GridFunction,
    OrderParams,
    _integral_u,
    _log_space,
    log_grid,
)
from hilferbvp.special import DomainError, build_graded_rule

DEGENERACY_THRESHOLD = 1.0e-12

DEFAULT_GRID_POINTS = 201
DEFAULT_S_MIN = 1.0e-3


class DegenerateProblemError(ValueError):
    """Raised when the boundary conditions do not determine a unique solution."""


# {{{ problem description


def eta_values(
    orders: OrderParams, epsilon: float, nu: float, zeta: float
) -> tuple[float, float, float]:
    r"""Return :math:`(\eta_0, \eta_1, \eta_0 + \eta_1)` without range checks.

    .. math::

        \eta_i = (-1)^i (\log(1 + \epsilon))^{i - 1} (\gamma - i - 1)
            [1 - \nu (\log \zeta)^{\gamma - i - 2}].
    """
    g = orders.gamma
    ll = math.log1p(epsilon)
    lz = math.log(zeta)

    eta0 = (g - 1.0) / ll * (1.0 - nu * lz ** (g - 2.0))
    eta1 = -(g - 2.0) * (1.0 - nu * lz ** (g - 3.0))
    return eta0, eta1, eta0 + eta1


def _check_range(name: str, value: float, ok: bool, legal: str) -> float:
    if not (math.isfinite(value) and ok):
        raise DomainError(f"{name} = {value!r} is outside its legal range {legal}")
    return value


@dataclass(frozen=True)
class BvpSpec:
    """Orders, boundary data and right-hand side of the boundary value problem.

    *rhs* is either a forcing ``phi(t)`` (linear problem) or ``f(t, x)``
    (nonlinear problem). Both must accept numpy arrays.
    """

    orders: OrderParams
    epsilon: float
    nu: float
    zeta: float
    rhs: Callable | None = None

    def __post_init__(self) -> None:
        eps, nu, zeta = float(self.epsilon), float(self.nu), float(self.zeta)
        _check_range("epsilon", eps, 0.0 < eps < 1.0, "(0, 1)")
        _check_range("nu", nu, 0.0 <= nu < 1.0, "[0, 1)")
        _check_range("zeta", zeta, 1.0 < zeta < math.e, "(1, e)")

        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "zeta", zeta)

        _, _, eta_sum = eta_values(self.orders, eps, nu, zeta)
        if not abs(eta_sum) >= DEGENERACY_THRESHOLD:
            raise DegenerateProblemError(
                f"eta_0 + eta_1 = {eta_sum!r} vanishes: the boundary conditions "
                "do not determine a unique solution"
            )

    @classmethod
    def from_params(
        cls,
        alpha: float,
        beta: float,
        epsilon: float,
        nu: float,
        zeta: float,
        rhs: Callable | None = None,
    ) -> BvpSpec:
        return cls(OrderParams(alpha, beta), epsilon, nu, zeta, rhs)

    @property
    def log_left(self) -> float:
        """``log(1 + epsilon)``, the log-space position of the zero condition."""
        return math.log1p(self.epsilon)

    @property
    def log_zeta(self) -> float:
        return math.log(self.zeta)

    def with_rhs(self, rhs: Callable | None) -> BvpSpec:
        return replace(self, rhs=rhs)

    def default_grid(
        self, n_points: int = DEFAULT_GRID_POINTS, s_min: float = DEFAULT_S_MIN
    ) -> np.ndarray:
        """Log-uniform grid with ``log(1 + epsilon)`` and ``log(zeta)`` as nodes."""
        return log_grid(n_points, s_min, extra=(self.log_left, self.log_zeta))


def eta_coeffs(spec: BvpSpec) -> tuple[float, float, float]:
    eta0, eta1, eta_sum = eta_values(spec.orders, spec.epsilon, spec.nu, spec.zeta)
    if not abs(eta_sum) >= DEGENERACY_THRESHOLD:
        raise DegenerateProblemError(f"eta_0 + eta_1 = {eta_sum!r} vanishes")
    return eta0, eta1, eta_sum


# }}}


# {{{ linear solution


@dataclass(frozen=True)
class KernelConstants:
    """Forcing-dependent constants of the closed-form solution."""

    eta0: float
    eta1: float
    eta_sum: float
    varepsilon: float
    c0: float
    c1: float
    # integrals of the forcing entering the boundary conditions
    i_alpha_left: float
    i_alpha1_e: float
    i_alpha1_zeta: float


def _as_grid(grid, spec) -> np.ndarray:
    if grid is None:
        return spec.default_grid()
    if isinstance(grid, GridFunction):
        return grid.s_values
    s = np.asarray(grid, dtype=np.float64)
    if np.any(~(s > 0.0)):
        raise DomainError("grid points must satisfy t > 1 (s = log t > 0)")
    return s


class LinearSolution:
    """Closed-form solution for a given forcing, evaluable anywhere in ``(1, e]``.

    Two algebraically equal assembly paths are available: ``"assembled"``
    (``-I^alpha phi + c0 (log t)^(gamma-1) + c1 (log t)^(gamma-2)``) and
    ``"direct"`` (the expanded formula in terms of the boundary integrals).
    """

    def __init__(
        self,
        spec: BvpSpec,
        phi: Callable,
        n_quad: int = DEFAULT_QUAD_NODES,
        path: str = "assembled",
    ) -> None:
        if path not in ("assembled", "direct"):
            raise ValueError(f"unknown assembly path: {path!r}")

        self.spec = spec
        self.phi = phi
        self.n_quad = n_quad
        self.path = path

        a = spec.orders.alpha
        self._fn = _log_space(phi)
        self._rule = build_graded_rule(a - 1.0, n_quad)
        self._rule1 = build_graded_rule(a - 2.0, n_quad)
        self.constants = self._kernel_constants()

    def _i_alpha(self, u):
        return _integral_u(self.spec.orders.alpha, self._fn, u, self._rule)

    def _i_alpha1(self, u):
        return _integral_u(self.spec.orders.alpha - 1.0, self._fn, u, self._rule1)

    def _kernel_constants(self) -> KernelConstants:
        spec = self.spec
        g = spec.orders.gamma
        ll, lz, nu = spec.log_left, spec.log_zeta, spec.nu
        eta0, eta1, eta_sum = eta_coeffs(spec)

        i_left = float(self._i_alpha(np.float64(ll)))
        i1_e = float(self._i_alpha1(np.float64(1.0)))
        i1_zeta = float(self._i_alpha1(np.float64(lz)))

        varepsilon = (1.0 - g) * ll ** (1.0 - g) * i_left
        c1 = -(i1_e - nu * i1_zeta + varepsilon * (1.0 - nu * lz ** (g - 2.0))) / eta_sum
        c0 = i_left * ll ** (1.0 - g) - c1 / ll

        return KernelConstants(
            eta0=eta0, eta1=eta1, eta_sum=eta_sum, varepsilon=varepsilon,
            c0=c0, c1=c1,
            i_alpha_left=i_left, i_alpha1_e=i1_e, i_alpha1_zeta=i1_zeta,
        )

    def log_eval(self, u):
        u = np.asarray(u, dtype=np.float64)
        g = self.spec.orders.gamma
        k = self.constants

        if self.path == "assembled":
            return -self._i_alpha(u) + k.c0 * u ** (g - 1.0) + k.c1 * u ** (g - 2.0)

        ll, lz, nu = self.spec.log_left, self.spec.log_zeta, self.spec.nu
        bracket = (
            k.i_alpha1_e - nu * k.i_alpha1_zeta
            + k.varepsilon * (1.0 - nu * lz ** (g - 2.0))
        )
        return (
            -self._i_alpha(u)
            + (u / ll) ** (g - 1.0) * k.i_alpha_left
            + (1.0 / ll - 1.0 / u) * u ** (g - 1.0) / k.eta_sum * bracket
        )

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(~(t > 1.0)):
            raise DomainError("the solution is defined for t > 1 only")
        result = self.log_eval(np.log(t))
        return float(result) if result.ndim == 0 else result

    def delta(self, t):
        """``delta x`` from the closed form, using ``delta I^alpha = I^(alpha-1)``."""
        u = np.log(np.asarray(t, dtype=np.float64))
        g = self.spec.orders.gamma
        k = self.constants
        return (
            -self._i_alpha1(u)
            + (g - 1.0) * k.c0 * u ** (g - 2.0)
            + (g - 2.0) * k.c1 * u ** (g - 3.0)
        )

    def on_grid(self, s_values) -> GridFunction:
        s = np.asarray(s_values, dtype=np.float64)
        return GridFunction(s, self.log_eval(s))


def kernel_constants(
    spec: BvpSpec, phi: Callable | None = None, n_quad: int = DEFAULT_QUAD_NODES
) -> KernelConstants:
    return LinearSolution(spec, _forcing(spec, phi), n_quad).constants


def _forcing(spec: BvpSpec, phi: Callable | None) -> Callable:
    if phi is not None:
        return phi
    if spec.rhs is None:
        raise ValueError("no forcing given and the problem carries no rhs")
    return spec.rhs


def solve_linear(
    spec: BvpSpec,
    phi: Callable | None = None,
    grid=None,
    n_quad: int = DEFAULT_QUAD_NODES,
    path: str = "assembled",
) -> GridFunction:
    """Solve ``D^{alpha,beta} x + phi = 0`` with the three-point conditions.

    *phi* defaults to ``spec.rhs`` read as a forcing ``phi(t)``. *grid* is an
    array of ``s = log t`` values, a :class:`GridFunction` whose grid is
    reused, or ``None`` for :meth:`BvpSpec.default_grid`.
    """
    s = _as_grid(grid, spec)
    return LinearSolution(spec, _forcing(spec, phi), n_quad, path).on_grid(s)


# }}}


# {{{ Caputo-Hadamard comparator


class CaputoComparatorSolution:
    """Solution of ``cD^alpha x + phi = 0``, ``x(1) = 0``, ``delta x(e) = nu delta x(zeta)``."""

    def __init__(
        self,
        alpha_i: float,
        nu: float,
        zeta: float,
        phi: Callable,
        n_quad: int = DEFAULT_QUAD_NODES,
    ) -> None:
        alpha_i, nu, zeta = float(alpha_i), float(nu), float(zeta)
        _check_range("alpha", alpha_i, 1.0 < alpha_i <= 2.0, "(1, 2]")
        _check_range("zeta", zeta, 1.0 < zeta < math.e, "(1, e)")
        if nu == 1.0:
            raise DegenerateProblemError("nu = 1 leaves the comparator problem singular")
        _check_range("nu", nu, True, "(-inf, 1) or (1, inf)")

        self.alpha = alpha_i
        self.nu = nu
        self.zeta = zeta
        self._fn = _log_space(phi)
        self._rule = build_graded_rule(alpha_i - 1.0, n_quad)
        self._rule1 = build_graded_rule(alpha_i - 2.0, n_quad)

        i1 = lambda u: _integral_u(alpha_i - 1.0, self._fn, np.float64(u), self._rule1)
        self.slope = float(i1(1.0) - nu * i1(math.log(zeta))) / (1.0 - nu)

    def log_eval(self, u):
        u = np.asarray(u, dtype=np.float64)
        return -_integral_u(self.alpha, self._fn, u, self._rule) + self.slope * u

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(~(t > 1.0)):
            raise DomainError("the solution is defined for t > 1 only")
        result = self.log_eval(np.log(t))
        return float(result) if result.ndim == 0 else result


def solve_caputo_comparator(
    alpha_i: float,
    nu: float,
    zeta: float,
    phi: Callable,
    grid=None,
    n_quad: int = DEFAULT_QUAD_NODES,
) -> GridFunction:
    sol = CaputoComparatorSolution(alpha_i, nu, zeta, phi, n_quad)
    if grid is None:
        s = log_grid(DEFAULT_GRID_POINTS, DEFAULT_S_MIN, extra=(math.log(zeta),))
    elif isinstance(grid, GridFunction):
        s = grid.s_values
    else:
        s = np.asarray(grid, dtype=np.float64)
    return GridFunction(s, sol.log_eval(s))


# }}}


def constant_function(value: float) -> Callable:
    """Forcing ``phi(t) = value``, usable wherever a function of ``t`` is expected."""
    return lambda t: np.full(np.shape(t), float(value))


__all__ = [
    "DEGENERACY_THRESHOLD",
    "BvpSpec",
    "CaputoComparatorSolution",
    "DegenerateProblemError",
    "KernelConstants",
    "LinearSolution",
    "constant_function",
    "eta_coeffs",
    "eta_values",
    "kernel_constants",
    "solve_caputo_comparator",
    "solve_linear",
]
