r"""Hadamard-type fractional integrals and derivatives on :math:`(1, e]`.

All numerical work happens in log-space :math:`u = \log t`, where the Hadamard
integral becomes an Abel integral with kernel :math:`(u - v)^{\alpha - 1}`
and the operator :math:`\delta = t \, \mathrm{d}/\mathrm{d}t` becomes
:math:`\mathrm{d}/\mathrm{d}u`.

Functions of ``t`` passed to this module must accept numpy arrays of any
shape and return arrays of the same shape (scalars are broadcast). Near
``t = 1`` the round trip ``u -> exp(u) -> log(t)`` loses relative precision
in ``u``, so functions that can be evaluated directly in log-space should be
wrapped in :class:`LogSpaceFunction` (or expose a ``log_eval`` method).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from hilferbvp.special import (
    DomainError,
    QuadratureRule,
    build_graded_rule,
    build_jacobi_rule,
    build_mapped_rule,
    rgamma,
)

ScalarFunction = Callable[[np.ndarray], np.ndarray]

DEFAULT_QUAD_NODES = 32
DEFAULT_STEP = 1.0e-4

# upper end of the domain in log-space, with room for rounding in log(e)
_U_MAX = 1.0 + 1.0e-12
# steps inside compositions are capped at u / _STEP_RATIO: smaller ratios cut
# truncation near u = 0, larger ones amplify rounding of the null space
_STEP_RATIO = 16.0

_BATCH = 16


# {{{ data types


@dataclass(frozen=True)
class OrderParams:
    """Order ``alpha`` and type ``beta`` of the Hilfer-Hadamard derivative.

    Only the ``n = 2`` branch is supported, i.e. ``1 < alpha <= 2``.
    """

    alpha: float
    beta: float
    n: int = field(default=2, init=False)
    gamma: float = field(init=False)

    def __post_init__(self) -> None:
        alpha, beta = float(self.alpha), float(self.beta)
        if not 1.0 < alpha <= 2.0:
            raise DomainError(f"alpha must lie in (1, 2]: got {alpha}")
        if not 0.0 <= beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1]: got {beta}")

        gamma = alpha + 2.0 * beta - alpha * beta
        assert 1.0 < gamma <= 2.0

        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def inner_order(self) -> float:
        """Order ``(2 - alpha)(1 - beta)`` of the integral applied first."""
        return (2.0 - self.alpha) * (1.0 - self.beta)

    @property
    def outer_order(self) -> float:
        """Order ``beta (2 - alpha)`` of the integral applied last."""
        return self.beta * (2.0 - self.alpha)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a grid in ``s = log t`` inside ``(0, 1]``.

    Off-grid values come from monotone cubic (PCHIP) interpolation in ``s``;
    outside ``[s_min, s_max]`` the nearest end value is used.
    """

    s_values: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.s_values, dtype=np.float64)
        v = np.array(self.values, dtype=np.float64)

        if s.ndim != 1 or s.shape != v.shape:
            raise ValueError(
                f"grid and values must be 1d of equal length: {s.shape} vs {v.shape}"
            )
        if s.size < 2:
            raise ValueError("a grid function needs at least two points")
        if not np.all(np.diff(s) > 0):
            raise ValueError("grid must be strictly increasing")
        if not (s[0] > 0.0 and abs(s[-1] - 1.0) <= 1.0e-12):
            raise ValueError(
                f"grid must lie in (0, 1] and end at s = 1: got [{s[0]}, {s[-1]}]"
            )

        s.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "values", v)

    @property
    def t_values(self) -> np.ndarray:
        return np.exp(self.s_values)

    @cached_property
    def _interpolant(self) -> PchipInterpolator:
        return PchipInterpolator(self.s_values, self.values, extrapolate=True)

    def at_s(self, s):
        s = np.clip(np.asarray(s, dtype=np.float64), self.s_values[0], self.s_values[-1])
        return self._interpolant(s)

    def __call__(self, t):
        return self.at_s(np.log(np.asarray(t, dtype=np.float64)))

    log_eval = at_s

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.s_values, values)


def log_grid(
    n_points: int = 201,
    s_min: float = 1.0e-3,
    extra: tuple[float, ...] = (),
) -> np.ndarray:
    """Uniform grid in ``s = log t`` on ``[s_min, 1]``.

    Points in *extra* (given in ``s``) are merged in; a uniform point closer
    than a tenth of the spacing is replaced by the extra point.
    """
    if n_points < 2:
        raise ValueError(f"need at least two grid points: got {n_points}")
    if not 0.0 < s_min < 1.0:
        raise ValueError(f"s_min must lie in (0, 1): got {s_min}")

    s = np.linspace(s_min, 1.0, n_points)
    spacing = (1.0 - s_min) / (n_points - 1)
    for x in extra:
        if not 0.0 < x <= 1.0:
            raise ValueError(f"extra grid point outside (0, 1]: {x}")
        s = s[np.abs(s - x) > 0.1 * spacing]
        s = np.append(s, x)

    s = np.unique(s)
    if s[-1] != 1.0:
        s = np.append(s, 1.0)
    return s


class LogSpaceFunction:
    """Function of ``t`` defined through its values at ``u = log t``.

    Operators evaluate :meth:`log_eval` directly, avoiding the loss of
    precision of ``log(exp(u))`` for small ``u``.
    """

    def __init__(self, fn_u: Callable[[np.ndarray], np.ndarray]) -> None:
        self._fn_u = fn_u

    def log_eval(self, u):
        return self._fn_u(u)

    def __call__(self, t):
        return self._fn_u(np.log(np.asarray(t, dtype=np.float64)))


# }}}


# {{{ log-space kernels


def _eval(fn: Callable, x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(fn(x), dtype=np.float64), np.shape(x))


def _log_space(phi: ScalarFunction) -> Callable[[np.ndarray], np.ndarray]:
    log_eval = getattr(phi, "log_eval", None)
    if log_eval is not None:
        return log_eval
    return lambda u: _eval(phi, np.exp(u))


def _to_log(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(~(t > 1.0)):
        raise DomainError(f"evaluation points must satisfy t > 1: got min {np.min(t)}")
    return np.log(t)


def _integral_u(order: float, fn, u: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Riemann-Liouville integral of *fn* from 0 to ``u``, in log-space."""
    if order == 0.0:
        return _eval(fn, u)

    s = rule.nodes
    vals = _eval(fn, u[..., None] * s)
    if rule.lower_exponent != 0.0:
        vals = vals * s ** (-rule.lower_exponent)

    return u**order * rgamma(order) * rule.apply(vals)


# 4th-order stencils: (offsets, coefficients), padded to six entries
_STENCILS = {
    (1, "central"): ((-2, -1, 0, 1, 2, 0), (1, -8, 0, 8, -1, 0)),
    (1, "forward"): ((0, 1, 2, 3, 4, 0), (-25, 48, -36, 16, -3, 0)),
    (1, "backward"): ((0, -1, -2, -3, -4, 0), (25, -48, 36, -16, 3, 0)),
    (2, "central"): ((-2, -1, 0, 1, 2, 0), (-1, 16, -30, 16, -1, 0)),
    (2, "forward"): ((0, 1, 2, 3, 4, 5), (45, -154, 214, -156, 61, -10)),
    (2, "backward"): ((0, -1, -2, -3, -4, -5), (45, -154, 214, -156, 61, -10)),
}


def _derivative_u(fn, u: np.ndarray, order: int, h) -> np.ndarray:
    """Derivative of *fn* of the given order (1 or 2) at log-space points *u*.

    Central differences where the stencil fits inside ``(0, 1]``, one-sided
    ones otherwise. *h* may be a scalar or an array broadcastable to *u*.
    """
    if order == 0:
        return _eval(fn, u)
    if order not in (1, 2):
        raise ValueError(f"unsupported derivative order: {order}")

    u = np.asarray(u, dtype=np.float64)
    shape = u.shape
    u = u.ravel()
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), shape).ravel()

    reach = 5.0 if order == 2 else 4.0
    central = (u - 2.0 * h > 0.0) & (u + 2.0 * h <= _U_MAX)
    backward = ~central & (u - reach * h > 0.0)
    forward = ~central & ~backward & (u + reach * h <= _U_MAX)
    if not np.all(central | backward | forward):
        bad = u[~(central | backward | forward)]
        raise DomainError(
            f"finite-difference stencil leaves (1, e] at t = {np.exp(bad[0])!r}"
        )

    offsets = np.empty((u.size, 6))
    coeffs = np.empty((u.size, 6))
    for kind, mask in (("central", central), ("backward", backward), ("forward", forward)):
        off, cf = _STENCILS[order, kind]
        offsets[mask] = off
        coeffs[mask] = cf

    vals = _eval(fn, u[:, None] + offsets * h[:, None])
    result = np.sum(coeffs * vals, axis=-1) / (12.0 * h**order)
    return result.reshape(shape)


def _composition_step(u: np.ndarray, h: float) -> np.ndarray:
    return np.minimum(h, u / _STEP_RATIO)


def _finish(result: np.ndarray, t):
    return float(result) if np.ndim(t) == 0 else result


# }}}


# {{{ operators


def hadamard_integral(
    alpha_i: float,
    phi: ScalarFunction,
    t,
    n_quad: int = DEFAULT_QUAD_NODES,
):
    r"""Hadamard fractional integral of order ``alpha_i > 0`` from 1 to *t*.

    .. math::

        ({}_H I^\alpha \varphi)(t) = \frac{(\log t)^\alpha}{\Gamma(\alpha)}
            \int_0^1 (1 - s)^{\alpha - 1} \varphi(t^s) \,\mathrm{d}s.

    The ``s``-integral uses the graded Gauss-Jacobi rule from
    :func:`~hilferbvp.special.build_graded_rule`.
    """
    alpha_i = _integral_order(alpha_i)
    return _finish(_hadamard_integral_u(alpha_i, _log_space(phi), _to_log(t), n_quad), t)


def _integral_order(alpha_i) -> float:
    alpha_i = float(alpha_i)
    if not alpha_i > 0.0:
        raise DomainError(f"integral order must be positive: got {alpha_i}")
    return alpha_i


def _hadamard_integral_u(alpha_i: float, fn, u: np.ndarray, n_quad: int) -> np.ndarray:
    return _integral_u(alpha_i, fn, u, build_graded_rule(alpha_i - 1.0, n_quad))


def integral_function(
    alpha_i: float, phi: ScalarFunction, n_quad: int = DEFAULT_QUAD_NODES
) -> LogSpaceFunction:
    """``I^alpha_i phi`` as a function evaluated in log space, for compositions."""
    alpha_i = _integral_order(alpha_i)
    fn = _log_space(phi)
    return LogSpaceFunction(
        lambda u: _hadamard_integral_u(alpha_i, fn, np.asarray(u, dtype=np.float64), n_quad)
    )


def delta_op(phi: ScalarFunction, t, h: float = DEFAULT_STEP):
    """``t phi'(t)``, computed as ``d phi / du`` at ``u = log t``.

    Uses 4th-order central differences with step *h* in ``u``, switching to
    one-sided 4th-order stencils when the central one leaves ``(1, e]``.
    """
    if not h > 0.0:
        raise DomainError(f"step must be positive: got {h}")

    u = _to_log(t)
    return _finish(_derivative_u(_log_space(phi), u, 1, h), t)


def _integer_part(alpha_i: float) -> int:
    """``n`` with ``n - 1 < alpha_i <= n``."""
    return math.ceil(alpha_i)


def hadamard_derivative(
    alpha_i: float,
    phi: ScalarFunction,
    t,
    n_quad: int = DEFAULT_QUAD_NODES,
    h: float = DEFAULT_STEP,
):
    """Hadamard fractional derivative ``delta^n I^(n - alpha_i) phi`` at *t*.

    ``n = 1`` for ``alpha_i`` in ``(0, 1]`` and ``n = 2`` for ``(1, 2]``;
    integer orders reduce to plain powers of ``delta``.
    """
    alpha_i = float(alpha_i)
    if not 0.0 < alpha_i <= 2.0:
        raise DomainError(f"derivative order must lie in (0, 2]: got {alpha_i}")

    u = _to_log(t)
    n = _integer_part(alpha_i)
    fn = _log_space(phi)
    rule = build_graded_rule(n - alpha_i - 1.0, n_quad) if n > alpha_i else None

    def inner(v):
        return _integral_u(n - alpha_i, fn, v, rule) if rule is not None else fn(v)

    return _finish(_derivative_u(inner, u, n, _composition_step(u, h)), t)


def caputo_hadamard_derivative(
    alpha_i: float,
    phi: ScalarFunction,
    t,
    n_quad: int = DEFAULT_QUAD_NODES,
    h: float = DEFAULT_STEP,
):
    """Caputo-Hadamard derivative ``I^(n - alpha_i) delta^n phi`` at *t*."""
    alpha_i = float(alpha_i)
    if not 0.0 < alpha_i <= 2.0:
        raise DomainError(f"derivative order must lie in (0, 2]: got {alpha_i}")

    u = _to_log(t)
    n = _integer_part(alpha_i)
    fn = _log_space(phi)

    def deriv(v):
        return _derivative_u(fn, v, n, _composition_step(v, h))

    if n == alpha_i:
        return _finish(deriv(u), t)

    b = n - alpha_i
    if n == 2:
        # same rule as the beta = 1 Hilfer path
        rule = build_mapped_rule(b - 1.0, -b, min(1.0 / b, 2.0), n_quad)
    else:
        rule = build_graded_rule(b - 1.0, n_quad)
    return _finish(_integral_u(b, deriv, u, rule), t)


def hilfer_hadamard_derivative(
    p: OrderParams,
    phi: ScalarFunction,
    t,
    n_quad: int = DEFAULT_QUAD_NODES,
    h: float = DEFAULT_STEP,
):
    r"""Hilfer-Hadamard derivative of order ``p.alpha`` and type ``p.beta``.

    .. math::

        {}_H D^{\alpha, \beta} \varphi =
            {}_H I^{\beta (2 - \alpha)} \, \delta^2 \,
            {}_H I^{(2 - \alpha)(1 - \beta)} \varphi.

    The inner integral is evaluated directly at every stencil point. For
    :math:`b = \beta (2 - \alpha) > 0` the outer integral uses a Gauss-Jacobi
    rule with weight :math:`(1 - s)^{b - 1} s^{-b}`, which matches the
    :math:`(\log t)^{-b}` behaviour of :math:`\delta^2 ({}_H I^{2 - b} \psi)`
    near ``t = 1`` for solutions of the boundary value problem. When
    ``beta = 1`` that rule is additionally mapped by ``s = w**q`` with
    ``q = min(1/b, 2)`` so that smooth ``delta^2 phi`` is handled as well.
    """
    return _finish(_hilfer_u(p, _log_space(phi), _to_log(t), n_quad, h), t)


def _hilfer_u(p: OrderParams, fn, u: np.ndarray, n_quad: int, h: float) -> np.ndarray:
    # nested quadratures allocate ~ 6 n_quad^3 values per point: bound the batch
    flat = np.ravel(u)
    if flat.size <= _BATCH:
        return _hilfer_batch(p, fn, u, n_quad, h)
    parts = [_hilfer_batch(p, fn, flat[i:i + _BATCH], n_quad, h)
             for i in range(0, flat.size, _BATCH)]
    return np.concatenate(parts).reshape(np.shape(u))


def _hilfer_batch(p: OrderParams, fn, u: np.ndarray, n_quad: int, h: float) -> np.ndarray:
    a, b = p.inner_order, p.outer_order

    inner_rule = build_graded_rule(a - 1.0, n_quad) if a > 0.0 else None

    def inner(v):
        return _integral_u(a, fn, v, inner_rule) if inner_rule is not None else fn(v)

    def deriv(v):
        return _derivative_u(inner, v, 2, _composition_step(v, h))

    if b == 0.0:
        return deriv(u)

    if a == 0.0:
        # rounding noise on the null space is not amplified here: it is constant
        outer_rule = build_mapped_rule(b - 1.0, -b, min(1.0 / b, 2.0), n_quad)
    else:
        outer_rule = build_jacobi_rule(b - 1.0, n_quad, lower=-b)
    return _integral_u(b, deriv, u, outer_rule)


def hilfer_function(
    p: OrderParams,
    phi: ScalarFunction,
    n_quad: int = DEFAULT_QUAD_NODES,
    h: float = DEFAULT_STEP,
) -> LogSpaceFunction:
    """``D^{alpha,beta} phi`` as a function evaluated in log space, for compositions."""
    fn = _log_space(phi)
    return LogSpaceFunction(
        lambda u: _hilfer_u(p, fn, np.asarray(u, dtype=np.float64), n_quad, h)
    )


# }}}
