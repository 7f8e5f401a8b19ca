"""Closed forms on log-monomials ``(log t)**p``, used as reference values.

These use :func:`math.gamma` only, so they stay independent of the Lanczos
implementation and the quadrature they are meant to check.
"""

from __future__ import annotations

import math

import numpy as np


def _rgamma(x: float) -> float:
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def integral_coeff(p: float, order: float) -> float:
    """``c`` in ``I^order (log t)**p = c (log t)**(p + order)``."""
    return math.gamma(p + 1.0) * _rgamma(p + 1.0 + order)


def monomial_integral(p: float, order: float, t):
    """Hadamard integral of ``(log t)**p`` (``p > -1``) of the given order."""
    u = np.log(np.asarray(t, dtype=np.float64))
    return integral_coeff(p, order) * u ** (p + order)


def monomial_derivative(p: float, order: float, t):
    """Hadamard (Riemann-Liouville type) derivative of ``(log t)**p``."""
    u = np.log(np.asarray(t, dtype=np.float64))
    c = math.gamma(p + 1.0) * _rgamma(p + 1.0 - order)
    return c * u ** (p - order) if c != 0.0 else np.zeros_like(u)


def monomial_caputo(p: int, order: float, t):
    """Caputo-Hadamard derivative of ``(log t)**p`` for integer ``p >= 0``."""
    n = math.ceil(order)
    if p < n:
        return np.zeros_like(np.log(np.asarray(t, dtype=np.float64)))
    return monomial_derivative(p, order, t)


def monomial_hilfer(p: float, alpha: float, beta: float, t):
    """Hilfer-Hadamard derivative (``1 < alpha <= 2``) of ``(log t)**p``.

    Defined for ``p > gamma - 1`` and for the two null-space exponents
    ``p = gamma - 1`` and ``p = gamma - 2``, which map to zero.
    """
    gamma = alpha + 2.0 * beta - alpha * beta
    u = np.log(np.asarray(t, dtype=np.float64))
    for q in (gamma - 1.0, gamma - 2.0):
        if abs(p - q) < 1.0e-14:
            return np.zeros_like(u)
    if not p > gamma - 1.0:
        raise ValueError(f"exponent {p} outside the supported range (> {gamma - 1})")
    return monomial_derivative(p, alpha, t)


def inversion_boundary_terms(p: float, alpha: float, beta: float, t):
    """Terms subtracted when ``I^alpha`` undoes the Hilfer derivative.

    Returns ``sum_j (delta^(1-j) I^(2-gamma) phi)(1) / Gamma(gamma-j) (log t)**(gamma-j-1)``
    for ``phi = (log t)**p`` and ``j = 0, 1``.
    """
    gamma = alpha + 2.0 * beta - alpha * beta
    u = np.log(np.asarray(t, dtype=np.float64))
    total = np.zeros_like(u)
    for j in (0, 1):
        # delta^(1-j) I^(2-gamma) u^p = c u^e
        e = p + 2.0 - gamma - (1 - j)
        c = math.gamma(p + 1.0) * _rgamma(p + 3.0 - gamma - (1 - j))
        if c == 0.0 or e > 1.0e-14:
            continue
        if e < -1.0e-14:
            raise ValueError(f"boundary value of (log t)**{p} is unbounded")
        total = total + c * _rgamma(gamma - j) * u ** (gamma - j - 1.0)
    return total
