"""Gamma function and Gauss-Jacobi rules on (0, 1).

Every fractional integral in the package reduces to

.. math::

    \\int_0^1 (1 - s)^{\\mu} s^{\\lambda} g(s) \\,\\mathrm{d}s,

so the only quadrature primitive needed is a Gauss rule for that weight.
"""

from __future__ import annotations

import contextlib
import math
import threading
from collections.abc import Iterator
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal


class DomainError(ValueError):
    """Raised when an argument lies outside the supported domain."""


class QuadratureError(RuntimeError):
    """Raised when a quadrature rule cannot be constructed."""


# {{{ gamma

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# fault-injection hook for the verification suites
_gamma_perturbation = 0.0
_fault_lock = threading.Lock()


def _lanczos(x: float) -> float:
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (x + i)
    tt = x + _LANCZOS_G + 0.5
    return _SQRT_2PI * tt ** (x + 0.5) * math.exp(-tt) * acc


def gamma_fn(x: float) -> float:
    """Euler Gamma function for real ``x > 0``.

    Uses a Lanczos approximation (``g = 7``, 9 coefficients) with the
    reflection formula below ``x = 1/2``.
    """
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"gamma_fn requires a finite x > 0: got {x!r}")

    if x > 171.7:
        return math.inf

    if x < 0.5:
        value = math.pi / (math.sin(math.pi * x) * _lanczos(1.0 - x))
    else:
        value = _lanczos(x)

    return value * (1.0 + _gamma_perturbation * x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma ``1/Γ(x)`` for any real ``x``.

    Poles (``x = 0, -1, -2, ...``) map to exactly zero. Negative non-integer
    arguments use the reflection formula.
    """
    x = float(x)
    if x > 0.0:
        return 1.0 / gamma_fn(x)
    if x == math.floor(x):
        return 0.0

    # 1/Γ(x) = sin(πx) Γ(1 - x) / π
    return math.sin(math.pi * x) * gamma_fn(1.0 - x) / math.pi


def beta_fn(a: float, b: float) -> float:
    return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b)


@contextlib.contextmanager
def gamma_fault(perturbation: float) -> Iterator[None]:
    """Temporarily multiply :func:`gamma_fn` by ``1 + perturbation * x``.

    Only meant for fault-injection checks of the verification suites. (A
    constant factor would cancel between ``1/Γ`` and the Beta-normalised
    quadrature weights.)
    """
    global _gamma_perturbation

    with _fault_lock:
        previous = _gamma_perturbation
        _gamma_perturbation = float(perturbation)
        _clear_rule_caches()
        try:
            yield
        finally:
            _gamma_perturbation = previous
            _clear_rule_caches()


def _clear_rule_caches() -> None:
    _jacobi_rule_cached.cache_clear()
    build_mapped_rule.cache_clear()
    build_graded_rule.cache_clear()


# }}}


# {{{ Gauss-Jacobi


@dataclass(frozen=True)
class QuadratureRule:
    r"""Gauss rule for :math:`\int_0^1 (1 - s)^\mu s^\lambda g(s) \,\mathrm{d}s`."""

    exponent: float
    """Exponent :math:`\\mu > -1` of the weight at the upper endpoint."""
    node_count: int
    nodes: np.ndarray
    weights: np.ndarray
    lower_exponent: float = 0.0
    """Exponent :math:`\\lambda > -1` of the weight at the lower endpoint."""

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Contract the last axis of *values* (sampled at :attr:`nodes`)."""
        return np.asarray(values) @ self.weights

    def integrate(self, g) -> float:
        return float(self.apply(g(self.nodes)))


def _recurrence(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi matrix of the monic Jacobi polynomials shifted to (0, 1)."""
    k = np.arange(n, dtype=np.float64)
    ab = a + b

    diag = np.empty(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        nk = 2.0 * k + ab
        diag[:] = (b * b - a * a) / (nk * (nk + 2.0))
    diag[0] = (b - a) / (ab + 2.0)

    kk = np.arange(1, n, dtype=np.float64)
    nk = 2.0 * kk + ab
    off2 = np.empty(n - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        off2[:] = (
            4.0 * kk * (kk + a) * (kk + b) * (kk + ab)
            / (nk * nk * (nk + 1.0) * (nk - 1.0))
        )
    # k = 1 has a removable 0/0 when a + b = -1
    off2[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) ** 2 * (3.0 + ab))

    # x in (-1, 1) -> s = (1 + x) / 2
    return (1.0 + diag) / 2.0, np.sqrt(off2) / 2.0


@lru_cache(maxsize=256)
def _jacobi_rule_cached(mu: float, lam: float, n: int) -> QuadratureRule:
    diag, off = _recurrence(mu, lam, n)
    try:
        nodes, vecs = eigh_tridiagonal(diag, off)
    except LinAlgError as exc:
        raise QuadratureError(
            f"eigenvalue solver failed for Jacobi rule (mu={mu}, lambda={lam}, n={n})"
        ) from exc

    # total mass of the weight on (0, 1)
    mass = beta_fn(mu + 1.0, lam + 1.0)
    weights = mass * vecs[0, :] ** 2

    if not (
        np.all(np.isfinite(nodes))
        and np.all(nodes > 0.0)
        and np.all(nodes < 1.0)
        and np.all(np.diff(nodes) > 0.0)
        and np.all(weights > 0.0)
    ):
        raise QuadratureError(
            f"degenerate Jacobi rule (mu={mu}, lambda={lam}, n={n})"
        )

    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(
        exponent=mu, node_count=n, nodes=nodes, weights=weights, lower_exponent=lam
    )


def build_jacobi_rule(mu: float, n: int, lower: float = 0.0) -> QuadratureRule:
    """Gauss-Jacobi rule on (0, 1) for the weight ``(1 - s)**mu * s**lower``.

    Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix
    (Golub-Welsch). The rule is exact for polynomials of degree ``2 n - 1``.
    Rules are cached per ``(mu, lower, n)``.
    """
    mu = float(mu)
    lower = float(lower)
    if not mu > -1.0:
        raise DomainError(f"Jacobi exponent must be > -1: got mu={mu}")
    if not lower > -1.0:
        raise DomainError(f"Jacobi exponent must be > -1: got lower={lower}")
    if int(n) != n or n < 2:
        raise DomainError(f"node count must be an integer >= 2: got n={n}")

    return _jacobi_rule_cached(mu, lower, int(n))


@lru_cache(maxsize=256)
def build_mapped_rule(mu: float, lower: float, power: float, n: int) -> QuadratureRule:
    r"""Rule for :math:`\int_0^1 (1 - s)^\mu s^\lambda g(s) \,\mathrm{d}s` via ``s = w**power``.

    In ``w`` the weight becomes :math:`(1 - w)^\mu w^\kappa` with
    :math:`\kappa = p (\lambda + 1) - 1`, integrated by Gauss-Jacobi; the
    smooth factor :math:`p \, ((1 - w^p) / (1 - w))^\mu` is folded into the
    weights. Components of ``g`` behaving like ``s^(j / p)`` become
    polynomial in ``w`` and are integrated exactly.
    """
    mu, lower, power = float(mu), float(lower), float(power)
    if not power >= 1.0:
        raise DomainError(f"mapping power must be >= 1: got {power}")

    base = build_jacobi_rule(mu, n, lower=power * (lower + 1.0) - 1.0)
    w = base.nodes
    nodes = w**power
    ratio = -np.expm1(power * np.log(w)) / (1.0 - w)
    weights = power * base.weights * ratio**mu

    if not (np.all(nodes > 0.0) and np.all(np.diff(nodes) > 0.0)):
        raise QuadratureError(f"mapped rule underflows (power={power}, n={n})")

    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(
        exponent=mu, node_count=int(n), nodes=nodes, weights=weights,
        lower_exponent=lower,
    )


GRADING_POWER = 8.0


@lru_cache(maxsize=256)
def build_graded_rule(mu: float, n: int) -> QuadratureRule:
    r"""Rule for :math:`\int_0^1 (1 - s)^\mu g(s) \,\mathrm{d}s` graded at ``s = 0``.

    :func:`build_mapped_rule` with ``power = 8`` and a Legendre base in ``w``
    (``lower = 1/8 - 1``, folded back into the weights). Smooth ``g`` are integrated to machine precision,
    and so are components ``s^(j/8 - 1)``; other ``g ~ s^c`` with
    :math:`c > -1` converge at eight times the algebraic rate of the plain
    rule. This matters for forcings behaving like ``(log t)^(gamma - 2)``.
    """
    lower = 1.0 / GRADING_POWER - 1.0
    rule = build_mapped_rule(mu, lower, GRADING_POWER, n)
    weights = rule.weights * rule.nodes ** (-lower)
    weights.setflags(write=False)
    return QuadratureRule(exponent=rule.exponent, node_count=rule.node_count,
                          nodes=rule.nodes, weights=weights)


# }}}
