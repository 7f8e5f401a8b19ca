"""Constants bounding the solution operator and checks of the existence hypotheses.

``phi`` bounds the sup norm of the solution operator per unit sup norm of the
forcing; the remaining constants follow from a uniform bound ``C1`` on ``f``.
Three sufficient conditions are checked:

``contraction``
    ``f`` is Lipschitz in ``x`` with constant ``C`` and ``C * phi < 1``
    (unique solution, Picard iteration converges).
``bounded_rhs``
    ``|f(t, x)| <= C1`` for a finite ``C1`` (at least one solution).
``sublinear``
    ``|f(t, x)| <= mu |x| + ...`` with ``0 < mu < 1 / phi`` (at least one solution).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from hilferbvp.bvp import BvpSpec, eta_coeffs, eta_values
from hilferbvp.calculus import OrderParams
from hilferbvp.special import gamma_fn


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_EVALUABLE = "not-evaluable"


@dataclass(frozen=True)
class Verdict:
    status: Status
    value: float | None
    """The evaluated left-hand side of the checked inequality."""
    condition: str


@dataclass(frozen=True)
class Certificate:
    phi: float
    lipschitz_c: float | None = None
    bound_c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    m_bound: float | None = None
    mu: float | None = None
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    @property
    def c_phi(self) -> float | None:
        return None if self.lipschitz_c is None else self.lipschitz_c * self.phi


# {{{ constants


def phi_formula(
    orders: OrderParams,
    epsilon: float,
    nu: float,
    zeta: float,
    eta_sum: float | None = None,
) -> float:
    r"""Evaluate :math:`\Phi` term by term, without range checks.

    .. math::

        \Phi = \frac{1 + L^{1 - \gamma + \alpha}}{\Gamma(\alpha + 1)}
            + \frac{1 - L}{L \, \Gamma(\alpha) \sum \eta_i}
              \Big[1 + \nu (\log \zeta)^{\alpha - 1}
                + \frac{(1 - \gamma) L^{1 - \gamma + \alpha}}{\alpha}
                  (1 - \nu (\log \zeta)^{\gamma - 2})\Big],

    with :math:`L = \log(1 + \epsilon)`. The sign of :math:`1 - \gamma` is kept
    as is; no absolute values are taken.
    """
    a, g = orders.alpha, orders.gamma
    ll = math.log1p(epsilon)
    lz = math.log(zeta)
    if eta_sum is None:
        eta_sum = eta_values(orders, epsilon, nu, zeta)[2]

    p = ll ** (1.0 - g + a)
    term1 = (1.0 + p) / gamma_fn(a + 1.0)
    bracket = 1.0 + nu * lz ** (a - 1.0) + (1.0 - g) * p / a * (1.0 - nu * lz ** (g - 2.0))
    term2 = (1.0 - ll) / (ll * gamma_fn(a) * eta_sum) * bracket
    return term1 + term2


def phi_constant(spec: BvpSpec) -> float:
    _, _, eta_sum = eta_coeffs(spec)
    return phi_formula(spec.orders, spec.epsilon, spec.nu, spec.zeta, eta_sum)


def existence_bounds(spec: BvpSpec, c1: float) -> tuple[float, float, float]:
    """Return ``(c2, c3, m)`` for a uniform bound ``|f| <= c1``.

    ``c2`` and ``m`` both equal ``c1 * phi``; ``c3`` bounds the modulus of
    continuity of the solution operator's image.
    """
    c1 = float(c1)
    if not c1 >= 0.0:
        raise ValueError(f"the uniform bound C1 must be non-negative: got {c1}")

    _, _, eta_sum = eta_coeffs(spec)
    a, g = spec.orders.alpha, spec.orders.gamma
    ll, lz, nu = spec.log_left, spec.log_zeta, spec.nu
    p = ll ** (1.0 - g + a)
    ga, ga1 = gamma_fn(a), gamma_fn(a + 1.0)

    phi = phi_constant(spec)
    inner = (1.0 + nu * lz ** (a - 1.0)) / ga + (1.0 - g) * p * (
        1.0 - nu * lz ** (g - 2.0)
    ) / ga1
    brace = (
        1.0 / ga
        + (1.0 - g) * p / ga1
        + ((g - 1.0) * (1.0 - ll) + ll) / (ll * eta_sum) * inner
    )
    return c1 * phi, c1 * brace, c1 * phi


# }}}


# {{{ verdicts


def check_theorems(
    spec: BvpSpec,
    lipschitz_c: float | None = None,
    bound_c1: float | None = None,
    mu: float | None = None,
) -> Certificate:
    """Evaluate the three sufficient conditions; missing inputs are not evaluable.

    If ``phi <= 0`` (possible for some boundary data) none of the conditions
    is meaningful and all verdicts are not evaluable.
    """
    phi = phi_constant(spec)
    verdicts: dict[str, Verdict] = {}
    degenerate = not phi > 0.0

    def verdict(name, value, ok, condition):
        if value is None or degenerate:
            why = "phi <= 0" if degenerate and value is not None else "input missing"
            verdicts[name] = Verdict(Status.NOT_EVALUABLE, value, f"{condition} ({why})")
        else:
            verdicts[name] = Verdict(Status.HOLDS if ok else Status.FAILS, value, condition)

    c_phi = None if lipschitz_c is None else float(lipschitz_c) * phi
    verdict("contraction", c_phi, c_phi is not None and c_phi < 1.0, "C*phi < 1")

    c2 = c3 = m = None
    finite_c1 = bound_c1 is not None and math.isfinite(bound_c1) and bound_c1 >= 0.0
    if finite_c1:
        c2, c3, m = existence_bounds(spec, bound_c1)
    verdict(
        "bounded_rhs",
        None if bound_c1 is None else float(bound_c1),
        finite_c1,
        "finite C1 >= 0",
    )

    mu_phi = None if mu is None else float(mu) * phi
    verdict(
        "sublinear",
        mu_phi,
        mu is not None and mu > 0.0 and mu_phi < 1.0,
        "0 < mu*phi < 1",
    )

    return Certificate(
        phi=phi,
        lipschitz_c=None if lipschitz_c is None else float(lipschitz_c),
        bound_c1=None if bound_c1 is None else float(bound_c1),
        c2=c2,
        c3=c3,
        m_bound=m,
        mu=None if mu is None else float(mu),
        verdicts=verdicts,
    )


# }}}


# {{{ published-value comparison


@dataclass(frozen=True)
class DiscrepancyReport:
    """Comparison of a computed constant with a published rounded value."""

    quantity: str
    published: float
    computed: float
    tolerance: float

    @property
    def abs_diff(self) -> float:
        return abs(self.computed - self.published)

    @property
    def agrees(self) -> bool:
        return self.abs_diff <= self.tolerance

    def as_lines(self) -> list[str]:
        q = self.quantity
        return [
            f"{q}.published={self.published!r}",
            f"{q}.computed={self.computed!r}",
            f"{q}.abs_diff={self.abs_diff!r}",
            f"{q}.tolerance={self.tolerance!r}",
            f"{q}.agrees={str(self.agrees).lower()}",
        ]


def compare_published(
    quantity: str, published: float, computed: float, tolerance: float = 0.01
) -> DiscrepancyReport:
    return DiscrepancyReport(quantity, float(published), float(computed), float(tolerance))


# }}}


def estimate_lipschitz(
    f: Callable,
    s_values: np.ndarray,
    radius: float = 10.0,
    samples: int = 2000,
    seed: int = 0,
) -> float:
    """Sampled lower estimate of the Lipschitz constant of ``f`` in ``x``.

    Not rigorous: it is the largest difference quotient seen at random
    ``t`` on the grid and random ``x, y`` in ``[-radius, radius]``.
    """
    rng = np.random.default_rng(seed)
    t = np.exp(rng.choice(np.asarray(s_values), size=samples))
    x = rng.uniform(-radius, radius, samples)
    y = rng.uniform(-radius, radius, samples)
    keep = np.abs(x - y) > 1.0e-8
    q = np.abs(np.asarray(f(t, x)) - np.asarray(f(t, y)))[keep] / np.abs(x - y)[keep]
    return float(np.max(q)) if q.size else 0.0
