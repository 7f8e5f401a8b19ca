"""Built-in reference problem with published constants.

``alpha = 3/2``, ``beta = 1/2`` (so ``gamma = 7/4``), ``epsilon = 0.2``,
``nu = 1/2``, ``zeta = 3/2`` and

.. math::

    f(t, x) = \\frac{1}{32} (\\sqrt{t} + \\log t) \\frac{|x|}{2 + |x|}.

The published Lipschitz constant is ``1/16``, together with rounded values
``phi = 1.404`` and ``C * phi = 0.0876``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from hilferbvp.bvp import BvpSpec
from hilferbvp.certificates import (
    Certificate,
    DiscrepancyReport,
    check_theorems,
    compare_published,
)
from hilferbvp.expr import compile_rhs

RHS_SOURCE = "(1/32)*(sqrt(t)+log(t))*(abs(x)/(2+abs(x)))"

ALPHA = 1.5
BETA = 0.5
EPSILON = 0.2
NU = 0.5
ZETA = 1.5

PUBLISHED_LIPSCHITZ_C = 1.0 / 16.0
PUBLISHED_PHI = 1.404
PUBLISHED_C_PHI = 0.0876
PUBLISHED_TOLERANCE = 0.01

# d/dx |x| / (2 + |x|) <= 1/2 and sqrt(t) + log(t) is largest at t = e
SHARP_LIPSCHITZ_C = (math.sqrt(math.e) + 1.0) / 64.0


def reference_spec() -> BvpSpec:
    return BvpSpec.from_params(ALPHA, BETA, EPSILON, NU, ZETA, compile_rhs(RHS_SOURCE))


@dataclass(frozen=True)
class Reproduction:
    certificate: Certificate
    phi_report: DiscrepancyReport
    c_phi_report: DiscrepancyReport

    @property
    def agrees(self) -> bool:
        return self.phi_report.agrees and self.c_phi_report.agrees


def reproduce() -> Reproduction:
    """Recompute the constants of the reference problem and compare them."""
    cert = check_theorems(reference_spec(), lipschitz_c=PUBLISHED_LIPSCHITZ_C)
    return Reproduction(
        certificate=cert,
        phi_report=compare_published("phi", PUBLISHED_PHI, cert.phi, PUBLISHED_TOLERANCE),
        c_phi_report=compare_published(
            "c_phi", PUBLISHED_C_PHI, cert.c_phi, PUBLISHED_TOLERANCE
        ),
    )
