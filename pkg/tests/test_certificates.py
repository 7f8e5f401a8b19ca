import math

import pytest

from hilferbvp.bvp import BvpSpec
from hilferbvp.calculus import OrderParams
from hilferbvp.certificates import (
    Certificate,
    Status,
    check_theorems,
    compare_published,
    estimate_lipschitz,
    existence_bounds,
    phi_constant,
    phi_formula,
)
from hilferbvp.expr import compile_rhs
from hilferbvp.reference import (
    PUBLISHED_C_PHI,
    PUBLISHED_LIPSCHITZ_C,
    PUBLISHED_PHI,
    RHS_SOURCE,
    SHARP_LIPSCHITZ_C,
    reference_spec,
    reproduce,
)

E = math.e

# mpmath, 30 digits
PHI_REF = 5.5402463317307457
C1_REF = (math.sqrt(E) + 1.0) / 16.0
C2_REF = 0.91716051898584903
C3_REF = 0.89813831678028857


@pytest.fixture(scope="module")
def ref():
    return reference_spec()


def test_phi_reference(ref):
    assert phi_constant(ref) == pytest.approx(PHI_REF, rel=1e-14)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 2.0])
def test_phi_unit_left_point(alpha):
    # log(1 + eps) = 1 kills the second term; only the raw formula accepts eps = e - 1
    got = phi_formula(OrderParams(alpha, 1.0), E - 1.0, 0.0, 1.5)
    assert got == pytest.approx(2.0 / math.gamma(alpha + 1.0), rel=1e-14)


def test_existence_bounds(ref):
    assert C1_REF == pytest.approx(0.16554507941875801, rel=1e-15)
    c2, c3, m = existence_bounds(ref, C1_REF)
    assert c2 == m
    assert c2 == pytest.approx(C2_REF, rel=1e-13)
    assert c3 == pytest.approx(C3_REF, rel=1e-13)
    assert existence_bounds(ref, 0.0) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        existence_bounds(ref, -1.0)


def test_contraction_verdicts(ref):
    phi = phi_constant(ref)
    fails = check_theorems(ref, lipschitz_c=2.0 / phi).verdicts["contraction"]
    assert fails.status is Status.FAILS
    assert fails.value == pytest.approx(2.0)
    holds = check_theorems(ref, lipschitz_c=PUBLISHED_LIPSCHITZ_C).verdicts["contraction"]
    assert holds.status is Status.HOLDS
    assert holds.value == pytest.approx(PHI_REF / 16.0)


def test_sublinear_verdicts(ref):
    phi = phi_constant(ref)
    v = check_theorems(ref, mu=0.5 / phi).verdicts["sublinear"]
    assert v.status is Status.HOLDS and v.value == pytest.approx(0.5)
    assert check_theorems(ref, mu=2.0 / phi).verdicts["sublinear"].status is Status.FAILS
    assert check_theorems(ref, mu=0.0).verdicts["sublinear"].status is Status.FAILS


def test_bounded_rhs_verdicts(ref):
    cert = check_theorems(ref, bound_c1=C1_REF)
    assert cert.verdicts["bounded_rhs"].status is Status.HOLDS
    assert cert.c3 == pytest.approx(C3_REF, rel=1e-13)
    assert check_theorems(ref, bound_c1=math.inf).verdicts["bounded_rhs"].status is Status.FAILS


def test_missing_inputs_not_evaluable(ref):
    cert = check_theorems(ref)
    assert isinstance(cert, Certificate)
    assert cert.c_phi is None
    assert set(cert.verdicts) == {"contraction", "bounded_rhs", "sublinear"}
    assert all(v.status is Status.NOT_EVALUABLE for v in cert.verdicts.values())
    assert cert.c2 is None and cert.c3 is None and cert.m_bound is None


def test_non_positive_phi_not_evaluable():
    # eta_0 + eta_1 < 0 here, which drives phi negative
    spec = BvpSpec.from_params(1.038, 0.124, 0.667, 0.641, 2.05)
    assert phi_constant(spec) < 0.0
    cert = check_theorems(spec, lipschitz_c=0.01, bound_c1=1.0, mu=0.1)
    assert all(v.status is Status.NOT_EVALUABLE for v in cert.verdicts.values())
    assert "phi <= 0" in cert.verdicts["contraction"].condition


def test_reference_reproduction():
    rep = reproduce()
    cert = rep.certificate
    assert cert.lipschitz_c == 0.0625
    assert cert.phi == pytest.approx(PHI_REF, rel=1e-14)
    assert cert.c_phi == pytest.approx(0.34626539573317161, rel=1e-13)
    assert cert.verdicts["contraction"].status is Status.HOLDS
    # the published rounded values are not reproduced
    assert not rep.agrees
    assert rep.phi_report.published == PUBLISHED_PHI
    assert rep.c_phi_report.published == PUBLISHED_C_PHI
    assert rep.phi_report.abs_diff == pytest.approx(PHI_REF - 1.404, rel=1e-12)


def test_sharp_lipschitz_constant():
    f = compile_rhs(RHS_SOURCE)
    s = reference_spec().default_grid()
    est = estimate_lipschitz(f, s, samples=20000)
    assert est <= SHARP_LIPSCHITZ_C <= PUBLISHED_LIPSCHITZ_C
    assert est > 0.5 * SHARP_LIPSCHITZ_C


def test_discrepancy_report():
    r = compare_published("phi", 1.404, 1.41, 0.01)
    assert r.agrees
    assert r.as_lines() == [
        "phi.published=1.404",
        "phi.computed=1.41",
        f"phi.abs_diff={abs(1.41 - 1.404)!r}",
        "phi.tolerance=0.01",
        "phi.agrees=true",
    ]
    assert not compare_published("phi", 1.404, 5.54).agrees
