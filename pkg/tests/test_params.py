import math

import numpy as np
import pytest

from cknlab import params as P
from cknlab.errors import ConstraintViolation


def test_reference_configuration():
    pp = P.derive_ab(3, 0.0, 0.15, 0.0)
    assert pp.a == 0.0
    assert pp.b == 0.15
    assert pp.p == pytest.approx(60.0 / 13.0, rel=1e-15)
    assert pp.nu == 0.5


def test_lambda_zero_is_identity_map():
    # lambda = 0 forces a = alpha, b = beta; beta = alpha gives p = 2N/(N-2)
    pp = P.derive_ab(3, 0.0, 0.0, 0.0)
    assert (pp.a, pp.b, pp.p) == (0.0, 0.0, 6.0)


def test_hardy_shift_dimension_four():
    pp = P.derive_ab(4, 0.0, 0.0, 0.75)
    assert pp.a == pytest.approx(0.5, abs=1e-15)
    assert pp.b == pytest.approx(0.5, abs=1e-15)
    assert pp.p == pytest.approx(4.0, abs=1e-14)


def test_shifted_configuration_exponent():
    # alpha=0.1, lambda=0.05: a = 1/2 - sqrt(0.16 - 0.05)
    pp = P.derive_ab(3, 0.1, 0.2, 0.05)
    assert pp.a == pytest.approx(0.5 - math.sqrt(0.11), rel=1e-14)
    assert pp.a == pytest.approx(0.168337, abs=1e-6)


@pytest.mark.parametrize("args,name", [
    ((3, 0.6, 0.7, 0.0), "alpha<(N-2)/2"),
    ((3, 0.0, 1.2, 0.0), "beta<alpha+1"),
    ((3, 0.0, 0.1, 0.3), "lambda<((N-2-2a)/2)^2"),
    ((3, 0.2, 0.1, 0.0), "alpha<=beta"),
])
def test_derive_ab_names_failed_inequality(args, name):
    import re
    with pytest.raises(ConstraintViolation, match=re.escape(name)):
        P.derive_ab(*args)


def test_borderline_is_tagged():
    pp = P.derive_ab(3, 0.5 - 1e-13, 0.5, 0.0)
    rep = P.check_admissible(pp, P.Level.CKN_BASIC)
    assert not rep.passed
    assert any(v.borderline for v in rep.violations)


def test_t1_admissible_at_compactness_and_existence():
    pp = P.derive_ab(3, 0.0, 0.15, 0.0)
    for level in (P.Level.COMPACTNESS, P.Level.EXISTENCE):
        rep = P.check_admissible(pp, level)
        assert rep.passed, [v.name for v in rep.violations]


def test_subcritical_window_violation_reported():
    # beta = 0.9 gives p = 6/2.8 < 4 = 4/(N-2-2a): compactness window fails
    pp = P.derive_ab(3, 0.0, 0.9, 0.0)
    assert pp.p == pytest.approx(6.0 / 2.8, rel=1e-14)
    rep = P.check_admissible(pp, P.Level.COMPACTNESS)
    assert not rep.passed
    assert any(v.name == "p>4/(N-2-2a)" for v in rep.violations)


def test_all_violations_listed_not_just_first():
    pp = P.derive_ab(3, 0.0, 0.9, 0.0)
    rep = P.check_admissible(pp, P.Level.EXISTENCE)
    names = {v.name for v in rep.violations}
    assert {"p>4/(N-2-2a)", "p>3"} <= names


def test_exponent_identities_random_sweep():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(1000):
        N = int(rng.integers(3, 8))
        alpha = rng.uniform(-1.5, (N - 2) / 2 - 0.05)
        beta = rng.uniform(alpha + 0.02, alpha + 0.95)
        lam = rng.uniform(-2.0, 0.95 * (0.5 * (N - 2 - 2 * alpha)) ** 2)
        try:
            pp = P.derive_ab(N, alpha, beta, lam)
        except ConstraintViolation:
            continue
        checked += 1
        lhs = pp.N - pp.b * pp.p
        rhs = pp.p * (pp.N - 2 - 2 * pp.a) / 2
        assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs))
        assert 2 * pp.N / (pp.N - 2 * (1 + pp.a - pp.b)) == pytest.approx(pp.p, rel=1e-13)
    assert checked > 900


def test_a_monotone_in_lambda_and_limit():
    lams = np.linspace(-1.0, 0.2, 13)
    avals = [P.derive_ab(3, 0.0, 0.1, lam).a for lam in lams]
    assert np.all(np.diff(avals) > 0)
    assert P.derive_ab(3, 0.1, 0.2, 1e-14).a == pytest.approx(0.1, abs=1e-12)


def test_json_round_trip_rejects_derived_fields():
    block = {"N": 3, "alpha": 0.0, "beta": 0.15, "lambda": 0.0}
    pp = P.params_from_json(block)
    emitted = pp.to_json()
    assert {"a", "b", "p"} <= set(emitted)
    with pytest.raises(ConstraintViolation, match="derived"):
        P.params_from_json({**block, "a": 0.0})


def test_admissibility_level_implications(t1):
    # a COMPACTNESS pass re-checks every basic constraint
    bad = P.derive_ab(3, 0.49, 0.5, 0.0)  # basic ok, compactness window fails
    rep_c = P.check_admissible(bad, P.Level.COMPACTNESS)
    rep_b = P.check_admissible(bad, P.Level.CKN_BASIC)
    assert rep_b.passed and not rep_c.passed
