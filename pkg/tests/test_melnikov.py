import numpy as np
import pytest

import cknlab as ck
from cknlab import melnikov as mel
from cknlab.errors import DegenerateCoefficient, DomainError

from oracles import centered_moment_exact, volume_p_exact


def test_constant_coefficient_gamma_flat(t1, grid):
    K = ck.constant(2.0)
    vals = [mel.gamma(K, tau, t1, grid) for tau in (1e-3, 0.1, 1.0, 10.0, 1e3)]
    assert max(vals) - min(vals) == 0.0
    # Gamma = c/p * integral psi^p for constant c
    expected = 2.0 * grid.sphere / t1.p * volume_p_exact(t1)
    assert vals[0] == pytest.approx(expected, rel=1e-12)


def test_gamma_prime_exactly_zero_for_constant(t1, grid):
    K = ck.constant(1.0)
    assert mel.gamma_prime(K, 0.37, t1, grid) == 0.0


@pytest.mark.parametrize("tau", [2.0, 5.0, 10.0])
def test_kelvin_symmetry_self_dual(t1, grid, bump, tau):
    lhs = mel.gamma(bump, tau, t1, grid)
    rhs = mel.gamma(bump.tilde(), 1.0 / tau, t1, grid)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_kelvin_symmetry_non_self_dual(t1, grid):
    # a table field with K~ != K still satisfies the inversion identity
    r = np.geomspace(1e-9, 1e9, 4001)
    K = ck.from_table(r, 1.0 + 0.5 * r**2 / (1 + r**4) - r**6 / (1 + r**4) ** 2)
    Kt = K.tilde()
    for tau in (0.5, 1.0, 2.0):
        lhs = mel.gamma(K, tau, t1, grid)
        rhs = mel.gamma(Kt, 1.0 / tau, t1, grid)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gamma_endpoint_continuity(t1, grid, bump):
    # Gamma extends continuously to tau = 0 with value K(0) * Gamma_const
    g_small = mel.gamma(bump, 1e-4, t1, grid)
    g_const = mel.gamma(ck.constant(1.0), 1.0, t1, grid)
    assert abs(g_small - g_const) < 1e-4


def test_gamma_second_at_zero_formula(t1, grid, bump):
    val = mel.gamma_second_at_zero(bump, t1, grid)
    lap = ck.laplacians_for(bump, t1.N)
    expected = lap.lap_origin / (t1.N * t1.p) * grid.sphere \
        * centered_moment_exact(t1, 2.0)
    assert val == pytest.approx(expected, rel=1e-9)
    assert np.sign(val) == lap.sign_origin


def test_gamma_second_at_zero_finite_difference_rate(t1, grid, bump):
    """The 3-point estimate converges at the tail-limited rate, not faster.

    The coefficient approaches its limit like r^-2, which caps the
    convergence of (Gamma(2h) - 2 Gamma(h) + Gamma(0+))/h^2 at the exponent
    p(N-2-2a)/2 - 2 (about 0.308 here).  Frozen oracle values: the relative
    deviation is about 0.507 at h = 1e-2 and 0.247 at h = 1e-3.
    """
    formula = mel.gamma_second_at_zero(bump, t1, grid)
    g0 = mel.gamma(bump, 1e-4, t1, grid)

    def fd(h):
        return (mel.gamma(bump, 2 * h, t1, grid)
                - 2 * mel.gamma(bump, h, t1, grid) + g0) / h**2

    dev = {h: abs(fd(h) / formula - 1.0) for h in (1e-2, 1e-3)}
    assert dev[1e-2] == pytest.approx(0.5066, abs=5e-3)
    assert dev[1e-3] == pytest.approx(0.2473, abs=5e-3)
    rate = np.log10(dev[1e-2] / dev[1e-3])
    assert rate == pytest.approx(t1.nu * t1.p - 2.0, abs=0.05)


def test_gamma_second_integrability_guard():
    # p(N-2-2a)/2 < 2 here: the moment integral diverges and must be refused
    pp = ck.derive_ab(3, 0.0, 0.8, 0.0)
    g = ck.default_grid(pp, n=256)
    with pytest.raises(DomainError, match="moment"):
        mel.gamma_second_at_zero(ck.make_self_dual_bump(0.5), pp, g)


def test_gamma_second_requires_nondegenerate_coefficient(t1, grid):
    with pytest.raises(DegenerateCoefficient):
        mel.gamma_second_at_zero(ck.constant(1.0), t1, grid)


def test_critical_points_constant_flat(t1, grid):
    curve = mel.sample_curve(ck.constant(1.0), t1, grid)
    assert curve.degenerate_flat
    assert curve.critical_points == []
    assert np.max(np.abs(curve.gamma_prime)) <= 1e-10 * curve.scale


def test_critical_points_bump(t1, grid, bump):
    cps = mel.critical_points(bump, t1, grid)
    assert len(cps) == 1
    cp = cps[0]
    assert cp.tau == pytest.approx(1.0, abs=1e-8)  # forced by the symmetry
    assert cp.nondegenerate
    assert cp.gamma2 == pytest.approx(-0.26633, rel=1e-3)  # frozen quadrature value


def test_critical_points_negative_bump_opposite_concavity(t1, grid, bump_neg):
    cps = mel.critical_points(bump_neg, t1, grid)
    assert len(cps) == 1
    assert cps[0].tau == pytest.approx(1.0, abs=1e-8)
    assert cps[0].gamma2 > 0


@pytest.mark.parametrize("A,expected", [(0.5, -1), (-0.5, 1)])
def test_degree_bump(t1, grid, A, expected):
    rep = mel.degree_report(ck.make_self_dual_bump(A), t1, grid)
    assert rep.value == expected
    assert rep.consistent
    assert rep.endpoint_degree == expected
    assert rep.critical_point_degree == expected


def test_degree_mixed_signs_vanishes(t1):
    r = np.geomspace(1e-3, 1e3, 1201)
    K = ck.from_table(r, 1.0 + 0.5 * r**2 / (1 + r**4) - r**6 / (1 + r**4) ** 2)
    # existence is not predicted: the pole signs cancel
    assert mel.degree(K, t1) == 0
    lap = ck.laplacians_for(K, t1.N)
    assert lap.sign_origin + lap.sign_infinity == 0


def test_degree_constant_degenerate(t1):
    with pytest.raises(DegenerateCoefficient):
        mel.degree(ck.constant(1.0), t1)


def test_sample_curve_requires_enough_points(t1, grid, bump):
    with pytest.raises(DomainError):
        mel.sample_curve(bump, t1, grid, n_tau=50)


def test_endpoint_signs_encode_pole_laplacians(t1, grid, bump, bump_neg):
    for K in (bump, bump_neg):
        curve = mel.sample_curve(K, t1, grid)
        lap = ck.laplacians_for(K, t1.N)
        assert np.sign(curve.gamma_prime[0]) == lap.sign_origin
        assert np.sign(curve.gamma_prime[-1]) == -lap.sign_infinity
