import math

import numpy as np
import pytest

import cknlab as ck
from cknlab import instanton as inst

from oracles import volume_p_exact


def test_closed_form_constants_reference(t1):
    c, theta, E = inst.instanton_constants(t1)
    assert c == pytest.approx(1.3 / 3.0, rel=1e-14)
    assert theta == pytest.approx(1.7 / 1.3, rel=1e-14)
    assert E == pytest.approx(1.3 / 1.7, rel=1e-14)


def test_z1_at_origin_is_one(t1):
    assert inst.z1_eval(t1, 0.0) == 1.0
    pp = ck.derive_ab(4, 0.0, 0.0, 0.75)
    assert inst.z1_eval(pp, 0.0) == 1.0


def test_z1_standard_bubble():
    pp = ck.derive_ab(3, 0.0, 0.0, 0.0)
    r = np.array([0.5, 1.0, 2.0, 7.0])
    assert inst.z1_eval(pp, r) == pytest.approx((1 + r**2 / 3.0) ** -0.5, rel=1e-14)


def test_z1_reference_value(t1):
    # hand evaluation of the closed form at r = 1: (1 + 1.3/3)^(-13/17)
    assert inst.z1_eval(t1, 1.0) == pytest.approx(0.7593471649180775, rel=1e-13)


def test_z1_strictly_decreasing(t1, grid, z1_profile):
    u = z1_profile.u_values()
    assert np.all(np.diff(u) < 0)


def test_psi_peak_and_symmetry(t1, grid, z1_profile):
    # the profile is even about its peak s* = -ln(c)/theta
    s_star = inst.peak_s(t1)
    psi = inst.psi_z1(t1, grid.s)
    i = np.argmax(psi)
    assert grid.s[i] == pytest.approx(s_star, abs=grid.h)
    assert np.all(np.diff(psi[i:]) < 0) and np.all(np.diff(psi[:i]) > 0)
    probe = np.linspace(-5, 5, 41)
    sym = inst.psi_z1(t1, s_star + probe) - inst.psi_z1(t1, s_star - probe)
    assert np.max(np.abs(sym)) < 1e-15


def test_make_instanton_trivial_and_translation(t1, grid):
    z = ck.make_instanton(t1, grid, K0=1.0, mu=1.0)
    assert np.array_equal(z.psi, inst.psi_z1(t1, grid.s))
    z2 = ck.make_instanton(t1, grid, mu=2.0)
    shifted = z2.spline()(grid.s[:-64] + math.log(2.0))
    assert np.max(np.abs(shifted - z.psi[:-64])) < 1e-8


def test_instanton_K0_scaling_solves_scaled_problem(t1, grid):
    zK = ck.make_instanton(t1, grid, K0=2.0)
    R = ck.pde_residual(zK, ck.constant(2.0), 1.0)
    assert np.max(np.abs(R.psi)) < 1e-8


@pytest.mark.parametrize("mu", [0.25, 1.0, 4.0])
def test_pde_residual_on_family(t1, grid, mu):
    z = ck.make_instanton(t1, grid, mu=mu)
    R = ck.pde_residual(z, ck.constant(1.0), 0.3)
    assert np.max(np.abs(R.psi)) < 1e-8


def test_pde_residual_zero_profile(t1, grid, k_one):
    zero = ck.RadialFunction(grid, np.zeros(grid.n))
    assert np.max(np.abs(ck.pde_residual(zero, k_one, 1.0).psi)) == 0.0


def test_green_profile_harmonic(t1, grid):
    # with coefficient weight 0 the residual reduces to the linear operator
    ga = ck.green_profile(t1, grid)
    R = ck.pde_residual(ga, ck.constant(0.0), 1.0)
    core = (grid.s > -15) & (grid.s < 15)
    rel = np.abs(R.psi[core]) / np.maximum(ga.psi[core], 1e-300)
    assert np.max(rel) < 1e-8
    assert ck.green(t1, 2.0) == pytest.approx(0.5)  # a=0, N=3: 1/r
    assert np.allclose(ga.psi, np.exp(-t1.nu * grid.s))


def test_kelvin_involution_and_isometry(t1, grid):
    z = ck.make_instanton(t1, grid, mu=2.0)
    zk = ck.kelvin(z)
    assert np.array_equal(ck.kelvin(zk).psi, z.psi)
    assert ck.norm_Da(zk) == pytest.approx(ck.norm_Da(z), rel=1e-10)


def test_kelvin_maps_family_to_family(t1, grid):
    z = ck.make_instanton(t1, grid, mu=2.0)
    fit = ck.fit_instanton(ck.kelvin(z))
    assert fit.residual < 1e-6
    # inversion sends mu to exp(-2 s*)/mu in the raw parametrization
    assert fit.mu == pytest.approx(math.exp(-2 * inst.peak_s(t1)) / 2.0, rel=1e-8)
    assert fit.K0 == pytest.approx(1.0, abs=1e-6)


def test_functionals_zero_profile(t1, grid, k_one):
    zero = ck.RadialFunction(grid, np.zeros(grid.n))
    assert ck.f0(zero) == 0.0
    assert ck.G_K(zero, k_one) == 0.0
    assert ck.f_eps(zero, k_one, 0.3) == 0.0


def test_f0_value_from_weak_equation(t1, grid, z1_profile):
    vol = ck.integrate_volume_p(z1_profile)
    assert ck.f0(z1_profile) == pytest.approx((0.5 - 1 / t1.p) * vol, rel=1e-8)
    assert vol / grid.sphere == pytest.approx(volume_p_exact(t1), rel=1e-12)


def test_f0_dilation_invariant(t1, grid):
    vals = [ck.f0(ck.make_instanton(t1, grid, mu=m)) for m in (0.5, 1.0, 2.0)]
    assert max(vals) - min(vals) <= 1e-8


def test_f_eps_decomposition(t1, grid, bump, z1_profile):
    eps = 0.37
    assert ck.f_eps(z1_profile, bump, eps) == pytest.approx(
        ck.f0(z1_profile) - eps * ck.G_K(z1_profile, bump), rel=1e-14)
    # the homotopy energy shifts the perturbation by the constant part
    direct = ck.homotopy_energy(z1_profile, bump, eps)
    via = ck.f0(z1_profile) - eps * (ck.G_K(z1_profile, bump)
                                     - ck.G_K(z1_profile, ck.constant(1.0)))
    assert direct == pytest.approx(via, rel=1e-12)


def test_hessian_eigenvalue_on_solution(t1, grid, z1_profile):
    quot = ck.f0_hessian_form(z1_profile, z1_profile, z1_profile) \
        / ck.inner_Da(z1_profile, z1_profile)
    assert quot == pytest.approx(-(t1.p - 2.0), abs=1e-6)


def test_hessian_kernel_direction(t1, grid, z1_profile):
    xi = ck.tangent_vector(t1, grid, 1.0)
    h = ck.f0_hessian_apply(z1_profile, xi)
    assert ck.norm_Da(h) <= 1e-5  # xi is unit-normalized


def test_hessian_positive_in_far_tail(t1, grid, z1_profile):
    # where the solution weight vanishes the form reduces to the inner product
    v = ck.RadialFunction(grid, np.exp(-0.5 * (grid.s - 15.0) ** 2), (0.0, 0.0))
    form = ck.f0_hessian_form(z1_profile, v, v)
    assert form > 0
    assert form == pytest.approx(ck.inner_Da(v, v), rel=1e-3)


def test_tangent_vector_against_finite_difference(t1, grid):
    raw, scale = ck.tangent_vector(t1, grid, 1.0, return_raw_scale=True)
    h = 1e-4
    zp = ck.make_instanton(t1, grid, mu=1.0 + h)
    zm = ck.make_instanton(t1, grid, mu=1.0 - h)
    fd = (zp.psi - zm.psi) / (2 * h)
    assert np.max(np.abs(raw.psi * scale - fd)) <= 1e-6 * np.max(np.abs(fd))
    assert ck.norm_Da(raw) == pytest.approx(1.0, rel=1e-12)


def test_tangent_vector_mu_covariance(t1, grid):
    # before normalization the tangent at mu is the translate scaled by 1/mu
    t1_raw, s1 = ck.tangent_vector(t1, grid, 1.0, return_raw_scale=True)
    t2_raw, s2 = ck.tangent_vector(t1, grid, 2.0, return_raw_scale=True)
    spl = ck.RadialFunction(grid, t1_raw.psi * s1).spline()
    translated = spl(grid.s[64:] - math.log(2.0)) / 2.0
    assert np.max(np.abs(t2_raw.psi[64:] * s2 - translated)) < 1e-8


def test_envelope_sandwich_for_instanton(t1, grid, z1_profile):
    ratio = z1_profile.envelope_ratio()
    assert np.min(ratio) > 0
    assert np.isfinite(np.max(ratio))
    assert np.max(ratio) / np.min(ratio) < 3.0


def test_instanton_dataclass_matches_profile(t1, grid):
    zi = ck.Instanton(t1, K0=2.0, mu=0.5)
    prof = zi.profile(grid)
    i = np.argmin(np.abs(grid.s))
    r = grid.r[i]
    assert prof.u_values()[i] == pytest.approx(float(zi.eval(r)), rel=1e-13)


def test_centered_instanton_peak_at_log_mu(t1, grid):
    for mu in (0.5, 1.0, 3.0):
        z = inst.make_centered_instanton(t1, grid, mu)
        i = np.argmax(z.psi)
        assert grid.s[i] == pytest.approx(math.log(mu), abs=2 * grid.h)
