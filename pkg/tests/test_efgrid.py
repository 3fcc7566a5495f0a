import math

import numpy as np
import pytest

import cknlab as ck
from cknlab import efgrid
from cknlab.errors import DomainError, GridMismatch, OutOfRange

from oracles import volume_p_exact


def test_grid_invariants(t1):
    g = ck.default_grid(t1)
    assert g.S == pytest.approx(20.0)
    assert np.all(np.diff(g.s) > 0)
    assert np.allclose(np.diff(g.s), g.h, rtol=1e-13)
    with pytest.raises(DomainError):
        ck.EFGrid(t1, S=5.0, n=2048)  # S below the decay-resolving bound
    with pytest.raises(DomainError):
        ck.EFGrid(t1, S=20.0, n=32)


def test_quadrature_against_beta_oracle(t1, grid, z1_profile):
    exact = volume_p_exact(t1)
    val = ck.integrate_volume_p(z1_profile) / grid.sphere
    assert val == pytest.approx(exact, rel=1e-12)


def test_quadrature_order_on_coarse_grids(t1):
    exact = volume_p_exact(t1)
    errs = []
    for n in (64, 128):
        g = ck.default_grid(t1, n=n)
        z = ck.make_instanton(t1, g)
        p = t1.p
        val = g.integrate(z.psi**p, (p * t1.nu, p * t1.nu))
        errs.append(abs(val - exact))
    # halving h must gain at least the documented 4th-order factor
    assert errs[0] / max(errs[1], 1e-18) >= 16.0


def test_norm_matches_weak_equation(t1, grid, z1_profile):
    # || z ||_Da^2 = integral z^p |x|^(-bp) for the exact solution
    lhs = ck.norm_Da(z1_profile) ** 2
    rhs = ck.integrate_volume_p(z1_profile)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_volume_integral_dilation_invariant(t1, grid):
    vals = [ck.integrate_volume_p(ck.make_instanton(t1, grid, mu=m))
            for m in (0.5, 1.0, 2.0)]
    assert max(vals) - min(vals) <= 1e-9 * vals[0]


def test_zero_profile_all_norms_zero(grid):
    zero = ck.RadialFunction(grid, np.zeros(grid.n))
    assert ck.integrate_volume_p(zero) == 0.0
    assert ck.norm_Da(zero) == 0.0
    assert ck.norm_E(zero) == 0.0


def test_cauchy_schwarz_random_profiles(grid):
    rng = np.random.default_rng(11)
    env = np.exp(-0.5 * np.abs(grid.s))
    for _ in range(5):
        u = ck.RadialFunction(grid, env * rng.normal(size=grid.n))
        v = ck.RadialFunction(grid, env * rng.normal(size=grid.n))
        assert ck.inner_Da(u, v) ** 2 <= ck.inner_Da(u, u) * ck.inner_Da(v, v) * (1 + 1e-12)


def test_green_function_derivative(t1, grid):
    # d/dr of r^(2+2a-N) is (2+2a-N) r^(1+2a-N)
    ga = ck.green_profile(t1, grid)
    du = ck.differentiate(ga)
    i = np.argmin(np.abs(grid.s))  # node closest to r = 1
    r = grid.r[i]
    expected = (2 + 2 * t1.a - t1.N) * r ** (1 + 2 * t1.a - t1.N)
    assert du.u_values()[i] == pytest.approx(expected, rel=1e-8)


def test_constant_psi_profile_derivative(t1, grid):
    # u = r^(-nu) has du/dr = -nu u / r
    u = ck.RadialFunction(grid, np.ones(grid.n), (0.0, 0.0))
    du = ck.differentiate(u).u_values()
    expected = -t1.nu * u.u_values() / grid.r
    core = slice(10, -10)
    assert np.max(np.abs(du[core] - expected[core])
                  / np.abs(expected[core])) < 1e-10


def test_surface_sample_matches_closed_form(t1, grid, z1_profile):
    from cknlab.instanton import z1_eval
    for sigma in (0.5, 1.0, 3.0):
        uval, du = ck.surface_sample(z1_profile, sigma)
        assert uval == pytest.approx(float(z1_eval(t1, sigma)), rel=1e-10)
        h = 1e-6 * sigma
        fd = (z1_eval(t1, sigma + h) - z1_eval(t1, sigma - h)) / (2 * h)
        assert du == pytest.approx(float(fd), rel=1e-7)
    with pytest.raises(OutOfRange):
        ck.surface_sample(z1_profile, math.exp(grid.S) * 2)


def test_norm_E_finite_and_continuous_in_mu(t1, grid):
    vals = [ck.norm_E(ck.make_instanton(t1, grid, mu=m))
            for m in (0.9, 1.0, 1.1)]
    assert all(np.isfinite(vals))
    assert abs(vals[0] - vals[1]) < 0.5 and abs(vals[2] - vals[1]) < 0.5


def test_grid_mismatch_raises(t1, grid, grid_small):
    u = ck.make_instanton(t1, grid)
    v = ck.make_instanton(t1, grid_small)
    with pytest.raises(GridMismatch):
        ck.inner_Da(u, v)


def test_formulation_maps_identity_when_lambda_zero(t1, grid, z1_profile):
    v = ck.to_v_formulation(z1_profile, t1)
    assert np.array_equal(v.psi, z1_profile.psi)  # a = alpha at lambda = 0


def test_formulation_round_trip_and_weight():
    pp = ck.derive_ab(3, 0.1, 0.2, 0.05)
    g = ck.default_grid(pp, n=512)
    u = ck.make_instanton(pp, g)
    v = ck.to_v_formulation(u, pp)
    back = ck.to_u_formulation(v, pp)
    assert np.max(np.abs(back.psi - u.psi)) < 1e-14
    # v(r) = r^(alpha - a) u(r) pointwise
    expected = g.r ** (pp.alpha - pp.a) * u.u_values()
    assert np.max(np.abs(v.u_values() - expected)) < 1e-12 * np.max(np.abs(expected))


def test_profile_csv_dump(tmp_path, t1, grid_small):
    z = ck.make_instanton(t1, grid_small)
    path = tmp_path / "profile.csv"
    ck.profile_to_csv(z, path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (grid_small.n, 5)
    assert np.allclose(data[:, 2], z.psi)
