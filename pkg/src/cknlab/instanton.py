"""Closed-form solution family, Kelvin transform, and variational objects.

With constant coefficient the problem has the explicit radial solution

    z1(r) = [1 + c r^theta]^(-E),
    c     = (N - 2(1+a-b)) / (N (N-2-2a)^2),
    theta = 2 (1+a-b)(N-2-2a) / (N - 2(1+a-b)),
    E     = (N - 2(1+a-b)) / (2 (1+a-b)),

normalized so z1(0) = 1, decaying like r^(-(N-2-2a)) at infinity (note
theta * E = N-2-2a).  Every positive solution for K = K(0) is a dilation

    z_{K0,mu}(x) = mu^(-nu') z_{K0}(x/mu),   z_{K0}(x) = z1(x K0^g),

with nu' = (N-2-2a)/2 and g = 2/((p-2)(N-2-2a)).  In Emden-Fowler
coordinates the whole family consists of translates (and one amplitude
factor K0^(-1/(p-2))) of a single even profile: psi_z1 is exactly symmetric
about its peak s* = -ln(c)/theta, so the member with dilation

    sigma = exp(-s*) = c^(1/theta)

is the fixed point (up to inversion) of the Kelvin transform, which in these
coordinates is the reflection psi(s) -> psi(-s).  Melnikov and reduction
computations parametrize dilations relative to this symmetric member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import least_squares

from .coeff import CoefficientField
from .efgrid import (EFGrid, RadialFunction, inner_Da, integrate_volume_p,
                     norm_Da, _check_same_grid)
from .errors import DomainError


# ----------------------------------------------------------- closed form
def instanton_constants(params) -> tuple[float, float, float]:
    """(c, theta, E) of the closed form for the given exponents."""
    N, a, b = params.N, params.a, params.b
    d = 1.0 + a - b
    m = N - 2.0 * d
    if d <= 0 or m <= 0:
        raise DomainError("exponents leave the closed-form family undefined")
    c = m / (N * (N - 2.0 - 2.0 * a) ** 2)
    theta = 2.0 * d * (N - 2.0 - 2.0 * a) / m
    E = m / (2.0 * d)
    return c, theta, E


def peak_s(params) -> float:
    """Location of the maximum of the Emden-Fowler profile of z1."""
    c, theta, _ = instanton_constants(params)
    return -math.log(c) / theta


def kelvin_scale(params) -> float:
    """Dilation sigma with kelvin(z_{1,sigma}) = z_{1,sigma}: sigma = c^(1/theta)."""
    return math.exp(-peak_s(params))


def z1_eval(params, r):
    """The closed-form profile z1 at radius r (r = 0 allowed, gives 1)."""
    c, theta, E = instanton_constants(params)
    r = np.asarray(r, dtype=float)
    return (1.0 + c * r ** theta) ** (-E)


def psi_z1(params, s):
    """Emden-Fowler values of z1: psi(s) = e^(nu s) z1(e^s)."""
    c, theta, E = instanton_constants(params)
    nu = params.nu
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(nu * s - E * np.log1p(c * np.exp(theta * s)))


def psi_z1_prime(params, s):
    """d/ds of psi_z1, from the closed form (uses theta*E = 2 nu)."""
    c, theta, E = instanton_constants(params)
    nu = params.nu
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore"):
        x = c * np.exp(theta * s)
        return np.exp(nu * s - (E + 1.0) * np.log1p(x)) * nu * (1.0 - x)


@dataclass(frozen=True)
class Instanton:
    """A member of the explicit family, z_{K0,mu}."""

    params: object
    K0: float = 1.0
    mu: float = 1.0

    def eval(self, r):
        g = 2.0 / ((self.params.p - 2.0) * (self.params.N - 2.0 - 2.0 * self.params.a))
        scale = self.K0 ** g
        r = np.asarray(r, dtype=float)
        return self.mu ** (-self.params.nu) * z1_eval(self.params, scale * r / self.mu)

    def profile(self, grid: EFGrid) -> RadialFunction:
        return make_instanton(self.params, grid, self.K0, self.mu)


def make_instanton(params, grid: EFGrid, K0: float = 1.0, mu: float = 1.0) -> RadialFunction:
    """Sample z_{K0,mu} exactly onto the grid.

    In psi coordinates this is psi_z1 translated by ln(mu) - g ln(K0) and
    scaled by the amplitude K0^(-1/(p-2)).
    """
    if K0 <= 0 or mu <= 0:
        raise DomainError("instanton needs K0 > 0 and mu > 0")
    g = 2.0 / ((params.p - 2.0) * (params.N - 2.0 - 2.0 * params.a))
    amp = K0 ** (-1.0 / (params.p - 2.0))
    shift = math.log(mu) - g * math.log(K0)
    return RadialFunction(grid, amp * psi_z1(params, grid.s - shift))


def make_centered_instanton(params, grid: EFGrid, mu: float = 1.0) -> RadialFunction:
    """The Kelvin-centered member z_{1, sigma*mu}; its psi peaks at s = ln(mu).

    The map mu -> kelvin(z_{1, sigma mu}) = z_{1, sigma/mu} makes mu = 1 the
    symmetric dilation; this is the parametrization used by the Melnikov
    function and the finite-dimensional reduction.
    """
    if mu <= 0:
        raise DomainError("mu must be positive")
    return RadialFunction(grid, psi_z1(params, grid.s - math.log(mu) + peak_s(params)))


def kelvin(u: RadialFunction) -> RadialFunction:
    """Kelvin transform |x|^(-(N-2-2a)) u(x/|x|^2): psi(s) -> psi(-s)."""
    km, kp = u.tail_decay
    return RadialFunction(u.grid, u.psi[::-1].copy(), (kp, km))


def green(params, r):
    """Green's function of the weighted Laplacian: r^(2+2a-N)."""
    r = np.asarray(r, dtype=float)
    return r ** (2.0 + 2.0 * params.a - params.N)


def green_profile(params, grid: EFGrid) -> RadialFunction:
    # psi = e^(-nu s) grows toward s = -inf: no tail correction on that side
    return RadialFunction(grid, np.exp(-params.nu * grid.s), (0.0, params.nu))


# ------------------------------------------------------------ PDE residual
def ef_linear_operator(grid: EFGrid) -> sp.csr_matrix:
    """The transformed weighted Laplacian: L psi = -psi'' + nu^2 psi."""
    nu = grid.params.nu
    return (-grid.D2 + nu ** 2 * sp.identity(grid.n, format="csr")).tocsr()


def pde_residual(u: RadialFunction, K: CoefficientField, t: float) -> RadialFunction:
    """Emden-Fowler residual of the homotopy problem at weight 1 + t(K-1).

    R(s) = -psi'' + nu^2 psi - (1 + t (K(e^s) - 1)) |psi|^(p-2) psi; the
    radial equation transforms to R = 0 exactly (N - bp = p(N-2-2a)/2).
    """
    g = u.grid
    nu, p = g.params.nu, g.params.p
    Kt = 1.0 + t * (K.eval(g.r) - 1.0)
    R = -(g.D2 @ u.psi) + nu ** 2 * u.psi - Kt * np.abs(u.psi) ** (p - 2.0) * u.psi
    return RadialFunction(g, R, (0.0, 0.0))


# -------------------------------------------------------------- functionals
def f0(u: RadialFunction) -> float:
    """Unperturbed energy: (1/2)||u||_Da^2 - (1/p) integral u^p |x|^(-bp)."""
    return 0.5 * inner_Da(u, u) - integrate_volume_p(u) / u.grid.params.p


def G_K(u: RadialFunction, K: CoefficientField) -> float:
    """(1/p) integral K |u|^p |x|^(-bp)."""
    g = u.grid
    p = g.params.p
    km, kp = u.tail_decay
    vals = K.eval(g.r) * np.abs(u.psi) ** p
    return g.sphere / p * g.integrate(vals, (p * km, p * kp))


def f_eps(u: RadialFunction, K: CoefficientField, eps: float) -> float:
    return f0(u) - eps * G_K(u, K)


def homotopy_energy(u: RadialFunction, K: CoefficientField, t: float) -> float:
    """Energy whose critical points solve the homotopy problem.

    Equals f0(u) - t (G_K(u) - G_1(u)): the perturbation enters through the
    coefficient offset K - 1, so t = 0 recovers the unperturbed manifold.
    """
    g = u.grid
    p = g.params.p
    km, kp = u.tail_decay
    Kt = 1.0 + t * (K.eval(g.r) - 1.0)
    vol = g.sphere * g.integrate(Kt * np.abs(u.psi) ** p, (p * km, p * kp))
    return 0.5 * inner_Da(u, u) - vol / p


@dataclass(frozen=True)
class Functional:
    """The perturbed energy f_eps = f0 - eps * G_K."""

    params: object
    K: CoefficientField
    eps: float

    def value(self, u: RadialFunction) -> float:
        return f_eps(u, self.K, self.eps)


# ------------------------------------------------------------------ hessian
def f0_hessian_form(z: RadialFunction, v: RadialFunction, w: RadialFunction) -> float:
    """Bilinear form f0''(z)(v, w) = <v,w>_Da - (p-1) integral z^(p-2) v w |x|^(-bp)."""
    g = _check_same_grid(z, v, w)
    p = g.params.p
    rate_m = (p - 2.0) * z.tail_decay[0] + v.tail_decay[0] + w.tail_decay[0]
    rate_p = (p - 2.0) * z.tail_decay[1] + v.tail_decay[1] + w.tail_decay[1]
    pot = g.sphere * g.integrate(np.abs(z.psi) ** (p - 2.0) * v.psi * w.psi,
                                 (rate_m, rate_p))
    return inner_Da(v, w) - (p - 1.0) * pot


def _gram_solver(grid: EFGrid):
    """Cached factorization of the Dirichlet Gram matrix on the grid."""
    if grid._gram_solve is None:
        nu = grid.params.nu
        W = sp.diags(grid.quad_weights)
        G = grid.sphere * (grid.D1.T @ W @ grid.D1 + nu ** 2 * W)
        grid._gram_solve = spla.factorized(G.tocsc())
    return grid._gram_solve


def f0_hessian_apply(z: RadialFunction, v: RadialFunction) -> RadialFunction:
    """Da-Riesz representative of f0''(z)(v, .) on the grid.

    The functional is assembled in operator form, w -> integral (L v
    - (p-1) z^(p-2) v) w ds, and pulled back through the Gram matrix of the
    Dirichlet inner product (boundary flux is exponentially small for
    decaying profiles and is dropped).
    """
    g = _check_same_grid(z, v)
    p = g.params.p
    L = ef_linear_operator(g)
    strong = (L @ v.psi) - (p - 1.0) * np.abs(z.psi) ** (p - 2.0) * v.psi
    rhs = g.sphere * (g.quad_weights * strong)
    hrep = _gram_solver(g)(rhs)
    return RadialFunction(g, hrep)


# ------------------------------------------------------------------ tangent
def tangent_vector(params, grid: EFGrid, mu: float = 1.0, centered: bool = False,
                   return_raw_scale: bool = False):
    """Normalized tangent d/dmu z_mu to the solution manifold at dilation mu.

    Differentiation of the closed form: the psi representation of d/dmu z_mu
    is -(1/mu) psi_z1'(s - ln mu).  Normalized to unit Dirichlet norm; the
    raw scale is returned on request (the critical-point sets downstream are
    invariant under the normalization choice).
    """
    if mu <= 0:
        raise DomainError("mu must be positive")
    shift = math.log(mu) - (peak_s(params) if centered else 0.0)
    raw = RadialFunction(grid, -psi_z1_prime(params, grid.s - shift) / mu)
    scale = norm_Da(raw)
    unit = RadialFunction(grid, raw.psi / scale)
    if return_raw_scale:
        return unit, scale
    return unit


# ---------------------------------------------------------------- family fit
@dataclass
class FitResult:
    K0: float
    mu: float
    residual: float


def fit_instanton(u: RadialFunction, params=None) -> FitResult:
    """Best-fit member of the explicit family, least squares over (K0, mu).

    The family in psi coordinates is exp(amp) psi_z1(s - shift) with
    amp = -ln(K0)/(p-2) and shift = ln(mu) - g ln(K0); the fit runs over
    (amp, shift) and maps back.  residual is the sup mismatch relative to
    the profile maximum.
    """
    params = params or u.grid.params
    g_exp = 2.0 / ((params.p - 2.0) * (params.N - 2.0 - 2.0 * params.a))
    s = u.grid.s
    peak_val = float(psi_z1(params, peak_s(params)))

    def model(q):
        return np.exp(q[0]) * psi_z1(params, s - q[1])

    i0 = int(np.argmax(u.psi))
    amp0 = math.log(max(u.psi[i0], 1e-300) / peak_val)
    shift0 = s[i0] - peak_s(params)
    sol = least_squares(lambda q: model(q) - u.psi, x0=[amp0, shift0])
    amp, shift = sol.x
    K0 = math.exp(-(params.p - 2.0) * amp)
    mu = math.exp(shift + g_exp * math.log(K0))
    residual = float(np.max(np.abs(sol.fun)) / max(np.max(np.abs(u.psi)), 1e-300))
    return FitResult(K0=K0, mu=mu, residual=residual)
