"""Emden-Fowler discretization of radial profiles.

A radial function u on R^N is stored through

    u(r) = r^(-nu) * psi(ln r),        nu = (N - 2 - 2a)/2,

on a uniform grid in s = ln r.  The substitution removes both singular
weights exactly: with the critical bookkeeping N - b*p = p*nu one has

    integral u^p |x|^(-b p) dx   = |S^(N-1)| integral psi(s)^p ds,
    integral |x|^(-2a)|grad u|^2 = |S^(N-1)| integral (psi'^2 + nu^2 psi^2) ds,

and dilations of u become translations in s.  Integrands built from decaying
profiles fall off exponentially, so a uniform-grid composite rule plus
closed-form tail corrections (end value divided by the known decay rate) is
accurate far beyond its nominal order.

Derivative matrices are centered 6th-order finite differences with one-sided
stencils of the same order at the ends; quadrature weights are a 4th-order
end-corrected trapezoid rule (interior weights all equal, which keeps the
translation structure of dilations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import make_interp_spline

from .errors import DomainError, GridMismatch, OutOfRange
from .params import ProblemParams

FD_ORDER = 6
# 4th-order Gregory end corrections for the composite trapezoid rule
_GREGORY_EDGE = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


def unit_sphere_area(N: int) -> float:
    """Area of the unit sphere S^(N-1) in R^N: 2 pi^(N/2) / Gamma(N/2)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def fd_weights(offsets, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at offset 0.

    Solves the Vandermonde moment system sum_k w_k o_k^j = m! delta_{jm};
    offsets are in grid-spacing units, so the result scales as h^(-m).
    """
    o = np.asarray(offsets, dtype=float)
    A = np.vander(o, increasing=True).T
    rhs = np.zeros(len(o))
    rhs[m] = math.factorial(m)
    return np.linalg.solve(A, rhs)


def _deriv_matrix(n: int, h: float, m: int, order: int = FD_ORDER) -> sp.csr_matrix:
    half = (order + m) // 2
    npts = order + m + 1
    D = sp.lil_matrix((n, n))
    wc = fd_weights(np.arange(-half, half + 1), m) / h ** m
    rows = np.arange(half, n - half)
    for k, off in enumerate(range(-half, half + 1)):
        D[rows, rows + off] = wc[k]
    for i in range(half):
        D[i, :npts] = fd_weights(np.arange(npts) - i, m) / h ** m
        D[n - 1 - i, -npts:] = fd_weights(np.arange(npts) - (npts - 1 - i), m) / h ** m
    return D.tocsr()


@dataclass
class EFGrid:
    """Uniform grid on [-S, S] in s = ln r, with derivative and quadrature rules."""

    params: ProblemParams
    S: float
    n: int
    s: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.n < 64:
            raise DomainError(f"grid needs n >= 64 nodes, got {self.n}")
        min_S = 10.0 / (self.params.N - 2.0 - 2.0 * self.params.a)
        if self.S < min_S:
            raise DomainError(
                f"S={self.S} does not resolve the instanton decay; need S >= {min_S}")
        self.s = np.linspace(-self.S, self.S, self.n)
        self.h = self.s[1] - self.s[0]
        self._D1 = None
        self._D2 = None
        self._quadw = None
        self._gram_solve = None

    # cached operators -----------------------------------------------------
    @property
    def D1(self) -> sp.csr_matrix:
        if self._D1 is None:
            self._D1 = _deriv_matrix(self.n, self.h, 1)
        return self._D1

    @property
    def D2(self) -> sp.csr_matrix:
        if self._D2 is None:
            self._D2 = _deriv_matrix(self.n, self.h, 2)
        return self._D2

    @property
    def quad_weights(self) -> np.ndarray:
        if self._quadw is None:
            w = np.ones(self.n)
            w[:3] = _GREGORY_EDGE
            w[-3:] = _GREGORY_EDGE[::-1]
            self._quadw = w * self.h
        return self._quadw

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.s)

    @property
    def sphere(self) -> float:
        return unit_sphere_area(self.params.N)

    def integrate(self, values: np.ndarray, tail_rates=None) -> float:
        """Quadrature of a smooth integrand in s, with optional tail closure.

        tail_rates = (k_minus, k_plus) are the exponential decay rates of the
        integrand beyond the two ends; each contributes end_value / rate.
        Nonpositive or missing rates skip the correction on that side.
        """
        out = float(np.dot(self.quad_weights, values))
        if tail_rates is not None:
            km, kp = tail_rates
            if km is not None and km > 0:
                out += float(values[0]) / km
            if kp is not None and kp > 0:
                out += float(values[-1]) / kp
        return out

    def compatible(self, other: "EFGrid") -> bool:
        return (self.n == other.n and self.S == other.S
                and self.params == other.params)


def default_grid(params: ProblemParams, n: int = 2048, S: float | None = None) -> EFGrid:
    """Default discretization: S = 20/(N-2-2a), n = 2048."""
    if S is None:
        S = 20.0 / (params.N - 2.0 - 2.0 * params.a)
    return EFGrid(params=params, S=S, n=n)


@dataclass
class RadialFunction:
    """A radial profile u(r) = r^(-nu) psi(ln r) with decay metadata.

    tail_decay holds the expected exponential rates of psi at s -> -inf and
    s -> +inf; they drive the closed-form tail corrections in quadrature.
    The profile is a proxy member of the weighted space E whenever psi is
    bounded, since u(r)(1 + r^(2 nu)) = 2 psi(s) cosh(nu s).
    """

    grid: EFGrid
    psi: np.ndarray
    tail_decay: tuple[float, float] | None = None

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)
        if self.psi.shape != (self.grid.n,):
            raise GridMismatch(
                f"profile length {self.psi.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(self.psi)):
            raise DomainError("profile contains non-finite values")
        if self.tail_decay is None:
            nu = self.grid.params.nu
            self.tail_decay = (nu, nu)
        self._spline = None

    # views ------------------------------------------------------------------
    def u_values(self) -> np.ndarray:
        """u(r) at the grid radii."""
        return np.exp(-self.grid.params.nu * self.grid.s) * self.psi

    def envelope_ratio(self) -> np.ndarray:
        """u/omega_a at the nodes, omega_a = (1 + r^(N-2-2a))^(-1)."""
        nu = self.grid.params.nu
        return 2.0 * self.psi * np.cosh(nu * self.grid.s)

    def spline(self):
        # quintic: the boundary-flux cancellations downstream need off-node
        # values a couple of orders below the cubic error level
        if self._spline is None:
            self._spline = make_interp_spline(self.grid.s, self.psi, k=5)
        return self._spline

    def with_psi(self, psi, tail_decay=None) -> "RadialFunction":
        return RadialFunction(self.grid, psi, tail_decay or self.tail_decay)


def _check_same_grid(*profiles: RadialFunction) -> EFGrid:
    g = profiles[0].grid
    for q in profiles[1:]:
        if q.grid is not g and not g.compatible(q.grid):
            raise GridMismatch("profiles live on different grids")
    return g


# ---------------------------------------------------------------- integrals
def integrate_volume_p(u: RadialFunction) -> float:
    """integral u^p |x|^(-bp) dx = |S^(N-1)| integral psi^p ds."""
    g = u.grid
    p = g.params.p
    km, kp = u.tail_decay
    return g.sphere * g.integrate(np.abs(u.psi) ** p, (p * km, p * kp))


def inner_Da(u: RadialFunction, v: RadialFunction) -> float:
    """Weighted Dirichlet inner product integral |x|^(-2a) grad u . grad v."""
    g = _check_same_grid(u, v)
    nu = g.params.nu
    du = g.D1 @ u.psi
    dv = g.D1 @ v.psi
    ku, kv = u.tail_decay, v.tail_decay
    rates = (ku[0] + kv[0], ku[1] + kv[1])
    return g.sphere * g.integrate(du * dv + nu ** 2 * u.psi * v.psi, rates)


def norm_Da(u: RadialFunction) -> float:
    return math.sqrt(max(inner_Da(u, u), 0.0))


def norm_E(u: RadialFunction) -> float:
    """Dirichlet norm plus the weighted sup norm sup |u| (1 + r^(N-2-2a))."""
    return norm_Da(u) + float(np.max(np.abs(u.envelope_ratio())))


# -------------------------------------------------------------- derivatives
def differentiate(u: RadialFunction) -> RadialFunction:
    """du/dr as a profile: psi_der(s) = e^(-s) (psi'(s) - nu psi(s))."""
    g = u.grid
    nu = g.params.nu
    psi_der = np.exp(-g.s) * (g.D1 @ u.psi - nu * u.psi)
    km, kp = u.tail_decay
    return RadialFunction(g, psi_der, (km - 1.0, kp + 1.0))


def surface_sample(u: RadialFunction, sigma: float) -> tuple[float, float]:
    """(u(sigma), u'(sigma)) by cubic interpolation of psi in s."""
    g = u.grid
    if not (math.exp(-g.S) <= sigma <= math.exp(g.S)):
        raise OutOfRange(f"sigma={sigma} outside the grid range")
    s0 = math.log(sigma)
    spl = u.spline()
    psi0 = float(spl(s0))
    dpsi0 = float(spl(s0, 1))
    nu = g.params.nu
    w = sigma ** (-nu)
    return w * psi0, w / sigma * (dpsi0 - nu * psi0)


# ---------------------------------------------------- change of formulation
def to_u_formulation(v: RadialFunction, params: ProblemParams) -> RadialFunction:
    """u(x) = |x|^(a-alpha) v(x); in s this multiplies psi by exp((a-alpha)s)."""
    g = v.grid
    shift = params.a - params.alpha
    km, kp = v.tail_decay
    return RadialFunction(g, v.psi * np.exp(shift * g.s), (km + shift, kp - shift))


def to_v_formulation(u: RadialFunction, params: ProblemParams) -> RadialFunction:
    """Inverse of to_u_formulation; the round trip is the identity."""
    g = u.grid
    shift = params.alpha - params.a
    km, kp = u.tail_decay
    return RadialFunction(g, u.psi * np.exp(shift * g.s), (km + shift, kp - shift))


# ------------------------------------------------------------------- output
def profile_to_csv(u: RadialFunction, path) -> None:
    g = u.grid
    du_dr = differentiate(u).u_values()
    data = np.column_stack([g.s, g.r, u.psi, u.u_values(), du_dr])
    np.savetxt(path, data, delimiter=",", header="s,r,psi,u,du_dr", comments="")
