"""Pohozaev-type integral identities as solver validators.

For a positive solution u of the weighted equation on the ball B_sigma,

    (1/p) int_{B_sigma} (grad K . x) u^p |x|^(-bp) dx
      - (sigma/p) int_{dB_sigma} K u^p |x|^(-bp)
      = int_{dB_sigma} B(sigma, x, u, grad u),

with the boundary density (nu' = (N-2-2a)/2, radial normal derivative u')

    B = nu' |x|^(-2a) u u' - (sigma/2) |x|^(-2a) |grad u|^2
        + sigma |x|^(-2a) u'^2.

On the full space the identity collapses to int (grad K . x) u^p |x|^(-bp) = 0,
a necessary condition that detects non-solutions.  For radial profiles every
surface integral is |S^(N-1)| sigma^(N-1) times the integrand at sigma; no
surface mesh is used.  All integrals here reduce to one-dimensional
quadrature in s = ln r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .coeff import CoefficientField
from .efgrid import RadialFunction, surface_sample, unit_sphere_area
from .errors import DomainError, OutOfRange
from .instanton import make_instanton


@dataclass
class PohozaevReport:
    sigma: float
    lhs_volume: float
    lhs_surface: float
    rhs_boundary: float
    residual: float
    relative_residual: float

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "lhs_volume": self.lhs_volume,
            "lhs_surface": self.lhs_surface,
            "rhs_boundary": self.rhs_boundary,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
        }


def boundary_term_B(u: RadialFunction, sigma: float) -> float:
    """Surface integral of the boundary density B over the sphere of radius sigma.

    For radial u the -(1/2)|grad u|^2 and +(du/dnu)^2 terms combine, leaving

        |S^(N-1)| sigma^(N-1-2a) [ nu' u(sigma) u'(sigma) + (sigma/2) u'(sigma)^2 ].

    Vanishes identically on the Green's function r^(2+2a-N).
    """
    g = u.grid
    N, a = g.params.N, g.params.a
    nu = g.params.nu
    uval, du = surface_sample(u, sigma)
    density = nu * uval * du + 0.5 * sigma * du * du
    return g.sphere * sigma ** (N - 1.0 - 2.0 * a) * density


def local_identity(u: RadialFunction, K: CoefficientField, sigma: float,
                   t: float = 1.0) -> PohozaevReport:
    """Assemble both sides of the ball identity at radius sigma.

    The residual is lhs_volume - lhs_surface - rhs_boundary; it vanishes (to
    quadrature error) when u solves the homotopy problem on B_sigma and is a
    diagnostic otherwise.
    """
    g = u.grid
    p = g.params.p
    if not (math.exp(-g.S) <= sigma <= math.exp(g.S)):
        raise OutOfRange(f"sigma={sigma} outside the grid range")
    s_sigma = math.log(sigma)
    r = g.r

    # volume term: (1/p) int (grad K_t . x) u^p |x|^(-bp) over B_sigma
    integrand = t * r * K.radial_derivative(r) * np.abs(u.psi) ** p
    volume = g.sphere / p * float(CubicSpline(g.s, integrand).integrate(-g.S, s_sigma))

    # surface terms: all radial weights cancel through N - bp = p nu'
    Kt_sigma = 1.0 + t * (float(K.eval(sigma)) - 1.0)
    psi_sigma = float(u.spline()(s_sigma))
    surface = g.sphere / p * Kt_sigma * abs(psi_sigma) ** p

    boundary = boundary_term_B(u, sigma)
    residual = volume - surface - boundary
    scale = max(abs(volume), abs(surface), abs(boundary), 1e-300)
    return PohozaevReport(sigma=sigma, lhs_volume=volume, lhs_surface=surface,
                          rhs_boundary=boundary, residual=residual,
                          relative_residual=abs(residual) / scale)


def global_identity(u: RadialFunction, K: CoefficientField, t: float = 1.0) -> float:
    """Full-space volume term int (grad K_t . x) u^p |x|^(-bp) dx.

    Vanishes for true solutions with convergent integral; the returned value
    is the diagnostic (compare against :func:`global_identity_scale`).
    """
    g = u.grid
    p = g.params.p
    km, kp = u.tail_decay
    integrand = t * g.r * K.radial_derivative(g.r) * np.abs(u.psi) ** p
    return g.sphere * g.integrate(integrand, (p * km, p * kp))


def global_identity_scale(u: RadialFunction, K: CoefficientField, t: float = 1.0) -> float:
    """int |grad K_t . x| u^p |x|^(-bp) dx, the natural scale for the identity."""
    g = u.grid
    p = g.params.p
    km, kp = u.tail_decay
    integrand = abs(t) * np.abs(g.r * K.radial_derivative(g.r)) * np.abs(u.psi) ** p
    return g.sphere * g.integrate(integrand, (p * km, p * kp))


def bubble_constant_A(params, grid, K0: float = 1.0,
                      sphere_measure: float | None = None) -> float:
    """Normalization constant of the blow-up limit h = A r^(2+2a-N) + B(x):

        A = K0 / ((N-2-2a) * omega) * int z_{K0}^(p-1) |x|^(-bp) dx.

    omega is the reference sphere measure.  Conventions in the literature
    differ between the area of S^(N-1) in R^N and the area of S^N for this
    constant; the default here is the (N-1)-sphere area 2 pi^(N/2)/Gamma(N/2)
    and the choice is exposed through sphere_measure.

    The integral transforms to |S^(N-1)| int e^(nu s) psi^(p-1) ds, with
    integrable tails iff p > 2 (rates nu p at the origin, nu (p-2) outward).
    """
    p, nu = params.p, params.nu
    if p <= 2.0:
        raise DomainError("bubble constant needs p > 2 for an integrable tail")
    omega = sphere_measure if sphere_measure is not None else unit_sphere_area(params.N)
    z = make_instanton(params, grid, K0=K0, mu=1.0)
    vals = np.exp(nu * grid.s) * z.psi ** (p - 1.0)
    integral = grid.sphere * grid.integrate(vals, (nu * p, nu * (p - 2.0)))
    return K0 / ((params.N - 2.0 - 2.0 * params.a) * omega) * integral
