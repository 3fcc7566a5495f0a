"""Melnikov function of the dilation family, its critical points, and degree.

The reduced energy along the solution manifold is

    Gamma_K(tau) = (1/p) int K(x) z_tau^p |x|^(-bp) dx
                 = (|S^(N-1)|/p) int K(tau e^s) chi(s)^p ds,

where chi is the Kelvin-centered instanton profile (even in s), so that the
inversion identity Gamma_K(tau) = Gamma_{K~}(1/tau) holds exactly, node for
node, on a symmetric grid.  Endpoint behavior: Gamma_K extends continuously
to tau = 0 with Gamma_K'(0) = 0 and

    Gamma_K''(0) = Delta K(0)/(N p) * int |x|^2 z^p |x|^(-bp) dx,

evaluated here on the centered profile (which absorbs the reparametrization
Jacobian of the dilation variable).  Critical points of Gamma govern which
dilations persist under the perturbation, and the solution-operator degree is

    -(sgn Delta K(0) + sgn Delta K~(0)) / 2,

cross-validated against the endpoint signs of Gamma' and the signed count of
its nondegenerate critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coeff import CoefficientField, laplacians_for
from .efgrid import EFGrid
from .errors import DomainError
from .instanton import peak_s, psi_z1

# relative thresholds, all against scale = max |Gamma| over the sampled range
FLAT_TOL = 1e-10
DEGENERATE_TOL = 1e-6


@dataclass
class CriticalPoint:
    tau: float
    gamma2: float
    nondegenerate: bool

    def to_json(self) -> dict:
        return {"tau": self.tau, "gamma2": self.gamma2,
                "nondegenerate": self.nondegenerate}


@dataclass
class GammaCurve:
    tau: np.ndarray
    gamma: np.ndarray
    gamma_prime: np.ndarray
    critical_points: list[CriticalPoint] = field(default_factory=list)
    gamma_at_zero: float = math.nan
    scale: float = math.nan
    degenerate_flat: bool = False

    def to_json(self) -> dict:
        return {
            "tau": list(map(float, self.tau)),
            "gamma": list(map(float, self.gamma)),
            "gamma_prime": list(map(float, self.gamma_prime)),
            "critical_points": [c.to_json() for c in self.critical_points],
            "gamma_at_zero": self.gamma_at_zero,
            "scale": self.scale,
            "degenerate_flat": self.degenerate_flat,
        }


def _chi_p(params, grid: EFGrid) -> np.ndarray:
    return psi_z1(params, grid.s + peak_s(params)) ** params.p


def gamma(K: CoefficientField, tau: float, params, grid: EFGrid,
          chi_p: np.ndarray | None = None) -> float:
    """Gamma_K at dilation tau (measured from the Kelvin-symmetric member)."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    p, nu = params.p, params.nu
    if chi_p is None:
        chi_p = _chi_p(params, grid)
    vals = K.eval(tau * grid.r) * chi_p
    return grid.sphere / p * grid.integrate(vals, (nu * p, nu * p))


def gamma_prime(K: CoefficientField, tau: float, params, grid: EFGrid,
                chi_p: np.ndarray | None = None) -> float:
    """d Gamma_K/d tau, by differentiating under the integral sign."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    p, nu = params.p, params.nu
    if chi_p is None:
        chi_p = _chi_p(params, grid)
    r_arg = tau * grid.r
    vals = r_arg * K.radial_derivative(r_arg) * chi_p
    return grid.sphere / (p * tau) * grid.integrate(vals, (nu * p, nu * p))


def gamma_second_at_zero(K: CoefficientField, params, grid: EFGrid) -> float:
    """Curvature of Gamma_K at tau = 0 from the second-order data of K.

    The s-integrand e^(2s) chi^p decays outward only when 2 < p(N-2-2a)/2
    (equivalently 2 < N - bp); the exponent condition is checked before
    integrating and the slow outward rate is closed with its tail term.
    """
    p, nu, N = params.p, params.nu, params.N
    if not 2.0 < nu * p:
        raise DomainError(
            f"moment integral diverges: need 2 < p(N-2-2a)/2, got {nu * p}")
    lap = laplacians_for(K, N)
    chi_p = _chi_p(params, grid)
    moment = grid.sphere * grid.integrate(np.exp(2.0 * grid.s) * chi_p,
                                          (nu * p + 2.0, nu * p - 2.0))
    return lap.lap_origin / (N * p) * moment


def sample_curve(K: CoefficientField, params, grid: EFGrid,
                 tau_range: tuple[float, float] = (1e-3, 1e3),
                 n_tau: int = 241) -> GammaCurve:
    """Sample Gamma and Gamma' on a log grid and refine the critical points."""
    if n_tau < 200:
        raise DomainError("tau sampling needs at least 200 points")
    chi_p = _chi_p(params, grid)
    taus = np.geomspace(tau_range[0], tau_range[1], n_tau)
    gam = np.array([gamma(K, t, params, grid, chi_p) for t in taus])
    gpr = np.array([gamma_prime(K, t, params, grid, chi_p) for t in taus])
    scale = float(np.max(np.abs(gam)))
    curve = GammaCurve(tau=taus, gamma=gam, gamma_prime=gpr, scale=scale,
                       gamma_at_zero=gamma(K, 1e-4, params, grid, chi_p))
    if np.max(np.abs(gpr)) <= FLAT_TOL * scale:
        curve.degenerate_flat = True  # constant reduced energy, no isolated points
        return curve

    gp = lambda t: gamma_prime(K, t, params, grid, chi_p)
    for i in np.flatnonzero(np.sign(gpr[:-1]) * np.sign(gpr[1:]) < 0):
        root = brentq(gp, taus[i], taus[i + 1], xtol=1e-14, rtol=1e-14)
        h = 1e-3 * root
        gamma2 = (gp(root + h) - gp(root - h)) / (2.0 * h)
        curve.critical_points.append(CriticalPoint(
            tau=float(root), gamma2=float(gamma2),
            nondegenerate=abs(gamma2) > DEGENERATE_TOL * scale))
    return curve


def critical_points(K: CoefficientField, params, grid: EFGrid,
                    tau_range: tuple[float, float] = (1e-3, 1e3),
                    n_tau: int = 241) -> list[CriticalPoint]:
    """Refined critical points of Gamma_K over the sampling window."""
    return sample_curve(K, params, grid, tau_range, n_tau).critical_points


@dataclass
class DegreeReport:
    value: int
    sign_origin: int
    sign_infinity: int
    endpoint_degree: int | None = None
    critical_point_degree: int | None = None
    consistent: bool | None = None

    def to_json(self) -> dict:
        return {"value": self.value, "sign_origin": self.sign_origin,
                "sign_infinity": self.sign_infinity,
                "endpoint_degree": self.endpoint_degree,
                "critical_point_degree": self.critical_point_degree,
                "consistent": self.consistent}


def degree_report(K: CoefficientField, params, grid: EFGrid | None = None,
                  tau_range: tuple[float, float] = (1e-3, 1e3)) -> DegreeReport:
    """Degree of the solution operator, with optional sampling cross-checks.

    The formula value is -(sgn Delta K(0) + sgn Delta K~(0))/2.  With a grid,
    two independent counts are added: the endpoint-sign degree of Gamma'
    (its signs at the window ends encode sgn Delta K(0) and -sgn Delta K~(0))
    and the sum of sgn Gamma'' over the nondegenerate critical points.
    """
    lap = laplacians_for(K, params.N)
    value = -(lap.sign_origin + lap.sign_infinity) // 2
    report = DegreeReport(value=value, sign_origin=lap.sign_origin,
                          sign_infinity=lap.sign_infinity)
    if grid is not None:
        curve = sample_curve(K, params, grid, tau_range=tau_range)
        if not curve.degenerate_flat:
            s_left = int(np.sign(curve.gamma_prime[0]))
            s_right = int(np.sign(curve.gamma_prime[-1]))
            report.endpoint_degree = (s_right - s_left) // 2
            report.critical_point_degree = sum(
                int(np.sign(c.gamma2)) for c in curve.critical_points
                if c.nondegenerate)
            report.consistent = (report.endpoint_degree == value
                                 == report.critical_point_degree)
    return report


def degree(K: CoefficientField, params, grid: EFGrid | None = None) -> int:
    """-(sgn Delta K(0) + sgn Delta K~(0))/2 in {-1, 0, +1}."""
    return degree_report(K, params, grid).value
