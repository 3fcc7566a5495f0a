"""Finite-dimensional reduction of the perturbed variational problem.

For each dilation mu the correction w(mu, eps) orthogonal to the tangent
space of the solution manifold, and the multiplier eta(mu, eps), solve

    H(mu, w, eta, eps) = ( f_eps'(z_mu + w) - eta * xi_mu ,  <w, xi_mu>_Da ) = 0,

where xi_mu is the normalized tangent vector.  The perturbation enters
through the homotopy weight 1 + eps (K - 1), so eps = 0 leaves the manifold
exact and critical points of the reduced energy

    Phi_t(mu) = f_t(z_mu + w(mu, t))

give genuine solutions of the homotopy problem.  Small-parameter behavior:
|eta| + ||w|| = O(eps), Phi_t'(mu) = -t Gamma_K'(mu) + O(t^2), and at a
critical point Phi_t''(mu_t) = -t Gamma_K''(mu_t) + O(t^2), so each
nondegenerate critical point of Gamma owns exactly one critical point of
Phi_t with |mu_t - mu_bar| = O(t).

Dilations here are measured from the Kelvin-symmetric member (see the
instanton module), matching the Melnikov parametrization; for inversion
invariant coefficients this makes Phi_t(mu) = Phi_t(1/mu) exact on the grid.

Discretization: the stationarity rows are the strong Emden-Fowler residual,
the orthogonality constraint is appended as a bordered row/column (keeping
the Jacobian square and the discrete orthogonality exact), and the two end
rows carry decay-matched Robin conditions on w, which remove the spurious
growing modes of the truncated operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from .coeff import CoefficientField
from .efgrid import EFGrid, RadialFunction, inner_Da, norm_Da
from .errors import DomainError, NewtonDivergence
from .instanton import (ef_linear_operator, homotopy_energy,
                        make_centered_instanton, tangent_vector, _gram_solver)
from . import melnikov

NEWTON_TOL = 1e-11
MAX_NEWTON = 50
# spectral zero-classification threshold for the Morse pencil
ZERO_BAND = 1e-4


@dataclass
class ReductionSolution:
    mu: float
    eps: float
    w: RadialFunction
    eta: float
    newton_iters: int
    residual_norm: float
    orthogonality: float
    stationarity_norm: float

    def solution_profile(self) -> RadialFunction:
        z = make_centered_instanton(self.w.grid.params, self.w.grid, self.mu)
        return RadialFunction(self.w.grid, z.psi + self.w.psi)


def _robin_residual(grid: EFGrid, F: np.ndarray, wv: np.ndarray) -> np.ndarray:
    """Decay-matched end rows: psi' -+ nu psi = 0 applied to the correction."""
    nu = grid.params.nu
    F[0] = (grid.D1[0, :] @ wv) - nu * wv[0]
    F[-1] = (grid.D1[-1, :] @ wv) + nu * wv[-1]
    return F


def _robin_jacobian(grid: EFGrid, B, col) -> None:
    nu = grid.params.nu
    B[0, :] = grid.D1[0, :].toarray()
    B[0, 0] -= nu
    B[-1, :] = grid.D1[-1, :].toarray()
    B[-1, -1] += nu
    col[0] = 0.0
    col[-1] = 0.0


def solve_w_eta(mu: float, eps: float, K: CoefficientField, params, grid: EFGrid,
                w0: np.ndarray | None = None, eta0: float = 0.0,
                max_iter: int = MAX_NEWTON, _depth: int = 0) -> ReductionSolution:
    """Newton solve of the bordered system at (mu, eps).

    Starts from w = 0 (or the supplied guess); on divergence retries through
    continuation in eps, halving the perturbation to build a usable guess.
    """
    if mu <= 0:
        raise DomainError("mu must be positive")
    z = make_centered_instanton(params, grid, mu)
    xi = tangent_vector(params, grid, mu, centered=True)
    nu, p = params.nu, params.p
    L = ef_linear_operator(grid)
    Lxi = L @ xi.psi
    Kt = 1.0 + eps * (K.eval(grid.r) - 1.0)

    # gradient of the (tail-corrected) orthogonality constraint w -> <w, xi>
    qw = grid.quad_weights
    grow = grid.sphere * ((grid.D1.T @ (qw * (grid.D1 @ xi.psi))) + nu ** 2 * (qw * xi.psi))
    grow[0] += grid.sphere * nu * xi.psi[0]
    grow[-1] += grid.sphere * nu * xi.psi[-1]

    scale = max(1.0, float(np.max(np.abs(z.psi)) ** (p - 1.0)))
    wv = np.zeros(grid.n) if w0 is None else np.asarray(w0, float).copy()
    eta = float(eta0)

    def residuals(wv, eta):
        u = z.psi + wv
        F = (L @ u) - Kt * np.abs(u) ** (p - 2.0) * u - eta * Lxi
        _robin_residual(grid, F, wv)
        F2 = inner_Da(RadialFunction(grid, wv), xi)
        return F, F2

    last_res = math.inf
    for it in range(max_iter):
        F, F2 = residuals(wv, eta)
        res = float(np.max(np.abs(F)))
        last_res = res
        if res <= NEWTON_TOL * scale and abs(F2) <= NEWTON_TOL * max(1.0, abs(eta)):
            return _package(mu, eps, wv, eta, it, res, K, params, grid, z, xi, Kt)
        if not np.isfinite(res) or res > 1e8:
            break
        u = z.psi + wv
        B = (L - sp.diags(Kt * (p - 1.0) * np.abs(u) ** (p - 2.0))).tolil()
        col = -Lxi.copy()
        _robin_jacobian(grid, B, col)
        J = sp.bmat([[B.tocsr(), col.reshape(-1, 1)],
                     [grow.reshape(1, -1), np.array([[0.0]])]]).tocsc()
        step = spla.spsolve(J, np.concatenate([-F, [-F2]]))
        lam = 1.0
        while lam > 1e-6:
            Ft, F2t = residuals(wv + lam * step[:-1], eta + lam * step[-1])
            if np.max(np.abs(Ft)) <= (1.0 - 0.25 * lam) * res or \
                    np.max(np.abs(Ft)) <= NEWTON_TOL * scale:
                break
            lam *= 0.5
        wv = wv + lam * step[:-1]
        eta = eta + lam * step[-1]

    if _depth < 8 and abs(eps) > 1e-14:
        half = solve_w_eta(mu, eps / 2.0, K, params, grid,
                           max_iter=max_iter, _depth=_depth + 1)
        return solve_w_eta(mu, eps, K, params, grid, w0=half.w.psi,
                           eta0=half.eta, max_iter=max_iter, _depth=9)
    raise NewtonDivergence(
        f"reduction Newton stalled at mu={mu}, eps={eps}", residual=last_res)


def _package(mu, eps, wv, eta, iters, res, K, params, grid, z, xi, Kt):
    w_rf = RadialFunction(grid, wv)
    ortho = inner_Da(w_rf, xi)
    # Da-norm of the Riesz representative of f_eps'(z+w) - eta xi
    u = z.psi + wv
    L = ef_linear_operator(grid)
    strong = (L @ u) - Kt * np.abs(u) ** (params.p - 2.0) * u - eta * (L @ xi.psi)
    hrep = _gram_solver(grid)(grid.sphere * grid.quad_weights * strong)
    h_rf = RadialFunction(grid, hrep)
    return ReductionSolution(mu=mu, eps=eps, w=w_rf, eta=eta, newton_iters=iters,
                             residual_norm=res, orthogonality=ortho,
                             stationarity_norm=norm_Da(h_rf))


# ------------------------------------------------------------ reduced energy
def phi(mu: float, t: float, K: CoefficientField, params, grid: EFGrid) -> float:
    """Phi_t(mu) = f_t(z_mu + w(mu, t))."""
    sol = solve_w_eta(mu, t, K, params, grid)
    return homotopy_energy(sol.solution_profile(), K, t)


def phi_prime(mu: float, t: float, K: CoefficientField, params, grid: EFGrid,
              h_rel: float = 1e-4) -> float:
    """d Phi_t/d mu by centered differences with step h = 1e-4 mu."""
    h = h_rel * mu
    return (phi(mu + h, t, K, params, grid)
            - phi(mu - h, t, K, params, grid)) / (2.0 * h)


@dataclass
class PhiCriticalPoint:
    mu_t: float
    phi2: float
    phi2_sign: int
    nearest_gamma_cp: float | None
    offset_ratio: float | None  # |mu_t - mu_bar| / t
    solution: RadialFunction | None = None

    def to_json(self) -> dict:
        return {"mu_t": self.mu_t, "phi2": self.phi2, "phi2_sign": self.phi2_sign,
                "nearest_gamma_cp": self.nearest_gamma_cp,
                "offset_ratio": self.offset_ratio}


@dataclass
class PhiCurve:
    t: float
    mu: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    critical_points: list[PhiCriticalPoint] = field(default_factory=list)
    degenerate_flat: bool = False

    def to_json(self) -> dict:
        return {"t": self.t, "mu": list(map(float, self.mu)),
                "phi": list(map(float, self.phi)),
                "phi_prime": list(map(float, self.phi_prime)),
                "critical_points": [c.to_json() for c in self.critical_points],
                "degenerate_flat": self.degenerate_flat}


def phi_critical_points(t: float, K: CoefficientField, params, grid: EFGrid,
                        mu_range: tuple[float, float] = (0.5, 2.0),
                        n_mu: int = 17) -> PhiCurve:
    """Bracket and refine the zeros of Phi_t' over the dilation window.

    An empty list is a valid outcome (reported, not raised); a flat curve
    (constant coefficient) is flagged as degenerate instead.  Each critical
    point is paired with the nearest critical point of Gamma_K and carries
    the offset ratio |mu_t - mu_bar|/t and the reconstructed solution.
    """
    mus = np.geomspace(mu_range[0], mu_range[1], n_mu)
    phis = np.array([phi(m, t, K, params, grid) for m in mus])
    dphis = np.array([phi_prime(m, t, K, params, grid) for m in mus])
    curve = PhiCurve(t=t, mu=mus, phi=phis, phi_prime=dphis)

    if np.max(np.abs(dphis)) <= 1e-9 * max(1.0, float(np.max(np.abs(phis)))):
        curve.degenerate_flat = True
        return curve

    gamma_cps = [c.tau for c in
                 melnikov.sample_curve(K, params, grid).critical_points]
    fp = lambda m: phi_prime(m, t, K, params, grid)
    roots = []
    for i, d in enumerate(dphis):
        # a sample may land exactly on a symmetric critical point
        if d == 0.0 and not any(abs(mus[i] - r) < 1e-8 * mus[i] for r in roots):
            roots.append(float(mus[i]))
    for i in np.flatnonzero(np.sign(dphis[:-1]) * np.sign(dphis[1:]) < 0):
        root = float(brentq(fp, mus[i], mus[i + 1], xtol=1e-10))
        if not any(abs(root - r) < 1e-8 * root for r in roots):
            roots.append(root)
    for root in sorted(roots):
        h = 3e-3 * root
        phi2 = (fp(root + h) - fp(root - h)) / (2.0 * h)
        nearest = min(gamma_cps, key=lambda tau: abs(tau - root)) if gamma_cps else None
        sol = solve_w_eta(root, t, K, params, grid)
        curve.critical_points.append(PhiCriticalPoint(
            mu_t=float(root), phi2=float(phi2), phi2_sign=int(np.sign(phi2)),
            nearest_gamma_cp=nearest,
            offset_ratio=abs(root - nearest) / t if nearest else None,
            solution=sol.solution_profile()))
    return curve


# ------------------------------------------------------------------- spectra
@dataclass
class MorseReport:
    index: int
    expected_index: int | None
    eigenvalues: np.ndarray
    zero_threshold: float
    ground_alignment: float
    kernel_alignment: float
    kernel_eigenvalue: float
    projected_margin: float

    def to_json(self) -> dict:
        return {"index": self.index, "expected_index": self.expected_index,
                "eigenvalues": list(map(float, self.eigenvalues[:8])),
                "zero_threshold": self.zero_threshold,
                "ground_alignment": self.ground_alignment,
                "kernel_alignment": self.kernel_alignment,
                "kernel_eigenvalue": self.kernel_eigenvalue,
                "projected_margin": self.projected_margin}


def _morse_pencil(u_psi: np.ndarray, Kt: np.ndarray, params, grid: EFGrid):
    """Symmetric 3-point Dirichlet pencil (A, G) for the second variation.

    Counting negative directions needs a discretization whose quadratic form
    is faithful on every grid vector; wide centered first-derivative stencils
    are blind to the odd-even mode, so the spectral pencil uses the classical
    tridiagonal Laplacian on interior nodes instead.
    """
    nu, p = params.nu, params.p
    n_i = grid.n - 2
    h = grid.h
    T = sp.diags([np.full(n_i - 1, -1.0), np.full(n_i, 2.0), np.full(n_i - 1, -1.0)],
                 [-1, 0, 1]).toarray() / h ** 2
    G3 = grid.sphere * h * (T + nu ** 2 * np.eye(n_i))
    pot = (p - 1.0) * Kt[1:-1] * np.abs(u_psi[1:-1]) ** (p - 2.0)
    A3 = G3 - grid.sphere * h * np.diag(pot)
    return A3, G3


def morse_index_check(mu_t: float, t: float, K: CoefficientField, params,
                      grid: EFGrid) -> MorseReport:
    """Morse index of f_t at the reduced solution, with spectral cross-checks.

    For small t the index is 1 + [Gamma''(mu_t) > 0]; the report also carries
    the decomposition facts: a ground eigenvalue near -(p-2) aligned with the
    solution, one near-zero eigenvalue aligned with the manifold tangent, and
    a strictly positive margin on the orthogonal complement.
    """
    sol = solve_w_eta(mu_t, t, K, params, grid)
    u = sol.solution_profile()
    Kt = 1.0 + t * (K.eval(grid.r) - 1.0)
    A3, G3 = _morse_pencil(u.psi, Kt, params, grid)
    evals, evecs = sla.eigh(A3, G3)

    thr = ZERO_BAND * max(1.0, abs(float(evals[0])))
    index = int(np.sum(evals < -thr))

    z = make_centered_instanton(params, grid, mu_t)
    xi = tangent_vector(params, grid, mu_t, centered=True)

    def g_align(vec, ref):
        num = abs(vec @ (G3 @ ref))
        den = math.sqrt((vec @ (G3 @ vec)) * (ref @ (G3 @ ref)))
        return num / den

    cand = range(min(6, len(evals)))
    ground = max(cand, key=lambda i: g_align(evecs[:, i], z.psi[1:-1]))
    kern = max(cand, key=lambda i: g_align(evecs[:, i], xi.psi[1:-1]))
    rest = [i for i in range(len(evals)) if i not in (ground, kern)]
    margin = float(np.min(evals[rest]))

    expected = None
    try:
        h = 1e-3 * mu_t
        g2 = (melnikov.gamma_prime(K, mu_t + h, params, grid)
              - melnikov.gamma_prime(K, mu_t - h, params, grid)) / (2.0 * h)
        expected = 1 + (1 if g2 > 0 else 0)
    except Exception:  # degenerate coefficient data leaves it unset
        expected = None

    return MorseReport(index=index, expected_index=expected, eigenvalues=evals[:8],
                       zero_threshold=thr,
                       ground_alignment=g_align(evecs[:, ground], z.psi[1:-1]),
                       kernel_alignment=g_align(evecs[:, kern], xi.psi[1:-1]),
                       kernel_eigenvalue=float(evals[kern]),
                       projected_margin=margin)
