"""Nonlinear radial solver and homotopy continuation in the coefficient.

The homotopy problem at weight 1 + t (K - 1) transforms to the scalar
two-point problem

    -psi'' + nu^2 psi = (1 + t (K(e^s) - 1)) psi^(p-1)   on [-S, S],

closed at the ends either by decay-matched Robin rows psi' -+ nu psi = 0
(default; the solutions decay like e^(-nu |s|) and the truncation error is
then of finite-difference size) or by Dirichlet rows psi(+-S) = 0 (available
behind a flag; adequate only when e^(-nu S) is below the target tolerance).

Continuation walks t from small values to t = 1 with a secant predictor and
damped-Newton corrector, doubling the step after fast corrections and
halving it on failure.  Every accepted state carries a diagnostics record:
the weighted sup bounds against the envelope omega_a = (1 + r^(N-2-2a))^(-1),
the E-norm, the decay profile w_bar(r) = r^((N-2-2a)/2) u(r) (which is the
stored psi itself) with its peak and monotonicity window, the blow-up
envelope constant, and the global Pohozaev defect.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coeff import CoefficientField, laplacians_for
from .efgrid import EFGrid, RadialFunction, norm_E
from .errors import DomainError, NewtonDivergence, PositivityLoss
from .instanton import ef_linear_operator, make_centered_instanton, pde_residual
from .pohozaev import global_identity
from . import melnikov, reduction


@dataclass
class NewtonResult:
    profile: RadialFunction
    iterations: int
    residual: float


def _pt_residual(grid: EFGrid, L, Kt, psi, bc: str) -> np.ndarray:
    p = grid.params.p
    nu = grid.params.nu
    F = (L @ psi) - Kt * np.abs(psi) ** (p - 2.0) * psi
    if bc == "robin":
        F[0] = (grid.D1[0, :] @ psi) - nu * psi[0]
        F[-1] = (grid.D1[-1, :] @ psi) + nu * psi[-1]
    else:
        F[0] = psi[0]
        F[-1] = psi[-1]
    return F


def newton_solve(t: float, K: CoefficientField, u0: RadialFunction,
                 tol: float = 1e-11, max_iter: int = 40,
                 bc: str = "robin") -> NewtonResult:
    """Damped Newton iteration for the homotopy problem at parameter t.

    Converged when the sup residual falls below tol with the profile positive
    on the interior; raises NewtonDivergence (with the last residual) or
    PositivityLoss (with the first nonpositive location).
    """
    if bc not in ("robin", "dirichlet"):
        raise DomainError(f"unknown boundary closure {bc!r}")
    grid = u0.grid
    p, nu = grid.params.p, grid.params.nu
    L = ef_linear_operator(grid)
    Kt = 1.0 + t * (K.eval(grid.r) - 1.0)
    psi = u0.psi.copy()
    res = math.inf
    for it in range(max_iter):
        F = _pt_residual(grid, L, Kt, psi, bc)
        res = float(np.max(np.abs(F)))
        if res <= tol:
            return _finish(grid, psi, it, res)
        if not np.isfinite(res) or res > 1e8:
            raise NewtonDivergence(f"Newton blow-up at t={t}", residual=res)
        J = (L - sp.diags(Kt * (p - 1.0) * np.abs(psi) ** (p - 2.0))).tolil()
        if bc == "robin":
            J[0, :] = grid.D1[0, :].toarray()
            J[0, 0] -= nu
            J[-1, :] = grid.D1[-1, :].toarray()
            J[-1, -1] += nu
        else:
            J[0, :] = 0.0
            J[0, 0] = 1.0
            J[-1, :] = 0.0
            J[-1, -1] = 1.0
        step = spla.spsolve(J.tocsc(), -F)
        lam = 1.0
        while lam > 1e-8:
            Ft = _pt_residual(grid, L, Kt, psi + lam * step, bc)
            if np.max(np.abs(Ft)) <= (1.0 - 0.25 * lam) * res or \
                    np.max(np.abs(Ft)) <= tol:
                break
            lam *= 0.5
        psi = psi + lam * step
    raise NewtonDivergence(f"Newton stalled at t={t} after {max_iter} iterations",
                           residual=res)


def _finish(grid: EFGrid, psi: np.ndarray, iters: int, res: float) -> NewtonResult:
    interior = psi[1:-1]
    if np.any(interior <= 0.0):
        loc = grid.s[1:-1][int(np.argmin(interior))]
        raise PositivityLoss(f"converged iterate nonpositive near s={loc:.3f}",
                             location=float(loc))
    return NewtonResult(profile=RadialFunction(grid, psi),
                        iterations=iters, residual=res)


# ---------------------------------------------------------------- diagnostics
@dataclass
class DiagnosticsRecord:
    norm_E: float
    sup_ratio: float
    inf_ratio: float
    sandwich_C: float
    wbar_peak_s: float
    wbar_monotone_after_peak: bool
    envelope_C: float
    pohozaev_global: float

    def to_json(self) -> dict:
        return {
            "norm_E": self.norm_E,
            "sup_ratio": self.sup_ratio,
            "inf_ratio": self.inf_ratio,
            "sandwich_C": self.sandwich_C,
            "wbar_peak_s": self.wbar_peak_s,
            "wbar_monotone_after_peak": self.wbar_monotone_after_peak,
            "envelope_C": self.envelope_C,
            "pohozaev_global": self.pohozaev_global,
        }


def _peak_position(grid: EFGrid, psi: np.ndarray) -> tuple[int, float]:
    """Peak node and its sub-grid refinement by a parabola on ln psi."""
    i = int(np.argmax(psi))
    if 0 < i < grid.n - 1 and psi[i - 1] > 0 and psi[i + 1] > 0:
        f0, f1, f2 = np.log(psi[i - 1]), np.log(psi[i]), np.log(psi[i + 1])
        denom = f0 - 2.0 * f1 + f2
        if denom < 0:
            return i, grid.s[i] + 0.5 * grid.h * (f0 - f2) / denom
    return i, float(grid.s[i])


def blowup_diagnostics(u: RadialFunction, K: CoefficientField | None = None,
                       t: float = 1.0, window_floor: float = 1e-8) -> DiagnosticsRecord:
    """Decay and blow-up monitors for a positive profile.

    w_bar(r) = r^((N-2-2a)/2) u_bar(r) is the stored psi; its strict decrease
    past the peak is the discrete isolated-simple test, checked down to the
    window where psi exceeds window_floor times its maximum.  envelope_C is
    the blow-up upper-bound constant sup_{r >= r_peak} u(r) max(u) r^(N-2-2a).
    """
    grid = u.grid
    nu = grid.params.nu
    ratio = u.envelope_ratio()
    sup_ratio = float(np.max(ratio))
    inf_ratio = float(np.min(ratio))
    sandwich = max(sup_ratio, 1.0 / inf_ratio) if inf_ratio > 0 else math.inf

    ipk, s_peak = _peak_position(grid, u.psi)
    tail = u.psi[ipk:]
    window = tail >= window_floor * u.psi[ipk]
    last = int(np.max(np.flatnonzero(window))) if np.any(window) else 0
    monotone = bool(np.all(np.diff(tail[: last + 1]) < 0.0)) if last > 0 else False

    u_vals = u.u_values()
    u_max = float(np.max(u_vals))
    envelope = u_max * float(np.max(np.exp(nu * grid.s[ipk:]) * u.psi[ipk:]))

    poho = global_identity(u, K, t) if K is not None else math.nan
    return DiagnosticsRecord(norm_E=norm_E(u), sup_ratio=sup_ratio,
                             inf_ratio=inf_ratio, sandwich_C=sandwich,
                             wbar_peak_s=s_peak,
                             wbar_monotone_after_peak=monotone,
                             envelope_C=envelope, pohozaev_global=poho)


# --------------------------------------------------------------- continuation
class RunStatus(enum.Enum):
    COMPLETED = "COMPLETED"
    NEWTON_FAIL = "NEWTON_FAIL"
    BLOWUP_SUSPECTED = "BLOWUP_SUSPECTED"


@dataclass
class ContinuationState:
    t: float
    profile: RadialFunction
    newton_iters: int
    residual: float
    diagnostics: DiagnosticsRecord


@dataclass
class ContinuationRun:
    K: CoefficientField
    t_schedule: np.ndarray
    states: list[ContinuationState] = field(default_factory=list)
    status: RunStatus = RunStatus.COMPLETED

    @property
    def final(self) -> ContinuationState:
        return self.states[-1]

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "schedule": list(map(float, self.t_schedule)),
            "accepted_t": [s.t for s in self.states],
            "steps": [
                {"t": s.t, "newton_iters": s.newton_iters, "residual": s.residual,
                 "diagnostics": s.diagnostics.to_json()}
                for s in self.states
            ],
        }


def _reduction_seed(K, params, grid, t0: float) -> RadialFunction:
    """Seed from the reduction at the Melnikov-selected dilation."""
    try:
        cps = melnikov.sample_curve(K, params, grid).critical_points
        mu0 = next((c.tau for c in cps if c.nondegenerate), 1.0)
    except Exception:
        mu0 = 1.0
    try:
        sol = reduction.solve_w_eta(mu0, t0, K, params, grid)
        return sol.solution_profile()
    except NewtonDivergence:
        return make_centered_instanton(params, grid, mu0)


def continuation(K: CoefficientField, schedule, params, grid: EFGrid,
                 seed: RadialFunction | None = None, tol: float = 1e-11,
                 min_step: float = 1e-6, bc: str = "robin") -> ContinuationRun:
    """Predictor-corrector continuation through the given t checkpoints.

    Coefficients with vanishing Laplacian data (constant K in particular) are
    rejected up front: the degree machinery that predicts the relevance of
    the run is undefined for them.  Step control: accept and double the step
    after a corrector with at most 8 iterations, halve on failure down to
    min_step; a tenfold jump of the envelope ratio between accepted states
    flags BLOWUP_SUSPECTED and archives the decay profile with the state.
    """
    schedule = np.asarray(schedule, dtype=float)
    if schedule.ndim != 1 or len(schedule) < 2 or np.any(np.diff(schedule) <= 0):
        raise DomainError("schedule must be increasing with at least two entries")
    if not (0.0 < schedule[0] and abs(schedule[-1] - 1.0) < 1e-12):
        raise DomainError("schedule must live in (0, 1] and end at t = 1")
    laplacians_for(K, params.N)  # reject degenerate coefficient data up front

    run = ContinuationRun(K=K, t_schedule=schedule)
    t0 = float(schedule[0])
    u = seed if seed is not None else _reduction_seed(K, params, grid, t0)
    try:
        result = newton_solve(t0, K, u, tol=tol, bc=bc)
    except (NewtonDivergence, PositivityLoss):
        run.status = RunStatus.NEWTON_FAIL
        return run

    def accept(t, result):
        diag = blowup_diagnostics(result.profile, K, t)
        run.states.append(ContinuationState(
            t=t, profile=result.profile, newton_iters=result.iterations,
            residual=float(np.max(np.abs(pde_residual(result.profile, K, t).psi))),
            diagnostics=diag))
        return diag

    accept(t0, result)
    pending = list(schedule[1:])
    dt = float(pending[0] - t0)
    t = t0
    while pending:
        target = pending[0]
        tn = min(t + dt, target)
        if len(run.states) >= 2:
            ua, ub = run.states[-2], run.states[-1]
            frac = (tn - ub.t) / (ub.t - ua.t)
            pred = RadialFunction(grid, ub.profile.psi
                                  + frac * (ub.profile.psi - ua.profile.psi))
        else:
            pred = run.states[-1].profile
        try:
            result = newton_solve(tn, K, pred, tol=tol, bc=bc)
        except (NewtonDivergence, PositivityLoss):
            dt *= 0.5
            if dt < min_step:
                run.status = RunStatus.NEWTON_FAIL
                return run
            continue
        prev = run.states[-1].diagnostics.sup_ratio
        diag = accept(tn, result)
        t = tn
        if tn >= target - 1e-15:
            pending.pop(0)
        if diag.sup_ratio > 10.0 * prev:
            run.status = RunStatus.BLOWUP_SUSPECTED
            return run
        if result.iterations <= 8:
            dt = min(dt * 2.0, 0.25)
    run.status = RunStatus.COMPLETED
    return run
