"""Radial coefficient fields K and their inversion K~(x) = K(x/|x|^2).

Only radial K is supported: the solver is radial, and the second-order data
that drives degree theory reduces to two radial Taylor coefficients,

    K(r)  = K(0) + c2_origin   * r^2 + o(r^2)    near r = 0,
    K~(r) = K(inf) + c2_infinity * r^2 + o(r^2)  near r = 0  (i.e. r -> inf),

with Laplacians Delta K(0) = 2N*c2_origin and Delta K~(0) = 2N*c2_infinity.
A radial field that is C^2 at the origin automatically has K'(0) = 0.

Three kinds are provided: CONSTANT, the self-dual bump

    K(r) = 1 + A*r^2/(1 + r^4),

which satisfies K~ = K and c2_origin = c2_infinity = A, and TABLE, a sampled
field interpolated by a cubic spline in log r with the c2 data estimated by
least-squares quadratic fits at the five extreme sample radii.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateCoefficient, DomainError, InterpolationError

CONSTANT = "constant"
SELF_DUAL_BUMP = "self_dual_bump"
TABLE = "table"

# fit window size for TABLE second-order data, per the smallest sampled radii
_C2_FIT_POINTS = 5


@dataclass
class LaplacianData:
    lap_origin: float
    lap_infinity: float
    sign_origin: int
    sign_infinity: int


@dataclass
class CoefficientField:
    """A radial coefficient with evaluators for K, K~ and r K'(r)."""

    kind: str
    c: float = 1.0
    A: float = 0.0
    r_samples: np.ndarray | None = None
    K_samples: np.ndarray | None = None
    A1_bound: float = 1.0
    c2_origin: float = 0.0
    c2_infinity: float = 0.0
    limit_at_infinity: float = 1.0
    # TABLE kind: smoothness of K~ at 0 cannot be verified from samples and is
    # carried as an unchecked assumption into run reports
    unchecked_smoothness_at_infinity: bool = False
    _spline: CubicSpline | None = field(default=None, repr=False)

    # ------------------------------------------------------------------ eval
    def eval(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == CONSTANT:
            return np.broadcast_to(np.float64(self.c), r.shape).copy() if r.shape else np.float64(self.c)
        if self.kind == SELF_DUAL_BUMP:
            r2 = r * r
            return 1.0 + self.A * r2 / (1.0 + r2 * r2)
        return self._eval_table(r)

    __call__ = eval

    def eval_tilde(self, r):
        """K~(r) = K(1/r); at r = 0 returns the limit of K at infinity."""
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r, dtype=float)
        zero = r == 0.0
        if np.any(zero):
            out[zero] = self.limit_at_infinity
        nz = ~zero
        if np.any(nz):
            out[nz] = self.eval(1.0 / r[nz])
        return out if out.shape else float(out)

    def radial_derivative(self, r):
        """dK/dr, so that grad K . x = r * dK/dr for radial K."""
        r = np.asarray(r, dtype=float)
        if self.kind == CONSTANT:
            return np.zeros_like(r) if r.shape else 0.0
        if self.kind == SELF_DUAL_BUMP:
            r2 = r * r
            den = (1.0 + r2 * r2)
            return self.A * (2.0 * r * den - 4.0 * r2 * r2 * r) / (den * den)
        self._require_range(r)
        return self._spline.derivative()(np.log(np.maximum(r, 1e-300)))

    # ------------------------------------------------------------ structure
    def tilde(self) -> "CoefficientField":
        """The inverted field K~; exact for every kind."""
        if self.kind == CONSTANT:
            return self
        if self.kind == SELF_DUAL_BUMP:
            return self  # the bump is self-dual: substitute r -> 1/r
        r = self.r_samples[::-1]
        return from_table(1.0 / r, self.K_samples[::-1].copy())

    def laplacians_at_poles(self, N: int) -> LaplacianData:
        """(Delta K(0), Delta K~(0)) and their signs; both must be nonzero."""
        return laplacians_for(self, N)

    def positivity_audit(self, r_grid) -> float:
        """min K over the diagnostic grid; must stay >= 1/A1_bound."""
        return float(np.min(self.eval(np.asarray(r_grid))))

    def gradient_bound(self, r_max: float = 2.0, n: int = 512) -> float:
        """sup |K'| and |K~'| over the ball of radius r_max, grid estimate."""
        r = np.linspace(1e-6, r_max, n)
        g1 = np.max(np.abs(self.radial_derivative(r)))
        tld = self.tilde()
        g2 = np.max(np.abs(tld.radial_derivative(r))) if tld.kind != CONSTANT else 0.0
        return float(max(g1, g2))

    # ---------------------------------------------------------------- table
    def _require_range(self, r):
        if self.kind != TABLE:
            return
        rmin, rmax = self.r_samples[0], self.r_samples[-1]
        r = np.atleast_1d(r)
        if np.any((r < rmin * (1 - 1e-12)) | (r > rmax * (1 + 1e-12))):
            raise InterpolationError(
                f"radius outside table range [{rmin:g}, {rmax:g}]")

    def _eval_table(self, r):
        self._require_range(r)
        return self._spline(np.log(np.maximum(r, 1e-300)))

    # ----------------------------------------------------------------- json
    def to_json(self) -> dict:
        if self.kind == CONSTANT:
            return {"kind": CONSTANT, "c": self.c}
        if self.kind == SELF_DUAL_BUMP:
            return {"kind": SELF_DUAL_BUMP, "A": self.A}
        return {"kind": TABLE, "r": list(map(float, self.r_samples)),
                "K": list(map(float, self.K_samples))}


def constant(c: float) -> CoefficientField:
    if c < 0:
        raise DomainError(f"constant coefficient must be nonnegative, got {c}")
    return CoefficientField(kind=CONSTANT, c=float(c),
                            A1_bound=(1.0 / c if c > 0 else np.inf),
                            c2_origin=0.0, c2_infinity=0.0,
                            limit_at_infinity=float(c))


def make_self_dual_bump(A: float) -> CoefficientField:
    """K(r) = 1 + A r^2/(1+r^4); positive iff A > -2 since max r^2/(1+r^4) = 1/2."""
    if A <= -2.0:
        raise DomainError(f"bump amplitude must exceed -2, got {A}")
    kmin = 1.0 + min(0.0, A / 2.0)
    return CoefficientField(kind=SELF_DUAL_BUMP, A=float(A),
                            A1_bound=1.0 / kmin,
                            c2_origin=float(A), c2_infinity=float(A),
                            limit_at_infinity=1.0)


def _fit_c2(r: np.ndarray, K: np.ndarray) -> tuple[float, float]:
    """Least-squares fit of K ~ c0 + c2 r^2 on the given samples."""
    X = np.column_stack([np.ones_like(r), r * r])
    sol, *_ = np.linalg.lstsq(X, K, rcond=None)
    return float(sol[0]), float(sol[1])


def from_table(r, K) -> CoefficientField:
    r = np.asarray(r, dtype=float)
    K = np.asarray(K, dtype=float)
    if r.ndim != 1 or r.shape != K.shape or len(r) < 2 * _C2_FIT_POINTS:
        raise DomainError("table needs matching 1-d arrays with >= 10 samples")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise DomainError("table radii must be positive and strictly increasing")
    if np.any(K <= 0):
        raise DomainError("table coefficient values must be positive")
    spline = CubicSpline(np.log(r), K)
    _, c2o = _fit_c2(r[:_C2_FIT_POINTS], K[:_C2_FIT_POINTS])
    # near infinity fit K~ = K(1/r) at its smallest radii, i.e. largest r here
    _, c2i = _fit_c2(1.0 / r[-_C2_FIT_POINTS:], K[-_C2_FIT_POINTS:])
    return CoefficientField(kind=TABLE, r_samples=r, K_samples=K,
                            A1_bound=float(1.0 / np.min(K)),
                            c2_origin=c2o, c2_infinity=c2i,
                            limit_at_infinity=float(K[-1]),
                            unchecked_smoothness_at_infinity=True,
                            _spline=spline)


def coeff_from_json(block: dict) -> CoefficientField:
    kind = block.get("kind")
    if kind == CONSTANT:
        return constant(block["c"])
    if kind == SELF_DUAL_BUMP:
        return make_self_dual_bump(block["A"])
    if kind == TABLE:
        return from_table(block["r"], block["K"])
    raise DomainError(f"unknown coefficient kind: {kind!r}")


def laplacians_for(K: CoefficientField, N: int) -> LaplacianData:
    """Laplacian data 2N*c2 at both poles; raises if either vanishes.

    Degree theory needs Delta K(0) != 0 and Delta K~(0) != 0; a vanishing
    value (for instance a constant K) is reported as DegenerateCoefficient.
    """
    lap0 = 2.0 * N * K.c2_origin
    lapi = 2.0 * N * K.c2_infinity
    if lap0 == 0.0 or lapi == 0.0:
        raise DegenerateCoefficient(
            f"Laplacian at a pole vanishes: Delta K(0)={lap0}, Delta K~(0)={lapi}")
    return LaplacianData(lap_origin=lap0, lap_infinity=lapi,
                         sign_origin=int(np.sign(lap0)),
                         sign_infinity=int(np.sign(lapi)))
