"""Exponent algebra for the weighted critical elliptic problem.

The problem on R^N,

    -div(|x|^(-2*alpha) grad v) - lam*v/|x|^(2(1+alpha)) = K(x) v^(p-1)/|x|^(beta*p),

with alpha < (N-2)/2, alpha <= beta < alpha+1 and lam < ((N-2-2*alpha)/2)^2,
is equivalent, through u(x) = |x|^(a-alpha) v(x), to the lam-free form

    -div(|x|^(-2a) grad u) = K(x) u^(p-1)/|x|^(b*p),

where

    a = (N-2)/2 - sqrt(((N-2-2*alpha)/2)^2 - lam),      b = beta + a - alpha,

and the critical exponent p = 2N/(N - 2(1+alpha-beta)) = 2N/(N - 2(1+a-b)) is
invariant under the change of variables.  This module computes and validates
the full exponent record; downstream modules never recompute exponents.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ConstraintViolation

# tuples closer than this to a constraint boundary are flagged "borderline":
# quadrature and decay constants degrade before the inequality actually fails
BORDERLINE_SLACK = 1e-12


class Level(enum.Enum):
    CKN_BASIC = "CKN_BASIC"
    COMPACTNESS = "COMPACTNESS"
    EXISTENCE = "EXISTENCE"


@dataclass(frozen=True)
class ProblemParams:
    """Immutable exponent record; construct through :func:`derive_ab`."""

    N: int
    alpha: float
    beta: float
    lam: float
    a: float
    b: float
    p: float

    @property
    def nu(self) -> float:
        """Half the effective decay exponent, (N-2-2a)/2."""
        return 0.5 * (self.N - 2.0 - 2.0 * self.a)

    @property
    def nu_alpha(self) -> float:
        """(N-2-2*alpha)/2, the analogue of nu in the original formulation."""
        return 0.5 * (self.N - 2.0 - 2.0 * self.alpha)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lam,
            "a": self.a,
            "b": self.b,
            "p": self.p,
        }


@dataclass
class Violation:
    name: str
    detail: str
    borderline: bool = False

    def to_json(self) -> dict:
        return {"name": self.name, "detail": self.detail, "borderline": self.borderline}


@dataclass
class AdmissibilityReport:
    level: Level
    passed: bool
    violations: list[Violation] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "level": self.level.value,
            "passed": self.passed,
            "violations": [v.to_json() for v in self.violations],
        }


def _strict(margin: float, name: str, detail: str, scale: float = 1.0) -> Violation | None:
    """Strict inequality `margin > 0`, with borderline tagging near the boundary."""
    tol = BORDERLINE_SLACK * max(1.0, abs(scale))
    if margin <= 0.0:
        return Violation(name, detail)
    if margin <= tol:
        return Violation(name, detail + " (borderline)", borderline=True)
    return None


def _basic_violations(N: int, alpha: float, beta: float, lam: float) -> list[Violation]:
    v = []
    if N < 3 or int(N) != N:
        v.append(Violation("N>=3", f"N={N} is not an integer dimension >= 3"))
        return v
    nu_alpha = 0.5 * (N - 2 - 2 * alpha)
    checks = [
        _strict((N - 2) / 2 - alpha, "alpha<(N-2)/2",
                f"alpha={alpha} vs (N-2)/2={(N - 2) / 2}"),
        Violation("alpha<=beta", f"beta={beta} < alpha={alpha}") if beta < alpha else None,
        _strict(alpha + 1 - beta, "beta<alpha+1",
                f"beta={beta} vs alpha+1={alpha + 1}"),
        _strict(nu_alpha ** 2 - lam, "lambda<((N-2-2a)/2)^2",
                f"lambda={lam} vs bound={nu_alpha ** 2}", scale=nu_alpha ** 2),
    ]
    v.extend(c for c in checks if c is not None)
    return v


def derive_ab(N: int, alpha: float, beta: float, lam: float) -> ProblemParams:
    """Populate the full exponent record from the primitive parameters.

    Raises ConstraintViolation naming the first failed inequality.
    """
    violations = _basic_violations(N, alpha, beta, lam)
    hard = [v for v in violations if not v.borderline]
    if hard:
        raise ConstraintViolation(f"{hard[0].name}: {hard[0].detail}")
    a = (N - 2) / 2 - math.sqrt((0.5 * (N - 2 - 2 * alpha)) ** 2 - lam)
    b = beta + a - alpha
    p = 2.0 * N / (N - 2.0 * (1.0 + alpha - beta))
    return ProblemParams(N=int(N), alpha=float(alpha), beta=float(beta),
                         lam=float(lam), a=a, b=b, p=p)


def check_admissible(params: ProblemParams, level: Level) -> AdmissibilityReport:
    """Check the constraint set of the given level; every failure is listed."""
    N, alpha, beta, lam = params.N, params.alpha, params.beta, params.lam
    a, p = params.a, params.p
    nu_alpha = params.nu_alpha
    violations = _basic_violations(N, alpha, beta, lam)

    if level in (Level.COMPACTNESS, Level.EXISTENCE):
        checks = [
            Violation("lambda>=-alpha(N-2-alpha)",
                      f"lambda={lam} vs {-alpha * (N - 2 - alpha)}")
            if lam < -alpha * (N - 2 - alpha) else None,
            _strict(lam - (nu_alpha ** 2 - 1.0), "lambda>((N-2-2a)/2)^2-1",
                    f"lambda={lam} vs {(nu_alpha ** 2 - 1.0)}"),
            _strict(beta - alpha, "beta>alpha", f"beta={beta}, alpha={alpha}"),
            _strict(p - 2.0 / math.sqrt(max(nu_alpha ** 2 - lam, 1e-300)),
                    "p>4/(N-2-2a)",
                    f"p={p} vs 4/(N-2-2a)={4.0 / (N - 2 - 2 * a)}"),
            # consequences of the above, re-checked on the derived exponents
            Violation("a>=0", f"a={a}") if a < 0 else None,
            _strict(a - (N - 4) / 2, "a>(N-4)/2", f"a={a} vs (N-4)/2={(N - 4) / 2}"),
            _strict((N - 2) / 2 - a, "a<(N-2)/2", f"a={a} vs (N-2)/2={(N - 2) / 2}"),
            _strict(2.0 * N / (N - 2.0) - p, "p<2N/(N-2)",
                    f"p={p} vs 2N/(N-2)={2.0 * N / (N - 2.0)}"),
        ]
        violations.extend(v for v in checks if v is not None)

    if level is Level.EXISTENCE:
        viol = _strict(p - 3.0, "p>3", f"p={p}")
        if viol is not None:
            violations.append(viol)

    return AdmissibilityReport(level=level, passed=not violations, violations=violations)


def params_from_json(block: dict) -> ProblemParams:
    """Parse a problem block; derived fields are emitted but never accepted."""
    required = {"N", "alpha", "beta", "lambda"}
    missing = required - set(block)
    if missing:
        raise ConstraintViolation(f"problem block missing keys: {sorted(missing)}")
    forbidden = {"a", "b", "p"} & set(block)
    if forbidden:
        raise ConstraintViolation(
            f"derived fields {sorted(forbidden)} may not appear in config files")
    return derive_ab(block["N"], block["alpha"], block["beta"], block["lambda"])
