"""Independent closed-form oracles for the test suite.

The Emden-Fowler profile of the explicit solution is
psi(s) = e^(nu s) (1 + c e^(theta s))^(-E), so every moment integral

    J(q, M) = integral e^(q s) (1 + c e^(theta s))^(-M) ds
            = (1/theta) c^(-q/theta) B(q/theta, M - q/theta),   0 < q < M theta,

reduces to a Beta function.  These values are computed independently of the
package quadrature and frozen against it.
"""

import math

from scipy.special import beta as beta_fn

from cknlab.instanton import instanton_constants


def moment_integral(params, q: float, M: float) -> float:
    """J(q, M) as above, for the closed-form instanton profile."""
    c, theta, _ = instanton_constants(params)
    x = q / theta
    assert 0.0 < x < M, "moment outside the convergent range"
    return (1.0 / theta) * c ** (-x) * beta_fn(x, M - x)


def volume_p_exact(params) -> float:
    """integral psi_z^p ds = ||z||^2 / |S^(N-1)| by the weak equation."""
    _, _, E = instanton_constants(params)
    return moment_integral(params, params.nu * params.p, E * params.p)


def second_moment_exact(params) -> float:
    """integral e^(2s) psi_z^p ds (raw, peak not centered)."""
    _, _, E = instanton_constants(params)
    return moment_integral(params, params.nu * params.p + 2.0, E * params.p)


def bubble_integral_exact(params) -> float:
    """integral e^(nu s) psi_z^(p-1) ds."""
    _, _, E = instanton_constants(params)
    return moment_integral(params, params.nu * params.p, E * (params.p - 1.0))


def centered_moment_exact(params, extra_exponent: float) -> float:
    """integral e^(q s) chi^p ds for the Kelvin-centered profile chi.

    Centering shifts s by the peak position s*, multiplying the raw moment
    by exp(-extra_exponent * s*).
    """
    c, theta, E = instanton_constants(params)
    s_star = -math.log(c) / theta
    raw = moment_integral(params, params.nu * params.p + extra_exponent,
                          E * params.p)
    return math.exp(-extra_exponent * s_star) * raw
