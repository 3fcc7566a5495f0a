"""Numerical laboratory for degenerate critical elliptic equations.

The package studies radial positive solutions of

    -div(|x|^(-2a) grad u) = K(x) u^(p-1) / |x|^(b p)   on R^N

at the critical exponent of the associated Caffarelli-Kohn-Nirenberg
inequality, together with its homotopy family in the coefficient K.  It
implements the explicit constant-coefficient solution family, Pohozaev-type
identities, the Melnikov function of the dilation manifold with the degree
formula, a finite-dimensional reduction, and a continuation solver with
blow-up diagnostics, all on a shared Emden-Fowler discretization.
"""

from .params import (ProblemParams, AdmissibilityReport, Level, Violation,
                     derive_ab, check_admissible, params_from_json)
from .coeff import (CoefficientField, LaplacianData, constant,
                    make_self_dual_bump, from_table, coeff_from_json,
                    laplacians_for)
from .efgrid import (EFGrid, RadialFunction, default_grid, unit_sphere_area,
                     integrate_volume_p, inner_Da, norm_Da, norm_E,
                     differentiate, surface_sample, to_u_formulation,
                     to_v_formulation, profile_to_csv)
from .instanton import (Instanton, Functional, FitResult, instanton_constants,
                        z1_eval, psi_z1, peak_s, kelvin_scale, make_instanton,
                        make_centered_instanton, kelvin, green, green_profile,
                        pde_residual, f0, G_K, f_eps, homotopy_energy,
                        f0_hessian_form, f0_hessian_apply, tangent_vector,
                        fit_instanton)
from .pohozaev import (PohozaevReport, boundary_term_B, local_identity,
                       global_identity, global_identity_scale,
                       bubble_constant_A)
from .melnikov import (GammaCurve, CriticalPoint, DegreeReport, gamma,
                       gamma_prime, gamma_second_at_zero, sample_curve,
                       critical_points, degree, degree_report)
from .reduction import (ReductionSolution, PhiCurve, PhiCriticalPoint,
                        MorseReport, solve_w_eta, phi, phi_prime,
                        phi_critical_points, morse_index_check)
from .solver import (NewtonResult, DiagnosticsRecord, ContinuationRun,
                     ContinuationState, RunStatus, newton_solve,
                     blowup_diagnostics, continuation)
from . import errors

__version__ = "0.1.0"
