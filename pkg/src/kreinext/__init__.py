"""kreinext: J-self-adjoint extensions with C-symmetries.

Defect-space classification and construction of the two-parameter
C-operator family for symmetric operators with deficiency indices <2,2>,
together with two worked models (a 1D Schrodinger operator with a general
zero-range interaction and a 1D Dirac operator with a point perturbation),
their bound states, resolvents, and brute-force finite-difference oracles.
"""

from .defect import (
    CParams, Classification, DeficiencySubspace, Symmetries, UMatrix,
    c_generator, c_operator, classify, compose_u, decompose_u,
    defect_elements, extension_subspace, in_extension_center,
    indefinite_product, invariance_residual, is_hypermaximal_neutral,
    is_invariant, mu_angle, projectors, r_omega, standard_symmetries,
    transition_operator, u_with_c_symmetry,
)
from .errors import (AccuracyError, NumericalFailure,
                     SingularConfigurationError, UnitarityError)
from .numerics import (DiscreteOperator, Grid, discretize_dirac,
                       discretize_schrodinger, discretize_schrodinger_separated,
                       find_root_bracketed, integrate_improper, point_spectrum,
                       resolvent_solve)
from .schrodinger import (BoundaryData, EigenvalueRecord, KreinResolventResult,
                          SpectrumResult, UpsilonBoundary, ZeroRangeCoupling,
                          bound_states, coupling_from_params,
                          coupling_from_subspace, determinant_condition,
                          determinant_roots, friedrichs_green, k_closed_form,
                          k_integral, krein_resolvent_apply, q_function,
                          upsilon_bound_states, upsilon_domain_description)
from .dirac import (DiracModel, SpinorBoundary, dirac_defect_boundary,
                    dirac_model, extension_boundary_space, gap_bound_states,
                    gap_decaying_solutions, gap_kappa,
                    upsilon_membership_dirac)

__version__ = "0.1.0"
