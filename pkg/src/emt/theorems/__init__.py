from emt.theorems.alignment import alignment_pair, gap_series
from emt.theorems.certificate import CheckCertificate
from emt.theorems.checks import (
    attainable_levels,
    check_asymptotic_optimality,
    check_bounded_error,
    check_convergence_rate,
    check_frontier_expansion,
    check_gradient_fd,
    check_hamiltonian_dominance,
    check_holder_paths,
    check_holder_random,
    check_irreversibility,
    check_meaning_irreducibility,
    check_stationarity,
    check_utility_convergence,
    fit_log_rate,
)
from emt.theorems.employment import (
    FrontierState,
    ParetoImprovement,
    check_full_employment_grid,
    check_full_employment_value,
    check_unemployment,
    employment_gain,
    find_pareto_improvement,
)
from emt.theorems.solver_checks import (
    check_argmax_invariance,
    check_costate_equivalence,
    check_horizon_insensitivity,
    check_meaning_solver_gap,
    check_steady_state,
    costate_mode_report,
)
from emt.theorems.suite import run_suite

__all__ = [
    "CheckCertificate",
    "FrontierState",
    "ParetoImprovement",
    "alignment_pair",
    "attainable_levels",
    "check_argmax_invariance",
    "check_asymptotic_optimality",
    "check_bounded_error",
    "check_convergence_rate",
    "check_costate_equivalence",
    "check_frontier_expansion",
    "check_full_employment_grid",
    "check_full_employment_value",
    "check_gradient_fd",
    "check_hamiltonian_dominance",
    "check_holder_paths",
    "check_holder_random",
    "check_horizon_insensitivity",
    "check_irreversibility",
    "check_meaning_irreducibility",
    "check_meaning_solver_gap",
    "check_stationarity",
    "check_steady_state",
    "check_unemployment",
    "check_utility_convergence",
    "costate_mode_report",
    "employment_gain",
    "find_pareto_improvement",
    "fit_log_rate",
    "gap_series",
    "run_suite",
]
