from emt.control.config import (
    CONTROL_MODES,
    COSTATE_MODES,
    ControlPath,
    CostatePath,
    SolverConfig,
    TrajectoryBundle,
)
from emt.control.integrate import integrate_backward, integrate_forward
from emt.control.pmp import (
    costate_rhs,
    dH_dcontrol,
    hamiltonian,
    kkt_residual,
    maximize_hamiltonian,
    state_rhs,
    water_fill,
)
from emt.control.sweep import discounted_utility, fbsm_solve, lq_steady_state, solve

__all__ = [
    "CONTROL_MODES",
    "COSTATE_MODES",
    "ControlPath",
    "CostatePath",
    "SolverConfig",
    "TrajectoryBundle",
    "costate_rhs",
    "dH_dcontrol",
    "discounted_utility",
    "fbsm_solve",
    "hamiltonian",
    "integrate_backward",
    "integrate_forward",
    "kkt_residual",
    "lq_steady_state",
    "maximize_hamiltonian",
    "solve",
    "state_rhs",
    "water_fill",
]
