"""Forward-backward sweep on the truncated horizon and the single-need steady-state oracle."""

from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import cumulative_trapezoid

from emt.control.config import ControlPath, SolverConfig, TrajectoryBundle
from emt.control.integrate import integrate_backward, integrate_forward
from emt.control.pmp import kkt_residual, maximize_hamiltonian
from emt.economy import Economy, share
from emt.errors import InvalidParameterError

log = logging.getLogger(__name__)


def discounted_utility(times, state, w, rho) -> tuple[float, np.ndarray]:
    """Trapezoid-rule integral of exp(-rho t) U(x(t)) and its running value."""
    f = np.exp(-rho * times) * (state @ w)
    running = cumulative_trapezoid(f, times, initial=0.0)
    return float(running[-1]), running


def _zero_control(cfg: SolverConfig, n_t: int, n: int) -> np.ndarray:
    return np.zeros(n_t) if cfg.scalar else np.zeros((n_t, n))


def solve(econ: Economy, cfg: SolverConfig, x0=None, initial_control=None) -> TrajectoryBundle:
    """Run the sweep: forward state, backward co-state, maximise H, relax the control.

    Terminal co-states are zero (finite-horizon transversality surrogate). Once the
    relaxed control changes by less than ``tol`` in sup-norm, the control is replaced by
    the exact Hamiltonian maximiser and the paths are recomputed once, so the reported
    residual measures the final control against the final co-states.
    """
    times = cfg.grid()
    n = econ.n
    x0 = econ.x0 if x0 is None else np.asarray(x0, dtype=float)
    u = _zero_control(cfg, times.size, n) if initial_control is None else np.array(initial_control, dtype=float)
    zero = np.zeros(n)
    history: list[float] = []
    converged = False
    change = np.inf
    it = 0
    for it in range(1, int(cfg.max_iter) + 1):
        state, _ = integrate_forward(x0, u, times, econ, cfg.scalar)
        history.append(discounted_utility(times, state, econ.w, cfg.rho)[0])
        costate = integrate_backward(zero, state, times, econ, cfg)
        u_new = maximize_hamiltonian(state, costate.values, times, econ, cfg)
        relaxed = cfg.relaxation * u_new + (1.0 - cfg.relaxation) * u
        change = float(np.max(np.abs(relaxed - u))) if u.size else 0.0
        u = relaxed
        if change < cfg.tol:
            converged = True
            u = u_new
            break
    log.debug("sweep stopped after %d iterations (change %.3e)", it, change)
    state, clamps = integrate_forward(x0, u, times, econ, cfg.scalar)
    costate = integrate_backward(zero, state, times, econ, cfg)
    if converged:
        final = maximize_hamiltonian(state, costate.values, times, econ, cfg)
        change = float(np.max(np.abs(final - u))) if u.size else 0.0
    total, running = discounted_utility(times, state, econ.w, cfg.rho)
    resid = kkt_residual(state, u, costate.values, times, econ, cfg)
    return TrajectoryBundle(
        times=times,
        state=state,
        costate=costate,
        control=ControlPath(times, u, cfg.control_mode, cfg.y_max),
        utility_integral=total,
        running_utility=running,
        hamiltonian_residual=resid,
        iterations=it,
        converged=converged,
        final_change=change,
        utility_history=history,
        clamp_events=clamps,
        rho=cfg.rho,
    )


def fbsm_solve(scenario) -> TrajectoryBundle:
    """Solve a parsed scenario (anything exposing ``economy()`` and ``solver``)."""
    return solve(scenario.economy(), scenario.solver)


def lq_steady_state(
    w: float,
    rho: float,
    delta: float,
    phi: float = 1.0,
    y_max: float = 1.0,
    eta: float = 1.0,
    share_kind: str = "saturating",
    efficiency: float = 1.0,
) -> tuple[float, float]:
    """Closed-form steady state (x*, mu*) of one need in current-value form.

    mu* = w / (rho + delta); with mu* > 0 the Hamiltonian is increasing in output so
    Y* = y_max, and x* balances inflow against decay: Phi(Y*) = delta x*.
    """
    if not delta > 0:
        raise InvalidParameterError("no steady state without decay (delta must be positive)")
    if not rho > 0:
        raise InvalidParameterError("rho must be positive")
    mu = w / (rho + delta)
    y_star = y_max if mu > 0 else 0.0
    x = efficiency * phi * float(share(y_star, eta, share_kind)) / delta
    return x, mu
