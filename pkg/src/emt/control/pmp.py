"""Pontryagin system: state and co-state dynamics, the Hamiltonian and its maximisation.

Functions here take an :class:`~emt.economy.Economy` plus explicit arrays. Most accept
either a single time (state shape ``(N,)``) or a stacked path (shape ``(T, N)``).
"""

from __future__ import annotations

import numpy as np

from emt.control.config import COSTATE_MODES, SolverConfig
from emt.economy import Economy, share, share_derivative
from emt.errors import ContractError, DimensionError


def _sat(x) -> np.ndarray:
    return np.asarray(x.sat if hasattr(x, "sat") else x, dtype=float)


def _check(econ: Economy, sat: np.ndarray) -> None:
    if sat.shape[-1] != econ.n:
        raise DimensionError(f"state has {sat.shape[-1]} entries, economy has {econ.n} needs")


def state_rhs(x, ctrl, t, econ: Economy, scalar: bool) -> np.ndarray:
    """dx_i/dt = Phi_i(ctrl) - delta_i x_i."""
    sat = _sat(x)
    _check(econ, sat)
    return econ.inflow(t, sat, ctrl, scalar) - econ.delta * sat


def hamiltonian(x, ctrl, costate, t, econ: Economy, cfg: SolverConfig, mode: str = "present_value"):
    """exp(-rho t) U(x) + sum_i lambda_i (Phi_i - delta_i x_i) with present-value prices."""
    if mode != "present_value":
        raise ContractError(f"hamiltonian needs present-value co-states, got {mode!r}")
    sat = _sat(x)
    _check(econ, sat)
    lam = np.asarray(costate, dtype=float)
    disc = np.exp(-cfg.rho * np.asarray(t, dtype=float))
    util = sat @ econ.w
    rates = state_rhs(sat, ctrl, t, econ, cfg.scalar)
    return disc * util + np.sum(lam * rates, axis=-1)


def costate_rhs(x, costate, t, econ: Economy, cfg: SolverConfig, mode: str | None = None):
    """Time derivative of the co-state under one of the three conventions.

    present_value:  d lambda/dt = -exp(-rho t) w + delta lambda
    current_value:  d mu/dt     = (rho + delta) mu - w
    paper_literal:  d lambda/dt = rho lambda - exp(-rho t) w + delta lambda
    """
    mode = cfg.costate_mode if mode is None else mode
    p = np.asarray(costate, dtype=float)
    dU = econ.w  # linear utility: dU/dx_i = w_i regardless of x
    if mode == "current_value":
        return (cfg.rho + econ.delta) * p - dU
    disc = np.exp(-cfg.rho * np.asarray(t, dtype=float))
    if np.ndim(disc):
        disc = disc[..., None]
    if mode == "present_value":
        return -disc * dU + econ.delta * p
    if mode == "paper_literal":
        return cfg.rho * p - disc * dU + econ.delta * p
    raise ContractError(f"unknown costate mode {mode!r}; expected one of {COSTATE_MODES}")


def marginal_values(x, costate, t, econ: Economy) -> np.ndarray:
    """c_i = p_i a(t) phi_i on passing needs, zero elsewhere (p in any convention)."""
    sat = _sat(x)
    passing, _ = econ.passing(sat)
    a = np.asarray(econ.efficiency(t), dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return np.where(passing, np.asarray(costate, dtype=float) * a * econ.phi, 0.0)


def dH_dcontrol(x, ctrl, costate, t, econ: Economy, scalar: bool):
    """Analytic gradient of the Hamiltonian with respect to the control.

    Scalar mode returns d H / d Y (output split by the weight priority); allocation
    mode returns the per-need vector d H / d y_i.
    """
    sat = _sat(x)
    _check(econ, sat)
    c = marginal_values(sat, costate, t, econ)
    ctrl = np.asarray(ctrl, dtype=float)
    if scalar:
        _, prio = econ.passing(sat)
        y = ctrl[..., None] * prio
        return np.sum(c * prio * share_derivative(y, econ.eta, econ.share_kind), axis=-1)
    return c * share_derivative(ctrl, econ.eta, econ.share_kind)


# ---------------------------------------------------------------------------
# maximisation


def water_fill(c: np.ndarray, budget: float, eta: float = 1.0, kind: str = "saturating") -> np.ndarray:
    """Maximise sum_i c_i s(y_i) subject to y >= 0, sum y <= budget, row by row.

    For the saturating share the marginal value c_i eta exp(-eta y_i) is equalised on the
    active set, which is found greedily over needs sorted by c_i. Rows with no positive
    c get zero allocation.
    """
    c = np.atleast_2d(np.asarray(c, dtype=float))
    T, N = c.shape
    y = np.zeros_like(c)
    if kind == "linear":
        best = c.max(axis=1, keepdims=True)
        ties = (c >= best - 1e-12 * np.abs(best)) & (best > 0)
        cnt = ties.sum(axis=1, keepdims=True)
        return np.where(ties, budget / np.maximum(cnt, 1), 0.0)
    with np.errstate(divide="ignore"):
        logv = np.where(c > 0, np.log(np.where(c > 0, c, 1.0) * eta), -np.inf)
    order = np.argsort(-logv, axis=1, kind="stable")
    sl = np.take_along_axis(logv, order, axis=1)
    k = np.arange(1, N + 1)
    finite = np.isfinite(sl)
    csum = np.cumsum(np.where(finite, sl, 0.0), axis=1)
    level = (csum - eta * budget) / k  # log of the water level with top-k active
    ok = finite & (sl > level)
    # active set is the longest prefix where the k-th need clears the level
    kstar = np.where(ok.any(axis=1), N - np.argmax(ok[:, ::-1], axis=1), 0)
    rows = np.arange(T)
    lv = np.where(kstar > 0, level[rows, np.maximum(kstar - 1, 0)], np.inf)
    ys = np.where(finite & (np.arange(N) < kstar[:, None]), (sl - lv[:, None]) / eta, 0.0)
    ys = np.maximum(ys, 0.0)
    np.put_along_axis(y, order, ys, axis=1)
    return y


def _scalar_argmax_row(cp: np.ndarray, prio: np.ndarray, y_max: float, eta: float, kind: str) -> float:
    """Bracket-and-bisect search of H(Y) = sum c_i s(pi_i Y) on [0, y_max]."""

    def H(Y):
        return float(np.sum(cp * share(prio * Y, eta, kind)))

    def g(Y):
        return float(np.sum(cp * prio * share_derivative(prio * Y, eta, kind)))

    candidates = [0.0, y_max]
    grid = np.linspace(0.0, y_max, 65)
    gv = [g(v) for v in grid]
    for lo, hi, glo, ghi in zip(grid[:-1], grid[1:], gv[:-1], gv[1:]):
        if glo > 0 >= ghi:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if g(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            candidates.append(0.5 * (lo + hi))
    vals = [H(v) for v in candidates]
    return candidates[int(np.argmax(vals))]


def maximize_hamiltonian(x, costate, t, econ: Economy, cfg: SolverConfig) -> np.ndarray:
    """Control maximising H over the admissible set at each time.

    ``scalar_bounded``: Y in [0, y_max]; monotone cases are bang-bang, mixed-sign
    co-states fall back to bisection on dH/dY. ``allocation_simplex``: water-filling
    of y_max across needs. Non-positive co-states everywhere give zero control.
    """
    sat = _sat(x)
    single = sat.ndim == 1
    sat2 = np.atleast_2d(sat)
    p2 = np.atleast_2d(np.asarray(costate, dtype=float))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    c = marginal_values(sat2, p2, tt, econ)
    if not cfg.scalar:
        out = water_fill(c, cfg.y_max, econ.eta, econ.share_kind)
        return out[0] if single else out
    _, prio = econ.passing(sat2)
    cp = c * prio
    pos = (cp > 0).any(axis=1)
    neg = (cp < 0).any(axis=1)
    Y = np.where(pos, cfg.y_max, 0.0)
    if econ.share_kind == "linear":
        Y = np.where(cp.sum(axis=1) > 0, cfg.y_max, 0.0)
    else:
        for i in np.flatnonzero(pos & neg):
            Y[i] = _scalar_argmax_row(c[i], prio[i], cfg.y_max, econ.eta, econ.share_kind)
    return Y[0] if single else Y


def kkt_residual(x, ctrl, costate, t, econ: Economy, cfg: SolverConfig, rtol: float = 1e-9):
    """Per-time first-order optimality residual of ``ctrl`` for the given co-states.

    Scalar mode: |dH/dY| in the interior, the inward-pointing part at a bound.
    Allocation mode: spread of marginal values over active needs, plus any inactive
    need whose marginal value exceeds the water level, plus the level itself if budget
    is left unused.
    """
    sat = np.atleast_2d(_sat(x))
    ctrl = np.asarray(ctrl, dtype=float)
    p = np.atleast_2d(np.asarray(costate, dtype=float))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if cfg.scalar:
        ctrl = np.atleast_1d(ctrl)
        g = dH_dcontrol(sat, ctrl, p, tt, econ, True)
        at_top = ctrl >= cfg.y_max * (1 - rtol)
        at_bot = ctrl <= cfg.y_max * rtol
        return np.where(at_top, np.maximum(0.0, -g), np.where(at_bot, np.maximum(0.0, g), np.abs(g)))
    ctrl = np.atleast_2d(ctrl)
    g = dH_dcontrol(sat, ctrl, p, tt, econ, False)
    active = ctrl > cfg.y_max * rtol
    gmax_a = np.where(active, g, -np.inf).max(axis=1)
    gmin_a = np.where(active, g, np.inf).min(axis=1)
    spread = np.where(active.any(axis=1), gmax_a - gmin_a, 0.0)
    level = np.where(active.any(axis=1), gmax_a, 0.0)
    gmax_i = np.where(~active, g, -np.inf).max(axis=1)
    excess = np.maximum(0.0, np.where(np.isfinite(gmax_i), gmax_i - level, 0.0))
    slack = ctrl.sum(axis=1) < cfg.y_max * (1 - 1e-9)
    unused = np.where(slack, np.maximum(level, 0.0), 0.0)
    return np.maximum.reduce([spread, excess, unused])
