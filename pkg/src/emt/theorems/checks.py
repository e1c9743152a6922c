"""Numerical checks of the convergence, utility and frontier results.

Every check returns a :class:`CheckCertificate`; none of them raise on a failed
property, only on malformed input.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from emt.control.config import SolverConfig
from emt.control.pmp import dH_dcontrol, hamiltonian, maximize_hamiltonian, water_fill
from emt.economy import Economy, share
from emt.errors import DimensionError, InvalidInputError
from emt.needspace import TOL_ABS, ExperientialState, WeightVector, l1_norm, utility_gap_bound
from emt.scenario_io.rng import SplitMix64
from emt.theorems.certificate import CheckCertificate, finite_or
from emt.theorems.alignment import gap_series


def _same_grid(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"paths are on different grids: {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# Hölder / utility gap


def check_holder_random(n: int, seed: int, draws: int = 1000, sat_max: float = 1.0,
                        tol: float = TOL_ABS) -> CheckCertificate:
    """Hölder bound |U(x) - U(xhat)| <= ||w||_1 ||x - xhat||_inf on seeded random triples."""
    rng = SplitMix64(seed)
    worst = -np.inf
    fails = 0
    for _ in range(draws):
        w = WeightVector(rng.random(n))
        x = ExperientialState(0.0, rng.uniform(0.0, sat_max, n), sat_max)
        xh = ExperientialState(0.0, rng.uniform(0.0, sat_max, n), sat_max)
        r = utility_gap_bound(w, x, xh, tol)
        worst = max(worst, r.gap - r.bound)
        fails += not r.holds
    return CheckCertificate("holder_random", fails == 0,
                            {"max_violation": worst, "draws": draws, "failures": fails}, tol)


def check_holder_paths(w, ideal: np.ndarray, delivered: np.ndarray, tol: float = TOL_ABS) -> CheckCertificate:
    _same_grid(ideal, delivered)
    w = np.asarray(w, dtype=float)
    gap = np.abs(ideal @ w - delivered @ w)
    bound = np.sum(w) * gap_series(ideal, delivered)
    worst = float(np.max(gap - bound))
    return CheckCertificate("holder_paths", worst <= tol, {"max_violation": worst}, tol)


# ---------------------------------------------------------------------------
# bounded error and convergence


def check_bounded_error(times, ideal: np.ndarray, delivered: np.ndarray, k, lambda_decay: float,
                        tol: float = TOL_ABS) -> CheckCertificate:
    """sup_i |x_i(t) - xhat_i(t)| <= k* exp(-lambda t) at every grid time, k* = max_i k_i."""
    _same_grid(ideal, delivered)
    times = np.asarray(times, dtype=float)
    if times.shape[0] != ideal.shape[0]:
        raise DimensionError("time grid does not match the paths")
    k_star = float(np.max(k))
    lhs = gap_series(ideal, delivered)
    rhs = k_star * np.exp(-lambda_decay * times)
    excess = lhs - rhs
    i = int(np.argmax(excess))
    passed = bool(excess[i] <= tol)
    notes = "" if passed else f"envelope violated at t={times[i]:.17g}"
    return CheckCertificate("bounded_error", passed,
                            {"max_violation": excess[i], "worst_t": times[i], "k_star": k_star}, tol, notes)


def fit_log_rate(times, errors) -> tuple[float, int]:
    """Least-squares slope of log(error) against t over the strictly positive prefix."""
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    pos = errors > 0
    n = int(np.argmin(pos)) if not pos.all() else errors.size
    if n < 2:
        return math.nan, n
    slope = np.polyfit(times[:n], np.log(errors[:n]), 1)[0]
    return float(slope), n


def check_convergence_rate(times, errors, lambda_decay: float, rel_tol: float = 0.05,
                           tail: bool = True) -> CheckCertificate:
    """Fitted exponential decay rate of an error series against the ideation decay rate.

    The fit uses the second half of the grid (``tail=False`` uses all of it). When the
    horizon gives lambda*T >= 4 the final error must also be below a tenth of the peak.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if times.shape != errors.shape:
        raise DimensionError("times and errors differ in length")
    start = times.size // 2 if tail else 0
    t_fit, e_fit = times[start:], errors[start:]
    slope, used = fit_log_rate(t_fit, e_fit)
    notes = []
    if used < e_fit.size:
        notes.append(f"error reached zero; fitted on the first {used} tail points")
    rate = -slope
    rel = abs(rate - lambda_decay) / lambda_decay if lambda_decay > 0 else math.inf
    peak = float(np.max(errors)) if errors.size else 0.0
    ratio = float(errors[-1] / peak) if peak > 0 else 0.0
    span = times[-1] - times[0]
    decay_ok = lambda_decay * span < 4 or ratio < 0.1
    passed = lambda_decay > 0 and math.isfinite(rate) and rel <= rel_tol and decay_ok
    if lambda_decay <= 0:
        notes.append("no ideation-cost decay: no convergence to certify")
    elif not decay_ok:
        notes.append("final error not below a tenth of its peak")
    return CheckCertificate(
        "convergence_rate", bool(passed),
        {"fitted_rate": rate if math.isfinite(rate) else 0.0, "expected_rate": lambda_decay,
         "rel_error": rel if math.isfinite(rel) else 1e300, "final_over_peak": ratio},
        rel_tol, "; ".join(notes))


def check_utility_convergence(w, ideal: np.ndarray, delivered: np.ndarray, sat_max: float = 1.0,
                              tail_fraction: float = 0.1, tol: float = TOL_ABS) -> CheckCertificate:
    """Hölder bound on the utility gap at every time, and a small gap over the final stretch."""
    _same_grid(ideal, delivered)
    w = np.asarray(w, dtype=float)
    norm1 = float(np.sum(w))
    ugap = np.abs(ideal @ w - delivered @ w)
    bound = norm1 * gap_series(ideal, delivered)
    holder = float(np.max(ugap - bound))
    tol_conv = 1e-3 * norm1 * sat_max
    n_tail = max(1, int(math.ceil(tail_fraction * ugap.size)))
    tail_gap = float(np.max(ugap[-n_tail:]))
    passed = holder <= tol and tail_gap <= tol_conv
    return CheckCertificate("utility_convergence", bool(passed),
                            {"holder_violation": holder, "tail_gap": tail_gap, "tol_conv": tol_conv}, tol)


# ---------------------------------------------------------------------------
# optimality


def attainable_levels(econ: Economy, cfg: SolverConfig) -> np.ndarray:
    """Per-need attainable level min(sat_max, desired, Phi_max / delta).

    Phi_max is the inflow at full alignment under the capacity split that maximises
    steady-state utility sum_i w_i phi_i s(y_i) / delta_i; masked needs get zero.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        if cfg.scalar:
            _, prio = econ.passing(np.where(econ.mask, -1.0, econ.desired))
            y = cfg.y_max * prio
        else:
            c = np.where(econ.mask & (econ.delta > 0), econ.w * econ.phi / np.where(econ.delta > 0, econ.delta, 1.0), 0.0)
            y = water_fill(c[None, :], cfg.y_max, econ.eta, econ.share_kind)[0]
        phi_max = econ.phi * share(y, econ.eta, econ.share_kind)
        cap = np.where(econ.delta > 0, phi_max / np.where(econ.delta > 0, econ.delta, 1.0),
                       np.where(phi_max > 0, np.inf, 0.0))
    att = np.minimum(np.minimum(econ.sat_max, econ.desired), cap)
    return np.where(econ.mask, att, 0.0)


def check_asymptotic_optimality(bundle, econ: Economy, cfg: SolverConfig, tol_opt: float = 0.02) -> CheckCertificate:
    """Terminal utility within ``tol_opt`` (relative) of the attainable supremum.

    A gap below the absolute floor 1e-3 * ||w||_1 * sat_max also passes, so economies
    whose supremum is itself negligible (decay-dominated) are not judged on noise.
    """
    u_T = float(bundle.state[-1] @ econ.w)
    sup = float(attainable_levels(econ, cfg) @ econ.w)
    if not bundle.converged:
        return CheckCertificate("asymptotic_optimality", False, {"terminal_utility": u_T, "supremum": sup},
                                tol_opt, "sweep did not converge")
    gap = abs(u_T - sup)
    floor = 1e-3 * float(np.sum(np.abs(econ.w))) * econ.sat_max
    rel = gap / sup if sup > 0 else math.inf
    passed = rel <= tol_opt or gap <= floor
    return CheckCertificate("asymptotic_optimality", bool(passed),
                            {"terminal_utility": u_T, "supremum": sup, "rel_gap": finite_or(rel, 1e300),
                             "abs_gap": gap, "abs_floor": floor}, tol_opt)


def check_stationarity(bundle, tol: float) -> CheckCertificate:
    """First-order optimality residual of the converged control below 10*tol."""
    r = bundle.hamiltonian_residual
    worst = float(np.max(r))
    limit = 10.0 * tol
    passed = bundle.converged and worst < limit
    return CheckCertificate("stationarity", bool(passed), {"max_residual": worst, "iterations": bundle.iterations},
                            limit, "" if bundle.converged else "sweep did not converge")


def random_admissible(rng: SplitMix64, shape, n: int, cfg: SolverConfig) -> np.ndarray:
    """Random controls in the admissible set: [0, y_max] or the capped simplex."""
    if cfg.scalar:
        return rng.uniform(0.0, cfg.y_max, shape)
    raw = rng.random(tuple(shape) + (n,))
    frac = rng.random(tuple(shape) + (1,))
    return cfg.y_max * frac * raw / np.maximum(raw.sum(axis=-1, keepdims=True), 1e-300)


def check_gradient_fd(econ: Economy, cfg: SolverConfig, seed: int, draws: int = 100, h: float = 1e-5,
                      rel_tol: float = 1e-6) -> CheckCertificate:
    """Analytic dH/dcontrol against central differences on seeded random points."""
    rng = SplitMix64(seed)
    n = econ.n
    worst = 0.0
    for _ in range(draws):
        t = float(rng.uniform(0.0, cfg.horizon))
        x = rng.uniform(0.0, econ.sat_max, n)
        lam = rng.uniform(-0.5, 2.0, n)
        # keep the control away from the boundary so the stencil stays admissible
        u = h + random_admissible(rng, (), n, cfg) * 0.9
        g = np.atleast_1d(dH_dcontrol(x, u, lam, t, econ, cfg.scalar))
        fd = np.empty_like(g)
        for j in range(g.size):
            up, dn = np.array(u, dtype=float), np.array(u, dtype=float)
            if cfg.scalar:
                up, dn = u + h, u - h
            else:
                up[j] += h
                dn[j] -= h
            fd[j] = (hamiltonian(x, up, lam, t, econ, cfg) - hamiltonian(x, dn, lam, t, econ, cfg)) / (2 * h)
        scale = max(float(np.max(np.abs(g))), 1e-12)
        worst = max(worst, float(np.max(np.abs(g - fd))) / scale)
    return CheckCertificate("gradient_fd", worst < rel_tol, {"max_rel_error": worst, "draws": draws}, rel_tol)


def check_hamiltonian_dominance(bundle, econ: Economy, cfg: SolverConfig, seed: int, draws: int = 100,
                                rel_tol: float = 1e-12) -> CheckCertificate:
    """H at the maximiser is at least H at random admissible controls, at every grid time."""
    times = bundle.times
    lam = bundle.costate.to_present_value(cfg.rho).values
    state = bundle.state
    best = maximize_hamiltonian(state, lam, times, econ, cfg)
    h_best = hamiltonian(state, best, lam, times, econ, cfg)
    rng = SplitMix64(seed)
    worst = -np.inf
    for _ in range(draws):
        c = random_admissible(rng, (times.size,), econ.n, cfg)
        h_c = hamiltonian(state, c, lam, times, econ, cfg)
        worst = max(worst, float(np.max((h_c - h_best) / np.maximum(1.0, np.abs(h_best)))))
    return CheckCertificate("hamiltonian_dominance", worst <= rel_tol,
                            {"max_excess": worst, "draws": draws}, rel_tol)


# ---------------------------------------------------------------------------
# frontier, rollback, meaning


def check_frontier_expansion(events: Sequence[tuple[float, float]], base_supremum: float = 0.0,
                             tol: float = TOL_ABS) -> CheckCertificate:
    """Attainable supremum across dimension-add events given as (weight, attainable level).

    Positive-weight, positive-level events must raise the supremum by exactly w * level;
    zero-contribution events are reported as non-expanding.
    """
    if not events:
        return CheckCertificate("frontier_expansion", True, {"events": 0}, tol, "empty schedule: vacuous")
    sup = [float(base_supremum)]
    w_now = np.zeros(0)
    a_now = np.zeros(0)
    min_inc = math.inf
    accounting = 0.0
    flat = []
    strict_ok = True
    for i, (w, a) in enumerate(events):
        if w < 0 or a < 0:
            raise InvalidInputError("frontier events need non-negative weight and level")
        w_now = np.append(w_now, w)
        a_now = np.append(a_now, a)
        new = base_supremum + float(w_now @ a_now)  # recomputed from scratch, not incremented
        inc = new - sup[-1]
        sup.append(new)
        accounting = max(accounting, abs(inc - w * a))
        if w * a > 0:
            min_inc = min(min_inc, inc)
            strict_ok &= inc > 0
        else:
            flat.append(i)
            strict_ok &= abs(inc) <= tol
    passed = strict_ok and accounting <= tol
    notes = f"non-expanding events (zero weight or level): {flat}" if flat else ""
    return CheckCertificate("frontier_expansion", bool(passed),
                            {"min_increment": min_inc if math.isfinite(min_inc) else 0.0,
                             "accounting_error": accounting, "events": len(events),
                             "final_supremum": sup[-1]}, tol, notes)


def check_irreversibility(sat, w, rollback: Sequence[int], tol: float = TOL_ABS) -> CheckCertificate:
    """Removing dimensions lowers utility by exactly their contribution sum w_i x_i."""
    sat = np.asarray(sat, dtype=float)
    w = np.asarray(w, dtype=float)
    if sat.shape != w.shape:
        raise DimensionError("weights and state differ in length")
    rb = sorted(set(int(i) for i in rollback))
    if not rb:
        return CheckCertificate("irreversibility", True, {"utility_drop": 0.0}, tol, "empty rollback: vacuous")
    keep = np.setdiff1d(np.arange(sat.size), rb)
    before = float(w @ sat)
    after = float(w[keep] @ sat[keep])
    contribution = float(np.sum(w[rb] * sat[rb]))
    accounting = abs((before - after) - contribution)
    strict = after < before
    notes = "" if contribution > 0 else "rolled-back dimensions carry no utility: strictness premise fails"
    return CheckCertificate("irreversibility", bool(strict and accounting <= tol),
                            {"utility_before": before, "utility_after": after,
                             "accounting_error": accounting}, tol, notes)


def check_meaning_irreducibility(w, meaning_index: int, sat_max: float = 1.0,
                                 tol: float = TOL_ABS) -> CheckCertificate:
    """Supremum of utility with the meaning dimension held at zero falls short by w_m * sat_max."""
    w = np.asarray(w.w if isinstance(w, WeightVector) else w, dtype=float)
    if not 0 <= meaning_index < w.size:
        raise InvalidInputError("meaning index out of range")
    full = float(np.sum(w) * sat_max)
    x = np.full(w.size, sat_max)
    x[meaning_index] = 0.0
    suppressed = float(w @ x)
    shortfall = full - suppressed
    expected = float(w[meaning_index] * sat_max)
    accounting = abs(shortfall - expected)
    if not w[meaning_index] > 0:
        return CheckCertificate("meaning_irreducibility", False,
                                {"shortfall": shortfall, "accounting_error": accounting}, tol,
                                "premise violated: meaning weight is zero")
    return CheckCertificate("meaning_irreducibility", bool(shortfall > 0 and accounting <= tol),
                            {"full_supremum": full, "suppressed_supremum": suppressed,
                             "shortfall": shortfall, "accounting_error": accounting}, tol)
