"""Fixed-step classical RK4 for the state (forward) and co-state (backward) systems."""

from __future__ import annotations

import numpy as np

from emt.control.config import CostatePath, SolverConfig
from emt.control.pmp import costate_rhs
from emt.economy import Economy
from emt.errors import DimensionError, IntegrationError


def _midpoints(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v[:-1] + v[1:])


def integrate_forward(
    x0,
    control: np.ndarray,
    times: np.ndarray,
    econ: Economy,
    scalar: bool,
    efficiency=None,
) -> tuple[np.ndarray, int]:
    """Integrate dx/dt = Phi(ctrl) - delta x on ``times``.

    The control is linearly interpolated to RK4 half steps. After every step entries are
    clamped to [0, sat_max]; the number of clamped entries is returned alongside the path.
    ``efficiency`` overrides a(t) with a callable of time (e.g. ``lambda t: 1.0`` for the
    ideal pipeline).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (econ.n,):
        raise DimensionError(f"initial state has shape {x0.shape}, expected ({econ.n},)")
    control = np.asarray(control, dtype=float)
    if control.shape[0] != times.shape[0]:
        raise DimensionError("control path does not match the time grid")
    h = np.diff(times)
    tm = _midpoints(times)
    cm = _midpoints(control)
    eff = econ.efficiency if efficiency is None else efficiency
    a_grid = np.broadcast_to(np.asarray(eff(times), dtype=float), times.shape)
    a_mid = np.broadcast_to(np.asarray(eff(tm), dtype=float), tm.shape)

    # Inflow assuming every masked-in need passes the gap gate; recomputed only when the
    # gate actually closes for some need.
    default_pass = econ.mask
    any_pass = bool(default_pass.any())
    f_grid = _ungated(econ, control, a_grid, scalar)
    f_mid = _ungated(econ, cm, a_mid, scalar)
    delta = econ.delta
    desired = econ.desired

    def gated(x, t, a, ctrl):
        return econ.inflow(t, x, ctrl, scalar, efficiency=a) - delta * x

    out = np.empty((times.shape[0], econ.n))
    out[0] = x0
    clamps = 0
    x = x0
    hi = econ.sat_max
    watch = default_pass if any_pass else np.zeros(econ.n, dtype=bool)
    # Stage states never exceed x + h * max inflow, so below this line the gate stays open
    # for the whole step and the precomputed inflow can be used directly.
    fmax = np.maximum(f_grid.max(axis=0), f_mid.max(axis=0)) if times.size > 1 else 0.0
    safe = desired - float(h.max()) * np.maximum(fmax, 0.0)
    for j in range(times.shape[0] - 1):
        hj = h[j]
        fm = f_mid[j]
        if not (watch & (x >= safe)).any():
            k1 = f_grid[j] - delta * x
            k2 = fm - delta * (x + 0.5 * hj * k1)
            k3 = fm - delta * (x + 0.5 * hj * k2)
            k4 = f_grid[j + 1] - delta * (x + hj * k3)
        else:
            k1 = _stage(x, watch, desired, f_grid[j], delta, gated, times[j], a_grid[j], control[j])
            x2 = x + 0.5 * hj * k1
            k2 = _stage(x2, watch, desired, fm, delta, gated, tm[j], a_mid[j], cm[j])
            x3 = x + 0.5 * hj * k2
            k3 = _stage(x3, watch, desired, fm, delta, gated, tm[j], a_mid[j], cm[j])
            x4 = x + hj * k3
            k4 = _stage(x4, watch, desired, f_grid[j + 1], delta, gated,
                        times[j + 1], a_grid[j + 1], control[j + 1])
        x = x + (hj / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        lo_x, hi_x = x.min(), x.max()
        if not (lo_x >= 0.0 and hi_x <= hi):
            if not np.isfinite(x).all():
                raise IntegrationError("non-finite state during forward integration", j + 1)
            clamps += int(((x < 0.0) | (x > hi)).sum())
            x = np.clip(x, 0.0, hi)
        out[j + 1] = x
    return out, clamps


def _stage(x, watch, desired, f_row, delta, gated, t, a, ctrl):
    if (watch & (x >= desired)).any():
        return gated(x, t, a, ctrl)
    return f_row - delta * x


def _ungated(econ: Economy, control, a, scalar: bool) -> np.ndarray:
    """Inflow with the gate open on every masked-in need."""
    n_t = np.shape(a)[0]
    fake_sat = np.where(econ.mask, -1.0, econ.desired)  # strictly below desired when masked in
    sat = np.broadcast_to(fake_sat, (n_t, econ.n))
    return econ.inflow(None, sat, control, scalar, efficiency=np.asarray(a))


def integrate_backward(
    terminal,
    state: np.ndarray,
    times: np.ndarray,
    econ: Economy,
    cfg: SolverConfig,
    mode: str | None = None,
) -> CostatePath:
    """Integrate the co-state system backwards from ``terminal`` at the final time."""
    mode = cfg.costate_mode if mode is None else mode
    p = np.asarray(terminal, dtype=float)
    if p.shape != (econ.n,):
        raise DimensionError(f"terminal co-state has shape {p.shape}, expected ({econ.n},)")
    if state.shape[0] != times.shape[0]:
        raise DimensionError("state path does not match the time grid")
    # The co-state system is affine in p: dp/dt = rate * p - forcing(t). The forcing is
    # evaluated through costate_rhs at p = 0 so the two stay in step.
    zero = np.zeros(econ.n)
    tm = _midpoints(times)
    xm = _midpoints(state)
    rate = costate_rhs(state[0], np.ones(econ.n), times[0], econ, cfg, mode) - costate_rhs(
        state[0], zero, times[0], econ, cfg, mode
    )
    f_grid = -costate_rhs(state, np.zeros_like(state), times, econ, cfg, mode)
    f_mid = -costate_rhs(xm, np.zeros_like(xm), tm, econ, cfg, mode)
    out = np.empty((times.shape[0], econ.n))
    out[-1] = p
    for j in range(times.shape[0] - 1, 0, -1):
        hj = times[j] - times[j - 1]
        k1 = rate * p - f_grid[j]
        k2 = rate * (p - 0.5 * hj * k1) - f_mid[j - 1]
        k3 = rate * (p - 0.5 * hj * k2) - f_mid[j - 1]
        k4 = rate * (p - hj * k3) - f_grid[j - 1]
        p = p - (hj / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j - 1] = p
    if not np.isfinite(out).all():
        bad = int(np.flatnonzero(~np.isfinite(out).all(axis=1)).max())
        raise IntegrationError("non-finite co-state during backward integration", bad)
    return CostatePath(times, out, mode)
