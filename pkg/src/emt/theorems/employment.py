"""Idle factors and unmet needs: the one-period reallocation experiment and the
discovery frontier driven by human labor."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from emt.control.pmp import water_fill
from emt.economy import Economy, FactorAllocation, ProductionParams, cobb_douglas, reallocate, share
from emt.errors import InvalidParameterError
from emt.theorems.certificate import CheckCertificate


@dataclass(frozen=True)
class ParetoImprovement:
    dL: float
    dK: float
    delta_Y: float
    delta_U: float
    new_sat: np.ndarray
    factors: FactorAllocation


def _eligible(econ: Economy, sat: np.ndarray) -> np.ndarray:
    """Unmasked needs below their desired level that output can actually move."""
    return econ.mask & (sat < econ.desired) & (econ.w > 0) & (econ.phi > 0)


def employment_gain(factors: FactorAllocation, prod: ProductionParams, econ: Economy, sat, t: float,
                    dL: float, dK: float) -> tuple[float, float, np.ndarray]:
    """Utility change from employing (dL, dK) for one unit of time.

    The extra output is split over eligible needs to maximise sum_i w_i a(t) phi_i s(y_i),
    each need's level rises by its inflow (capped at its desired level) and nothing else
    moves. Returns (delta_Y, delta_U, new levels).
    """
    sat = np.asarray(sat, dtype=float)
    base = replace(prod, capital=factors.capital_employed, labor=factors.labor_employed)
    moved = reallocate(factors, dL, dK)
    more = replace(prod, capital=moved.capital_employed, labor=moved.labor_employed)
    dY = cobb_douglas(more) - cobb_douglas(base)
    elig = _eligible(econ, sat)
    a = float(econ.efficiency(t))
    c = np.where(elig, econ.w * a * econ.phi, 0.0)
    if dY <= 0 or not elig.any():
        return max(dY, 0.0), 0.0, sat.copy()
    y = water_fill(c[None, :], dY, econ.eta, econ.share_kind)[0]
    inflow = np.where(elig, a * econ.phi * share(y, econ.eta, econ.share_kind), 0.0)
    new = np.minimum(sat + inflow, np.maximum(sat, np.minimum(econ.desired, econ.sat_max)))
    return dY, float(econ.w @ (new - sat)), new


def find_pareto_improvement(factors: FactorAllocation, prod: ProductionParams, econ: Economy, sat,
                            t: float = 0.0) -> ParetoImprovement | None:
    """Employ every idle unit and report the resulting utility gain.

    Returns ``None`` when there is no idle labor or no unmet, unmasked need (or when the
    extra labor cannot raise output, e.g. with no capital at all).
    """
    sat = np.asarray(sat, dtype=float)
    if not factors.labor_idle > 0 or not _eligible(econ, sat).any():
        return None
    dL, dK = factors.labor_idle, factors.capital_idle
    dY, dU, new = employment_gain(factors, prod, econ, sat, t, dL, dK)
    if not dU > 0:
        return None
    return ParetoImprovement(dL, dK, dY, dU, new, reallocate(factors, dL, dK))


def check_unemployment(factors, prod, econ: Economy, sat, t: float = 0.0) -> CheckCertificate:
    """Improvement exists exactly when both premises hold, and it lowers no level."""
    sat = np.asarray(sat, dtype=float)
    premises = factors.labor_idle > 0 and bool(_eligible(econ, sat).any())
    found = find_pareto_improvement(factors, prod, econ, sat, t)
    if found is None:
        return CheckCertificate("unemployment", not premises, {"delta_U": 0.0, "premises": float(premises)},
                                0.0, "no improvement" + (" despite premises holding" if premises else ""))
    worst_drop = float(np.max(sat - found.new_sat))
    ok = premises and found.delta_U > 0 and worst_drop <= 0
    return CheckCertificate("unemployment", bool(ok),
                            {"delta_U": found.delta_U, "delta_Y": found.delta_Y, "dL": found.dL,
                             "max_level_drop": worst_drop, "premises": float(premises)}, 0.0)


# ---------------------------------------------------------------------------
# discovery frontier


@dataclass(frozen=True)
class FrontierState:
    """Active dimension count n(t), beyond-frontier stock and its discovery slope.

    Discovery is linear, f(L_h) = discovery_slope * L_h. Discovered mass becomes new
    dimensions: every whole unit adds one dimension; the fractional remainder counts as a
    partial dimension with proportionally scaled weight.
    """

    active_dims: int = 0
    beyond_measure: float = 0.0
    discovery_slope: float = 1.0

    def __post_init__(self):
        if self.discovery_slope < 0:
            raise InvalidParameterError("discovery slope must be non-negative")
        if self.beyond_measure < 0 or self.active_dims < 0:
            raise InvalidParameterError("frontier stock and dimension count must be non-negative")

    def advance(self, human_labor: float, dt: float) -> tuple["FrontierState", float]:
        if human_labor < 0:
            raise InvalidParameterError("human labor must be non-negative")
        if not dt > 0:
            raise InvalidParameterError("dt must be positive")
        found = self.discovery_slope * human_labor * dt
        stock = self.beyond_measure + found
        dims = self.active_dims + (math.floor(stock) - math.floor(self.beyond_measure))
        return FrontierState(dims, stock, self.discovery_slope), found


def discovery_gain(frontier: FrontierState, human_labor: float, w_new: float, attain: float, dt: float) -> float:
    _, found = frontier.advance(human_labor, dt)
    return w_new * attain * found


def check_full_employment_value(frontier: FrontierState, human_labor: float, w_new: float, dt: float,
                                attain: float = 1.0) -> CheckCertificate:
    """Human labor on discovery raises utility iff it, the slope and the new weight are positive."""
    after, found = frontier.advance(human_labor, dt)
    dU = w_new * attain * found
    if human_labor == 0:
        ok = dU == 0
    elif frontier.discovery_slope > 0 and w_new > 0 and attain > 0:
        ok = dU > 0
    else:
        ok = True
    grew = after.beyond_measure - frontier.beyond_measure
    return CheckCertificate("full_employment", bool(ok and after.active_dims >= frontier.active_dims),
                            {"delta_U": dU, "discovered": found, "beyond_growth": grew,
                             "active_dims": after.active_dims}, 0.0)


def check_full_employment_grid(frontier: FrontierState, labor_grid, w_new: float, dt: float,
                               attain: float = 1.0) -> CheckCertificate:
    """delta_U is zero without human labor and strictly increasing along ``labor_grid``."""
    grid = np.asarray(labor_grid, dtype=float)
    gains = np.array([discovery_gain(frontier, L, w_new, attain, dt) for L in grid])
    zero_ok = all(g == 0 for L, g in zip(grid, gains) if L == 0)
    inc = np.diff(gains)
    mono = bool(np.all(inc > 0)) if grid.size > 1 and np.all(np.diff(grid) > 0) else False
    return CheckCertificate("full_employment", bool(zero_ok and mono),
                            {"min_increment": float(inc.min()) if inc.size else 0.0,
                             "gain_at_zero": float(gains[grid == 0].max()) if (grid == 0).any() else 0.0,
                             "max_gain": float(gains.max())}, 0.0)
