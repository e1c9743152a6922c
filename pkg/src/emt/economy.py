"""Production, ideation-cost decay and the demand -> filter -> production pipeline.

The pipeline turns an output budget into per-need satisfaction inflow rates in three
deterministic stages:

* demand sensing: ``gap_i = max(0, desired_i - x_i)``
* filtering: needs with ``ethics_mask`` off or a zero gap are dropped, the rest are
  prioritised by weight
* adaptive production: ``inflow_i = a(t) * phi_i * s(y_i)`` with the alignment efficiency
  ``a(t) = 1 / (1 + c0 exp(-lambda t))`` and share function ``s``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from emt.errors import DimensionError, InvalidInputError, InvalidParameterError

SHARE_KINDS = ("saturating", "linear")


@dataclass(frozen=True)
class ProductionParams:
    tfp: float
    alpha: float
    capital: float
    labor: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError(f"alpha outside (0,1): {self.alpha}")
        if not self.tfp > 0:
            raise InvalidParameterError(f"tfp must be positive: {self.tfp}")
        if self.capital < 0 or self.labor < 0:
            raise InvalidParameterError("capital and labor must be non-negative")


@dataclass(frozen=True)
class IdeationParams:
    c0: float
    lambda_decay: float

    def __post_init__(self):
        if not self.c0 > 0:
            raise InvalidParameterError(f"c0 must be positive: {self.c0}")
        if self.lambda_decay < 0:
            raise InvalidParameterError(f"lambda_decay must be non-negative: {self.lambda_decay}")


@dataclass(frozen=True)
class NeedParams:
    weight: float
    delta: float
    desired: float = 1.0
    effectiveness: float = 1.0
    error_bound: float | None = None  # None -> c0 * effectiveness * sat_max
    ethics_mask: bool = True
    initial: float = 0.0

    def __post_init__(self):
        if self.weight < 0 or not math.isfinite(self.weight):
            raise InvalidParameterError("need weight must be finite and non-negative")
        if self.delta < 0:
            raise InvalidParameterError("need decay rate must be non-negative")
        if self.desired < 0:
            raise InvalidParameterError("desired level must be non-negative")
        if self.effectiveness < 0:
            raise InvalidParameterError("effectiveness must be non-negative")
        if self.error_bound is not None and self.error_bound < 0:
            raise InvalidParameterError("error bound must be non-negative")
        if self.initial < 0:
            raise InvalidParameterError("initial satisfaction must be non-negative")


@dataclass(frozen=True)
class FactorAllocation:
    labor_employed: float
    labor_idle: float = 0.0
    capital_employed: float = 0.0
    capital_idle: float = 0.0

    def __post_init__(self):
        for name in ("labor_employed", "labor_idle", "capital_employed", "capital_idle"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidParameterError(f"{name} must be finite and non-negative, got {v}")

    @property
    def labor_total(self) -> float:
        return self.labor_employed + self.labor_idle

    @property
    def capital_total(self) -> float:
        return self.capital_employed + self.capital_idle


def cobb_douglas(p: ProductionParams) -> float:
    """Y = A K^alpha L^(1-alpha)."""
    if not 0.0 < p.alpha < 1.0:
        raise InvalidParameterError(f"alpha outside (0,1): {p.alpha}")
    if p.capital == 0 or p.labor == 0:
        return 0.0
    return p.tfp * p.capital**p.alpha * p.labor ** (1.0 - p.alpha)


def ideation_cost(ip: IdeationParams, t):
    """c(t) = c0 exp(-lambda t); accepts a scalar or an array of times."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0):
        raise InvalidInputError("time must be non-negative")
    out = ip.c0 * np.exp(-ip.lambda_decay * ta)
    return float(out) if out.ndim == 0 else out


def alignment_efficiency(ip: IdeationParams, t):
    """a(t) = 1 / (1 + c(t)), in (0, 1] and increasing towards 1."""
    c = ideation_cost(ip, t)
    return 1.0 / (1.0 + c)


def reallocate(f: FactorAllocation, dL: float, dK: float) -> FactorAllocation:
    """Move ``dL`` idle labor and ``dK`` idle capital into employment."""
    if not (0 <= dL <= f.labor_idle):
        raise InvalidInputError(f"dL={dL} outside [0, labor_idle={f.labor_idle}]")
    if not (0 <= dK <= f.capital_idle):
        raise InvalidInputError(f"dK={dK} outside [0, capital_idle={f.capital_idle}]")
    # Pin the idle pool to exactly zero on a full draw so totals stay conserved.
    li = 0.0 if dL == f.labor_idle else f.labor_idle - dL
    ki = 0.0 if dK == f.capital_idle else f.capital_idle - dK
    return FactorAllocation(f.labor_employed + dL, li, f.capital_employed + dK, ki)


# ---------------------------------------------------------------------------
# share functions


def share(y, eta: float = 1.0, kind: str = "saturating"):
    y = np.asarray(y, dtype=float)
    if kind == "saturating":
        return -np.expm1(-eta * y)
    if kind == "linear":
        return eta * y
    raise InvalidParameterError(f"unknown share kind {kind!r}")


def share_derivative(y, eta: float = 1.0, kind: str = "saturating"):
    y = np.asarray(y, dtype=float)
    if kind == "saturating":
        return eta * np.exp(-eta * y)
    if kind == "linear":
        return np.full_like(y, eta)
    raise InvalidParameterError(f"unknown share kind {kind!r}")


# ---------------------------------------------------------------------------
# pipeline stages


def demand_sensing(sat, desired) -> np.ndarray:
    return np.maximum(0.0, np.asarray(desired, dtype=float) - np.asarray(sat, dtype=float))


def filter_stage(gap, mask, weights):
    """Return (pass flags, priority shares) for the surviving needs.

    Priority shares are proportional to weight among passing needs; if every passing
    weight is zero the split is uniform over passing needs.
    """
    gap = np.asarray(gap, dtype=float)
    passing = np.asarray(mask, dtype=bool) & (gap > 0)
    w = np.where(passing, np.asarray(weights, dtype=float), 0.0)
    total = w.sum(axis=-1, keepdims=True)
    count = passing.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        prio = np.where(total > 0, w / np.where(total > 0, total, 1.0),
                        np.where(count > 0, passing / np.maximum(count, 1), 0.0))
    return passing, prio


@dataclass(frozen=True)
class Economy:
    """Per-need constants stacked into arrays plus the pipeline settings."""

    needs: tuple[NeedParams, ...]
    ideation: IdeationParams
    sat_max: float = 1.0
    eta: float = 1.0
    share_kind: str = "saturating"
    w: np.ndarray = field(init=False, repr=False, compare=False)
    delta: np.ndarray = field(init=False, repr=False, compare=False)
    desired: np.ndarray = field(init=False, repr=False, compare=False)
    phi: np.ndarray = field(init=False, repr=False, compare=False)
    mask: np.ndarray = field(init=False, repr=False, compare=False)
    k: np.ndarray = field(init=False, repr=False, compare=False)
    x0: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        needs = tuple(self.needs)
        if not needs:
            raise InvalidParameterError("at least one need is required")
        if self.share_kind not in SHARE_KINDS:
            raise InvalidParameterError(f"unknown share kind {self.share_kind!r}")
        if not self.eta > 0:
            raise InvalidParameterError("eta must be positive")
        if not self.sat_max > 0:
            raise InvalidParameterError("sat_max must be positive")
        object.__setattr__(self, "needs", needs)
        arr = lambda vals: np.array(vals, dtype=float)  # noqa: E731
        object.__setattr__(self, "w", arr([n.weight for n in needs]))
        object.__setattr__(self, "delta", arr([n.delta for n in needs]))
        object.__setattr__(self, "desired", arr([n.desired for n in needs]))
        object.__setattr__(self, "phi", arr([n.effectiveness for n in needs]))
        object.__setattr__(self, "mask", np.array([n.ethics_mask for n in needs], dtype=bool))
        object.__setattr__(self, "x0", arr([n.initial for n in needs]))
        default_k = self.ideation.c0 * self.phi * self.sat_max
        object.__setattr__(
            self, "k",
            np.array([d if n.error_bound is None else n.error_bound
                      for n, d in zip(needs, default_k)], dtype=float),
        )
        for a in (self.w, self.delta, self.desired, self.phi, self.x0):
            a.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.needs)

    def with_needs(self, needs: Sequence[NeedParams]) -> "Economy":
        return replace(self, needs=tuple(needs))

    def efficiency(self, t):
        return alignment_efficiency(self.ideation, t)

    def passing(self, sat):
        gap = demand_sensing(sat, self.desired)
        return filter_stage(gap, self.mask, self.w)

    def inflow(self, t, sat, control, scalar: bool, efficiency=None):
        """Inflow rates for an allocation vector or a scalar output budget.

        Works on single states (shape (N,)) or stacked paths (shape (T, N)).
        """
        passing, prio = self.passing(sat)
        control = np.asarray(control, dtype=float)
        y = control[..., None] * prio if scalar else control
        a = self.efficiency(t) if efficiency is None else efficiency
        a = np.asarray(a, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        return np.where(passing, a * self.phi * share(y, self.eta, self.share_kind), 0.0)


def phi_map(
    Y: float,
    t: float,
    x,
    needs: Sequence[NeedParams],
    ip: IdeationParams,
    allocation=None,
    *,
    eta: float = 1.0,
    share_kind: str = "saturating",
    sat_max: float = 1.0,
) -> np.ndarray:
    """Satisfaction inflow rates produced by output ``Y`` at time ``t``.

    With ``allocation=None`` the budget ``Y`` is split across passing needs by weight
    priority. Otherwise ``allocation`` gives the per-need output directly and must not
    exceed ``Y`` in total.
    """
    if Y < 0 or not math.isfinite(Y):
        raise InvalidInputError(f"output must be finite and non-negative, got {Y}")
    sat = x.sat if hasattr(x, "sat") else np.asarray(x, dtype=float)
    if len(needs) != sat.size:
        raise DimensionError(f"{len(needs)} needs for a state of length {sat.size}")
    econ = Economy(tuple(needs), ip, sat_max=sat_max, eta=eta, share_kind=share_kind)
    if allocation is None:
        return econ.inflow(t, sat, Y, scalar=True)
    alloc = np.asarray(allocation, dtype=float)
    if alloc.shape != sat.shape:
        raise DimensionError("allocation length differs from the number of needs")
    if np.any(alloc < 0) or alloc.sum() > Y * (1 + 1e-12) + 1e-12:
        raise InvalidInputError("allocation must be non-negative and within the output budget")
    return econ.inflow(t, sat, alloc, scalar=False)
