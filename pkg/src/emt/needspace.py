"""Truncated experiential state, weights, norms and the linear utility functional."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from emt.errors import DimensionError, InvalidInputError

TOL_ABS = 1e-12
TOL_REL = 1e-9


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ExperientialState:
    """Satisfaction levels ``sat`` of N needs at model time ``time``."""

    time: float
    sat: np.ndarray
    sat_max: float = 1.0

    def __post_init__(self):
        sat = _as_vector(self.sat, "sat")
        if self.time < 0 or not np.isfinite(self.time):
            raise InvalidInputError(f"time must be finite and non-negative, got {self.time}")
        if self.sat_max <= 0:
            raise InvalidInputError("sat_max must be positive")
        if np.any(sat < 0) or np.any(sat > self.sat_max):
            raise InvalidInputError(f"satisfaction levels must lie in [0, {self.sat_max}]")
        sat = sat.copy()
        sat.flags.writeable = False
        object.__setattr__(self, "sat", sat)

    @property
    def n(self) -> int:
        return self.sat.size


@dataclass(frozen=True)
class WeightVector:
    w: np.ndarray
    meaning_index: int | None = None

    def __post_init__(self):
        w = _as_vector(self.w, "w")
        if np.any(w < 0):
            raise InvalidInputError("weights must be non-negative")
        if self.meaning_index is not None:
            if not 0 <= self.meaning_index < w.size:
                raise InvalidInputError(f"meaning_index {self.meaning_index} outside [0, {w.size})")
            if w[self.meaning_index] <= 0:
                raise InvalidInputError("the meaning dimension must carry a positive weight")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def meaning_weight(self) -> float | None:
        return None if self.meaning_index is None else float(self.w[self.meaning_index])


def sup_norm(v) -> float:
    """max_i |v_i| over a finite, non-empty vector."""
    return float(np.max(np.abs(_as_vector(v, "v"))))


def l1_norm(w: WeightVector) -> float:
    return float(np.sum(w.w))


def _check_dims(w: WeightVector, *states: ExperientialState) -> None:
    for x in states:
        if x.n != w.n:
            raise DimensionError(f"weight length {w.n} != state length {x.n}")


def utility(w: WeightVector, x: ExperientialState) -> float:
    _check_dims(w, x)
    return float(w.w @ x.sat)


def utility_values(w: np.ndarray, sat: np.ndarray) -> np.ndarray:
    """Vectorised utility over a path of shape (T, N)."""
    return np.asarray(sat, dtype=float) @ np.asarray(w, dtype=float)


@dataclass(frozen=True)
class GapBound:
    gap: float
    bound: float
    holds: bool


def utility_gap_bound(
    w: WeightVector, x: ExperientialState, xhat: ExperientialState, tol_abs: float = TOL_ABS
) -> GapBound:
    """Compare |U(x) - U(xhat)| with the Hölder bound ||w||_1 * ||x - xhat||_inf."""
    _check_dims(w, x, xhat)
    if x.time != xhat.time:
        raise InvalidInputError(f"states have different timestamps ({x.time} vs {xhat.time})")
    gap = abs(utility(w, x) - utility(w, xhat))
    bound = l1_norm(w) * sup_norm(x.sat - xhat.sat)
    return GapBound(gap, bound, gap <= bound + tol_abs)


def extend_dimensions(
    x: ExperientialState, w: WeightVector, new_needs: Iterable[tuple[float, float]]
) -> tuple[ExperientialState, WeightVector]:
    """Append needs given as ``(weight, initial_sat)`` pairs; existing components are untouched."""
    _check_dims(w, x)
    new_needs = list(new_needs)
    if not new_needs:
        return x, w
    new_w = np.array([float(a) for a, _ in new_needs])
    new_s = np.array([float(b) for _, b in new_needs])
    if np.any(~np.isfinite(new_w)) or np.any(new_w < 0):
        raise InvalidInputError("appended weights must be finite and non-negative")
    if np.any(~np.isfinite(new_s)) or np.any(new_s < 0) or np.any(new_s > x.sat_max):
        raise InvalidInputError(f"appended satisfaction must lie in [0, {x.sat_max}]")
    x2 = ExperientialState(x.time, np.concatenate([x.sat, new_s]), x.sat_max)
    w2 = WeightVector(np.concatenate([w.w, new_w]), w.meaning_index)
    return x2, w2


def truncate_dimensions(
    x: ExperientialState, w: WeightVector, n: int
) -> tuple[ExperientialState, WeightVector]:
    """Keep the first ``n`` dimensions (inverse of :func:`extend_dimensions`)."""
    if not 1 <= n <= x.n:
        raise InvalidInputError(f"cannot truncate {x.n} dimensions to {n}")
    mi = w.meaning_index if (w.meaning_index is not None and w.meaning_index < n) else None
    return ExperientialState(x.time, x.sat[:n], x.sat_max), WeightVector(w.w[:n], mi)


def truncation_tail(w_beyond: Sequence[float] = (), sat_max: float = 1.0) -> float:
    """Upper bound on the utility carried by needs beyond the truncation."""
    return float(np.sum(np.asarray(w_beyond, dtype=float))) * sat_max
