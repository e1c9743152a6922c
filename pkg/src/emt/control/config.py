"""Solver settings and the path containers returned by the sweep."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from emt.errors import ContractError, InvalidParameterError

COSTATE_MODES = ("present_value", "current_value", "paper_literal")
CONTROL_MODES = ("scalar_bounded", "allocation_simplex")


@dataclass(frozen=True)
class SolverConfig:
    rho: float = 0.05
    horizon: float = 40.0
    steps: int = 2000
    relaxation: float = 0.5
    tol: float = 1e-6
    max_iter: int = 500
    costate_mode: str = "current_value"
    control_mode: str = "allocation_simplex"
    y_max: float = 1.0

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise InvalidParameterError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not self.rho > 0:
            out.append(f"rho must be positive, got {self.rho}")
        if not self.horizon > 0:
            out.append(f"horizon must be positive, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 2:
            out.append(f"steps must be an integer >= 2, got {self.steps}")
        if not 0 < self.relaxation <= 1:
            out.append(f"relaxation outside (0,1], got {self.relaxation}")
        if not self.tol > 0:
            out.append(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            out.append(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.costate_mode not in COSTATE_MODES:
            out.append(f"unknown costate_mode {self.costate_mode!r}")
        if self.control_mode not in CONTROL_MODES:
            out.append(f"unknown control_mode {self.control_mode!r}")
        if not self.y_max > 0:
            out.append(f"y_max must be positive, got {self.y_max}")
        return out

    @property
    def scalar(self) -> bool:
        return self.control_mode == "scalar_bounded"

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, int(self.steps) + 1)


@dataclass(frozen=True)
class CostatePath:
    times: np.ndarray
    values: np.ndarray  # (T, N)
    mode: str

    def __post_init__(self):
        if self.mode not in COSTATE_MODES:
            raise ContractError(f"unknown costate mode {self.mode!r}")
        if self.values.shape[0] != self.times.shape[0]:
            raise ContractError("co-state values do not match the time grid")

    def to_present_value(self, rho: float) -> "CostatePath":
        """Convert to present-value shadow prices, lambda = exp(-rho t) mu.

        ``paper_literal`` paths are relabelled unchanged: their values enter the
        Hamiltonian in the same slot as present-value prices.
        """
        if self.mode == "current_value":
            vals = np.exp(-rho * self.times)[:, None] * self.values
            return CostatePath(self.times, vals, "present_value")
        return CostatePath(self.times, self.values, "present_value")

    def to_current_value(self, rho: float) -> "CostatePath":
        if self.mode == "current_value":
            return self
        if self.mode != "present_value":
            raise ContractError("only present-value paths convert to current value")
        vals = np.exp(rho * self.times)[:, None] * self.values
        return CostatePath(self.times, vals, "current_value")


@dataclass(frozen=True)
class ControlPath:
    times: np.ndarray
    values: np.ndarray  # (T,) scalar mode or (T, N) allocation mode
    mode: str
    y_max: float

    @property
    def scalar(self) -> bool:
        return self.mode == "scalar_bounded"

    def within_bounds(self, tol: float = 1e-12) -> bool:
        v = self.values
        if np.any(v < -tol):
            return False
        total = v if self.scalar else v.sum(axis=1)
        return bool(np.all(total <= self.y_max * (1 + tol) + tol))


@dataclass
class TrajectoryBundle:
    times: np.ndarray
    state: np.ndarray  # (T, N)
    costate: CostatePath
    control: ControlPath
    utility_integral: float
    running_utility: np.ndarray  # cumulative discounted utility on the grid
    hamiltonian_residual: np.ndarray
    iterations: int
    converged: bool
    final_change: float
    utility_history: list[float] = field(default_factory=list)
    clamp_events: int = 0
    rho: float = 0.0

    @property
    def n(self) -> int:
        return self.state.shape[1]
