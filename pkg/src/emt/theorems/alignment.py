"""Ideal vs delivered experiential paths.

The ideal path runs the economy with perfect alignment (a(t) = 1); the delivered path uses
the actual efficiency a(t) = 1/(1 + c0 exp(-lambda t)). Both are driven by the same control.
"""

from __future__ import annotations

import numpy as np

from emt.control.integrate import integrate_forward
from emt.needspace import utility_values


def _ones(t):
    return np.ones_like(np.asarray(t, dtype=float))


def alignment_pair(bundle, econ, x0=None) -> tuple[np.ndarray, np.ndarray]:
    """Return (ideal, delivered) state paths on the bundle's grid."""
    x0 = econ.x0 if x0 is None else x0
    scalar = bundle.control.scalar
    ideal, _ = integrate_forward(x0, bundle.control.values, bundle.times, econ, scalar, efficiency=_ones)
    delivered, _ = integrate_forward(x0, bundle.control.values, bundle.times, econ, scalar)
    return ideal, delivered


def gap_series(ideal: np.ndarray, delivered: np.ndarray) -> np.ndarray:
    """Sup-norm distance between the two paths at every grid time."""
    return np.max(np.abs(ideal - delivered), axis=1)


def alignment_table(times, ideal, delivered, w, k_star, lam):
    """Columns for the alignment file: gap, its envelope and both utilities."""
    cols = ["t", "gap", "envelope", "utility_ideal", "utility_delivered"]
    rows = np.column_stack([
        times,
        gap_series(ideal, delivered),
        k_star * np.exp(-lam * times),
        utility_values(w, ideal),
        utility_values(w, delivered),
    ])
    return cols, rows
