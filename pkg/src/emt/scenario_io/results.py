"""Result files: trajectory table, alignment-gap table, certificate report, manifest."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from emt.errors import EMTError

TRAJECTORY_FILE = "trajectory.csv"
ALIGNMENT_FILE = "alignment.csv"
CERTIFICATE_FILE = "certificates.txt"
MANIFEST_FILE = "manifest.json"


class ResultIOError(EMTError, OSError):
    pass


def fmt(v: float) -> str:
    """17 significant digits: exact round-trip for binary64."""
    return format(float(v), ".17g")


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def trajectory_columns(n: int, scalar: bool) -> list[str]:
    cols = ["t"] + [f"x_{i}" for i in range(1, n + 1)] + [f"costate_{i}" for i in range(1, n + 1)]
    cols += ["control"] if scalar else [f"y_{i}" for i in range(1, n + 1)]
    return cols + ["discounted_utility"]


def trajectory_rows(bundle) -> np.ndarray:
    ctrl = bundle.control.values
    ctrl = ctrl[:, None] if ctrl.ndim == 1 else ctrl
    return np.column_stack([bundle.times, bundle.state, bundle.costate.values, ctrl,
                            bundle.running_utility])


def write_table(path: Path, columns: Sequence[str], rows: np.ndarray) -> None:
    lines = [",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in np.asarray(rows, dtype=float)]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ResultIOError(f"cannot write {path}: {exc}") from exc


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a comma-separated table with a mandatory header row."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ResultIOError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.split("\n") if ln]
    if not lines:
        raise ResultIOError(f"{path}: empty table")
    header = lines[0].split(",")
    if not header or header[0] != "t":
        raise ResultIOError(f"{path}: header must start with 't'")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ResultIOError(f"{path}:{i}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ResultIOError(f"{path}:{i}: {exc}") from exc
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def format_certificate(cert) -> str:
    wit = " ".join(f"{k}={fmt(v)}" for k, v in cert.witness.items())
    parts = [f"name={cert.name}", f"passed={'true' if cert.passed else 'false'}",
             f"tolerance={fmt(cert.tolerance)}"]
    if wit:
        parts.append(wit)
    if cert.notes:
        parts.append("notes=" + json.dumps(cert.notes))
    return " ".join(parts)


def write_results(
    out_dir,
    scenario_text: str,
    seed: int,
    bundle=None,
    certificates: Iterable = (),
    alignment: tuple[Sequence[str], np.ndarray] | None = None,
    overrides: Sequence[str] = (),
    extra: dict | None = None,
) -> list[Path]:
    """Write the result set for one run and return the paths written.

    The manifest records the SHA-256 of the scenario text, the seed, any overrides and the
    SHA-256 of every other file, and nothing time- or host-dependent.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ResultIOError(f"cannot create output directory {out}: {exc}") from exc
    written: list[Path] = []
    if bundle is not None:
        p = out / TRAJECTORY_FILE
        write_table(p, trajectory_columns(bundle.n, bundle.control.scalar), trajectory_rows(bundle))
        written.append(p)
    if alignment is not None:
        p = out / ALIGNMENT_FILE
        write_table(p, alignment[0], alignment[1])
        written.append(p)
    certs = list(certificates)
    if certs:
        p = out / CERTIFICATE_FILE
        text = "\n".join(format_certificate(c) for c in sorted(certs, key=lambda c: c.name)) + "\n"
        try:
            p.write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise ResultIOError(f"cannot write {p}: {exc}") from exc
        written.append(p)
    manifest = {
        "scenario_sha256": sha256_text(scenario_text),
        "seed": int(seed),
        "overrides": list(overrides),
        "files": {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in written},
    }
    if bundle is not None:
        manifest["converged"] = bool(bundle.converged)
        manifest["iterations"] = int(bundle.iterations)
        manifest["utility_integral"] = fmt(bundle.utility_integral)
    if extra:
        manifest.update(extra)
    p = out / MANIFEST_FILE
    try:
        p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ResultIOError(f"cannot write {p}: {exc}") from exc
    written.append(p)
    return written
