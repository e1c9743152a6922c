"""Scenario files: a line-oriented ``[section]`` / ``key = value`` format.

Sections: ``[scenario]`` (optional), ``[production]``, ``[ideation]``, ``[solver]``
(optional), ``[factors]`` (optional), one ``[need]`` block per need, an optional
``[frontier]`` block and any number of ``[frontier.add]`` blocks. ``#`` starts a comment.
Overrides (``section.key=value``, ``need.<i>.key=value`` or ``need.*.key=value``) are
applied to the raw key/value blocks before validation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable

from emt.control.config import CONTROL_MODES, COSTATE_MODES, SolverConfig
from emt.economy import (
    SHARE_KINDS,
    Economy,
    FactorAllocation,
    IdeationParams,
    NeedParams,
    ProductionParams,
    cobb_douglas,
)
from emt.errors import EMTError, ScenarioError

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError(f"non-finite number {v!r}")
    return x


def _int(v: str) -> int:
    return int(v, 0)


def _bool(v: str) -> bool:
    try:
        return _BOOL[v.lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {v!r}") from None


def _choice(options):
    def conv(v: str) -> str:
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    return conv


# key -> converter, per section; order here is the canonical emit order
SCHEMA: dict[str, dict[str, object]] = {
    "scenario": {"name": str, "seed": _int, "sat_max": _float, "eta": _float,
                 "share": _choice(SHARE_KINDS), "meaning_index": _int},
    "production": {"tfp": _float, "alpha": _float, "capital": _float, "labor": _float},
    "ideation": {"c0": _float, "lambda_decay": _float},
    "solver": {"rho": _float, "horizon": _float, "steps": _int, "relaxation": _float,
               "tol": _float, "max_iter": _int, "costate_mode": _choice(COSTATE_MODES),
               "control_mode": _choice(CONTROL_MODES), "y_max": _float},
    "factors": {"labor_employed": _float, "labor_idle": _float,
                "capital_employed": _float, "capital_idle": _float},
    "need": {"label": str, "weight": _float, "delta": _float, "desired": _float,
             "effectiveness": _float, "error_bound": _float, "mask": _bool, "initial": _float},
    "frontier": {"discovery_slope": _float, "human_labor": _float, "new_weight": _float,
                 "new_attain": _float, "dt": _float, "active_dims": _int},
    "frontier.add": {"time": _float, "weight": _float, "attain": _float},
}
REPEATED = ("need", "frontier.add")
REQUIRED = {
    "production": ("tfp", "alpha", "capital", "labor"),
    "ideation": ("c0", "lambda_decay"),
    "need": ("weight", "delta"),
    "frontier.add": ("weight", "attain"),
}
DEFAULT_SOLVER = SolverConfig(rho=0.05, horizon=40.0, steps=2000, relaxation=0.5, tol=1e-6,
                              max_iter=500, costate_mode="current_value",
                              control_mode="allocation_simplex", y_max=1.0)


@dataclass
class Block:
    section: str
    line: int
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class FrontierSpec:
    discovery_slope: float = 1.0
    human_labor: float = 1.0
    new_weight: float = 0.1
    new_attain: float = 0.5
    dt: float = 1.0
    active_dims: int = 0


@dataclass(frozen=True)
class FrontierAdd:
    time: float
    weight: float
    attain: float


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    needs: tuple[NeedParams, ...]
    production: ProductionParams
    ideation: IdeationParams
    solver: SolverConfig
    factors: FactorAllocation
    seed: int = 0
    sat_max: float = 1.0
    eta: float = 1.0
    share_kind: str = "saturating"
    meaning_index: int | None = None
    labels: tuple[str, ...] = ()
    frontier: FrontierSpec | None = None
    frontier_adds: tuple[FrontierAdd, ...] = ()

    @property
    def n(self) -> int:
        return len(self.needs)

    def economy(self) -> Economy:
        return Economy(self.needs, self.ideation, sat_max=self.sat_max, eta=self.eta,
                       share_kind=self.share_kind)

    def truncation_tail(self) -> float:
        # every modelled weight is in the file, so nothing lies beyond the truncation
        return 0.0

    def with_solver(self, **kw) -> "ScenarioConfig":
        return replace(self, solver=replace(self.solver, **kw))

    def with_needs(self, needs: Iterable[NeedParams]) -> "ScenarioConfig":
        needs = tuple(needs)
        labels = self.labels if len(self.labels) == len(needs) else tuple(f"need{i + 1}" for i in range(len(needs)))
        return replace(self, needs=needs, labels=labels)


# ---------------------------------------------------------------------------
# lexing

_SECTION = re.compile(r"^\[\s*([A-Za-z_.]+)\s*\]$")


def read_blocks(text: str) -> tuple[list[Block], list[str]]:
    blocks: list[Block] = []
    errors: list[str] = []
    current: Block | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            name = m.group(1).lower()
            if name not in SCHEMA:
                errors.append(f"line {lineno}: unknown section [{name}]")
                current = Block(name, lineno)  # swallow its keys without more noise
                continue
            current = Block(name, lineno)
            blocks.append(current)
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if current is None:
            errors.append(f"line {lineno}: key {key!r} appears before any section")
            continue
        if current.section not in SCHEMA:
            continue
        if key not in SCHEMA[current.section]:
            errors.append(f"line {lineno}: unknown key {key!r} in [{current.section}]")
            continue
        if key in current.values:
            errors.append(f"line {lineno}: duplicate key {key!r} in [{current.section}]")
            continue
        current.values[key] = value
        current.lines[key] = lineno
    for name in SCHEMA:
        if name not in REPEATED and sum(b.section == name for b in blocks) > 1:
            errors.append(f"section [{name}] appears more than once")
    return blocks, errors


def apply_overrides(blocks: list[Block], overrides: Iterable[str]) -> list[str]:
    """Apply ``section.key=value`` overrides in place; returns the problems found."""
    errors = []
    for ov in overrides:
        if "=" not in ov:
            errors.append(f"override {ov!r}: expected KEY=VALUE")
            continue
        path, value = (s.strip() for s in ov.split("=", 1))
        parts = path.lower().split(".")
        if parts[0] in REPEATED or (parts[0] == "frontier" and len(parts) == 4):
            section = "frontier.add" if parts[0] == "frontier" else parts[0]
            rest = parts[2:] if section == "frontier.add" else parts[1:]
            if len(rest) != 2:
                errors.append(f"override {ov!r}: use {section}.<index>.key or {section}.*.key")
                continue
            idx, key = rest
            targets = [b for b in blocks if b.section == section]
            if idx != "*":
                try:
                    targets = [targets[int(idx)]]
                except (ValueError, IndexError):
                    errors.append(f"override {ov!r}: no {section} with index {idx}")
                    continue
        else:
            if len(parts) != 2:
                errors.append(f"override {ov!r}: use section.key")
                continue
            section, key = parts
            if section not in SCHEMA:
                errors.append(f"override {ov!r}: unknown section {section!r}")
                continue
            targets = [b for b in blocks if b.section == section]
            if not targets:
                targets = [Block(section, 0)]
                blocks.append(targets[0])
        if key not in SCHEMA.get(section, {}):
            errors.append(f"override {ov!r}: unknown key {key!r} in [{section}]")
            continue
        for b in targets:
            b.values[key] = value
            b.lines[key] = 0
    return errors


# ---------------------------------------------------------------------------
# validation


def _convert(block: Block, errors: list[str]) -> dict:
    out = {}
    schema = SCHEMA[block.section]
    for key, raw in block.values.items():
        where = f"line {block.lines[key]}" if block.lines.get(key) else "override"
        try:
            out[key] = schema[key](raw)
        except ValueError as exc:
            errors.append(f"{where}: [{block.section}] {key}: {exc}")
    for key in REQUIRED.get(block.section, ()):
        if key not in block.values:
            errors.append(f"[{block.section}] at line {block.line}: missing required key {key!r}")
    return out


def build(blocks: list[Block], errors: list[str] | None = None) -> ScenarioConfig:
    errors = list(errors or [])
    single = {}
    repeated: dict[str, list[dict]] = {s: [] for s in REPEATED}
    for b in blocks:
        vals = _convert(b, errors)
        if b.section in REPEATED:
            repeated[b.section].append(vals)
        else:
            single[b.section] = vals
    for sec in ("production", "ideation"):
        if sec not in single:
            errors.append(f"missing required section [{sec}]")
    if not repeated["need"]:
        errors.append("missing required section [need] (at least one need)")
    if any(e.startswith("missing required section") for e in errors):
        raise ScenarioError(errors)
    # lexing and conversion problems are carried along so the semantic checks below
    # can still report everything else in one pass

    sc = single.get("scenario", {})
    sat_max = sc.get("sat_max", 1.0)
    eta = sc.get("eta", 1.0)
    if not sat_max > 0:
        errors.append("sat_max must be positive")
    if not eta > 0:
        errors.append("eta must be positive")

    pr = single["production"]
    production = _make(ProductionParams, errors, "production",
                       tfp=pr.get("tfp"), alpha=pr.get("alpha"),
                       capital=pr.get("capital"), labor=pr.get("labor"))
    idp = single["ideation"]
    ideation = _make(IdeationParams, errors, "ideation", c0=idp.get("c0"),
                     lambda_decay=idp.get("lambda_decay"))

    fa = single.get("factors", {})
    factors = _make(
        FactorAllocation, errors, "factors",
        labor_employed=fa.get("labor_employed", pr.get("labor", 0.0)),
        labor_idle=fa.get("labor_idle", 0.0),
        capital_employed=fa.get("capital_employed", pr.get("capital", 0.0)),
        capital_idle=fa.get("capital_idle", 0.0),
    )

    needs, labels = [], []
    for i, nv in enumerate(repeated["need"]):
        tag = f"need {i}"
        desired = nv.get("desired", sat_max)
        initial = nv.get("initial", 0.0)
        if desired > sat_max:
            errors.append(f"{tag}: desired {desired} exceeds sat_max {sat_max}")
        if not 0 <= initial <= sat_max:
            errors.append(f"{tag}: initial {initial} outside [0, {sat_max}]")
        need = _make(NeedParams, errors, tag, weight=nv.get("weight"), delta=nv.get("delta"),
                     desired=desired, effectiveness=nv.get("effectiveness", 1.0),
                     error_bound=nv.get("error_bound"), ethics_mask=nv.get("mask", True),
                     initial=initial)
        needs.append(need)
        labels.append(nv.get("label", f"need{i + 1}"))

    mi = sc.get("meaning_index")
    if mi is not None:
        if not 0 <= mi < len(needs):
            errors.append(f"meaning_index {mi} outside [0, {len(needs)})")
        elif needs[mi] is not None and not needs[mi].weight > 0:
            errors.append(f"meaning_index {mi} refers to a need with zero weight")

    sv = single.get("solver", {})
    y_max = sv.get("y_max")
    if y_max is None and production is not None:
        y_max = cobb_douglas(production)
    solver_kw = {f: getattr(DEFAULT_SOLVER, f) for f in DEFAULT_SOLVER.__dataclass_fields__}
    solver_kw.update({k: v for k, v in sv.items()})
    solver_kw["y_max"] = y_max if y_max is not None else DEFAULT_SOLVER.y_max
    probe = object.__new__(SolverConfig)
    for k, v in solver_kw.items():
        object.__setattr__(probe, k, v)
    errors.extend(f"solver: {p}" for p in probe.violations())

    frontier = None
    if "frontier" in single:
        fr = single["frontier"]
        frontier = FrontierSpec(**fr)
        for k in ("discovery_slope", "human_labor", "new_weight", "new_attain", "active_dims"):
            if getattr(frontier, k) < 0:
                errors.append(f"frontier: {k} must be non-negative")
        if not frontier.dt > 0:
            errors.append("frontier: dt must be positive")
        if frontier.new_attain > sat_max:
            errors.append("frontier: new_attain exceeds sat_max")
    adds = []
    for i, av in enumerate(repeated["frontier.add"]):
        add = FrontierAdd(av.get("time", float(i)), av.get("weight", 0.0), av.get("attain", 0.0))
        if add.weight < 0:
            errors.append(f"frontier.add {i}: weight must be non-negative")
        if not 0 <= add.attain <= sat_max:
            errors.append(f"frontier.add {i}: attain outside [0, {sat_max}]")
        adds.append(add)
    if any(b.time > a.time for a, b in zip(adds[1:], adds[:-1])):
        errors.append("frontier.add events must be in non-decreasing time order")

    seed = sc.get("seed", 0)
    if not 0 <= seed < 2**64:
        errors.append(f"seed {seed} is not a 64-bit unsigned integer")

    if errors:
        raise ScenarioError(errors)
    return ScenarioConfig(
        name=sc.get("name", "scenario"),
        needs=tuple(needs),
        production=production,
        ideation=ideation,
        solver=SolverConfig(**solver_kw),
        factors=factors,
        seed=seed,
        sat_max=sat_max,
        eta=eta,
        share_kind=sc.get("share", "saturating"),
        meaning_index=mi,
        labels=tuple(labels),
        frontier=frontier,
        frontier_adds=tuple(adds),
    )


def _make(cls, errors: list[str], tag: str, **kw):
    if any(v is None for k, v in kw.items() if k != "error_bound"):
        return None  # a missing key was already reported
    try:
        return cls(**kw)
    except EMTError as exc:
        errors.append(f"{tag}: {exc}")
        return None


def parse_scenario(text: str, overrides: Iterable[str] = ()) -> ScenarioConfig:
    """Parse and validate scenario text; raises ScenarioError listing every violation."""
    blocks, errors = read_blocks(text)
    errors += apply_overrides(blocks, overrides)
    return build(blocks, errors)


# ---------------------------------------------------------------------------
# emitting


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_scenario(cfg: ScenarioConfig) -> str:
    """Canonical text for a scenario; every default is written out explicitly."""
    out = ["[scenario]"]
    sc = {"name": cfg.name, "seed": cfg.seed, "sat_max": cfg.sat_max, "eta": cfg.eta,
          "share": cfg.share_kind}
    if cfg.meaning_index is not None:
        sc["meaning_index"] = cfg.meaning_index
    out += [f"{k} = {_fmt(v)}" for k, v in sc.items()]
    p = cfg.production
    out += ["", "[production]", f"tfp = {_fmt(p.tfp)}", f"alpha = {_fmt(p.alpha)}",
            f"capital = {_fmt(p.capital)}", f"labor = {_fmt(p.labor)}"]
    out += ["", "[ideation]", f"c0 = {_fmt(cfg.ideation.c0)}",
            f"lambda_decay = {_fmt(cfg.ideation.lambda_decay)}"]
    out += ["", "[solver]"]
    out += [f"{k} = {_fmt(getattr(cfg.solver, k))}" for k in SCHEMA["solver"]]
    f = cfg.factors
    out += ["", "[factors]"] + [f"{k} = {_fmt(getattr(f, k))}" for k in SCHEMA["factors"]]
    for label, n in zip(cfg.labels, cfg.needs):
        out += ["", "[need]", f"label = {label}", f"weight = {_fmt(n.weight)}",
                f"delta = {_fmt(n.delta)}", f"desired = {_fmt(n.desired)}",
                f"effectiveness = {_fmt(n.effectiveness)}"]
        if n.error_bound is not None:
            out.append(f"error_bound = {_fmt(n.error_bound)}")
        out += [f"mask = {_fmt(n.ethics_mask)}", f"initial = {_fmt(n.initial)}"]
    if cfg.frontier is not None:
        out += ["", "[frontier]"]
        out += [f"{k} = {_fmt(getattr(cfg.frontier, k))}" for k in SCHEMA["frontier"]]
    for a in cfg.frontier_adds:
        out += ["", "[frontier.add]", f"time = {_fmt(a.time)}", f"weight = {_fmt(a.weight)}",
                f"attain = {_fmt(a.attain)}"]
    return "\n".join(out) + "\n"
