"""The verify driver: runs every check against one scenario and collects certificates."""

from __future__ import annotations

from functools import cached_property
from typing import Callable

import numpy as np

from emt.control.sweep import solve
from emt.economy import Economy, FactorAllocation, IdeationParams, NeedParams, ProductionParams
from emt.needspace import TOL_ABS
from emt.scenario_io.rng import SplitMix64
from emt.scenario_io.scenario import ScenarioConfig
from emt.theorems import checks, employment, solver_checks
from emt.theorems.alignment import alignment_pair, alignment_table, gap_series
from emt.theorems.certificate import CheckCertificate


class Context:
    """Lazily computed artefacts shared by the checks of one scenario."""

    def __init__(self, scenario: ScenarioConfig):
        self.scenario = scenario
        self.cfg = scenario.solver
        self.econ: Economy = scenario.economy()

    def rng(self, salt: int) -> SplitMix64:
        return SplitMix64(self.scenario.seed).spawn(salt)

    def seed(self, salt: int) -> int:
        return self.rng(salt).next_u64()

    @cached_property
    def bundle(self):
        return solve(self.econ, self.cfg)

    @cached_property
    def pair(self):
        return alignment_pair(self.bundle, self.econ)

    def alignment(self):
        ideal, delivered = self.pair
        return alignment_table(self.bundle.times, ideal, delivered, self.econ.w, float(np.max(self.econ.k)),
                               self.scenario.ideation.lambda_decay)


def _merge(name: str, parts: list[CheckCertificate], tolerance: float) -> CheckCertificate:
    witness = {}
    for p in parts:
        witness.update({f"{p.name}.{k}": v for k, v in p.witness.items()})
    notes = "; ".join(p.notes for p in parts if p.notes)
    return CheckCertificate(name, all(p.passed for p in parts), witness, tolerance, notes)


def _holder(ctx: Context) -> CheckCertificate:
    rnd = checks.check_holder_random(ctx.econ.n, ctx.seed(1), 1000, ctx.econ.sat_max)
    ideal, delivered = ctx.pair
    paths = checks.check_holder_paths(ctx.econ.w, ideal, delivered)
    return _merge("holder", [rnd, paths], TOL_ABS)


def _bounded_error(ctx):
    ideal, delivered = ctx.pair
    return checks.check_bounded_error(ctx.bundle.times, ideal, delivered, ctx.econ.k,
                                      ctx.scenario.ideation.lambda_decay)


def _convergence_rate(ctx):
    ideal, delivered = ctx.pair
    return checks.check_convergence_rate(ctx.bundle.times, gap_series(ideal, delivered),
                                         ctx.scenario.ideation.lambda_decay)


def _utility_convergence(ctx):
    ideal, delivered = ctx.pair
    return checks.check_utility_convergence(ctx.econ.w, ideal, delivered, ctx.econ.sat_max)


def _optimality(ctx):
    return checks.check_asymptotic_optimality(ctx.bundle, ctx.econ, ctx.cfg)


def _stationarity(ctx):
    return checks.check_stationarity(ctx.bundle, ctx.cfg.tol)


def _gradient(ctx):
    return checks.check_gradient_fd(ctx.econ, ctx.cfg, ctx.seed(2))


def _dominance(ctx):
    return checks.check_hamiltonian_dominance(ctx.bundle, ctx.econ, ctx.cfg, ctx.seed(3))


def _costate(ctx):
    return solver_checks.check_costate_equivalence(
        ctx.econ, ctx.cfg, ctx.bundle if ctx.cfg.costate_mode == "current_value" else None)


def _argmax(ctx):
    return solver_checks.check_argmax_invariance(ctx.econ, ctx.cfg, ctx.bundle)


def _steady_state(ctx):
    return solver_checks.check_steady_state(ctx.econ, ctx.cfg,
                                            ctx.bundle if ctx.cfg.costate_mode == "current_value" else None)


def _frontier(ctx):
    sc = ctx.scenario
    base = float(checks.attainable_levels(ctx.econ, ctx.cfg) @ ctx.econ.w)
    return checks.check_frontier_expansion([(a.weight, a.attain) for a in sc.frontier_adds], base)


def _irreversibility(ctx, draws: int = 100):
    rng = ctx.rng(4)
    n = ctx.econ.n
    parts = []
    for _ in range(draws):
        w = rng.uniform(0.01, 1.0, n)
        x = rng.uniform(0.01, ctx.econ.sat_max, n)
        k = 1 + int(rng.integers(0, n))
        order = np.argsort(rng.random(n), kind="stable")
        parts.append(checks.check_irreversibility(x, w, order[:k]))
    terminal = ctx.bundle.state[-1]
    live = np.flatnonzero(ctx.econ.w * terminal > 0)
    if live.size:
        parts.append(checks.check_irreversibility(terminal, ctx.econ.w, live[-1:]))
    worst = max(p.witness["accounting_error"] for p in parts)
    return CheckCertificate("irreversibility", all(p.passed for p in parts),
                            {"max_accounting_error": worst, "cases": len(parts)}, TOL_ABS)


def _meaning(ctx):
    m = ctx.scenario.meaning_index
    note = ""
    if m is None:
        m = int(np.argmax(ctx.econ.w))
        note = f"no meaning_index configured; used the heaviest need ({m})"
    cert = checks.check_meaning_irreducibility(ctx.econ.w, m, ctx.econ.sat_max)
    if note:
        cert = CheckCertificate(cert.name, cert.passed, cert.witness, cert.tolerance,
                                "; ".join(filter(None, [cert.notes, note])))
    return cert


def _unemployment(ctx):
    sc = ctx.scenario
    return employment.check_unemployment(sc.factors, sc.production, ctx.econ, ctx.bundle.state[-1],
                                         float(ctx.bundle.times[-1]))


def random_employment_case(rng: SplitMix64):
    """One member of the seeded scenario family used for the idle-labor check."""
    n = 1 + int(rng.integers(0, 8))
    needs = []
    sat = np.empty(n)
    for i in range(n):
        desired = float(rng.uniform(0.3, 1.0))
        mask = rng.random() < 0.8
        sat[i] = desired if rng.random() < 0.4 else float(rng.uniform(0.0, desired))
        needs.append(NeedParams(weight=float(rng.uniform(0.05, 1.0)), delta=float(rng.uniform(0.1, 2.0)),
                                desired=desired, effectiveness=float(rng.uniform(0.2, 2.0)),
                                ethics_mask=mask, initial=float(sat[i])))
    econ = Economy(tuple(needs), IdeationParams(float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.05, 1.0))))
    prod = ProductionParams(float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.2, 0.8)), 1.0, 1.0)
    idle = 0.0 if rng.random() < 0.3 else float(rng.uniform(0.01, 2.0))
    factors = FactorAllocation(float(rng.uniform(0.1, 3.0)), idle, float(rng.uniform(0.1, 3.0)),
                               0.0 if rng.random() < 0.5 else float(rng.uniform(0.0, 1.0)))
    t = float(rng.uniform(0.0, 20.0))
    return factors, prod, econ, sat, t


def check_unemployment_family(seed: int, count: int = 200) -> CheckCertificate:
    rng = SplitMix64(seed)
    failures = []
    with_premises = 0
    min_gain = np.inf
    for i in range(count):
        factors, prod, econ, sat, t = random_employment_case(rng)
        cert = employment.check_unemployment(factors, prod, econ, sat, t)
        with_premises += int(cert.witness["premises"])
        if cert.witness["premises"]:
            min_gain = min(min_gain, cert.witness["delta_U"])
        if not cert.passed:
            failures.append(i)
    return CheckCertificate("unemployment_family", not failures,
                            {"scenarios": count, "with_premises": with_premises,
                             "min_gain": min_gain if np.isfinite(min_gain) else 0.0,
                             "failures": len(failures)}, 0.0,
                            f"failing members: {failures[:10]}" if failures else "")


def _unemployment_family(ctx):
    return check_unemployment_family(ctx.seed(5))


def _full_employment(ctx):
    fr = ctx.scenario.frontier
    if fr is None:
        return CheckCertificate("full_employment", True, {}, 0.0, "no [frontier] block: vacuous")
    state = employment.FrontierState(fr.active_dims, 0.0, fr.discovery_slope)
    top = max(fr.human_labor, 1.0) * 2.0
    grid = np.linspace(0.0, top, 10)
    return employment.check_full_employment_grid(state, grid, fr.new_weight, fr.dt, fr.new_attain)


SUITE: dict[str, Callable[[Context], CheckCertificate]] = {
    "argmax_invariance": _argmax,
    "asymptotic_optimality": _optimality,
    "bounded_error": _bounded_error,
    "convergence_rate": _convergence_rate,
    "costate_equivalence": _costate,
    "frontier_expansion": _frontier,
    "full_employment": _full_employment,
    "gradient_fd": _gradient,
    "hamiltonian_dominance": _dominance,
    "holder": _holder,
    "irreversibility": _irreversibility,
    "meaning_irreducibility": _meaning,
    "stationarity": _stationarity,
    "unemployment": _unemployment,
    "unemployment_family": _unemployment_family,
    "utility_convergence": _utility_convergence,
}
SINGLE_NEED_ONLY = {"steady_state": _steady_state}


def select(names, suite_filter: str | None) -> list[str]:
    """``None`` selects everything, ``=name`` one exact check, otherwise comma-separated substrings."""
    names = sorted(names)
    if not suite_filter:
        return names
    if suite_filter.startswith("="):
        want = suite_filter[1:]
        return [n for n in names if n == want]
    pats = [p.strip() for p in suite_filter.split(",") if p.strip()]
    return [n for n in names if any(p in n for p in pats)]


def available_checks(scenario: ScenarioConfig) -> dict[str, Callable]:
    out = dict(SUITE)
    if scenario.n == 1:
        out.update(SINGLE_NEED_ONLY)
    return out


def run_suite(scenario: ScenarioConfig, suite_filter: str | None = None, context: Context | None = None):
    """Run the selected checks; certificates come back sorted by name."""
    ctx = context or Context(scenario)
    table = available_checks(scenario)
    names = select(table, suite_filter)
    return [table[n](ctx) for n in names], ctx
