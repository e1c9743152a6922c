"""Acceptance criteria, each run at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are printed together at the end of
the pytest run (see ``conftest.pytest_terminal_summary``) and also to stdout.
"""

import filecmp
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import ACCEPTANCE, SCENARIOS
from emt.cli import main
from emt.control import lq_steady_state, solve
from emt.theorems import (
    FrontierState,
    alignment_pair,
    check_bounded_error,
    check_convergence_rate,
    check_costate_equivalence,
    check_frontier_expansion,
    check_full_employment_grid,
    check_gradient_fd,
    check_holder_paths,
    check_holder_random,
    check_horizon_insensitivity,
    check_irreversibility,
    check_meaning_irreducibility,
    check_stationarity,
    check_steady_state,
    gap_series,
)
from emt.theorems.checks import attainable_levels
from emt.theorems.suite import check_unemployment_family
from emt.scenario_io import SplitMix64

DEMO = str(SCENARIOS / "demo.emt")


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[n] = line
    print(line)


@pytest.fixture(scope="module")
def verify_runs(tmp_path_factory):
    """Two independent `verify` runs of the demo scenario (criteria 9 and 10)."""
    root = tmp_path_factory.mktemp("verify")
    out = []
    for name in ("first", "second"):
        t0 = time.perf_counter()
        code = main(["verify", "--scenario", DEMO, "--out", str(root / name)])
        out.append((root / name, code, time.perf_counter() - t0))
    return out


def test_01_convergence(demo):
    t0 = time.perf_counter()
    econ = demo.economy()
    bundle = solve(econ, demo.solver)
    ideal, delivered = alignment_pair(bundle, econ)
    env = check_bounded_error(bundle.times, ideal, delivered, econ.k, econ.ideation.lambda_decay)
    rate = check_convergence_rate(bundle.times, gap_series(ideal, delivered), econ.ideation.lambda_decay,
                                  rel_tol=0.05)
    elapsed = time.perf_counter() - t0
    ok = env.passed and rate.passed and elapsed < 5.0
    record(1, "convergence envelope and rate", ok,
           f"N={econ.n} envelope excess={env.witness['max_violation']:.3g}, fitted rate="
           f"{rate.witness['fitted_rate']:.4f} (lambda=0.5, rel err {rate.witness['rel_error']:.2%}), {elapsed:.2f}s")
    assert ok


def test_02_holder(demo, demo_bundle, single):
    rand = check_holder_random(demo.n, seed=20261017, draws=1000, tol=1e-12)
    worst = rand.witness["max_violation"]
    ok = rand.passed
    for sc, bundle in ((demo, demo_bundle), (single, solve(single.economy(), single.solver))):
        econ = sc.economy()
        ideal, delivered = alignment_pair(bundle, econ)
        for a, b in ((ideal, delivered), (bundle.state, ideal), (bundle.state, delivered)):
            c = check_holder_paths(econ.w, a, b, tol=1e-12)
            ok &= c.passed
            worst = max(worst, c.witness["max_violation"])
    record(2, "Hoelder utility bound", ok, f"1000 random triples + solver paths, max(lhs-rhs)={worst:.3g} <= 1e-12")
    assert ok


def test_03_pontryagin(demo, demo_bundle, single):
    grads = [check_gradient_fd(sc.economy(), cfg, seed=s, draws=100, h=1e-5, rel_tol=1e-6)
             for sc, cfg, s in ((demo, demo.solver, 1), (demo, replace(demo.solver, control_mode="scalar_bounded"), 2),
                                (single, single.solver, 3))]
    stat = [check_stationarity(demo_bundle, demo.solver.tol),
            check_stationarity(solve(single.economy(), single.solver), single.solver.tol)]
    ok = all(c.passed for c in grads + stat)
    record(3, "Pontryagin consistency", ok,
           f"FD rel err max={max(c.witness['max_rel_error'] for c in grads):.3g} (<1e-6, 100 states each), "
           f"stationarity residual max={max(c.witness['max_residual'] for c in stat):.3g} (<10*tol)")
    assert ok


def test_04_single_need_oracle(single):
    econ, cfg = single.economy(), single.solver
    base = solve(econ, cfg)
    ss = check_steady_state(econ, cfg, base, abs_tol=1e-4)
    hz = check_horizon_insensitivity(econ, cfg, base, rel_tol=1e-3)
    need = econ.needs[0]
    x_star, mu_star = lq_steady_state(need.weight, cfg.rho, need.delta, need.effectiveness, cfg.y_max)
    mid = base.times.size // 2
    at_mid = max(abs(base.state[mid, 0] - x_star), abs(base.costate.values[mid, 0] - mu_star))
    ok = ss.passed and hz.passed and at_mid < 1e-4
    record(4, "single-need oracle", ok,
           f"|x-x*|={ss.witness['x_error']:.2g}, |mu-mu*|={ss.witness['mu_error']:.2g} from T/2 (<1e-4); "
           f"doubling T changes utility by {hz.witness['rel_change']:.2e} (<1e-3)")
    assert ok


def test_05_costate_modes(demo, demo_bundle):
    c = check_costate_equivalence(demo.economy(), demo.solver, current=demo_bundle, rel_tol=1e-6)
    record(5, "co-state mode equivalence", c.passed,
           f"mu vs exp(rho t) lambda rel err={c.witness['equivalence_rel_error']:.2e} (<1e-6); "
           f"paper_literal diverges by {c.witness['paper_literal_divergence']:.3g} (expected)")
    assert c.passed


def test_06_idle_labor_family():
    t0 = time.perf_counter()
    c = check_unemployment_family(seed=20261017, count=200)
    elapsed = time.perf_counter() - t0
    ok = c.passed and elapsed < 10.0 and 0 < c.witness["with_premises"] < 200
    record(6, "idle labor with unmet needs", ok,
           f"200 scenarios, {c.witness['with_premises']:.0f} with both premises, min delta_U="
           f"{c.witness['min_gain']:.3g}, failures={c.witness['failures']:.0f}, {elapsed:.2f}s")
    assert ok


def test_07_frontier_rollback_meaning(demo, demo_bundle):
    econ, cfg = demo.economy(), demo.solver
    base = float(attainable_levels(econ, cfg) @ econ.w)
    events = [(a.weight, a.attain) for a in demo.frontier_adds]
    fr = check_frontier_expansion(events, base, tol=1e-12)
    sups = [base]
    for i in range(len(events)):
        sups.append(base + sum(w * a for w, a in events[: i + 1]))
    strict = all(b > a for a, b in zip(sups, sups[1:]))

    rng = SplitMix64(99)
    roll_ok, roll_err = True, 0.0
    for _ in range(100):
        n = econ.n
        w, x = rng.uniform(0.01, 1, n), rng.uniform(0.01, 1, n)
        k = 1 + rng.integers(0, n)
        idx = np.argsort(rng.random(n), kind="stable")[:k]
        c = check_irreversibility(x, w, idx, tol=1e-12)
        drop = c.witness["utility_before"] - c.witness["utility_after"]
        err = abs(drop - float(np.sum(w[idx] * x[idx])))
        roll_ok &= c.passed and drop > 0 and err <= 1e-12
        roll_err = max(roll_err, err)

    m = check_meaning_irreducibility(econ.w, demo.meaning_index, econ.sat_max, tol=1e-12)
    m_err = abs(m.witness["shortfall"] - econ.w[demo.meaning_index] * econ.sat_max)
    ok = fr.passed and strict and roll_ok and m.passed and m_err <= 1e-12
    record(7, "frontier, rollback, meaning", ok,
           f"{len(events)} adds strictly increasing (accounting err {fr.witness['accounting_error']:.2g}); "
           f"rollback err {roll_err:.2g}; meaning shortfall err {m_err:.2g} (all <=1e-12)")
    assert ok


def test_08_discovery_labor(demo):
    fr = demo.frontier
    state = FrontierState(fr.active_dims, 0.0, fr.discovery_slope)
    assert fr.discovery_slope > 0 and fr.new_weight > 0
    grid = np.linspace(0.0, 2.0 * max(fr.human_labor, 1.0), 10)
    c = check_full_employment_grid(state, grid, fr.new_weight, fr.dt, fr.new_attain)
    ok = c.passed and c.witness["gain_at_zero"] == 0
    record(8, "human labor on discovery", ok,
           f"delta_U(0)={c.witness['gain_at_zero']:.3g}, min increment over 10-point grid={c.witness['min_increment']:.3g}")
    assert ok


def test_09_determinism(verify_runs):
    (a, _, _), (b, _, _) = verify_runs
    names_a = sorted(p.name for p in a.iterdir())
    names_b = sorted(p.name for p in b.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, names_a, shallow=False)
    ok = names_a == names_b and not mismatch and not errors and len(match) == len(names_a)
    record(9, "determinism", ok, f"{len(match)}/{len(names_a)} files byte-identical across two verify runs")
    assert ok


def test_10_full_suite(verify_runs):
    out, code, elapsed = verify_runs[0]
    lines = (out / "certificates.txt").read_text().splitlines()
    failed = [ln.split()[0] for ln in lines if "passed=false" in ln]
    ok = code == 0 and not failed and elapsed < 60.0
    record(10, "full verify on demo", ok,
           f"exit {code}, {len(lines)} certificates, failed={failed or 'none'}, {elapsed:.1f}s (<60s)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
