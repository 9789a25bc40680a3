"""Acceptance suite: one pass/fail line per criterion.

Each test records its outcome in ``conftest.ACCEPTANCE_RESULTS`` (printed in the
terminal summary) and also prints it, so ``pytest -s`` shows the lines inline.
Failing criteria are reported as they are; nothing here is loosened to pass.
"""

import csv
import json
import math
import os
import random
import warnings
from fractions import Fraction as F

import pytest

from conftest import ACCEPTANCE_RESULTS, EXAMPLE_PHI, EIGHT_UNIT_PI, random_population, random_y
from pivotal import (
    build_clustered,
    enumerate_multinomial,
    enumerate_ops,
    enumerate_two_stage,
    exact_variance,
    expected_vhh,
    gabler_summary,
    inclusion_matrix,
    make_population,
    multinomial_variance_formula,
    probability_tree,
    prop2_recursion_check,
    worst_case_variable,
)
from pivotal import cli
from pivotal.errors import DegenerateEigenspace
from pivotal.exact import cluster_totals
from pivotal.experiments import GridSpec, count_grid, enumerate_grid, mc_compare

BATTERY_SIZE = 500
Y_PER_POP = 20
LAMBDA_TOL = 0.001


def record(crit: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((crit, bool(ok), detail))
    print(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="session")
def battery():
    """Fixed-seed random exact populations (N <= 8, n <= 4, assorted grids)."""
    rng = random.Random(20240501)
    return [random_population(rng) for _ in range(BATTERY_SIZE)]


@pytest.fixture(scope="session")
def scan_n3(tmp_path_factory):
    """The n = 3, skip 0.05 scan run through the command line."""
    d = tmp_path_factory.mktemp("scan3")
    out, summ = d / "cases.csv", d / "summary.json"
    assert cli.main(["scan", "--n", "3", "--skip", "0.05", "--out", str(out), "--summary", str(summ)]) == 0
    summary = json.loads(summ.read_text())
    with open(out, newline="") as fh:
        lambdas = [float(r["lambda2"]) for r in csv.DictReader(fh)]
    return summary, lambdas


def _range_ok(lo, hi, want_lo, want_hi):
    return abs(lo - want_lo) <= LAMBDA_TOL and abs(hi - want_hi) <= LAMBDA_TOL


def test_criterion_01_grid_scan_n3(scan_n3):
    s, lambdas = scan_n3
    ok = s["count"] == 24396 == len(lambdas) and _range_ok(s["min_lambda2"], s["max_lambda2"], 0.625, 0.991)
    record(
        1,
        ok,
        f"count={s['count']} (want 24396) lambda2 in [{s['min_lambda2']:.5f}, {s['max_lambda2']:.5f}] "
        f"(want 0.625/0.991 +-0.001) variant={s['variant']} runtime={s['runtime_ms'] / 1000:.1f}s",
    )


def test_criterion_02_grid_scan_n5(tmp_path):
    spec = GridSpec(5, "0.10")
    count = count_grid(spec)
    detail = f"count={count} (want 31998) variant={spec.variant.replace('_', '-')}"
    ok = count == 31998
    if os.environ.get("PIVOTAL_FULL_SCAN"):
        out, summ = tmp_path / "cases.csv", tmp_path / "summary.json"
        assert cli.main(["scan", "--n", "5", "--skip", "0.10", "--out", str(out), "--summary", str(summ)]) == 0
        s = json.loads(summ.read_text())
        ok = ok and _range_ok(s["min_lambda2"], s["max_lambda2"], 0.666, 0.975)
        detail += f" lambda2 in [{s['min_lambda2']:.5f}, {s['max_lambda2']:.5f}] (want 0.666/0.975 +-0.001)"
    else:
        detail += " lambda2 range not run (set PIVOTAL_FULL_SCAN=1 for the full scan)"
    record(2, ok, detail)


def test_criterion_03_never_worse_than_multinomial(battery, scan_n3):
    rng = random.Random(3)
    checked = violations = 0
    for p in battery:
        d = enumerate_ops(p)
        for _ in range(Y_PER_POP):
            y = random_y(rng, p.N)
            checked += 1
            if exact_variance(d, p, y) > multinomial_variance_formula(p, y):
                violations += 1
    _, lambdas = scan_n3
    above = sum(l > 1 for l in lambdas)
    record(
        3,
        violations == 0 and above == 0,
        f"{len(battery)} populations x {Y_PER_POP} y: {violations}/{checked} with V_ops > V_ms; "
        f"{above}/{len(lambdas)} n=3 scan cases with lambda2 > 1",
    )


def test_criterion_04_worked_example_tree():
    root = probability_tree(make_population(EXAMPLE_PHI))
    (h1,) = root.children
    keep, swap = h1.child("duel", 1), h1.child("duel", 2)
    got = {
        "keep u1": keep.prob,
        "keep u2": swap.prob,
        "H2 weights": {c.unit: c.prob for c in keep.children},
        "u3 wins": keep.child("challenger", 3).child("duel", 3).prob,
        "last weights": {c.unit: c.prob for c in keep.child("challenger", 3).child("duel", 4).children},
    }
    want = {
        "keep u1": F(2, 7),
        "keep u2": F(5, 7),
        "H2 weights": {2: F(3, 10) / F(7, 10), 3: F(4, 10) / F(7, 10)},
        "u3 wins": F(1, 2),
        "last weights": {3: F(4, 10) / F(10, 10), 5: F(6, 10) / F(10, 10)},
    }
    record(4, got == want, f"{got}")


def test_criterion_05_first_and_second_order(battery):
    bad = 0
    pops = battery + [make_population(EXAMPLE_PHI), make_population(EIGHT_UNIT_PI)]
    for p in pops:
        im = inclusion_matrix(enumerate_ops(p))
        if im.first != p.pi:
            bad += 1
            continue
        for i in range(p.N):
            if sum(im.second[i][j] for j in range(p.N) if j != i) != (p.n - 1) * im.first[i]:
                bad += 1
                break
    record(5, bad == 0, f"{bad}/{len(pops)} populations violate pi_k or row-sum identities")


def test_criterion_06_two_stage_equivalence():
    p = make_population(EIGHT_UNIT_PI)
    cp = build_clustered(p)
    ops_eq = enumerate_two_stage(cp, "ops").unordered() == enumerate_ops(p).unordered()
    ms_eq = enumerate_two_stage(cp, "ms").unordered() == enumerate_multinomial(p).unordered()
    record(6, ops_eq and ms_eq, f"ops sets equal: {ops_eq}; multinomial counts equal: {ms_eq}")


def test_criterion_07_vhh_identity(battery):
    rng = random.Random(7)
    pops = [p for p in battery if p.n >= 2]
    bad = checked = 0
    for p in pops:
        d = enumerate_ops(p)
        n = p.n
        for _ in range(5):
            y = random_y(rng, p.N)
            v_ops = exact_variance(d, p, y)
            v_ms = multinomial_variance_formula(p, y)
            e = expected_vhh(d, p, y)
            checked += 1
            if e - v_ops != F(n, n - 1) * (v_ms - v_ops) or e < v_ops:
                bad += 1
    record(7, bad == 0 and checked > 0, f"{bad}/{checked} (population, y) pairs break the identity")


def test_criterion_08_decomposition():
    p = make_population(EIGHT_UNIT_PI)
    cp = build_clustered(p)
    cpop, kept = cp.cluster_population()
    d, dc = enumerate_ops(p), enumerate_ops(cpop)
    rng = random.Random(8)
    bad = 0
    for _ in range(Y_PER_POP):
        y = random_y(rng, p.N)
        ct = cluster_totals(cp, y)
        Y = [ct.Y[i - 1] for i in kept]
        if exact_variance(d, p, y) != exact_variance(dc, cpop, Y) + ct.within:
            bad += 1
        if multinomial_variance_formula(p, y) != multinomial_variance_formula(cpop, Y) + ct.within:
            bad += 1
    record(8, bad == 0, f"{bad}/{2 * Y_PER_POP} decomposition mismatches")


def _clustered_battery(rng, size):
    pools = [list(enumerate_grid(GridSpec(n, skip))) for n, skip in
             [(2, "0.25"), (2, "0.1"), (3, "0.2"), (3, "0.1"), (4, "0.1")]]
    return [make_population(rng.choice(rng.choice(pools))) for _ in range(size)]


def test_criterion_09_first_duel_recursion():
    rng = random.Random(9)
    pops = _clustered_battery(rng, 120)
    eq_bad = ineq_bad = 0
    for p in pops:
        y = random_y(rng, p.N)
        ops = prop2_recursion_check(p, y, "ops")
        ms = prop2_recursion_check(p, y, "multinomial")
        eq_bad += ops.lhs != ops.rhs
        ineq_bad += ms.lhs < ms.rhs
    record(9, eq_bad == 0 and ineq_bad == 0,
           f"{len(pops)} clustered populations: {eq_bad} ops inequalities, {ineq_bad} multinomial lhs < rhs")


def test_criterion_10_worst_case_ratio(battery):
    rng = random.Random(10)
    pops = [p for p in battery if p.N >= 2][:120]
    worst_err = 0.0
    exceed = 0
    for p in pops:
        d = enumerate_ops(p)
        s = gabler_summary(inclusion_matrix(d))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateEigenspace)
            Y = [float(x) for x in worst_case_variable(s)]
        ratio = float(exact_variance(d, p, Y)) / float(multinomial_variance_formula(p, Y))
        worst_err = max(worst_err, abs(ratio - s.lambda2))
        for _ in range(Y_PER_POP):
            y = random_y(rng, p.N)
            v_ms = multinomial_variance_formula(p, y)
            if v_ms > 0 and float(exact_variance(d, p, y) / v_ms) > s.lambda2 + 1e-10:
                exceed += 1
    record(10, worst_err <= 1e-8 and exceed == 0 and len(pops) >= 100,
           f"{len(pops)} populations: max |ratio - lambda2| = {worst_err:.2e}; {exceed} random y above lambda2")


def test_criterion_11_monte_carlo():
    p = make_population(EXAMPLE_PHI)
    rep = mc_compare(p, [3, 1, 4, 1, 5], 100_000, seed=1)
    z_ops = abs(rep.var_ops - rep.exact_var_ops) / rep.se_var_ops
    z_ms = abs(rep.var_ms - rep.exact_var_ms) / rep.se_var_ms
    floor = rep.nominal - 3 * rep.coverage_se
    ok = z_ops <= 4 and z_ms <= 4 and rep.coverage >= floor and math.isfinite(rep.coverage)
    record(11, ok, f"V_ops {z_ops:.2f} SE, V_ms {z_ms:.2f} SE from exact; coverage {rep.coverage:.4f} >= {floor:.4f}")
