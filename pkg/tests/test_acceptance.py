"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line in ``RESULTS``; conftest prints them all in
the terminal summary.  The sizing runs are shared between criteria 2, 3 and 5.
"""

import hashlib
from pathlib import Path

import numpy as np
import pytest

import test_sizer
import test_stat_dist
from statsize import generators
from statsize.cli import main, matched_area_comparison
from statsize.mc_oracle import sample_circuit_delays, validate_bound
from statsize.netlist_io import parse_bench, read_bench, write_bench
from statsize.sizer import SizerConfig, optimize
from statsize.ssta_engine import TimingModel
from statsize.timing_graph import build_graph, check_definition, levelize

DATA = Path(__file__).resolve().parents[1] / "src" / "statsize" / "data"

SIZING_BW = 0.004        # c432 and the random DAGs
TWO_PATH_BW = 0.002
ITERATIONS = 200
DAG_SIZES = (100, 125, 150, 175, 200)

RESULTS = {}


def report(key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[key] = line
    print(line)
    assert ok, line


def run_stat(model, iterations=ITERATIONS):
    return optimize(model, SizerConfig(mode="stat", max_iterations=iterations, verify=True))


def ops_ratio(run):
    return run.op_count / run.brute_op_count


@pytest.fixture(scope="module")
def c432_model(library, c432):
    return TimingModel(c432, library, bin_width=SIZING_BW)


@pytest.fixture(scope="module")
def c432_stat(c432_model):
    return run_stat(c432_model)


@pytest.fixture(scope="module")
def dag_runs(library):
    runs = {}
    for n in DAG_SIZES:
        model = TimingModel(parse_bench(generators.random_dag(n, seed=n)), library,
                            bin_width=SIZING_BW)
        runs[n] = run_stat(model)
    return runs


# 1 ----------------------------------------------------------------------------

def test_criterion1_theorem_suite(library):
    checks = [
        test_stat_dist.test_theorem1_convolution_preserves_shift,
        test_stat_dist.test_theorem2_max_of_two_shifted_inputs,
        test_stat_dist.test_theorem3_single_perturbed_input,
        test_stat_dist.test_arbitrary_shape_perturbation_not_amplified,
    ]
    failed = []
    for f in checks:
        try:
            f()
        except AssertionError:
            failed.append(f.__name__)
    try:
        test_sizer.test_theorem4_sound_and_nonincreasing_bound(library)
    except AssertionError:
        failed.append("theorem4")
    ok = not failed and test_stat_dist.N_CASES >= 10_000
    report(1, ok, f"{len(checks) + 1} properties x {test_stat_dist.N_CASES} cases, "
                  f"failed: {failed or 'none'}")


# 2 ----------------------------------------------------------------------------

def test_criterion2_pruned_equals_brute(c432_stat, dag_runs):
    runs = {"c432": c432_stat, **{f"dag{n}": r for n, r in dag_runs.items()}}
    iters = {k: r.iterations for k, r in runs.items()}
    bad = {k: len(r.mismatches) for k, r in runs.items() if r.mismatches}
    ok = not bad and all(i >= ITERATIONS for i in iters.values())
    report(2, ok, f"iterations {iters}, mismatches {bad or 0}")


# 3 ----------------------------------------------------------------------------

def test_criterion3_op_count_ratio(c432_stat, dag_runs):
    recs = c432_stat.records[1:]
    per_iter = np.mean([r.op_count / r.brute_op_count for r in recs])
    total = ops_ratio(c432_stat)
    sizes = np.array(DAG_SIZES, dtype=float)
    ratios = np.array([ops_ratio(dag_runs[n]) for n in DAG_SIZES])
    slope = np.polyfit(sizes, ratios, 1)[0]
    ok = (len(recs) >= 100 and total <= 0.5 and per_iter <= 0.5
          and slope <= 0 and ratios[-1] <= ratios[0])
    trend = ", ".join(f"{n}:{r:.3f}" for n, r in zip(DAG_SIZES, ratios))
    report(3, ok, f"c432 pruned/brute {total:.3f} (per-iteration mean {per_iter:.3f}) "
                  f"over {len(recs)} iterations; DAG ratios {trend}, slope {slope:.2e}")


# 4 ----------------------------------------------------------------------------

def test_criterion4_monte_carlo(library, c432):
    model = TimingModel(c432, library)
    mc = sample_circuit_delays(model, n=100_000, seed=1)
    v = validate_bound(model.ssta(), mc, 0.99)
    c432_ok = v["t_ssta"] >= v["band"][0] and abs(v["gap_fraction"]) <= 0.02

    tree = TimingModel(parse_bench(generators.tree(5)), library, bin_width=0.001)
    tmc = sample_circuit_delays(tree, n=100_000, seed=2)
    tv = validate_bound(tree.ssta(), tmc, 0.99)
    lo, hi = tv["band"]
    tree_ok = lo - tree.bin_width <= tv["t_ssta"] <= hi + tree.bin_width
    report(4, c432_ok and tree_ok,
           f"c432 T_ssta {v['t_ssta']:.5f} T_mc {v['t_mc']:.5f} band {v['band'][0]:.5f}.."
           f"{v['band'][1]:.5f} gap {100 * v['gap_fraction']:.2f}%; "
           f"tree gap {tv['gap']:.5f} within band+bin: {tree_ok}")


# 5 ----------------------------------------------------------------------------

def test_criterion5_stat_beats_det(library, c432_model, c432_stat):
    model = TimingModel(parse_bench(generators.two_path()), library, bin_width=TWO_PATH_BW)
    det = optimize(model, SizerConfig(mode="det", max_iterations=ITERATIONS))
    stat = optimize(model, SizerConfig(mode="stat", max_iterations=ITERATIONS))
    two = matched_area_comparison(det, stat)

    c_det = optimize(c432_model, SizerConfig(mode="det", max_iterations=ITERATIONS))
    big = matched_area_comparison(c_det, c432_stat)
    ok = two["improvement_pct"] >= 2.0 and big["improvement_pct"] >= 0.0
    report(5, ok, f"two-path {two['improvement_pct']:.2f}% at area {two['area']:.4g}; "
                  f"c432 {big['improvement_pct']:.2f}% at area {big['area']:.4g}")


# 6 ----------------------------------------------------------------------------

def _digest(paths):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in paths}


def test_criterion6_determinism(tmp_path):
    digests = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        files = [d / "report.json", d / "curve.csv", d / "log.txt", d / "mc.csv"]
        rc1 = main(["optimize", "c432", "--bin-width", "0.004", "--max-iters", "30", "--verify",
                    "--report", str(files[0]), "--curve", str(files[1]), "--log", str(files[2])])
        rc2 = main(["montecarlo", "c432", "--samples", "20000", "--seed", "3",
                    "-o", str(files[3])])
        assert rc1 == 0 and rc2 == 0
        digests.append(_digest(files))
    report(6, digests[0] == digests[1], f"{len(digests[0])} artifacts compared byte for byte")


# 7 ----------------------------------------------------------------------------

def test_criterion7_parser_roundtrip(c432):
    paths = sorted(DATA.glob("*.bench"))
    bad = []
    for p in paths:
        nl = read_bench(p)
        if parse_bench(write_bench(nl)).structure() != nl.structure():
            bad.append(p.name)
    g = build_graph(c432)
    check_definition(g)
    levelize(g)
    sources = [i for i in range(g.n_nodes) if not g.fanin[i]]
    sinks = [i for i in range(g.n_nodes) if not g.fanout[i]]
    ok = not bad and sources == [g.ns] and sinks == [g.nf]
    report(7, ok, f"round-trip {len(paths) - len(bad)}/{len(paths)} files; c432 acyclic, "
                  f"{len(sources)} source, {len(sinks)} sink")
