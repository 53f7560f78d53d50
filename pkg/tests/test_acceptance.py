"""Acceptance suite: one test per criterion, over the full desk-scale corpus.

The corpus ({path, cycle, grid, random tree, K_n, 20 seeded connected G(n,p)}
for n in {16..256}) is built once per session in a worker pool; each test
then audits one family of claims over every run at zero tolerance and prints
a single PASS/FAIL summary line. Round-count regression compares against the
constants committed in calibration.json (regenerate them with
``python3 tests/test_acceptance.py calibrate`` after intentional protocol
changes).
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import corpus
from congestspan.exact import count_le_pow

CALIBRATION_FILE = Path(__file__).parent / "calibration.json"
_cache = {}


def _pool_size() -> int:
    env = os.environ.get("CONGESTSPAN_WORKERS")
    return int(env) if env else (os.cpu_count() or 2)


def _run_all(kind: str):
    if kind in _cache:
        return _cache[kind]
    makers = {
        "builds": (corpus.build_tasks, corpus.run_build_point),
        "ruling": (corpus.ruling_tasks, corpus.run_ruling_point),
        "superruling": (corpus.supergraph_ruling_tasks,
                        corpus.run_supergraph_ruling_point),
    }
    task_fn, work_fn = makers[kind]
    tasks = task_fn()
    with Pool(processes=min(_pool_size(), len(tasks))) as pool:
        rows = pool.map(work_fn, tasks, chunksize=4)
    _cache[kind] = rows
    return rows


@pytest.fixture(scope="module")
def builds():
    return _run_all("builds")


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")


def test_criterion_1_polylog_exact_bounds(builds):
    rows = [r for r in builds if r["alg"] == "polylog"]
    bad = []
    for r in rows:
        size_ok = count_le_pow(r["spanner_edges"], r["n"],
                               Fraction(r["kappa"] + 1, r["kappa"]))
        stretch_ok = (r["max_stretch"] is not None
                      and r["max_stretch"] <= r["stretch_bound"])
        if not (size_ok and stretch_ok):
            bad.append((r["name"], r["n"], r["kappa"],
                        r["spanner_edges"], r["max_stretch"], r["stretch_bound"]))
    _report("1 polylog size+stretch", not bad,
            f"{len(rows)} builds, {len(bad)} violations")
    assert not bad, bad[:5]


def test_criterion_2_sparse_exact_bounds(builds):
    rows = [r for r in builds if r["alg"] == "sparse"]
    bad = []
    for r in rows:
        extra = r["spanner_edges"] - r["n"]
        size_ok = extra <= 0 or count_le_pow(extra, r["n"],
                                             Fraction(r["kappa"] + 1, r["kappa"]))
        stretch_ok = (r["max_stretch"] is not None
                      and r["max_stretch"] <= r["stretch_bound"])
        p_ell_ok = count_le_pow(r["final_clusters"], r["n"], corpus._rho(r["rho"]))
        if not (size_ok and stretch_ok and p_ell_ok):
            bad.append((r["name"], r["n"], r["kappa"], r["rho"],
                        r["spanner_edges"], r["max_stretch"],
                        r["final_clusters"]))
    _report("2 sparse size+stretch+final-clusters", not bad,
            f"{len(rows)} builds, {len(bad)} violations")
    assert not bad, bad[:5]


def test_criterion_3_skeleton_linear_size(builds):
    rows = [r for r in builds
            if r["alg"] == "sparse" and r["n"] >= 64
            and r["kappa"] == corpus.sparse.skeleton_kappa(r["n"])]
    bad = [(r["name"], r["n"], r["rho"], r["spanner_edges"])
           for r in rows if r["spanner_edges"] > 3 * r["n"]]
    _report("3 skeleton |H| <= 3n", not bad,
            f"{len(rows)} skeleton builds, {len(bad)} violations")
    assert rows and not bad, bad[:5]


def test_criterion_4_ruling_set_guarantee():
    rows = _run_all("ruling")
    bad = [r for r in rows if not r["ok"]]
    super_rows = _run_all("superruling")
    super_bad = [r for r in super_rows if not r["ok"]]
    _report("4 ruling sets", not bad and not super_bad,
            f"{len(rows)} base + {len(super_rows)} supergraph instances, "
            f"{len(bad) + len(super_bad)} violations")
    assert len(rows) == 100 and len(super_rows) == 20
    assert not bad, bad[:5]
    assert not super_bad, super_bad[:5]


PHASE_VERDICTS = ("radius", "partition", "popular_superclustered", "charges",
                  "phase_counts", "ruling")


def test_criterion_5_phase_invariants(builds):
    bad = [(r["name"], r["n"], r["alg"], r["kappa"], r["rho"], r["failures"],
            r["failure_details"])
           for r in builds if any(f in PHASE_VERDICTS for f in r["failures"])]
    _report("5 phase invariants", not bad,
            f"{len(builds)} builds, {len(bad)} violations")
    assert not bad, bad[:3]


def test_criterion_6_congestion_compliance(builds):
    bad = [(r["name"], r["n"], r["alg"], r["failures"]) for r in builds
           if "congestion" in r["failures"] or r["max_ids"] > 2]
    _report("6 congestion + broadcast compliance", not bad,
            f"{len(builds)} builds, {len(bad)} violations")
    assert not bad, bad[:5]


def test_criterion_7_round_regression(builds):
    if not CALIBRATION_FILE.exists():
        pytest.fail("calibration.json missing; run "
                    "'python3 tests/test_acceptance.py calibrate'")
    cal = json.loads(CALIBRATION_FILE.read_text())
    slack = 1.10
    bad = []
    for r in builds:
        if r["alg"] == "polylog":
            cap = cal["polylog_K"] * corpus.polylog_round_model(r["n"], r["kappa"])
        else:
            cap = cal["sparse_K"] * corpus.sparse_round_model(
                r["n"], r["kappa"], r["rho"])
        if r["rounds"] > slack * cap:
            bad.append((r["name"], r["n"], r["alg"], r["kappa"], r["rho"],
                        r["rounds"], cap))
    _report("7 round regression", not bad,
            f"{len(builds)} builds vs K1={cal['polylog_K']}, "
            f"K2={cal['sparse_K']}, {len(bad)} over budget")
    assert not bad, bad[:5]


ORACLE_VERDICTS = ("supercluster_oracle", "knowledge_oracle")


def test_criterion_8_oracle_equivalence(builds):
    small = [r for r in builds if r["n"] <= 64]
    bad = [(r["name"], r["n"], r["alg"], r["failures"]) for r in small
           if any(f in ORACLE_VERDICTS for f in r["failures"])]
    _report("8 oracle equivalence (n <= 64)", not bad,
            f"{len(small)} small builds, {len(bad)} mismatches")
    assert small and not bad, bad[:5]


def calibrate() -> None:
    """Run the full corpus and commit fresh regression constants."""
    rows = _run_all("builds")
    ratios_p, ratios_s = [], []
    for r in rows:
        if r["alg"] == "polylog":
            ratios_p.append(r["rounds"] / corpus.polylog_round_model(r["n"], r["kappa"]))
        else:
            ratios_s.append(r["rounds"] / corpus.sparse_round_model(
                r["n"], r["kappa"], r["rho"]))
    cal = {
        "polylog_K": round(max(ratios_p) + 1e-9, 6),
        "sparse_K": round(max(ratios_s) + 1e-9, 6),
        "corpus_builds": len(rows),
    }
    CALIBRATION_FILE.write_text(json.dumps(cal, indent=2) + "\n")
    print(f"wrote {CALIBRATION_FILE}: {cal}")


if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "calibrate":
        calibrate()
    else:
        print(__doc__)
