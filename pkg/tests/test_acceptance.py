"""Acceptance criteria A1-A11, one test each; a summary line per criterion is
printed at the end of the pytest run."""

import csv
import io
import math
import time

import numpy as np
import pytest

from byzshield.aggregation import AggregatorSpec, bulyan, multi_krum
from byzshield.assignment import (
    Scheme,
    build_baseline_assignment,
    build_frc_assignment,
    build_mols_assignment,
    build_ramanujan_assignment,
)
from byzshield.attacks import AttackSpec, choose_byzantines
from byzshield.cli import main
from byzshield.distortion import (
    exact_small_q,
    max_distortion_exhaustive,
    max_distortion_heuristic,
)
from byzshield.errors import Diverged, TooFewOperands
from byzshield.spectral import compute_bounds, compute_spectrum, lemma_spectrum
from byzshield.trainer import Simulation, TrainConfig
from byzshield.verify import small_graphs

from conftest import ACCEPTANCE

EXHAUSTIVE = {}  # (label, q) -> (c_max, gamma), shared with A6


def _report(name, ok, detail, elapsed):
    ACCEPTANCE.append(f"{name} {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}")
    assert ok, detail


def _table(label, graph, qs):
    out = []
    spectrum = compute_spectrum(graph)
    for q in qs:
        gamma = compute_bounds(graph, q, spectrum).gamma
        rep = max_distortion_exhaustive(graph, q, gamma=gamma)
        assert rep.exhaustive
        EXHAUSTIVE[(label, q)] = (rep.c_max, gamma)
        out.append((rep.c_max, gamma))
    return out


def test_a1_table2(capsys):
    t0 = time.perf_counter()
    code = main(["distort", "--scheme", "mols", "--l", "5", "--r", "3", "--qmin", "2", "--qmax", "7", "--round2"])
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    elapsed = time.perf_counter() - t0
    cmax = tuple(int(r["c_max"]) for r in rows)
    eps = [float(r["eps_byzshield"]) for r in rows]
    frc = [float(r["eps_frc"]) for r in rows]
    gam = [float(r["gamma"]) for r in rows]
    want_eps = (0.04, 0.12, 0.2, 0.32, 0.48, 0.56)
    want_frc = (0.2, 0.2, 0.4, 0.4, 0.6, 0.6)
    want_gam = (2.11, 4.29, 6.96, 10, 13.33, 16.9)
    ok = (
        code == 0
        and cmax == (1, 3, 5, 8, 12, 14)
        and all(abs(a - b) <= 0.005 for a, b in zip(eps, want_eps))
        and all(abs(a - b) <= 0.005 for a, b in zip(frc, want_frc))
        and all(abs(a - b) <= 0.005 for a, b in zip(gam, want_gam))
        and elapsed < 10
    )
    _table("mols_5_3", build_mols_assignment(5, 3), range(2, 8))
    _report("A1", ok, f"c_max={cmax} gamma={gam}", elapsed)


def test_a2_table3():
    t0 = time.perf_counter()
    got = _table("ram2_5_5", build_ramanujan_assignment(5, 5), range(3, 13))
    elapsed = time.perf_counter() - t0
    cmax = tuple(c for c, _ in got)
    want_gamma = [compute_bounds(build_ramanujan_assignment(5, 5), q).gamma for q in range(3, 13)]
    ok = cmax == (1, 1, 2, 4, 5, 7, 9, 12, 14, 17) and elapsed < 300
    ok = ok and all(abs(round(g, 2) - round(w, 2)) <= 0.005 for (_, g), w in zip(got, want_gamma))
    _report("A2", ok, f"c_max={cmax}", elapsed)


def test_a3_table5():
    t0 = time.perf_counter()
    got = _table("mols_7_3", build_mols_assignment(7, 3), range(2, 11))
    elapsed = time.perf_counter() - t0
    cmax = tuple(c for c, _ in got)
    _report("A3", cmax == (1, 3, 5, 8, 12, 16, 21, 25, 29) and elapsed < 300, f"c_max={cmax}", elapsed)


def test_a4_table4():
    g = build_mols_assignment(7, 5)
    t0 = time.perf_counter()
    got = _table("mols_7_5", g, range(3, 9))
    elapsed = time.perf_counter() - t0
    cmax = tuple(c for c, _ in got)
    published = dict(zip(range(9, 14), (10, 11, 14, 16, 20)))
    heur = {}
    ok = cmax == (1, 1, 2, 4, 5, 8) and elapsed < 600
    for q, bound in published.items():
        h = max_distortion_heuristic(g, q).c_max
        heur[q] = h
        ok = ok and h <= bound
    # with the default budget q = 9 is enumerable, so the heuristic must reach it
    exact9 = max_distortion_exhaustive(g, 9)
    ok = ok and exact9.exhaustive and exact9.c_max == published[9] and heur[9] == exact9.c_max
    _report("A4", ok, f"exhaustive={cmax} heuristic={tuple(heur.values())} exact9={exact9.c_max}", elapsed)


def test_a5_lemma_spectra():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for g in small_graphs(7):
        got = compute_spectrum(g).flat()
        want = np.array([v for v, m in lemma_spectrum(g) for _ in range(m)])
        err = float(np.max(np.abs(got - want))) if got.shape == want.shape else math.inf
        worst = max(worst, err)
        if err > 1e-9:
            bad.append((g.scheme.value, g.K, g.f))
    _report("A5", not bad, f"{len(small_graphs(7))} graphs, max error {worst:.2e}, bad={bad}", time.perf_counter() - t0)


def test_a6_claims():
    t0 = time.perf_counter()
    labels = {
        "mols_5_3": build_mols_assignment(5, 3),
        "ram2_5_5": build_ramanujan_assignment(5, 5),
        "mols_7_3": build_mols_assignment(7, 3),
        "mols_7_5": build_mols_assignment(7, 5),
    }
    qs = {"mols_5_3": range(2, 8), "ram2_5_5": range(3, 13), "mols_7_3": range(2, 11), "mols_7_5": range(3, 9)}
    violations = []
    for label, g in labels.items():
        if not all((label, q) in EXHAUSTIVE for q in qs[label]):
            _table(label, g, qs[label])
        for q in qs[label]:
            c, gamma = EXHAUSTIVE[(label, q)]
            if c > gamma + 1e-9:
                violations.append((label, q))
    mismatches = []
    for g in small_graphs(7):
        for q in range(g.r + 1):
            got, want = max_distortion_exhaustive(g, q).c_max, exact_small_q(g, q)
            if got != want:
                mismatches.append(f"{g.scheme.value}({g.K},{g.f},{g.l},{g.r}) q={q}: {got} vs {want}")
    detail = f"claim1 violations={violations}; claim2 mismatches={mismatches}"
    _report("A6", not violations and not mismatches, detail, time.perf_counter() - t0)


def test_a7_ramanujan_certification():
    t0 = time.perf_counter()
    graphs = [build_mols_assignment(5, 3), build_ramanujan_assignment(5, 5),
              build_mols_assignment(7, 3), build_mols_assignment(7, 5)]
    worst = []
    for g in graphs:
        rep = compute_spectrum(g)
        worst.append((rep.sigma2, math.sqrt(g.l - 1) + math.sqrt(g.r - 1)))
    ok = all(s <= b + 1e-9 for s, b in worst)
    _report("A7", ok, "sigma2 vs bound " + ", ".join(f"{s:.3f}<={b:.3f}" for s, b in worst), time.perf_counter() - t0)


def test_a8_cross_scheme():
    t0 = time.perf_counter()
    a, b = build_mols_assignment(5, 3), build_ramanujan_assignment(3, 5)
    ca = [max_distortion_exhaustive(a, q).c_max for q in range(2, 8)]
    cb = [max_distortion_exhaustive(b, q).c_max for q in range(2, 8)]
    _report("A8", ca == cb and b.scheme is Scheme.RAMANUJAN_1, f"mols={ca} ram1={cb}", time.perf_counter() - t0)


def test_a9_end_to_end():
    t0 = time.perf_counter()
    g = build_mols_assignment(5, 3)
    byz = choose_byzantines(g, 5)
    cfg = TrainConfig(n=10_000, d=20, b=750, T=500, eta=(1.0, 1.0, 1), seed=0, model="logistic")
    acc = {}
    for kind in ("reversed", "constant"):
        sim = Simulation(g, AttackSpec(kind, byz, constant_value=-100.0, reverse_scale=1.0),
                         AggregatorSpec("cw_median"), cfg)
        sim.run()
        acc[kind] = sim.accuracy()
    sim = Simulation(g, AttackSpec("constant", byz, constant_value=-100.0), AggregatorSpec("mean"), cfg)
    try:
        sim.run()
        acc["mean"] = sim.accuracy()
        mean_ok = acc["mean"] <= acc["constant"] - 0.20
    except Diverged:
        acc["mean"] = "diverged"
        mean_ok = True
    elapsed = time.perf_counter() - t0
    ok = acc["reversed"] >= 0.95 and acc["constant"] >= 0.95 and mean_ok and elapsed < 120
    _report("A9", ok, f"byz={byz} train accuracy {acc}", elapsed)


@pytest.mark.parametrize("threads", [1, 4])
def test_a10_bitwise_equivalence(threads):
    t0 = time.perf_counter()
    cfg = TrainConfig(n=10_000, d=20, b=750, T=100, seed=0, threads=threads)
    traj = {}
    for name, g in (("mols", build_mols_assignment(5, 3)), ("baseline", build_baseline_assignment(15))):
        sim = Simulation(g, AttackSpec(), AggregatorSpec("mean"), cfg)
        ws = []
        for _ in range(cfg.T):
            sim.step()
            ws.append(sim.state.w.tobytes())
        traj[name] = ws
    ok = traj["mols"] == traj["baseline"]
    ACCEPTANCE.append(f"A10 {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f}s) threads={threads}, 100 iterations")
    assert ok


def test_a11_guards():
    t0 = time.perf_counter()
    g = build_mols_assignment(5, 3)
    c6 = max_distortion_exhaustive(g, 5).c_max
    results = []
    try:
        bulyan(np.zeros((g.f, 3)), c6)
        results.append(False)
    except TooFewOperands:
        results.append(True)
    frc = build_frc_assignment(15, 3)
    try:
        multi_krum(np.zeros((frc.f, 3)), 2)
        results.append(False)
    except TooFewOperands:
        results.append(True)
    ok = c6 >= 6 and all(results)
    _report("A11", ok, f"bulyan byz_bound={c6} on 25 files, multi-krum b=2 on {frc.f} groups", time.perf_counter() - t0)
