"""Invariant checks behind ``byzshield verify``."""

from __future__ import annotations

import itertools
from typing import Iterator, Tuple

import numpy as np

from .aggregation import bulyan, multi_krum
from .assignment import (
    build_frc_assignment,
    build_mols_assignment,
    build_ramanujan_assignment,
)
from .combinatorics import build_mols, is_prime, make_prime_field
from .distortion import exact_small_q, max_distortion_exhaustive
from .errors import TooFewOperands
from .spectral import check_tanner_expansion, compute_bounds, compute_spectrum, lemma_spectrum

Check = Tuple[str, bool, str]

# (graph builder args, q range, reference c_max values)
TABLES = {
    "table2_mols_5_3": (("mols", 5, 3), range(2, 8), (1, 3, 5, 8, 12, 14)),
    "table3_ramanujan2_5_5": (("ram", 5, 5), range(3, 13), (1, 1, 2, 4, 5, 7, 9, 12, 14, 17)),
    "table5_mols_7_3": (("mols", 7, 3), range(2, 11), (1, 3, 5, 8, 12, 16, 21, 25, 29)),
    "table4_mols_7_5": (("mols", 7, 5), range(3, 9), (1, 1, 2, 4, 5, 8)),
}


def small_graphs(max_l: int = 7):
    """Every constructible MOLS / array-code graph with load at most ``max_l``."""
    out = []
    for l in range(3, max_l + 1):
        if not is_prime(l):
            continue
        for r in range(3, l, 2):
            out.append(build_mols_assignment(l, r))
    for s in range(3, max_l + 1):
        if not is_prime(s):
            continue
        for m in range(3, s, 2):
            out.append(build_ramanujan_assignment(m, s))
        for m in range(s, max_l + 1, s):
            out.append(build_ramanujan_assignment(m, s))
    return out


def _graph(spec):
    kind, a, b = spec
    return build_mols_assignment(a, b) if kind == "mols" else build_ramanujan_assignment(a, b)


def _name(g):
    c = g.config
    return f"{c.scheme.value}({c.K},{c.f},{c.l},{c.r})"


def run_checks(full: bool = False, threads: int = 1) -> Iterator[Check]:
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23):
        F = make_prime_field(p)
        ok = all(F.mul(x, F.inv(x)) == 1 for x in range(1, p)) and all(
            F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
            for x in range(p) for y in range(p) for z in range(p)
        )
        yield f"field_axioms_p{p}", ok, ""
        if p > 2:
            fam = build_mols(p, p - 1)
            yield f"mols_degree_{p}", all(sq.is_latin() for sq in fam) and fam.is_mutually_orthogonal(), ""

    for g in small_graphs():
        H = g.biadjacency
        ok = (H.sum(1) == g.l).all() and (H.sum(0) == g.r).all() and g.f * g.r == g.K * g.l
        yield f"biregular_{_name(g)}", bool(ok), ""
        spec = compute_spectrum(g)
        expected = np.array([v for v, m in lemma_spectrum(g) for _ in range(m)])
        err = float(np.max(np.abs(spec.flat() - expected)))
        yield f"lemma_spectrum_{_name(g)}", err <= 1e-9, f"max error {err:.3g}"
        yield f"ramanujan_{_name(g)}", spec.is_ramanujan, f"sigma2={spec.sigma2}"
        for q in range(0, g.r + 1):
            got = max_distortion_exhaustive(g, q, threads=threads).c_max
            want = exact_small_q(g, q)
            yield f"small_q_{_name(g)}_q{q}", got == want, f"exhaustive {got}, closed form {want}"

    g = build_mols_assignment(5, 3)
    mu1 = compute_spectrum(g).mu1
    ok = all(check_tanner_expansion(g, S, mu1) for S in itertools.combinations(range(g.K), 3))
    yield "tanner_expansion_all_triples_mols_5_3", ok, ""

    names = ["table2_mols_5_3"] + (["table3_ramanujan2_5_5", "table5_mols_7_3", "table4_mols_7_5"] if full else [])
    for name in names:
        spec, qs, want = TABLES[name]
        g = _graph(spec)
        got = []
        for q in qs:
            rep = max_distortion_exhaustive(g, q, threads=threads)
            got.append(rep.c_max)
            yield f"{name}_q{q}_below_gamma", rep.c_max <= compute_bounds(g, q).gamma + 1e-9, ""
        yield name, tuple(got) == want, f"got {got}"

    a, b = build_mols_assignment(5, 3), build_ramanujan_assignment(3, 5)
    same = all(
        max_distortion_exhaustive(a, q).c_max == max_distortion_exhaustive(b, q).c_max for q in range(2, 8)
    )
    yield "mols_vs_ramanujan1_5_3", same, ""

    try:
        bulyan(np.zeros((25, 2)), 6)
        yield "bulyan_guard_25_files", False, "no error raised"
    except TooFewOperands:
        yield "bulyan_guard_25_files", True, ""
    frc = build_frc_assignment(15, 3)
    try:
        multi_krum(np.zeros((frc.f, 2)), 2)
        yield "multi_krum_guard_5_groups", False, "no error raised"
    except TooFewOperands:
        yield "multi_krum_guard_5_groups", True, ""
