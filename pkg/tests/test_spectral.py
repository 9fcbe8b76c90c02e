import itertools
import math

import numpy as np
import pytest

from byzshield.assignment import build_mols_assignment, build_ramanujan_assignment
from byzshield.spectral import (
    check_tanner_expansion,
    compute_bounds,
    compute_spectrum,
    distortion_bound,
    expansion_bound,
    group_multiplicities,
    lemma_spectrum,
)
from byzshield.verify import small_graphs


def test_frc_spectrum(frc153):
    rep = compute_spectrum(frc153)
    assert rep.eigenvalues == ((1.0, 5), (0.0, 10))
    assert rep.mu1 == 1.0


def test_mols_5_3_spectrum(mols53):
    rep = compute_spectrum(mols53)
    vals = [v for v, _ in rep.eigenvalues]
    assert [m for _, m in rep.eigenvalues] == [1, 12, 2]
    assert vals == pytest.approx([1.0, 1 / 3, 0.0], abs=1e-12)
    assert rep.mu1 == pytest.approx(1 / 3)
    assert rep.is_ramanujan


@pytest.mark.parametrize("g", small_graphs(), ids=lambda g: f"{g.scheme.value}-{g.K}-{g.f}")
def test_lemma_closed_form(g):
    got = compute_spectrum(g).flat()
    want = np.array([v for v, m in lemma_spectrum(g) for _ in range(m)])
    assert got.shape == want.shape
    assert np.max(np.abs(got - want)) <= 1e-9


def test_bounds_hand_values(mols53):
    # mu1 = 1/3, l = 5, r = 3, K = 15, q = 2
    b = compute_bounds(mols53, 2)
    assert b.beta == pytest.approx(150 / 19, rel=1e-12)
    assert b.gamma == pytest.approx(40 / 19, rel=1e-12)


def test_bound_edge_cases():
    assert distortion_bound(0, 5, 3, 15, 1 / 3) == 0.0
    assert math.isinf(distortion_bound(3, 1, 1, 15, 1.0))
    assert expansion_bound(15, 5, 3, 15, 1 / 3) == pytest.approx(25.0)


def test_tanner_all_triples(mols53):
    mu1 = compute_spectrum(mols53).mu1
    assert all(check_tanner_expansion(mols53, S, mu1) for S in itertools.combinations(range(15), 3))


def test_tanner_matches_direct_count(mols73):
    mu1 = compute_spectrum(mols73).mu1
    rng = np.random.default_rng(0)
    for _ in range(50):
        S = rng.choice(mols73.K, size=int(rng.integers(1, mols73.K)), replace=False)
        touched = np.flatnonzero(mols73.biadjacency[S].sum(axis=0) > 0).size
        assert touched >= expansion_bound(len(S), 7, 3, 21, mu1) - 1e-9
        assert check_tanner_expansion(mols73, S, mu1)


def test_group_multiplicities():
    assert group_multiplicities([1.0, 1.0 - 1e-12, 0.5, 0.0]) == [(pytest.approx(1.0), 2), (0.5, 1), (0.0, 1)]


def test_mols_and_ramanujan1_share_spectrum():
    a = compute_spectrum(build_mols_assignment(5, 3)).flat()
    b = compute_spectrum(build_ramanujan_assignment(3, 5)).flat()
    assert np.allclose(a, b, atol=1e-12)
