import itertools

import numpy as np
import pytest

from byzshield.attacks import (
    AttackKind,
    AttackSpec,
    BatchStats,
    batch_stats,
    choose_byzantines,
    fabricate,
    optimal_coalitions,
)
from byzshield.distortion import count_distorted
from byzshield.errors import InvalidParams, MissingStats


def test_constant_and_reversed():
    g = np.array([1.0, -2.0, 0.5])
    assert fabricate(AttackSpec(AttackKind.CONSTANT), g).tolist() == [-100.0] * 3
    assert fabricate(AttackSpec("constant", constant_value=3.0), g).tolist() == [3.0] * 3
    assert fabricate(AttackSpec("reversed"), g).tolist() == [-1.0, 2.0, -0.5]
    assert fabricate(AttackSpec("reversed", reverse_scale=100.0), g).tolist() == [-100.0, 200.0, -50.0]


def test_alie_hand_values():
    honest = [[1.0, 2.0], [2.0, 4.0]]
    stats = batch_stats(honest)
    assert stats.mean.tolist() == [1.5, 3.0]
    assert stats.std.tolist() == [0.5, 1.0]
    out = fabricate(AttackSpec("alie", alie_z=1.0), honest[0], stats)
    assert out.tolist() == [2.0, 4.0]
    out = fabricate(AttackSpec("alie", alie_z=0.0), honest[0], stats)
    assert out.tolist() == [1.5, 3.0]
    with pytest.raises(MissingStats):
        fabricate(AttackSpec("alie"), honest[0])


def test_alie_ignores_own_gradient():
    stats = BatchStats(np.zeros(2), np.ones(2))
    spec = AttackSpec("alie", alie_z=2.0)
    assert fabricate(spec, [5.0, 5.0], stats).tolist() == fabricate(spec, [-9.0, 1.0], stats).tolist()


def test_spec_validation(mols53):
    with pytest.raises(InvalidParams):
        AttackSpec("reversed", reverse_scale=0.0)
    with pytest.raises(InvalidParams):
        AttackSpec("constant", byzantine_set=(1, 1))
    spec = AttackSpec("constant", byzantine_set=(5, 0))
    assert spec.byzantine_set == (0, 5) and spec.q == 2
    with pytest.raises(InvalidParams):
        AttackSpec("constant", byzantine_set=(15,)).check_graph(mols53)
    with pytest.raises(ValueError):
        AttackSpec("bogus")


def test_choose_byzantines_is_worst_case(mols53):
    assert choose_byzantines(mols53, 0) == ()
    byz = choose_byzantines(mols53, 3)
    assert count_distorted(mols53, byz) == 3
    first = next(S for S in itertools.combinations(range(15), 3) if count_distorted(mols53, S) == 3)
    assert byz == first
    with pytest.raises(InvalidParams):
        choose_byzantines(mols53, 15)


def test_optimal_coalitions_complete(mols53):
    found = optimal_coalitions(mols53, 2, 1)
    want = [S for S in itertools.combinations(range(15), 2) if count_distorted(mols53, S) == 1]
    assert found == want
    # pairs across different parallel classes share exactly one file
    assert len(found) == 3 * 25
    assert optimal_coalitions(mols53, 0, 0) == [()]
    assert optimal_coalitions(mols53, 7, 14, limit=10) == []
