import numpy as np
import pytest

from consensus_partition.consensus import MultipleAlignment, SolverConfig, mean_partition
from consensus_partition.errors import ValidationError
from consensus_partition.partition import Permutation, make_hard, random_partition
from consensus_partition.profile import (
    Profile,
    motif_purity,
    motif_report,
    motifs_of,
    profile_of,
    truncate,
    write_motif_csv,
)


def _profile(columns):
    return Profile(np.array(columns, dtype=float).T, n=1)


def _random_profile(rng, ell=3, m=12, n=7):
    sample = [random_partition(ell, m, rng, "hard") for _ in range(n)]
    return profile_of(mean_partition(sample, SolverConfig(restarts=2)).alignment)


def test_identical_members_profile():
    X = make_hard([1, 2, 2, 3], 3)
    A = MultipleAlignment.from_permutations([X] * 3, [Permutation.identity(3)] * 3)
    P = profile_of(A)
    np.testing.assert_array_equal(P.values, X.values)
    M = motifs_of(P, 0.9)
    assert M.motifs == ((0,), (1, 2), (3,))
    assert M.covered == frozenset(range(4))


def test_running_pair_profile(running_pair):
    A = MultipleAlignment.from_permutations(list(running_pair), [Permutation.identity(2)] * 2)
    P = profile_of(A)
    np.testing.assert_allclose(P.values[:, 1], [0.5, 0.5])
    M = motifs_of(P, 0.8)
    assert M.motifs == ((0,), (2,))
    assert 1 not in M.covered


@pytest.mark.parametrize(
    "column, expected",
    [((0.85, 0.15), (1, 0)), ((0.6, 0.4), (0, 0)), ((0.8, 0.2), (1, 0))],
)
def test_truncate_columns(column, expected):
    assert tuple(truncate(_profile([column]), 0.8)[:, 0]) == expected


@pytest.mark.parametrize("tau", [0.5, 1.0, 0.3, 1.2])
def test_tau_domain(tau):
    with pytest.raises(ValidationError):
        truncate(_profile([(1.0, 0.0)]), tau)


def test_profile_columns_sum_to_one(rng):
    for _ in range(10):
        P = _random_profile(rng)
        np.testing.assert_allclose(P.values.sum(axis=0), 1.0, atol=1e-12)


def test_hard_profile_on_grid(rng):
    P = _random_profile(rng, n=7)
    np.testing.assert_allclose(P.values * 7, np.round(P.values * 7), atol=1e-12)


def test_motif_structure_and_monotone_coverage(rng):
    for _ in range(50):
        P = _random_profile(rng)
        previous = None
        for tau in (0.55, 0.7, 0.9):
            T = truncate(P, tau)
            assert T.sum(axis=0).max() <= 1
            M = motifs_of(P, tau)
            flat = [j for motif in M.motifs for j in motif]
            assert len(flat) == len(set(flat))
            assert set(flat) == M.covered
            if previous is not None:
                assert M.covered <= previous
            previous = M.covered


def test_purity_and_report(tmp_path):
    P = _profile([(1, 0), (1, 0), (0, 1), (0.5, 0.5)])
    M = motifs_of(P, 0.8)
    assert motif_purity(M, [1, 2, 2, 2]) == [0.5, 1.0]
    report = motif_report(M, 4, [1, 2, 2, 2])
    assert report == {"tau": 0.8, "motifs": [[0, 1], [2]], "uncovered": [3], "purity": [0.5, 1.0]}
    path = tmp_path / "m.csv"
    write_motif_csv(path, M, np.arange(8.0).reshape(4, 2))
    lines = path.read_text().splitlines()
    assert lines[0] == "point_index,x1,x2,motif_id"
    assert lines[-1] == "3,6.0,7.0,-1"
