import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from consensus_partition.errors import CapacityError, ParseError, ValidationError
from consensus_partition.partition import (
    HardLabeling,
    LabeledPartition,
    Permutation,
    ensemble_from_dict,
    ensemble_to_dict,
    frobenius_norm,
    hard_labels,
    inner_product,
    is_asymmetric,
    make_hard,
    partition_from_dict,
    partition_length,
    partition_to_dict,
    random_partition,
    random_permutation,
    stabilizer,
)


@st.composite
def soft_partitions(draw, max_ell=5, max_m=8):
    ell = draw(st.integers(1, max_ell))
    m = draw(st.integers(1, max_m))
    raw = draw(arrays(float, (ell, m), elements=st.floats(0.01, 1.0)))
    return LabeledPartition(raw / raw.sum(axis=0))


@st.composite
def partition_and_perms(draw):
    X = draw(soft_partitions())
    p = draw(st.permutations(range(X.ell)))
    q = draw(st.permutations(range(X.ell)))
    return X, Permutation(p), Permutation(q)


class TestMakeHard:
    def test_two_clusters(self):
        assert make_hard([1, 1, 2], 2).values.tolist() == [[1, 1, 0], [0, 0, 1]]

    def test_single_point(self):
        assert make_hard([1], 1).values.tolist() == [[1]]

    def test_empty_cluster_row(self):
        assert make_hard([2, 1], 3).values.tolist() == [[0, 1], [1, 0], [0, 0]]

    @pytest.mark.parametrize("labels", [[0, 1], [1, 3], [-1]])
    def test_label_out_of_range(self, labels):
        with pytest.raises(ValidationError):
            make_hard(HardLabeling(tuple(labels), 2))

    def test_roundtrip_labels(self):
        lab = HardLabeling((3, 1, 1, 2), 4)
        assert hard_labels(make_hard(lab)) == lab


class TestLabeledPartitionInvariants:
    def test_rejects_row_stochastic_only(self):
        with pytest.raises(ValidationError, match="column 0"):
            LabeledPartition([[0.5, 0.5], [0.2, 0.8]])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            LabeledPartition([[1.5, 0.5], [-0.5, 0.5]])

    def test_immutable(self):
        X = make_hard([1, 2], 2)
        with pytest.raises(ValueError):
            X.values[0, 0] = 0.5


class TestInnerProductAndNorm:
    def test_inner_product_running_pair(self, running_pair):
        X, Y = running_pair
        assert inner_product(X, Y) == 2

    def test_inner_product_hard_self(self):
        X = make_hard([1, 2, 2, 3, 1], 3)
        assert inner_product(X, X) == 5

    def test_inner_product_uniform(self):
        X = LabeledPartition([[0.5, 0.5], [0.5, 0.5]])
        assert inner_product(X, X) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            inner_product(make_hard([1, 2], 2), make_hard([1, 2, 1], 2))

    def test_norms(self):
        assert frobenius_norm(make_hard([1, 1, 2], 2)) == pytest.approx(math.sqrt(3))
        assert frobenius_norm(LabeledPartition([[0.5, 0.5], [0.5, 0.5]])) == pytest.approx(1.0)
        assert partition_length(make_hard([1, 1, 2], 2)) == pytest.approx(math.sqrt(3))
        assert partition_length(LabeledPartition(np.eye(2))) == pytest.approx(math.sqrt(2))

    def test_length_is_representation_independent(self, rng):
        for _ in range(20):
            X = random_partition(4, 7, rng)
            P = random_permutation(4, rng)
            assert partition_length(P.apply(X)) == pytest.approx(partition_length(X), abs=1e-12)

    def test_length_equals_norm(self, rng):
        for _ in range(1000):
            X = random_partition(int(rng.integers(1, 6)), int(rng.integers(1, 10)), rng)
            assert abs(partition_length(X) - frobenius_norm(X)) < 1e-12


class TestPermutationAction:
    def test_rejects_non_bijection(self):
        with pytest.raises(ValidationError):
            Permutation((0, 0, 1))

    def test_apply_matches_matrix(self, rng):
        X = random_partition(4, 6, rng)
        P = random_permutation(4, rng)
        np.testing.assert_allclose(P.apply(X).values, P.matrix() @ X.values)

    @given(partition_and_perms())
    def test_action_is_isometric_and_associative(self, data):
        X, P, Q = data
        assert frobenius_norm(P.apply(X)) == pytest.approx(frobenius_norm(X), abs=1e-12)
        lhs = P.compose(Q).apply(X)
        rhs = P.apply(Q.apply(X))
        assert lhs.equals(rhs)
        np.testing.assert_allclose(lhs.values.sum(axis=0), 1.0, atol=1e-9)

    @given(partition_and_perms())
    def test_inverse(self, data):
        X, P, _ = data
        assert P.inverse().apply(P.apply(X)).equals(X)
        assert P.compose(P.inverse()).is_identity()


class TestStabilizer:
    def test_distinct_rows(self):
        S = stabilizer(make_hard([1, 1, 2], 2))
        assert S == [Permutation.identity(2)]

    def test_equal_rows_swap(self):
        S = stabilizer(LabeledPartition([[0.5, 0.5], [0.5, 0.5]]))
        assert set(S) == {Permutation((0, 1)), Permutation((1, 0))}

    def test_random_soft_are_asymmetric(self, rng):
        for _ in range(100):
            assert is_asymmetric(random_partition(int(rng.integers(2, 6)), 5, rng))

    def test_uniform_matrix_symmetric(self):
        for ell in range(2, 6):
            X = LabeledPartition(np.full((ell, 4), 1.0 / ell))
            assert not is_asymmetric(X)
            assert len(stabilizer(X)) == math.factorial(ell)

    def test_hard_distinct_clusters_asymmetric(self):
        assert is_asymmetric(make_hard([1, 2, 3, 3, 2], 3))

    def test_empty_clusters_are_interchangeable(self):
        # two empty rows can be swapped
        assert len(stabilizer(make_hard([1, 1, 2], 4))) == 2

    def test_subgroup(self, rng):
        X = make_hard([1, 1, 2, 2, 3, 3], 5)  # rows 4 and 5 empty, rows 1-3 distinct
        S = set(stabilizer(X))
        assert Permutation.identity(5) in S
        for a, b in itertools.product(S, S):
            assert a.compose(b) in S
            assert a.inverse() in S

    def test_conjugacy(self, rng):
        for _ in range(20):
            X = random_partition(3, 4, rng, kind="hard")
            P = random_permutation(3, rng)
            assert is_asymmetric(X) == is_asymmetric(P.apply(X))
            assert len(stabilizer(X)) == len(stabilizer(P.apply(X)))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            stabilizer(make_hard(list(range(1, 10)), 9))


class TestFileFormat:
    def test_hard_roundtrip(self):
        X = make_hard([2, 1, 2], 3)
        d = partition_to_dict(X)
        assert d == {"ell": 3, "m": 3, "kind": "hard", "labels": [2, 1, 2]}
        assert partition_from_dict(d).equals(X)

    def test_soft_roundtrip(self, rng):
        X = random_partition(3, 5, rng)
        assert partition_from_dict(partition_to_dict(X)).equals(X)

    def test_ensemble_roundtrip(self, rng):
        sample = [random_partition(2, 4, rng, kind) for kind in ("hard", "soft", "hard")]
        back = ensemble_from_dict(ensemble_to_dict(sample))
        assert all(a.equals(b) for a, b in zip(sample, back))

    @pytest.mark.parametrize(
        "bad, field",
        [
            ({"m": 2, "kind": "hard", "labels": [1, 1]}, "ell"),
            ({"ell": 2, "m": 2, "kind": "fuzzy"}, "kind"),
            ({"ell": 2, "m": 2, "kind": "hard", "labels": [1, 5]}, "labels"),
            ({"ell": 2, "m": 2, "kind": "soft", "values": [[1, 1], [1, 1]]}, "values"),
            ({"ell": 2, "m": 3, "kind": "soft", "values": [[1, 0], [0, 1]]}, "values"),
        ],
    )
    def test_parse_errors_name_field(self, bad, field):
        with pytest.raises(ParseError) as exc:
            partition_from_dict(bad)
        assert exc.value.field == field
