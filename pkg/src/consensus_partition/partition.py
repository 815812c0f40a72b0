"""Labeled partitions, the relabeling action and symmetry analysis.

A labeled partition of ``m`` points into ``ell`` clusters is stored as an
``ell x m`` membership matrix whose columns sum to one: entry ``(k, j)`` is
the degree of membership of point ``j`` in cluster ``k``.  Row permutations
relabel the clusters without changing the cluster structure, so the
unlabeled partition is the orbit of a matrix under row permutations.

Cluster labels in :class:`HardLabeling` and in the file format are 1-based.
Permutations use 0-based index arrays.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ParseError, ValidationError

COLUMN_SUM_TOL = 1e-9
ENTRY_TOL = 1e-12
STABILIZER_TOL = 1e-12
MAX_ENUMERATION_ELL = 8


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledPartition:
    """An ``ell x m`` column-stochastic membership matrix.

    Instances are immutable; the underlying array is read-only.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValidationError(f"membership matrix must be 2-D, got shape {v.shape}")
        ell, m = v.shape
        if ell < 1 or m < 1:
            raise ValidationError(f"need ell >= 1 and m >= 1, got {ell} x {m}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("membership matrix has non-finite entries")
        if v.min() < -ENTRY_TOL or v.max() > 1 + ENTRY_TOL:
            raise ValidationError("membership degrees must lie in [0, 1]")
        sums = v.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > COLUMN_SUM_TOL)
        if bad.size:
            j = int(bad[0])
            raise ValidationError(
                f"column {j} sums to {sums[j]!r}; every point's memberships must sum to 1"
            )
        object.__setattr__(self, "values", _readonly(v))

    @property
    def ell(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def is_hard(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    def permuted(self, perm: "Permutation") -> "LabeledPartition":
        return perm.apply(self)

    def equals(self, other: "LabeledPartition", tol: float = 0.0) -> bool:
        """Entrywise equality of representations (not of orbits)."""
        if self.shape != other.shape:
            return False
        return bool(np.max(np.abs(self.values - other.values)) <= tol)

    def __repr__(self):
        return f"LabeledPartition(ell={self.ell}, m={self.m})"


@dataclass(frozen=True)
class Permutation:
    """Relabeling of ``ell`` clusters.

    ``mapping[k]`` is the row that row ``k`` of a partition moves to, so
    ``P.apply(X).values[mapping[k]] == X.values[k]``.
    """

    mapping: tuple

    def __post_init__(self):
        mapping = tuple(int(t) for t in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ValidationError(f"mapping {mapping} is not a bijection on 0..{len(mapping) - 1}")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, ell: int) -> "Permutation":
        return cls(tuple(range(ell)))

    @property
    def ell(self) -> int:
        return len(self.mapping)

    def is_identity(self) -> bool:
        return all(k == t for k, t in enumerate(self.mapping))

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self o other``: apply ``other`` first, then ``self``."""
        if other.ell != self.ell:
            raise ValidationError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.mapping[t] for t in other.mapping))

    def inverse(self) -> "Permutation":
        inv = [0] * self.ell
        for k, t in enumerate(self.mapping):
            inv[t] = k
        return Permutation(tuple(inv))

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.ell, self.ell))
        P[list(self.mapping), list(range(self.ell))] = 1.0
        return P

    def apply(self, X: LabeledPartition) -> LabeledPartition:
        if X.ell != self.ell:
            raise ValidationError(f"permutation of size {self.ell} applied to ell={X.ell}")
        out = np.empty_like(X.values)
        out[list(self.mapping)] = X.values
        return LabeledPartition(out)


@dataclass(frozen=True)
class HardLabeling:
    """Crisp assignment of ``m`` points to clusters ``1..ell``."""

    labels: tuple
    ell: int

    def __post_init__(self):
        labels = tuple(int(c) for c in self.labels)
        if int(self.ell) < 1:
            raise ValidationError(f"ell must be >= 1, got {self.ell}")
        if not labels:
            raise ValidationError("a labeling needs at least one point")
        for j, c in enumerate(labels):
            if not 1 <= c <= self.ell:
                raise ValidationError(f"label {c} of point {j} outside 1..{self.ell}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ell", int(self.ell))

    @property
    def m(self) -> int:
        return len(self.labels)


def make_hard(labels: HardLabeling | Sequence[int], ell: int | None = None) -> LabeledPartition:
    """One-hot membership matrix of a crisp labeling.

    >>> make_hard([1, 1, 2], ell=2).values.tolist()
    [[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    """
    if not isinstance(labels, HardLabeling):
        if ell is None:
            raise ValidationError("ell is required when passing raw labels")
        labels = HardLabeling(tuple(labels), ell)
    X = np.zeros((labels.ell, labels.m))
    X[np.asarray(labels.labels) - 1, np.arange(labels.m)] = 1.0
    return LabeledPartition(X)


def hard_labels(X: LabeledPartition) -> HardLabeling:
    """Inverse of :func:`make_hard` for one-hot matrices."""
    if not X.is_hard():
        raise ValidationError("partition is not hard")
    return HardLabeling(tuple(int(k) + 1 for k in np.argmax(X.values, axis=0)), X.ell)


def _check_same_shape(X: LabeledPartition, Y: LabeledPartition) -> None:
    if X.shape != Y.shape:
        raise ValidationError(f"dimension mismatch: {X.shape} vs {Y.shape}")


def inner_product(X: LabeledPartition, Y: LabeledPartition) -> float:
    _check_same_shape(X, Y)
    return float(np.sum(X.values * Y.values))


def frobenius_norm(X: LabeledPartition) -> float:
    return float(np.sqrt(np.sum(X.values * X.values)))


def partition_length(X: LabeledPartition) -> float:
    """Length of the partition represented by ``X``.

    Row permutations only reorder the summands of ``<X, X>``, so the value
    is the same for every representation of the orbit.
    """
    return math.sqrt(inner_product(X, X))


def all_permutations(ell: int) -> Iterable[Permutation]:
    """All permutations of ``ell`` labels in lexicographic mapping order."""
    for p in itertools.permutations(range(ell)):
        yield Permutation(p)


def stabilizer(X: LabeledPartition, tol: float = STABILIZER_TOL) -> list[Permutation]:
    """Every relabeling that leaves the representation ``X`` unchanged.

    Enumerates all ``ell!`` permutations, so ``ell`` is capped at 8.
    """
    if X.ell > MAX_ENUMERATION_ELL:
        raise CapacityError(f"stabilizer enumeration needs ell <= {MAX_ENUMERATION_ELL}, got {X.ell}")
    V = X.values
    fixed = []
    for p in itertools.permutations(range(X.ell)):
        # PX == X  <=>  X[k] == X[p[k]] for every k
        if np.max(np.abs(V - V[list(p)])) <= tol:
            fixed.append(Permutation(p))
    return fixed


def is_asymmetric(X: LabeledPartition, tol: float = STABILIZER_TOL) -> bool:
    return len(stabilizer(X, tol)) == 1


def random_partition(ell: int, m: int, rng: np.random.Generator, kind: str = "soft") -> LabeledPartition:
    """Random membership matrix, for tests and oracle runs.

    ``soft`` columns are drawn from a flat Dirichlet; ``hard`` columns are
    uniformly random one-hot vectors.
    """
    if kind == "soft":
        return LabeledPartition(rng.dirichlet(np.ones(ell), size=m).T)
    if kind == "hard":
        return make_hard(rng.integers(1, ell + 1, size=m), ell)
    raise ValidationError(f"unknown partition kind {kind!r}")


def random_permutation(ell: int, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(rng.permutation(ell)))


# -- file format ------------------------------------------------------------

def partition_to_dict(X: LabeledPartition) -> dict:
    if X.is_hard():
        return {
            "ell": X.ell,
            "m": X.m,
            "kind": "hard",
            "labels": list(hard_labels(X).labels),
        }
    return {"ell": X.ell, "m": X.m, "kind": "soft", "values": X.values.tolist()}


def _require(d, key, where):
    if not isinstance(d, dict):
        raise ParseError(f"{where} must be a JSON object")
    if key not in d:
        raise ParseError(f"{where} is missing a required key", field=key)
    return d[key]


def _as_int(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", field=field)
    return value


def partition_from_dict(d: dict, where: str = "partition") -> LabeledPartition:
    ell = _as_int(_require(d, "ell", where), "ell")
    m = _as_int(_require(d, "m", where), "m")
    kind = _require(d, "kind", where)
    try:
        if kind == "hard":
            labels = _require(d, "labels", where)
            if not isinstance(labels, list) or len(labels) != m:
                raise ParseError(f"{where}: labels must be a list of {m} integers", field="labels")
            for c in labels:
                _as_int(c, "labels")
            return make_hard(HardLabeling(tuple(labels), ell))
        if kind == "soft":
            values = _require(d, "values", where)
            arr = np.asarray(values, dtype=float)
            if arr.shape != (ell, m):
                raise ParseError(f"{where}: values must have shape ({ell}, {m}), got {arr.shape}", field="values")
            return LabeledPartition(arr)
    except ParseError:
        raise
    except (ValidationError, TypeError, ValueError) as exc:
        field = "labels" if kind == "hard" else "values"
        raise ParseError(f"{where}: {exc}", field=field) from exc
    raise ParseError(f"{where}: kind must be 'hard' or 'soft', got {kind!r}", field="kind")


def ensemble_to_dict(sample: Sequence[LabeledPartition]) -> dict:
    if not sample:
        raise ValidationError("cannot serialize an empty ensemble")
    return {
        "ell": sample[0].ell,
        "m": sample[0].m,
        "partitions": [partition_to_dict(X) for X in sample],
    }


def ensemble_from_dict(d: dict) -> list[LabeledPartition]:
    ell = _as_int(_require(d, "ell", "ensemble"), "ell")
    m = _as_int(_require(d, "m", "ensemble"), "m")
    parts = _require(d, "partitions", "ensemble")
    if not isinstance(parts, list) or not parts:
        raise ParseError("ensemble needs a non-empty list of partitions", field="partitions")
    sample = []
    for i, p in enumerate(parts):
        X = partition_from_dict(p, where=f"partitions[{i}]")
        if X.shape != (ell, m):
            raise ParseError(f"partitions[{i}] has shape {X.shape}, ensemble declares ({ell}, {m})", field=f"partitions[{i}]")
        sample.append(X)
    return sample


def dumps(obj) -> str:
    """Canonical JSON text used for every file this package writes."""
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def load_ensemble(path) -> list[LabeledPartition]:
    return ensemble_from_dict(load_json(path))


def save_ensemble(path, sample: Sequence[LabeledPartition]) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(ensemble_to_dict(sample)))
