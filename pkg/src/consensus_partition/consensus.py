"""Mean partitions and multiple alignments.

The Fréchet function of a sample averages squared partition distances to a
candidate.  Its local minima are averages of sample representations that
sit in optimal position with the average, which suggests the alternating
solver in :func:`mean_partition`: align every member to the current
estimate, replace the estimate by the average, repeat.

A multiple alignment picks one representation per sample partition.  Its
spread can be measured three ways, which are algebraically tied together:

* ``f``: mean squared distance of the members to their average,
* ``g``: mean squared distance over all ordered pairs, ``g == 2 f``,
* ``h``: sum of inner products with the average, ``f == mean ||X_i||^2 - h / n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._seeding import make_rng, ordered_map
from .alignment import _permute_rows, delta, optimal_mapping
from .errors import CapacityError, OracleMismatch, ValidationError
from .partition import LabeledPartition, Permutation

EXHAUSTIVE_LIMIT = 10**6
STATIONARITY_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    restarts: int = 5
    max_iters: int = 200
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if int(self.restarts) < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if int(self.max_iters) < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ValidationError(f"tol must be positive, got {self.tol}")

    def to_dict(self) -> dict:
        return {"restarts": self.restarts, "max_iters": self.max_iters, "tol": self.tol, "seed": self.seed}


@dataclass(frozen=True)
class MultipleAlignment:
    """One representation per sample partition.

    ``permutations[i]``, when present, maps sample member ``source_ids[i]``
    onto ``members[i]``.
    """

    members: tuple
    source_ids: tuple
    permutations: tuple | None = None

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValidationError("a multiple alignment needs at least one member")
        shape = members[0].shape
        for i, X in enumerate(members):
            if X.shape != shape:
                raise ValidationError(f"member {i} has shape {X.shape}, expected {shape}")
        if len(self.source_ids) != len(members):
            raise ValidationError("source_ids and members differ in length")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "source_ids", tuple(int(s) for s in self.source_ids))

    @classmethod
    def from_permutations(cls, sample, perms) -> "MultipleAlignment":
        perms = tuple(perms)
        return cls(
            members=tuple(P.apply(X) for P, X in zip(perms, sample)),
            source_ids=tuple(range(len(sample))),
            permutations=perms,
        )

    @property
    def n(self) -> int:
        return len(self.members)

    def stack(self) -> np.ndarray:
        return np.stack([X.values for X in self.members])

    def represents(self, sample: Sequence[LabeledPartition], tol: float = 1e-12) -> bool:
        """True when every member lies in the orbit of its sample partition."""
        return all(
            delta(X, sample[s]).distance <= tol for X, s in zip(self.members, self.source_ids)
        )


@dataclass(frozen=True)
class MeanResult:
    mean: LabeledPartition
    alignment: MultipleAlignment
    frechet_value: float
    iterations: int
    converged: bool
    restarts_used: int
    trace: tuple = field(default_factory=tuple)
    best_restart: int = 0

    def to_dict(self) -> dict:
        perms = self.alignment.permutations
        return {
            "mean": self.mean.values.tolist(),
            "ell": self.mean.ell,
            "m": self.mean.m,
            "frechet_value": self.frechet_value,
            "f_value": f_value(self.alignment),
            "iterations": self.iterations,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "best_restart": self.best_restart,
            "trace": list(self.trace),
            "alignment": {
                "source_ids": list(self.alignment.source_ids),
                "permutations": None if perms is None else [list(P.mapping) for P in perms],
            },
        }


def _check_sample(sample) -> None:
    if len(sample) == 0:
        raise ValidationError("sample must contain at least one partition")
    shape = sample[0].shape
    for i, X in enumerate(sample):
        if X.shape != shape:
            raise ValidationError(f"sample member {i} has shape {X.shape}, expected {shape}")


def frechet_value(sample: Sequence[LabeledPartition], Z: LabeledPartition) -> float:
    """Mean squared partition distance from the sample to ``Z``."""
    _check_sample(sample)
    return float(np.mean([delta(X, Z).distance ** 2 for X in sample]))


def alignment_mean(A: MultipleAlignment) -> LabeledPartition:
    return LabeledPartition(A.stack().mean(axis=0))


def g_value(A: MultipleAlignment) -> float:
    """Mean squared Frobenius distance over all ordered member pairs."""
    S = A.stack()
    total = 0.0
    for i in range(A.n):
        for j in range(A.n):
            d = S[i] - S[j]
            total += float(np.sum(d * d))
    return total / A.n**2


def f_value(A: MultipleAlignment) -> float:
    """Mean squared Frobenius distance of the members to their average."""
    S = A.stack()
    d = S - S.mean(axis=0)
    return float(np.sum(d * d)) / A.n


def h_value(A: MultipleAlignment) -> float:
    S = A.stack()
    M = S.mean(axis=0)
    return float(sum(np.sum(X * M) for X in S))


def _single_member_result(sample) -> MeanResult:
    X = sample[0]
    I = Permutation.identity(X.ell)
    return MeanResult(
        mean=X,
        alignment=MultipleAlignment((X,), (0,), (I,)),
        frechet_value=0.0,
        iterations=0,
        converged=True,
        restarts_used=1,
        trace=(0.0,),
    )


def _initial_estimate(arrays, r: int, seed: int) -> np.ndarray:
    n = len(arrays)
    if r < n:
        return arrays[r]
    rng = make_rng(seed, "restart", r)
    i, j = rng.choice(n, size=2, replace=False)
    lam = rng.random()
    mapping, _ = optimal_mapping(arrays[j], arrays[i])
    return lam * arrays[i] + (1.0 - lam) * _permute_rows(arrays[j], mapping)


def _alternate(arrays, M, max_iters: int, tol: float):
    """Align-then-average until the alignment repeats or stalls."""
    prev_maps = None
    prev_f = math.inf
    trace = []
    converged = False
    maps = None
    for _ in range(max_iters):
        maps = []
        aligned = np.empty((len(arrays),) + M.shape)
        for i, Xv in enumerate(arrays):
            mapping, _ = optimal_mapping(Xv, M)
            aligned[i][mapping] = Xv
            maps.append(tuple(int(t) for t in mapping))
        if maps == prev_maps:
            converged = True
            break
        M = aligned.mean(axis=0)
        d = aligned - M
        f = float(np.sum(d * d)) / len(arrays)
        trace.append(f)
        prev_maps = maps
        if prev_f - f < tol:
            converged = True
            break
        prev_f = f
    return M, prev_maps, trace, converged


def mean_partition(sample: Sequence[LabeledPartition], config: SolverConfig | None = None) -> MeanResult:
    """Approximate mean partition by alternating alignment and averaging.

    Each restart starts from a different estimate (sample member ``r``
    first, then seeded blends of two members) and runs to a fixed point.
    The restart with the smallest Fréchet value wins; ties go to the
    lower restart index.
    """
    config = config or SolverConfig()
    _check_sample(sample)
    if len(sample) == 1:
        return _single_member_result(sample)
    arrays = [X.values for X in sample]

    def run(r):
        M0 = _initial_estimate(arrays, r, config.seed)
        M, maps, trace, converged = _alternate(arrays, M0, config.max_iters, config.tol)
        perms = tuple(Permutation(mp) for mp in maps)
        A = MultipleAlignment.from_permutations(sample, perms)
        mean = LabeledPartition(M)
        return mean, A, frechet_value(sample, mean), trace, converged

    runs = ordered_map(run, range(config.restarts))
    best = min(range(len(runs)), key=lambda r: (runs[r][2], r))
    mean, A, F, trace, converged = runs[best]
    return MeanResult(
        mean=mean,
        alignment=A,
        frechet_value=F,
        iterations=len(trace),
        converged=converged,
        restarts_used=config.restarts,
        trace=tuple(trace),
        best_restart=best,
    )


def _best_combination(sample, perms) -> tuple:
    """Permutation indices maximizing the norm of the aligned sum.

    Minimizing ``g`` is the same as maximizing ``sum_ij <P_i X_i, P_j X_j>``,
    so every alignment is scored at once from the pairwise cross inner
    products.  Member 0 keeps the identity (index 0).  Near-ties resolve to
    the first combination in lexicographic order.
    """
    n, p = len(sample), len(perms)
    if n == 1:
        return (0,)
    Y = np.stack([[P.apply(X).values for P in perms] for X in sample])  # n, p, ell, m
    cross = np.einsum("iakm,jbkm->ijab", Y, Y)
    score = np.zeros((p,) * (n - 1))
    for j in range(1, n):
        shape = [1] * (n - 1)
        shape[j - 1] = p
        score += 2 * cross[0, j, 0].reshape(shape)
        for i in range(1, j):
            shape = [1] * (n - 1)
            shape[i - 1] = shape[j - 1] = p
            score += 2 * cross[i, j].reshape(shape)
    flat = score.ravel()
    top = flat.max()
    first = int(np.flatnonzero(flat >= top - 1e-10 * max(1.0, abs(top)))[0])
    return (0,) + tuple(int(i) for i in np.unravel_index(first, score.shape))


def exhaustive_mean(sample: Sequence[LabeledPartition]) -> MeanResult:
    """Global mean partition by enumerating every multiple alignment.

    The first member's representation is held fixed, since relabeling all
    members at once leaves ``g`` unchanged.  The alignment minimizing ``g``
    is optimal and its average represents a mean partition.
    """
    _check_sample(sample)
    n, ell = len(sample), sample[0].ell
    count = math.factorial(ell) ** (n - 1)
    if count > EXHAUSTIVE_LIMIT:
        raise CapacityError(f"{count} alignments exceed the exhaustive limit {EXHAUSTIVE_LIMIT}")
    perms = [Permutation(p) for p in itertools.permutations(range(ell))]
    best = MultipleAlignment.from_permutations(sample, [perms[i] for i in _best_combination(sample, perms)])
    mean = alignment_mean(best)
    F = frechet_value(sample, mean)
    f = f_value(best)
    if abs(F - f) > 1e-9:
        raise OracleMismatch(f"Fréchet value {F!r} differs from f {f!r} at the optimal alignment")
    return MeanResult(
        mean=mean,
        alignment=best,
        frechet_value=F,
        iterations=0,
        converged=True,
        restarts_used=0,
        trace=(f,),
    )


def check_stationarity(result: MeanResult, tol: float = STATIONARITY_TOL) -> bool:
    """Necessary optimality condition for a mean estimate.

    The mean must equal the average of its alignment, and no member may
    gain inner product with the mean by relabeling.
    """
    A = result.alignment
    M = result.mean
    if np.max(np.abs(A.stack().mean(axis=0) - M.values)) > tol:
        return False
    for X in A.members:
        current = float(np.sum(X.values * M.values))
        _, best = optimal_mapping(X.values, M.values)
        if best > current + tol:
            return False
    return True
