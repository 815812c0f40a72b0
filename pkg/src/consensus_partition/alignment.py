"""Optimal relabeling between two partitions.

The distance between two partitions is the smallest Frobenius distance
between any of their representations.  Since row permutations preserve the
norm, minimizing ``||PX - Y||`` is the same as maximizing ``<PX, Y>``, which
is a linear assignment problem on the ``ell x ell`` matrix of row inner
products.  It is solved exactly with a shortest augmenting path Hungarian
method that also yields dual potentials; the potentials identify every
optimal assignment, which lets us report the lexicographically smallest one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .partition import (
    MAX_ENUMERATION_ELL,
    LabeledPartition,
    Permutation,
    _check_same_shape,
)

# Two assignments whose scores differ by less than this (relative to the
# largest score entry) count as tied.
TIE_TOL = 1e-10


@dataclass(frozen=True)
class PairwiseAlignment:
    permutation: Permutation
    distance: float
    inner_value: float


def solve_assignment(cost: np.ndarray):
    """Minimum-cost perfect assignment of a square matrix.

    Returns ``(assign, u, v)`` where ``assign[i]`` is the column given to
    row ``i`` and ``u``, ``v`` are optimal dual potentials, i.e.
    ``cost[i, j] - u[i] - v[j] >= 0`` with equality on the assignment.
    O(n^3).
    """
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    if cost.shape != (n, n):
        raise ValueError(f"cost matrix must be square, got {cost.shape}")
    # 1-based bookkeeping; index 0 is the virtual source column.
    a = np.zeros((n + 1, n + 1))
    a[1:, 1:] = cost
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)  # p[j]: row matched to column j
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = a[i0] - u[i0] - v
            improve = free & (cur < minv)
            minv[improve] = cur[improve]
            way[improve] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assign = np.empty(n, dtype=int)
    assign[p[1:] - 1] = np.arange(n)
    return assign, u[1:], v[1:]


def _has_perfect_matching(adj, rows, cols) -> bool:
    """Kuhn's augmenting paths restricted to ``rows`` x ``cols``."""
    match = {}

    def augment(r, seen):
        for c in adj[r]:
            if c in cols and c not in seen:
                seen.add(c)
                if c not in match or augment(match[c], seen):
                    match[c] = r
                    return True
        return False

    return all(augment(r, set()) for r in rows)


def _lex_smallest_matching(tight: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = tight.shape[0]
    adj = [sorted(np.flatnonzero(tight[r]).tolist()) for r in range(n)]
    if all(len(a) == 1 for a in adj):
        return fallback
    chosen = np.empty(n, dtype=int)
    free_cols = set(range(n))
    for r in range(n):
        for c in adj[r]:
            if c not in free_cols:
                continue
            rest = free_cols - {c}
            if _has_perfect_matching(adj, range(r + 1, n), rest):
                chosen[r] = c
                free_cols = rest
                break
        else:  # tolerance noise broke the tight graph; keep the solver's answer
            return fallback
    return chosen


def optimal_mapping(Xv: np.ndarray, Yv: np.ndarray):
    """Relabeling of ``Xv`` maximizing ``<P Xv, Yv>`` on raw arrays.

    Returns ``(mapping, inner)`` with ties broken toward the smallest
    mapping in lexicographic order.
    """
    score = Xv @ Yv.T  # score[k, t] = <row k of X, row t of Y>
    n = score.shape[0]
    if n == 1:
        return np.zeros(1, dtype=int), float(score[0, 0])
    cost = -score
    assign, u, v = solve_assignment(cost)
    scale = max(1.0, float(np.max(np.abs(score))))
    tight = (cost - u[:, None] - v[None, :]) <= TIE_TOL * scale
    mapping = _lex_smallest_matching(tight, assign)
    return mapping, float(score[np.arange(n), mapping].sum())


def _permute_rows(Xv: np.ndarray, mapping) -> np.ndarray:
    out = np.empty_like(Xv)
    out[mapping] = Xv
    return out


def delta(X: LabeledPartition, Y: LabeledPartition) -> PairwiseAlignment:
    """Distance between the partitions represented by ``X`` and ``Y``.

    The returned permutation moves ``X`` into optimal position with ``Y``.
    The distance is evaluated as ``||PX - Y||`` directly, which equals
    ``sqrt(||X||^2 + ||Y||^2 - 2 <PX, Y>)`` but is exact at zero.
    """
    _check_same_shape(X, Y)
    mapping, inner = optimal_mapping(X.values, Y.values)
    diff = _permute_rows(X.values, mapping) - Y.values
    return PairwiseAlignment(
        permutation=Permutation(tuple(mapping)),
        distance=float(np.sqrt(np.sum(diff * diff))),
        inner_value=inner,
    )


def delta_bruteforce(X: LabeledPartition, Y: LabeledPartition) -> PairwiseAlignment:
    """Reference distance by exhaustive search over all ``ell!`` relabelings."""
    _check_same_shape(X, Y)
    if X.ell > MAX_ENUMERATION_ELL:
        raise CapacityError(f"brute force needs ell <= {MAX_ENUMERATION_ELL}, got {X.ell}")
    Xv, Yv = X.values, Y.values
    scale = max(1.0, float(np.max(np.abs(Xv @ Yv.T))))
    best = None
    best_sq = math.inf
    for p in itertools.permutations(range(X.ell)):
        diff = _permute_rows(Xv, list(p)) - Yv
        sq = float(np.sum(diff * diff))
        # itertools yields lexicographic order, so keep the first of a tie
        if sq < best_sq - 2 * TIE_TOL * scale:
            best, best_sq = p, sq
    PX = _permute_rows(Xv, list(best))
    return PairwiseAlignment(
        permutation=Permutation(best),
        distance=math.sqrt(best_sq),
        inner_value=float(np.sum(PX * Yv)),
    )


def align_to(X: LabeledPartition, Z: LabeledPartition) -> LabeledPartition:
    """Representation of ``X``'s partition in optimal position with ``Z``."""
    return delta(X, Z).permutation.apply(X)


def delta_matrix(sample: Sequence[LabeledPartition], squared: bool = True) -> np.ndarray:
    """Symmetric matrix of pairwise distances (squared by default)."""
    n = len(sample)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = delta(sample[i], sample[j]).distance
            D[i, j] = D[j, i] = d * d if squared else d
    return D
