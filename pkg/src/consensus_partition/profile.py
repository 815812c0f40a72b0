"""Profiles of a multiple alignment and the motifs they contain.

A profile is the average of an alignment's members: entry ``(k, j)`` is the
mean membership of point ``j`` in cluster ``k``, which for hard ensembles is
the fraction of members putting ``j`` in ``k``.  Thresholding a profile at
``tau > 0.5`` leaves at most one cluster per point; the points kept in
cluster ``k`` form motif ``k``.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .consensus import MultipleAlignment
from .errors import ValidationError
from .partition import COLUMN_SUM_TOL


@dataclass(frozen=True)
class Profile:
    values: np.ndarray
    n: int
    alignment_ref: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2:
            raise ValidationError("profile must be a 2-D matrix")
        if v.min() < -1e-12 or v.max() > 1 + 1e-12:
            raise ValidationError("profile entries must lie in [0, 1]")
        if np.max(np.abs(v.sum(axis=0) - 1.0)) > COLUMN_SUM_TOL:
            raise ValidationError("profile columns must sum to 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def ell(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MotifSet:
    tau: float
    motifs: tuple  # one sorted tuple of point indices per cluster
    covered: frozenset

    def labels(self, m: int) -> np.ndarray:
        """Per-point motif index, ``-1`` for uncovered points."""
        out = np.full(m, -1, dtype=int)
        for k, motif in enumerate(self.motifs):
            out[list(motif)] = k
        return out


def profile_of(A: MultipleAlignment, alignment_ref: str = "") -> Profile:
    return Profile(A.stack().mean(axis=0), n=A.n, alignment_ref=alignment_ref)


def _check_tau(tau: float) -> None:
    if not 0.5 < tau < 1.0:
        raise ValidationError(f"tau must lie strictly between 0.5 and 1, got {tau}")


def truncate(P: Profile, tau: float) -> np.ndarray:
    """Binary matrix with ones where ``tau <= p_kj``."""
    _check_tau(tau)
    return (P.values >= tau).astype(int)


def motifs_of(P: Profile, tau: float) -> MotifSet:
    T = truncate(P, tau)
    motifs = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in T)
    covered = frozenset(int(j) for j in np.flatnonzero(T.any(axis=0)))
    return MotifSet(tau=tau, motifs=motifs, covered=covered)


def uncovered_points(M: MotifSet, m: int) -> list:
    return [j for j in range(m) if j not in M.covered]


def motif_purity(M: MotifSet, ground_truth: Sequence[int]) -> list:
    """Majority ground-truth fraction per motif (``None`` for empty motifs)."""
    gt = list(ground_truth)
    out = []
    for motif in M.motifs:
        if not motif:
            out.append(None)
            continue
        counts = Counter(gt[j] for j in motif)
        out.append(max(counts.values()) / len(motif))
    return out


def motif_majority(M: MotifSet, ground_truth: Sequence[int]) -> list:
    """Most frequent ground-truth label per motif (smallest label on ties)."""
    gt = list(ground_truth)
    out = []
    for motif in M.motifs:
        if not motif:
            out.append(None)
            continue
        counts = Counter(gt[j] for j in motif)
        top = max(counts.values())
        out.append(min(c for c, v in counts.items() if v == top))
    return out


def motif_report(M: MotifSet, m: int, ground_truth: Sequence[int] | None = None) -> dict:
    report = {
        "tau": M.tau,
        "motifs": [list(motif) for motif in M.motifs],
        "uncovered": uncovered_points(M, m),
    }
    if ground_truth is not None:
        report["purity"] = motif_purity(M, ground_truth)
    return report


def write_motif_csv(path, M: MotifSet, points: np.ndarray) -> None:
    """Plot-ready table: point index, coordinates and motif id (-1 = none)."""
    labels = M.labels(points.shape[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point_index"] + [f"x{d + 1}" for d in range(points.shape[1])] + ["motif_id"])
        for j, row in enumerate(points):
            w.writerow([j] + [repr(float(x)) for x in row] + [int(labels[j])])
