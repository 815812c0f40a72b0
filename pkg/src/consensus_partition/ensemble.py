"""Synthetic datasets and k-means cluster ensembles."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._seeding import derive_seed, make_rng, ordered_map
from .errors import ParseError, ValidationError
from .partition import HardLabeling, LabeledPartition, make_hard


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    ground_truth: tuple | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValidationError(f"points must be a non-empty m x d matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("dataset has non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.ground_truth is not None:
            gt = tuple(int(c) for c in self.ground_truth)
            if len(gt) != pts.shape[0]:
                raise ValidationError("ground_truth length differs from the number of points")
            if min(gt) < 1:
                raise ValidationError("ground-truth labels start at 1")
            object.__setattr__(self, "ground_truth", gt)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def truth_partition(self) -> LabeledPartition:
        if self.ground_truth is None:
            raise ValidationError("dataset carries no ground truth")
        return make_hard(self.ground_truth, max(self.ground_truth))


def _normal(rng: np.random.Generator, size) -> np.ndarray:
    # Box-Muller on PCG64 uniforms; 1 - u keeps the log argument in (0, 1].
    u1 = 1.0 - rng.random(size)
    u2 = rng.random(size)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def gen_gaussian_grid(rows: int, cols: int, sigma: float, points_per_component: int, seed: int) -> Dataset:
    """Isotropic Gaussian blobs centred on the integer grid ``(r, c)``.

    Component ``r * cols + c + 1`` is centred at ``(r, c)``; points are
    emitted component by component.
    """
    if rows < 1 or cols < 1:
        raise ValidationError("rows and cols must be >= 1")
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    if points_per_component < 1:
        raise ValidationError("points_per_component must be >= 1")
    rng = make_rng(seed, "gaussian-grid")
    centers = np.array([(r, c) for r in range(rows) for c in range(cols)], dtype=float)
    noise = _normal(rng, (len(centers) * points_per_component, 2)) * sigma
    points = np.repeat(centers, points_per_component, axis=0) + noise
    truth = np.repeat(np.arange(1, len(centers) + 1), points_per_component)
    return Dataset(points, tuple(truth))


def gen_uniform(m: int, d: int, seed: int) -> Dataset:
    if m < 1 or d < 1:
        raise ValidationError("m and d must be >= 1")
    rng = make_rng(seed, "uniform")
    return Dataset(rng.random((m, d)))


def lloyd(points: np.ndarray, k: int, rng: np.random.Generator, max_iters: int = 100):
    """One k-means run from ``k`` distinct random data points.

    Returns 0-based labels and the within-cluster sum of squares after
    every centroid update.  A cluster left empty by the assignment step
    takes over the point farthest from its centroid (among points whose
    cluster would not become empty); if no such point exists it stays empty.
    """
    m = points.shape[0]
    centers = points[rng.choice(m, size=k, replace=False)].copy()
    labels = None
    trace = []
    for _ in range(max_iters):
        D = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(D, axis=1)
        for c in range(k):
            counts = np.bincount(new, minlength=k)
            if counts[c]:
                continue
            cost = D[np.arange(m), new]
            eligible = counts[new] > 1
            if not eligible.any():
                continue
            j = int(np.argmax(np.where(eligible, cost, -1.0)))
            new[j] = c
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
        trace.append(float(((points - centers[labels]) ** 2).sum()))
    return labels, trace


def kmeans(dataset: Dataset, k: int, seed: int, max_iters: int = 100, n_init: int = 3) -> HardLabeling:
    """Best of ``n_init`` seeded Lloyd runs by within-cluster sum of squares."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > dataset.m:
        raise ValidationError(f"k={k} exceeds the number of points m={dataset.m}")
    if n_init < 1 or max_iters < 1:
        raise ValidationError("n_init and max_iters must be >= 1")
    best, best_sse = None, np.inf
    for t in range(n_init):
        labels, trace = lloyd(dataset.points, k, make_rng(seed, "kmeans", t), max_iters)
        if trace[-1] < best_sse:
            best, best_sse = labels, trace[-1]
    return HardLabeling(tuple(int(c) + 1 for c in best), k)


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    k: int
    seed: int = 0
    max_iters: int = 100
    n_init: int = 3
    empty_cluster_policy: str = field(default="farthest-point", init=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValidationError("ensemble needs n >= 1 and k >= 1")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "max_iters": self.max_iters,
            "n_init": self.n_init,
            "empty_cluster_policy": self.empty_cluster_policy,
        }


def generate_ensemble(dataset: Dataset, spec: EnsembleSpec) -> list[LabeledPartition]:
    """``spec.n`` k-means partitions; member ``i`` is seeded by ``(seed, i)`` only."""

    def member(i):
        s = derive_seed(spec.seed, "member", i)
        return make_hard(kmeans(dataset, spec.k, s, spec.max_iters, spec.n_init))

    return ordered_map(member, range(spec.n))


# -- dataset CSV --------------------------------------------------------------

def write_dataset_csv(path, dataset: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"x{i + 1}" for i in range(dataset.d)]
        if dataset.ground_truth is not None:
            header.append("label")
        w.writerow(header)
        for j, row in enumerate(dataset.points):
            out = [repr(float(x)) for x in row]
            if dataset.ground_truth is not None:
                out.append(dataset.ground_truth[j])
            w.writerow(out)


def read_dataset_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty dataset file")
    header = rows[0]
    has_label = bool(header) and header[-1] == "label"
    coords = header[:-1] if has_label else header
    if not coords or any(h != f"x{i + 1}" for i, h in enumerate(coords)):
        raise ParseError(f"{path}: header must be x1,...,xd[,label]", field="header")
    pts, gt = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            pts.append([float(x) for x in row[: len(coords)]])
            if has_label:
                gt.append(int(row[-1]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not pts:
        raise ParseError(f"{path}: dataset has no points")
    return Dataset(np.array(pts), tuple(gt) if has_label else None)
