"""Cluster-instability scores and model selection over ``k``.

For an ensemble of ``n`` partitions with ``k`` clusters each:

``G``
    mean squared distance over all ordered pairs, each pair optimally
    relabeled on its own;
``g``
    the same mean over a single multiple alignment (one labeling per
    member), taken from the mean-partition solver, hence an upper bound
    on the optimum over alignments;
``F``
    mean squared distance to the estimated mean partition.

``G <= g`` holds for every alignment, and ``F(exact mean) <= G``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from ._seeding import derive_seed, ordered_map
from .alignment import delta_matrix
from .consensus import (
    EXHAUSTIVE_LIMIT,
    SolverConfig,
    exhaustive_mean,
    f_value,
    frechet_value,
    g_value,
    mean_partition,
)
from .ensemble import Dataset, EnsembleSpec, generate_ensemble
from .errors import OracleMismatch, ValidationError
from .partition import LabeledPartition

CHAIN_TOL = 1e-9
SCORES = ("G", "g", "F")


def pairwise_instability(sample: Sequence[LabeledPartition]) -> float:
    if len(sample) == 0:
        raise ValidationError("sample must contain at least one partition")
    return float(delta_matrix(sample, squared=True).sum()) / len(sample) ** 2


def multiple_alignment_instability(sample: Sequence[LabeledPartition], config: SolverConfig | None = None):
    """``g`` of the solver's alignment, plus the alignment itself."""
    result = mean_partition(sample, config)
    return g_value(result.alignment), result.alignment


def frechet_variation(sample: Sequence[LabeledPartition], config: SolverConfig | None = None) -> float:
    return mean_partition(sample, config).frechet_value


@dataclass(frozen=True)
class StabilityRow:
    k: int
    G: float
    g: float
    F: float
    n: int
    iterations: int
    converged: bool
    F_exceeds_G: bool
    g_exact: float | None = None
    F_exact: float | None = None

    @property
    def D(self) -> float:
        return self.g - self.G


@dataclass(frozen=True)
class StabilityReport:
    k_min: int
    k_max: int
    rows: tuple
    selected_k: dict

    def score(self, name: str) -> dict:
        return {row.k: getattr(row, name) for row in self.rows}

    def to_dict(self) -> dict:
        rows = []
        for row in self.rows:
            d = asdict(row)
            d["D"] = row.D
            d["g_is_exact"] = row.g_exact is not None
            rows.append(d)
        return {"k_min": self.k_min, "k_max": self.k_max, "selected_k": self.selected_k, "rows": rows}


def select_k(scores: Mapping[int, float]) -> int:
    """Argmin over ``k``; ties go to the smaller ``k``."""
    if not scores:
        raise ValidationError("no scores to select from")
    return min(scores, key=lambda k: (scores[k], k))


def evaluate_ensemble(sample: Sequence[LabeledPartition], solver_cfg: SolverConfig, exact: bool = True) -> StabilityRow:
    """All three scores for one ensemble, with the invariant checks."""
    n, k = len(sample), sample[0].ell
    G = pairwise_instability(sample)
    result = mean_partition(sample, solver_cfg)
    g = g_value(result.alignment)
    f = f_value(result.alignment)
    if abs(g - 2 * f) > CHAIN_TOL:
        raise OracleMismatch(f"k={k}: g={g!r} is not twice f={f!r}")
    if G > g + CHAIN_TOL:
        raise OracleMismatch(f"k={k}: pairwise instability {G!r} exceeds alignment instability {g!r}")
    g_exact = F_exact = None
    if exact and math.factorial(k) ** (n - 1) <= EXHAUSTIVE_LIMIT:
        best = exhaustive_mean(sample)
        g_exact, F_exact = g_value(best.alignment), best.frechet_value
    return StabilityRow(
        k=k,
        G=G,
        g=g,
        F=result.frechet_value,
        n=n,
        iterations=result.iterations,
        converged=result.converged,
        F_exceeds_G=result.frechet_value > G + CHAIN_TOL,
        g_exact=g_exact,
        F_exact=F_exact,
    )


def stability_sweep(
    dataset: Dataset,
    k_min: int,
    k_max: int,
    n: int,
    ensemble_cfg: Mapping | None = None,
    solver_cfg: SolverConfig | None = None,
    seed: int = 0,
    exact: bool = True,
) -> StabilityReport:
    """Instability scores for every ``k`` in ``k_min..k_max``.

    ``ensemble_cfg`` may set ``n_init`` and ``max_iters`` for k-means.
    Per-k seeds are derived from ``seed`` and ``k`` alone.
    """
    if not 1 <= k_min <= k_max <= dataset.m:
        raise ValidationError(f"need 1 <= k_min <= k_max <= m, got {k_min}..{k_max} with m={dataset.m}")
    if n < 2:
        raise ValidationError(f"ensemble size must be >= 2, got {n}")
    ensemble_cfg = dict(ensemble_cfg or {})
    solver_cfg = solver_cfg or SolverConfig()

    def one(k):
        spec = EnsembleSpec(n=n, k=k, seed=derive_seed(seed, "ensemble", k), **ensemble_cfg)
        sample = generate_ensemble(dataset, spec)
        cfg = SolverConfig(
            restarts=solver_cfg.restarts,
            max_iters=solver_cfg.max_iters,
            tol=solver_cfg.tol,
            seed=derive_seed(seed, "solver", k),
        )
        return evaluate_ensemble(sample, cfg, exact=exact)

    rows = tuple(ordered_map(one, range(k_min, k_max + 1)))
    return report_from_rows(k_min, k_max, rows)


def report_from_rows(k_min: int, k_max: int, rows) -> StabilityReport:
    selected = {name: select_k({row.k: getattr(row, name) for row in rows}) for name in SCORES}
    return StabilityReport(k_min=k_min, k_max=k_max, rows=tuple(rows), selected_k=selected)


def average_reports(reports: Sequence[StabilityReport]) -> StabilityReport:
    """Trial-averaged curves; diagnostics are aggregated conservatively."""
    if not reports:
        raise ValidationError("no reports to average")
    first = reports[0]
    rows = []
    for i, row in enumerate(first.rows):
        group = [r.rows[i] for r in reports]
        exact = all(r.g_exact is not None for r in group)
        rows.append(
            StabilityRow(
                k=row.k,
                G=float(np.mean([r.G for r in group])),
                g=float(np.mean([r.g for r in group])),
                F=float(np.mean([r.F for r in group])),
                n=row.n,
                iterations=max(r.iterations for r in group),
                converged=all(r.converged for r in group),
                F_exceeds_G=any(r.F_exceeds_G for r in group),
                g_exact=float(np.mean([r.g_exact for r in group])) if exact else None,
                F_exact=float(np.mean([r.F_exact for r in group])) if exact else None,
            )
        )
    return report_from_rows(first.k_min, first.k_max, rows)


def write_report_csv(path, report: StabilityReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "G", "g", "F", "D", "selected_marker"])
        for row in report.rows:
            marker = "|".join(name for name in SCORES if report.selected_k[name] == row.k)
            w.writerow([row.k, repr(row.G), repr(row.g), repr(row.F), repr(row.D), marker])
