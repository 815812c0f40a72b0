"""Randomized cross-checks of the fast routines against exhaustive ones."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._seeding import make_rng
from .alignment import delta, delta_bruteforce
from .consensus import (
    MultipleAlignment,
    SolverConfig,
    exhaustive_mean,
    f_value,
    frechet_value,
    g_value,
    h_value,
    mean_partition,
)
from .partition import random_partition, random_permutation
from .stability import pairwise_instability

TOL = 1e-9


@dataclass
class OracleReport:
    suite: str
    cases: int
    failures: int = 0
    stats: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {"suite": self.suite, "cases": self.cases, "failures": self.failures, "stats": self.stats}


def _kind(rng):
    return "hard" if rng.random() < 0.5 else "soft"


def delta_suite(cases: int, seed: int) -> OracleReport:
    """Assignment-based distance against exhaustive relabeling."""
    report = OracleReport("delta", cases)
    worst = 0.0
    for c in range(cases):
        rng = make_rng(seed, "oracle-delta", c)
        ell, m = int(rng.integers(2, 7)), int(rng.integers(3, 13))
        X, Y = random_partition(ell, m, rng), random_partition(ell, m, rng)
        err = abs(delta(X, Y).distance - delta_bruteforce(X, Y).distance)
        worst = max(worst, err)
        ok = err < TOL
        report.failures += not ok
        report.lines.append(f"case {c}: ell={ell} m={m} |diff|={err:.3e} {'ok' if ok else 'FAIL'}")
    report.stats = {"agreements": cases - report.failures, "max_abs_diff": worst}
    return report


def mean_suite(cases: int, seed: int, restarts: int = 6) -> OracleReport:
    """Alternating solver against the exhaustive global mean on tiny samples."""
    report = OracleReport("mean", cases)
    equal = 0
    for c in range(cases):
        rng = make_rng(seed, "oracle-mean", c)
        n, ell, m = int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 7))
        sample = [random_partition(ell, m, rng, _kind(rng)) for _ in range(n)]
        exact = exhaustive_mean(sample)
        approx = mean_partition(sample, SolverConfig(restarts=restarts, seed=c))
        gap = approx.frechet_value - exact.frechet_value
        ok = gap >= -TOL
        hit = abs(gap) <= TOL
        equal += hit
        report.failures += not ok
        report.lines.append(
            f"case {c}: n={n} ell={ell} m={m} F*={exact.frechet_value:.6f} F^={approx.frechet_value:.6f} "
            f"{'ok' if ok else 'FAIL'}{' (optimal)' if hit else ''}"
        )
    report.stats = {"heuristic_attains_optimum": equal, "fraction_optimal": equal / cases if cases else 0.0}
    return report


def identities_suite(cases: int, seed: int) -> OracleReport:
    """``g = 2f``, ``f = mean ||X||^2 - h/n`` and ``G = mean_i F_n(X_i)``."""
    report = OracleReport("identities", cases)
    worst = {"g-2f": 0.0, "f-h": 0.0, "G-meanF": 0.0}
    for c in range(cases):
        rng = make_rng(seed, "oracle-identities", c)
        n, ell, m = int(rng.integers(1, 8)), int(rng.integers(1, 6)), int(rng.integers(1, 15))
        sample = [random_partition(ell, m, rng, _kind(rng)) for _ in range(n)]
        A = MultipleAlignment.from_permutations(sample, [random_permutation(ell, rng) for _ in range(n)])
        f = f_value(A)
        sq = np.mean([float(np.sum(X.values**2)) for X in A.members])
        res = {
            "g-2f": abs(g_value(A) - 2 * f),
            "f-h": abs(f - (sq - h_value(A) / n)),
            "G-meanF": abs(pairwise_instability(sample) - np.mean([frechet_value(sample, X) for X in sample])),
        }
        for key, val in res.items():
            worst[key] = max(worst[key], float(val))
        ok = max(res.values()) < TOL
        report.failures += not ok
        report.lines.append(f"case {c}: max residual {max(res.values()):.3e} {'ok' if ok else 'FAIL'}")
    report.stats = {"max_residual": worst}
    return report


SUITES = {"delta": delta_suite, "mean": mean_suite, "identities": identities_suite}
