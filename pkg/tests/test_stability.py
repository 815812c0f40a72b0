import numpy as np
import pytest

from consensus_partition.consensus import SolverConfig, frechet_value
from consensus_partition.ensemble import gen_gaussian_grid, gen_uniform
from consensus_partition.errors import ValidationError
from consensus_partition.partition import make_hard, random_partition, random_permutation
from consensus_partition.stability import (
    StabilityRow,
    average_reports,
    evaluate_ensemble,
    frechet_variation,
    multiple_alignment_instability,
    pairwise_instability,
    report_from_rows,
    select_k,
    stability_sweep,
    write_report_csv,
)


def _row(k, G, g, F):
    return StabilityRow(k=k, G=G, g=g, F=F, n=2, iterations=1, converged=True, F_exceeds_G=False)


class TestScores:
    def test_running_pair(self, running_pair):
        sample = list(running_pair)
        assert pairwise_instability(sample) == pytest.approx(1.0)
        g, A = multiple_alignment_instability(sample)
        assert g == pytest.approx(1.0)
        assert all(P.is_identity() for P in A.permutations)
        assert frechet_variation(sample) == pytest.approx(0.5)

    def test_identical_relabeled_members(self, rng):
        X = random_partition(3, 7, rng, "hard")
        sample = [random_permutation(3, rng).apply(X) for _ in range(5)]
        assert pairwise_instability(sample) == pytest.approx(0, abs=1e-12)
        assert multiple_alignment_instability(sample)[0] == pytest.approx(0, abs=1e-12)
        assert frechet_variation(sample) == pytest.approx(0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValidationError):
            pairwise_instability([])

    def test_G_is_mean_frechet_of_members(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 7))
            sample = [random_partition(3, 6, rng) for _ in range(n)]
            G = pairwise_instability(sample)
            assert abs(G - np.mean([frechet_value(sample, X) for X in sample])) < 1e-9

    def test_label_invariance(self, rng):
        sample = [random_partition(3, 6, rng) for _ in range(4)]
        relabeled = [random_permutation(3, rng).apply(X) for X in sample]
        assert pairwise_instability(sample) == pytest.approx(pairwise_instability(relabeled), abs=1e-12)


class TestSelection:
    def test_argmin(self):
        assert select_k({2: 0.9, 3: 0.2, 4: 0.5}) == 3

    def test_ties_to_smaller(self):
        assert select_k({2: 0.1, 3: 0.1, 4: 0.5}) == 2

    def test_report_selection(self):
        report = report_from_rows(2, 4, [_row(2, 0.9, 1.0, 0.4), _row(3, 0.2, 0.3, 0.1), _row(4, 0.5, 0.6, 0.05)])
        assert report.selected_k == {"G": 3, "g": 3, "F": 4}

    def test_average(self):
        a = report_from_rows(2, 3, [_row(2, 1.0, 1.0, 0.5), _row(3, 0.0, 0.0, 0.0)])
        b = report_from_rows(2, 3, [_row(2, 0.0, 0.0, 0.0), _row(3, 0.4, 0.4, 0.2)])
        avg = average_reports([a, b])
        assert avg.score("G") == {2: 0.5, 3: 0.2}
        assert avg.selected_k["G"] == 3

    def test_csv(self, tmp_path):
        report = report_from_rows(2, 3, [_row(2, 0.9, 1.0, 0.4), _row(3, 0.2, 0.3, 0.5)])
        path = tmp_path / "r.csv"
        write_report_csv(path, report)
        lines = path.read_text().splitlines()
        assert lines[0] == "k,G,g,F,D,selected_marker"
        assert lines[1].endswith(",F") and lines[2].endswith(",G|g")


class TestChain:
    def test_tiny_exhaustive_chain(self, rng):
        for c in range(40):
            n, ell, m = int(rng.integers(2, 5)), int(rng.integers(1, 4)), int(rng.integers(2, 7))
            sample = [random_partition(ell, m, rng, "hard" if c % 2 else "soft") for _ in range(n)]
            row = evaluate_ensemble(sample, SolverConfig(restarts=2, seed=c))
            assert row.G <= row.g + 1e-9
            assert row.D >= -1e-9
            assert row.g_exact is not None
            assert row.F_exact <= row.G + 1e-9
            assert row.G <= row.g_exact + 1e-9
            assert row.g_exact <= row.g + 1e-9

    def test_large_instance_skips_exhaustive(self, rng):
        sample = [random_partition(6, 10, rng) for _ in range(5)]
        row = evaluate_ensemble(sample, SolverConfig(restarts=1))
        assert row.g_exact is None and row.G <= row.g + 1e-9


class TestSweep:
    def test_k1_is_zero(self):
        report = stability_sweep(gen_uniform(30, 2, seed=0), 1, 1, 4)
        row = report.rows[0]
        assert row.G == row.g == row.F == 0

    def test_invalid_range(self):
        ds = gen_uniform(5, 2, seed=0)
        with pytest.raises(ValidationError):
            stability_sweep(ds, 3, 2, 4)
        with pytest.raises(ValidationError):
            stability_sweep(ds, 1, 6, 4)
        with pytest.raises(ValidationError):
            stability_sweep(ds, 1, 2, 1)

    def test_uniform_has_positive_instability(self):
        report = stability_sweep(gen_uniform(200, 2, seed=1), 4, 4, 10, {"n_init": 1}, SolverConfig(restarts=2))
        assert report.rows[0].G > 0

    def test_blobs_select_four(self):
        ds = gen_gaussian_grid(2, 2, 0.05, 30, seed=2)
        report = stability_sweep(ds, 2, 6, 10, {"n_init": 3}, SolverConfig(restarts=2), seed=4)
        assert report.selected_k["G"] == 4
        assert [r.k for r in report.rows] == [2, 3, 4, 5, 6]

    def test_thread_independent(self, monkeypatch):
        ds = gen_uniform(60, 2, seed=3)
        monkeypatch.setenv("THREADS", "1")
        a = stability_sweep(ds, 2, 4, 5, seed=8)
        monkeypatch.setenv("THREADS", "3")
        b = stability_sweep(ds, 2, 4, 5, seed=8)
        assert a.to_dict() == b.to_dict()

    def test_hard_members(self):
        ds = gen_uniform(20, 2, seed=3)
        report = stability_sweep(ds, 2, 2, 3, exact=True)
        assert report.rows[0].g_exact is not None


def test_make_hard_instability_example():
    sample = [make_hard([1, 1, 2, 2], 2), make_hard([1, 2, 1, 2], 2)]
    assert pairwise_instability(sample) == pytest.approx(2.0)
