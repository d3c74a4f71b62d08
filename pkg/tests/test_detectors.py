"""
Detection statistics, thresholds and run_test.
"""

import math
from collections import Counter

import pytest

from pdbs.errors import BudgetExceeded, ParameterError
from pdbs.engine.detectors import (
    DetectionOptions,
    block_sum_histogram,
    check_feasible,
    count_stat,
    lrt_exact,
    maxdeg_stat,
    method_detector,
    run_test,
    scan_stat_exact,
    scan_stat_greedy,
)
from pdbs.engine.oracle import likelihood_ratio
from pdbs.graph.graph import Graph
from pdbs.graph.placements import iter_placements
from pdbs.graph.samplers import sample_er, sample_planted
from pdbs.models.canonical import DetectionMethod, ModelParams


def _brute_scan(graph: Graph, k_r: int, k_l: int) -> int:
    return max(graph.block_sum(r, l) for r, l in iter_placements(graph.n, k_r, k_l))


class TestSimpleStatistics:
    def test_count_and_degree(self):
        g = Graph.complete(5)
        assert count_stat(g) == 10
        assert maxdeg_stat(g) == 4
        assert maxdeg_stat(Graph.empty(5)) == 0


class TestScanExact:
    def test_planted_block(self, planted_k23):
        assert scan_stat_exact(planted_k23, 2, 3) == 6
        assert scan_stat_exact(planted_k23, 3, 2) == 6
        assert scan_stat_exact(planted_k23, 1, 1) == 1

    @pytest.mark.parametrize("k_r, k_l", [(1, 1), (2, 1), (2, 3), (3, 3)])
    def test_matches_brute_force(self, seed, k_r, k_l):
        for i in range(5):
            g = sample_er(8, 0.4, seed.derive("scan", i))
            assert scan_stat_exact(g, k_r, k_l) == _brute_scan(g, k_r, k_l)

    def test_thread_count_does_not_matter(self, seed):
        g = sample_er(12, 0.5, seed)
        assert scan_stat_exact(g, 3, 2, threads=1) == scan_stat_exact(g, 3, 2, threads=4)

    def test_budget_checked_first(self):
        with pytest.raises(BudgetExceeded) as excinfo:
            scan_stat_exact(Graph.empty(40), 5, 5, cap=1000)
        assert excinfo.value.cap == 1000
        assert excinfo.value.required > 1000

    def test_rejects_oversized_blocks(self):
        with pytest.raises(ParameterError):
            scan_stat_exact(Graph.empty(4), 3, 2)


class TestStatisticInvariants:
    def test_relabeling(self, seed):
        rng = seed.stream("perm")
        for i in range(5):
            g = sample_er(9, 0.4, seed.derive("relabel", i))
            h = g.permuted(rng.permutation(9).tolist())
            assert count_stat(h) == count_stat(g)
            assert maxdeg_stat(h) == maxdeg_stat(g)
            assert scan_stat_exact(h, 3, 2) == scan_stat_exact(g, 3, 2)

    def test_adding_an_edge_never_lowers_a_statistic(self, seed):
        for i in range(5):
            g = sample_er(9, 0.3, seed.derive("grow", i))
            for u, v in [(0, 1), (2, 7), (4, 8)]:
                h = g.with_edge(u, v)
                assert count_stat(h) >= count_stat(g)
                assert maxdeg_stat(h) >= maxdeg_stat(g)
                assert scan_stat_exact(h, 2, 3) >= scan_stat_exact(g, 2, 3)

    def test_scan_reaches_block_area_only_on_a_complete_block(self, seed):
        for i in range(20):
            g = sample_er(8, 0.7, seed.derive("area", i))
            scan = scan_stat_exact(g, 2, 2)
            complete = any(g.block_sum(r, l) == 4 for r, l in iter_placements(8, 2, 2))
            assert scan <= 4
            assert (scan == 4) == complete

    def test_greedy_matches_exact_on_small_graphs(self, seed):
        matches = 0
        for i in range(100):
            g = sample_er(16, 0.5, seed.derive("head-to-head", i))
            greedy = scan_stat_greedy(g, 3, 3, restarts=50, seed=seed.derive("restarts", i))
            matches += greedy == scan_stat_exact(g, 3, 3)
        assert matches >= 95


class TestScanGreedy:
    def test_never_exceeds_exact(self, seed):
        for i in range(10):
            g = sample_er(10, 0.4, seed.derive("g", i))
            greedy = scan_stat_greedy(g, 3, 2, restarts=5, seed=seed.derive("restarts", i))
            assert greedy <= scan_stat_exact(g, 3, 2)

    def test_finds_complete_planted_block(self, seed):
        params = ModelParams.create(n=30, k_r=4, k_l=4, p=1.0, q=0.02)
        graph, _ = sample_planted(params, seed)
        assert scan_stat_greedy(graph, 4, 4, restarts=50, seed=seed) == 16

    def test_deterministic(self, seed):
        g = sample_er(15, 0.3, seed)
        assert scan_stat_greedy(g, 3, 3, 10, seed) == scan_stat_greedy(g, 3, 3, 10, seed)

    def test_outcome_is_flagged_inexact(self, seed):
        params = ModelParams.create(n=10, k_r=2, k_l=2, p=0.9, q=0.1)
        g = sample_er(10, 0.1, seed)
        outcome = run_test(g, params, DetectionMethod.SCAN_GREEDY, DetectionOptions(restarts=3, seed=seed))
        assert outcome.exact is False


class TestBlockSumHistogram:
    def test_matches_placement_enumeration(self, seed):
        g = sample_er(7, 0.5, seed)
        expected = Counter(g.block_sum(r, l) for r, l in iter_placements(7, 2, 2))
        hist = block_sum_histogram(g, 2, 2)
        assert sum(hist) == 210
        assert hist == [expected.get(s, 0) for s in range(5)]

    def test_thread_count_does_not_matter(self, seed):
        g = sample_er(9, 0.4, seed)
        assert block_sum_histogram(g, 3, 2, threads=1) == block_sum_histogram(g, 3, 2, threads=3)


class TestRunTest:
    def test_tie_rejects(self):
        # tau_scan = 2 * 1 * (0.75 + 0.25) / 2 = 1 and one edge gives a block sum of 1
        params = ModelParams.create(n=3, k_r=2, k_l=1, p=0.75, q=0.25)
        graph = Graph.from_edges(3, [(0, 1)])
        outcome = run_test(graph, params, DetectionMethod.SCAN_EXACT)
        assert outcome.statistic == outcome.threshold == 1.0
        assert outcome.verdict == 1

    def test_count_and_degree_verdicts(self):
        params = ModelParams.create(n=6, k_r=2, k_l=2, p=0.9, q=0.1)
        full = Graph.complete(6)
        empty = Graph.empty(6)
        for method in (DetectionMethod.COUNT, DetectionMethod.DEGREE, DetectionMethod.SCAN_EXACT):
            assert run_test(full, params, method).verdict == 1
            assert run_test(empty, params, method).verdict == 0

    def test_vertex_count_mismatch(self):
        params = ModelParams.create(n=6, k_r=2, k_l=2, p=0.9, q=0.1)
        with pytest.raises(ParameterError):
            run_test(Graph.empty(5), params, DetectionMethod.COUNT)

    def test_feasibility_before_sampling(self):
        params = ModelParams.create(n=10_000, k_r=50, k_l=50, p=0.5, q=0.1)
        with pytest.raises(BudgetExceeded):
            check_feasible(params, DetectionMethod.SCAN_EXACT)
        check_feasible(params, DetectionMethod.COUNT)

    def test_method_detector_returns_verdict(self, seed):
        params = ModelParams.create(n=6, k_r=2, k_l=2, p=0.9, q=0.1)
        detect = method_detector(DetectionMethod.COUNT)
        assert detect(Graph.complete(6), params, seed) == 1
        assert detect.__name__ == "Count"


class TestLRT:
    def test_single_pair(self):
        params = ModelParams.create(n=2, k_r=1, k_l=1, p=0.8, q=0.3)
        with_edge = lrt_exact(Graph.complete(2), params)
        without = lrt_exact(Graph.empty(2), params)
        assert with_edge.statistic == pytest.approx(math.log(0.8 / 0.3))
        assert without.statistic == pytest.approx(math.log(0.2 / 0.7))
        assert with_edge.threshold == 0.0
        assert (with_edge.verdict, without.verdict) == (1, 0)
        assert with_edge.method == DetectionMethod.LRT

    def test_ratio_past_float_range(self):
        params = ModelParams.create(n=16, k_r=8, k_l=8, p=0.99999, q=1e-5)
        outcome = lrt_exact(Graph.complete(16), params)
        assert math.isfinite(outcome.statistic)
        assert outcome.statistic > 709
        assert outcome.verdict == 1
        assert likelihood_ratio(Graph.complete(16), params) == math.inf
        assert run_test(Graph.complete(16), params, DetectionMethod.LRT).verdict == 1

    def test_ruled_out_placements(self):
        params = ModelParams.create(n=4, k_r=1, k_l=1, p=1.0, q=0.3)
        outcome = lrt_exact(Graph.empty(4), params)
        assert outcome.statistic == -math.inf
        assert outcome.verdict == 0
