"""
Closed-form measures, thresholds, theory checkers and the region classifier.
"""

import math
from fractions import Fraction

import pytest

from pdbs.errors import BudgetExceeded, ParameterError
from pdbs.engine.measures import (
    chi2_bernoulli,
    classify_region,
    gamma_n,
    max_bipartite_density,
    max_subgraph_density,
    simplified_barriers,
    tau_count,
    tau_deg,
    tau_scan,
    thm1_impossible,
    thm2_sufficient,
)
from pdbs.graph.graph import Graph
from pdbs.models.canonical import ModelParams, PhaseFamily, RegimeExponents, Region, TestName


def _label(beta: float, alpha: float, family: PhaseFamily = PhaseFamily.BALANCED):
    return classify_region(RegimeExponents(beta_r=beta, beta_l=family.beta_l(beta), alpha=alpha))


class TestDivergences:
    def test_chi2_values(self):
        assert chi2_bernoulli(0.5, 0.5) == 0.0
        assert chi2_bernoulli(1.0, 0.5) == 1.0
        assert chi2_bernoulli(0.2, 0.1) == pytest.approx(1 / 9)

    @pytest.mark.parametrize("q", [0.0, 1.0])
    def test_chi2_rejects_degenerate_q(self, q):
        with pytest.raises(ParameterError):
            chi2_bernoulli(0.5, q)

    def test_gamma_large_block(self):
        assert gamma_n(10, 100, 100) == pytest.approx(3.466e-4, rel=1e-3)

    def test_gamma_small_block(self):
        assert gamma_n(100, 5, 5) == pytest.approx(math.log(1 + 2 * math.log(2)))
        assert gamma_n(100, 5, 5) == pytest.approx(0.8697, abs=1e-3)

    def test_gamma_decreasing_in_block_area(self):
        values = [gamma_n(50, x, 3) for x in range(1, 10)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestDensity:
    def test_bipartite_density(self):
        assert max_bipartite_density(2, 3) == Fraction(6, 5)
        assert max_bipartite_density(1, 1) == Fraction(1, 2)

    def test_subgraph_density_of_complete_bipartite(self, planted_k23):
        assert max_subgraph_density(planted_k23) == max_bipartite_density(2, 3)

    def test_subgraph_density_of_clique(self):
        assert max_subgraph_density(Graph.complete(4)) == Fraction(3, 2)
        assert max_subgraph_density(Graph.empty(4)) == 0

    def test_subgraph_density_budget(self):
        with pytest.raises(BudgetExceeded):
            max_subgraph_density(Graph.empty(21))


class TestThresholds:
    def test_values(self):
        params = ModelParams.create(n=10, k_r=3, k_l=2, p=0.7, q=0.1)
        assert tau_scan(params) == pytest.approx(6 * 0.8 / 2)
        assert tau_count(params) == pytest.approx(45 * 0.1 + 6 * 0.6 / 2)
        assert tau_deg(params) == pytest.approx(9 * 0.1 + 3 * 0.6 / 2)


class TestImpossibility:
    def test_conditions_3a_and_3c(self):
        params = ModelParams.create(n=100, k_r=10, k_l=10, p=0.5866, q=0.5)
        report = thm1_impossible(params)
        assert report.conditions == ["3a", "3c"]
        assert report.impossible

    def test_strong_signal_is_possible(self):
        params = ModelParams.create(n=100, k_r=10, k_l=10, p=0.9, q=0.1)
        report = thm1_impossible(params)
        assert report.conditions == []
        assert not report.impossible

    def test_3a_alone_is_not_enough(self):
        # huge n makes 3a easy while 3b and 3c stay tight
        params = ModelParams.create(n=10**6, k_r=1, k_l=1, p=0.3, q=0.2)
        report = thm1_impossible(params)
        assert "3a" in report.conditions
        assert report.impossible == ("3b" in report.conditions or "3c" in report.conditions)


class TestSufficiency:
    def test_count_example(self):
        params = ModelParams.create(n=400, k_r=120, k_l=120, p=0.24, q=0.12)
        report = thm2_sufficient(params, delta=0.05)
        assert report.tests == {TestName.SCAN, TestName.COUNT}
        assert report.warnings == []

    def test_weak_signal(self):
        params = ModelParams.create(n=400, k_r=5, k_l=5, p=0.121, q=0.12)
        assert thm2_sufficient(params).tests == set()

    def test_warns_on_large_gap(self, caplog):
        params = ModelParams.create(n=100, k_r=10, k_l=10, p=0.9, q=0.1)
        report = thm2_sufficient(params)
        assert len(report.warnings) == 1
        assert "thm2_sufficient" in caplog.text

    def test_rejects_bad_delta(self):
        params = ModelParams.create(n=100, k_r=10, k_l=10, p=0.9, q=0.1)
        with pytest.raises(ParameterError):
            thm2_sufficient(params, delta=1.5)


class TestBarriers:
    def test_values(self):
        params = ModelParams.create(n=100, k_r=10, k_l=5, p=0.5, q=0.1)
        barriers = simplified_barriers(params)
        assert barriers.scan == pytest.approx(1 / 5)
        assert barriers.count == pytest.approx(100**2 / (100 * 25))
        assert barriers.degree == pytest.approx(1.0)
        assert barriers.lower == pytest.approx(0.2)
        assert barriers.upper(100)[TestName.DEGREE] == pytest.approx(math.log(100))


class TestClassifyRegion:
    def test_balanced_hard(self):
        assert _label(0.4, 0.2).region == Region.HARD

    def test_balanced_impossible(self):
        assert _label(0.3, 0.5).region == Region.IMPOSSIBLE

    def test_balanced_easy(self):
        label = _label(0.8, 0.5)
        assert label.region == Region.EASY
        assert label.witnesses == [TestName.SCAN, TestName.COUNT, TestName.DEGREE]

    def test_lightly_unbalanced_corner_is_boundary(self):
        assert _label(0.75, 0.5, PhaseFamily.LIGHTLY).region == Region.BOUNDARY

    def test_extremely_unbalanced_degree(self):
        label = _label(0.8, 0.3, PhaseFamily.EXTREME)
        assert label.region == Region.EASY
        assert label.witnesses == [TestName.DEGREE]
        assert str(label) == "Easy{Degree}"

    def test_no_hard_region_when_left_side_is_constant(self):
        for i in range(20):
            for j in range(21):
                label = _label(i * 0.05, j * 0.1, PhaseFamily.EXTREME)
                assert label.region != Region.HARD, f"Hard at beta={i * 0.05}, alpha={j * 0.1}"

    def test_dense_regime(self):
        assert _label(0.3, 0.0).region == Region.HARD
        assert _label(0.7, 0.0).witnesses == [TestName.SCAN, TestName.COUNT, TestName.DEGREE]
        assert _label(0.5, 0.0).region == Region.BOUNDARY
        assert _label(0.3, 0.0, PhaseFamily.EXTREME).region == Region.IMPOSSIBLE
        assert _label(0.7, 0.0, PhaseFamily.EXTREME).witnesses == [TestName.DEGREE]

    def test_dense_count_witness(self):
        dense = classify_region(RegimeExponents(beta_r=0.8, beta_l=0.3, alpha=0.0))
        assert dense.witnesses == [TestName.SCAN, TestName.COUNT, TestName.DEGREE]
        assert classify_region(RegimeExponents(beta_r=0.8, beta_l=0.15, alpha=0.0)).witnesses == [
            TestName.SCAN,
            TestName.DEGREE,
        ]
        # kR * kL of order n sits on the count edge
        assert classify_region(RegimeExponents(beta_r=0.75, beta_l=0.25, alpha=0.0)).region == Region.BOUNDARY

    def test_boundaries_within_tolerance(self):
        assert _label(0.4, 0.4).region == Region.BOUNDARY
        assert _label(0.4, 0.4 + 1e-12).region == Region.BOUNDARY
        assert classify_region(RegimeExponents(beta_r=0.4, beta_l=0.4, alpha=0.41), tol=0.05).region == Region.BOUNDARY

    def test_rejects_out_of_range_exponents(self):
        with pytest.raises(ValueError):
            RegimeExponents(beta_r=1.0, beta_l=0.2, alpha=0.1)


GRID = [round(0.05 * i, 12) for i in range(20)]
ALPHAS = [round(0.05 * i, 12) for i in range(41)]
RANK = {Region.IMPOSSIBLE: 0, Region.HARD: 1, Region.EASY: 2}


class TestClassifierProperties:
    def test_symmetric_in_the_two_sides(self):
        for beta_r in GRID:
            for beta_l in GRID:
                for alpha in ALPHAS[::4]:
                    a = classify_region(RegimeExponents(beta_r=beta_r, beta_l=beta_l, alpha=alpha))
                    b = classify_region(RegimeExponents(beta_r=beta_l, beta_l=beta_r, alpha=alpha))
                    assert a == b, (beta_r, beta_l, alpha)

    def test_weaker_signal_never_helps(self):
        for beta_r in GRID:
            for beta_l in GRID:
                labels = [
                    classify_region(RegimeExponents(beta_r=beta_r, beta_l=beta_l, alpha=alpha)) for alpha in ALPHAS
                ]
                decided = [(alpha, l) for alpha, l in zip(ALPHAS, labels) if l.region != Region.BOUNDARY]
                for (a0, before), (a1, after) in zip(decided, decided[1:]):
                    where = (beta_r, beta_l, a0, a1)
                    assert RANK[after.region] <= RANK[before.region], where
                    if after.region == Region.EASY:
                        assert set(after.witnesses) <= set(before.witnesses), where
