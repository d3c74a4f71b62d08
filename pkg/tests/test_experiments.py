"""
Monte Carlo risk, sweeps and phase grids.
"""

import math

import numpy as np
import pytest
from scipy.stats import binom

from pdbs.errors import BudgetExceeded, ParameterError
from pdbs.engine.detectors import DetectionOptions, count_stat
from pdbs.graph.samplers import sample_er
from pdbs.models.canonical import DetectionMethod, ModelParams, PhaseFamily, Region, TestName
from pdbs.workers.phase import grid_values, phase_grid
from pdbs.workers.risk import RiskEstimator, mc_risk, wilson_interval
from pdbs.workers.sweep import SweepRunner, sweep

from tests.mc_margins import mean_margin, proportion_margin, variance_margin


def always(verdict: int):
    def detect(graph, params, seed):
        return verdict

    return detect


def coin(rate: float):
    def detect(graph, params, seed):
        return int(seed.stream("coin").random() < rate)

    return detect


@pytest.fixture
def params() -> ModelParams:
    return ModelParams.create(n=20, k_r=3, k_l=3, p=0.8, q=0.1)


class TestMcRisk:
    def test_always_reject(self, params, seed):
        est = mc_risk(always(1), params, 20, seed)
        assert (est.type1_hat, est.type2_hat, est.risk_hat) == (1.0, 0.0, 1.0)

    def test_never_reject(self, params, seed):
        est = mc_risk(always(0), params, 20, seed)
        assert (est.type1_hat, est.type2_hat, est.risk_hat) == (0.0, 1.0, 1.0)

    def test_records_provenance(self, params, seed):
        est = mc_risk(DetectionMethod.COUNT, params, 10, seed)
        assert est.seed == seed.root
        assert est.method == "Count"
        assert est.trials == 10
        assert est.risk_hat == est.type1_hat + est.type2_hat

    def test_deterministic_across_thread_counts(self, params, seed):
        one = mc_risk(DetectionMethod.DEGREE, params, 40, seed, DetectionOptions(threads=1))
        four = mc_risk(DetectionMethod.DEGREE, params, 40, seed, DetectionOptions(threads=4))
        assert one == four

    def test_greedy_detector_is_reproducible(self, params, seed):
        options = DetectionOptions(restarts=3)
        assert mc_risk(DetectionMethod.SCAN_GREEDY, params, 10, seed, options) == mc_risk(
            DetectionMethod.SCAN_GREEDY, params, 10, seed, options
        )

    def test_budget_checked_before_trials(self, seed):
        big = ModelParams.create(n=500, k_r=20, k_l=20, p=0.8, q=0.1)
        estimator = RiskEstimator()
        with pytest.raises(BudgetExceeded):
            estimator.estimate(DetectionMethod.SCAN_EXACT, big, 10, seed)
        assert estimator.stats == {"estimates": 0, "trials_run": 0}

    def test_rejects_zero_trials(self, params, seed):
        with pytest.raises(ParameterError):
            mc_risk(DetectionMethod.COUNT, params, 0, seed)

    def test_coin_detector_rate(self, params, seed):
        trials = 400
        est = mc_risk(coin(0.3), params, trials, seed)
        margin = proportion_margin(0.3, trials, k=5)
        assert abs(est.type1_hat - 0.3) < margin
        assert abs(est.type2_hat - 0.7) < margin

    def test_identical_hypotheses_give_chance_risk(self, seed):
        same = ModelParams.model_construct(n=20, k_r=3, k_l=3, p=0.3, q=0.3)
        for method in (DetectionMethod.COUNT, DetectionMethod.DEGREE):
            est = mc_risk(method, same, 200, seed)
            assert est.risk_hat >= 1 - 2 * est.ci_half_width, f"{method.value}: {est.risk_hat}"

    def test_stats(self, params, seed):
        estimator = RiskEstimator()
        estimator.estimate(DetectionMethod.COUNT, params, 5, seed)
        assert estimator.stats == {"estimates": 1, "trials_run": 10}


class TestWilson:
    def test_interval_contains_estimate(self):
        low, high, half = wilson_interval(30, 100, 0.95)
        assert low < 0.3 < high
        assert half == pytest.approx((high - low) / 2)

    def test_extremes_stay_in_unit_interval(self):
        low, high, _ = wilson_interval(0, 10, 0.95)
        assert low == pytest.approx(0.0, abs=1e-12) and 0 < high < 1
        low, high, _ = wilson_interval(10, 10, 0.95)
        assert 0 < low < 1 and high == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("trials", [100, 200])
    def test_coverage(self, trials):
        rate = 0.3
        coverage = sum(
            binom.pmf(x, trials, rate)
            for x in range(trials + 1)
            if wilson_interval(x, trials, 0.95)[0] <= rate <= wilson_interval(x, trials, 0.95)[1]
        )
        assert coverage >= 0.93


class TestSweep:
    def test_empty_grid(self, seed):
        assert sweep([], [DetectionMethod.COUNT], 10, seed) == []

    def test_single_cell_reproduces_mc_risk(self, params, seed):
        rows = sweep([params], [DetectionMethod.COUNT], 15, seed)
        assert len(rows) == 1
        assert rows[0].estimate == mc_risk(DetectionMethod.COUNT, params, 15, seed.derive("cell", 0))
        assert rows[0].provenance["seed_root"] == seed.root

    def test_errors_recorded_per_cell(self, params, seed):
        big = ModelParams.create(n=500, k_r=20, k_l=20, p=0.8, q=0.1)
        runner = SweepRunner()
        rows = runner.run([big, params], [DetectionMethod.SCAN_EXACT, DetectionMethod.COUNT], 5, seed)
        assert len(rows) == 4
        assert rows[0].error.startswith("E_BUDGET")
        assert rows[0].estimate is None
        assert [r.error is None for r in rows[1:]] == [True, True, True]
        assert runner.stats["errors"] == 1

    def test_refinement_keeps_existing_cells(self, params, seed):
        other = ModelParams.create(n=20, k_r=3, k_l=3, p=0.6, q=0.1)
        short = sweep([params], [DetectionMethod.DEGREE], 10, seed)
        longer = sweep([params, other], [DetectionMethod.DEGREE], 10, seed)
        assert short[0].estimate == longer[0].estimate

    @pytest.mark.slow
    def test_risk_decreases_with_signal(self, seed):
        grid = [
            ModelParams.create(n=80, k_r=k, k_l=k, p=p, q=0.1)
            for k in (6, 8, 10)
            for p in (0.3, 0.6, 0.9)
        ]
        rows = sweep(grid, [DetectionMethod.DEGREE], 100, seed)
        for k_index in range(3):
            column = rows[3 * k_index:3 * k_index + 3]
            for weaker, stronger in zip(column, column[1:]):
                slack = 2 * max(weaker.estimate.ci_half_width, stronger.estimate.ci_half_width)
                assert stronger.estimate.risk_hat <= weaker.estimate.risk_hat + slack


class TestPhaseGrid:
    def test_grid_values(self):
        assert grid_values("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert grid_values("0.4") == [0.4]
        assert len(grid_values("0:2:0.1")) == 21
        with pytest.raises(ParameterError):
            grid_values("1:0:0.1")

    def test_balanced_anchor(self):
        cells = phase_grid([0.4], [0.2], PhaseFamily.BALANCED)
        assert cells[0].label.region == Region.HARD

    def test_lightly_unbalanced_corner(self):
        cells = phase_grid([0.75], [0.5], PhaseFamily.LIGHTLY)
        assert cells[0].label.region == Region.BOUNDARY
        assert cells[0].beta_l == pytest.approx(0.5)

    def test_extremely_unbalanced_anchor(self):
        cells = phase_grid([0.8], [0.3], PhaseFamily.EXTREME)
        assert cells[0].label.region == Region.EASY
        assert cells[0].label.witnesses == [TestName.DEGREE]

    def test_custom_balance_and_skipped_cells(self):
        cells = phase_grid(grid_values("0:1:0.5"), [0.2, 2.5], lambda b: b / 4)
        # beta = 1 and alpha = 2.5 fall outside the exponent ranges
        assert [(c.beta, c.alpha) for c in cells] == [(0.0, 0.2), (0.5, 0.2)]
        assert cells[1].beta_l == pytest.approx(0.125)

    def test_beta_major_order(self):
        cells = phase_grid([0.1, 0.2], [0.3, 0.4])
        assert [(c.beta, c.alpha) for c in cells] == [(0.1, 0.3), (0.1, 0.4), (0.2, 0.3), (0.2, 0.4)]


@pytest.mark.slow
class TestDeskScaleDetection:
    """Deep-interior cells where the thresholded tests succeed at desk scale."""

    def test_count(self, seed):
        params = ModelParams.create(n=400, k_r=120, k_l=120, p=0.24, q=0.12)
        assert mc_risk(DetectionMethod.COUNT, params, 200, seed).risk_hat <= 0.1

    def test_degree(self, seed):
        params = ModelParams.create(n=2000, k_r=300, k_l=2, p=0.9, q=0.1)
        assert mc_risk(DetectionMethod.DEGREE, params, 200, seed).risk_hat <= 0.1

    def test_scan_exact(self, seed):
        params = ModelParams.create(n=24, k_r=3, k_l=3, p=1.0, q=0.01)
        assert mc_risk(DetectionMethod.SCAN_EXACT, params, 100, seed).risk_hat <= 0.1

    def test_null_count_calibration(self, seed):
        n, q, trials = 400, 0.12, 10_000
        m = math.comb(n, 2)
        counts = np.array([count_stat(sample_er(n, q, seed.derive("null", i))) for i in range(trials)])
        variance = m * q * (1 - q)
        assert abs(counts.mean() - m * q) < mean_margin(variance, trials, k=4)
        assert abs(counts.var(ddof=1) - variance) < variance_margin(variance, trials, k=4)
