"""
Monte Carlo risk estimation.

R_n(phi) = P_H0(phi = 1) + P_H1(phi = 0), reported as the unnormalized sum in
[0, 2] together with both components and 95% Wilson intervals.

Trial i of the null arm draws from seed.derive("h0", i) and trial i of the
planted arm from seed.derive("h1", i); the detector gets its own child seed.
Trials are the unit of parallel work, so estimates never depend on --threads.

Usage:
    estimator = RiskEstimator(options)
    estimate = estimator.estimate(DetectionMethod.COUNT, params, trials=200, seed=Seed(root=7))
"""

import logging
import math
from typing import Optional, Tuple, Union

from scipy.stats import norm

from pdbs.config import settings
from pdbs.errors import ParameterError
from pdbs.engine.detectors import DetectionOptions, Detector, check_feasible, method_detector
from pdbs.graph.samplers import sample_er, sample_planted
from pdbs.models.canonical import DetectionMethod, ModelParams, RiskEstimate, Seed
from pdbs.workers.pool import parallel_map

logger = logging.getLogger(__name__)

H0_STREAM = "h0"
H1_STREAM = "h1"
DETECTOR_STREAM = "detector"


def wilson_interval(successes: int, trials: int, confidence: float) -> Tuple[float, float, float]:
    """Wilson score interval; returns (low, high, half_width)."""
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    if not 0.0 < confidence < 1.0:
        raise ParameterError(f"confidence must lie in (0,1), got {confidence}")
    z = float(norm.ppf(0.5 + confidence / 2))
    z2 = z * z
    denom = trials + z2
    center = (successes + z2 / 2) / denom
    half = z / denom * math.sqrt(successes * (trials - successes) / trials + z2 / 4)
    return max(0.0, center - half), min(1.0, center + half), half


class RiskEstimator:
    """Runs the two arms of a risk estimate and keeps running counters."""

    def __init__(self, options: Optional[DetectionOptions] = None, confidence: Optional[float] = None):
        self.options = options or DetectionOptions()
        self.confidence = settings.confidence_level if confidence is None else confidence
        self._stats = {
            "estimates": 0,
            "trials_run": 0,
        }

    @property
    def stats(self) -> dict:
        return self._stats.copy()

    def _resolve(self, method: Union[DetectionMethod, str, Detector], params: ModelParams) -> Tuple[Detector, str]:
        if callable(method):
            return method, getattr(method, "__name__", "custom")
        method = DetectionMethod(method)
        check_feasible(params, method, self.options)
        return method_detector(method, self.options), method.value

    def estimate(
        self,
        method: Union[DetectionMethod, str, Detector],
        params: ModelParams,
        trials: int,
        seed: Seed,
    ) -> RiskEstimate:
        if trials < 1:
            raise ParameterError(f"trials must be positive, got {trials}")
        detector, name = self._resolve(method, params)

        def null_trial(i: int) -> int:
            trial_seed = seed.derive(H0_STREAM, i)
            graph = sample_er(params.n, params.q, trial_seed)
            return int(detector(graph, params, trial_seed.derive(DETECTOR_STREAM)))

        def planted_trial(i: int) -> int:
            trial_seed = seed.derive(H1_STREAM, i)
            graph, _ = sample_planted(params, trial_seed)
            return int(detector(graph, params, trial_seed.derive(DETECTOR_STREAM)))

        threads = self.options.threads
        false_alarms = sum(parallel_map(null_trial, range(trials), threads))
        misses = trials - sum(parallel_map(planted_trial, range(trials), threads))

        low1, high1, half1 = wilson_interval(false_alarms, trials, self.confidence)
        low2, high2, half2 = wilson_interval(misses, trials, self.confidence)
        type1 = false_alarms / trials
        type2 = misses / trials

        self._stats["estimates"] += 1
        self._stats["trials_run"] += 2 * trials
        logger.info(
            f"mc_risk {name} n={params.n} k=({params.k_r},{params.k_l}) "
            f"p={params.p} q={params.q}: type1={type1:.4f} type2={type2:.4f} trials={trials}"
        )
        return RiskEstimate(
            trials=trials,
            type1_hat=type1,
            type2_hat=type2,
            risk_hat=type1 + type2,
            ci_half_width=half1 + half2,
            type1_ci=[low1, high1],
            type2_ci=[low2, high2],
            confidence=self.confidence,
            seed=seed.root,
            method=name,
        )


def mc_risk(
    method: Union[DetectionMethod, str, Detector],
    params: ModelParams,
    trials: int,
    seed: Seed,
    options: Optional[DetectionOptions] = None,
    confidence: Optional[float] = None,
) -> RiskEstimate:
    """
    Estimate the Type I + Type II risk of `method` (a built-in method or any
    callable (graph, params, seed) -> verdict).

    Raises:
        BudgetExceeded: before any trial when the method is infeasible at params
    """
    return RiskEstimator(options, confidence).estimate(method, params, trials, seed)
