"""
Detection statistics and thresholded tests.

Statistics:
- Count:  Σ_{i<j} A_ij
- MaxDeg: max_i Σ_j A_ij
- Scan:   max over disjoint (R', L') with |R'| = kR, |L'| = kL of the R'×L' edge count

The exact scan enumerates R' lexicographically; for a fixed R' the best L' is the
kL residual vertices with the most neighbours in R' (the block sum is linear in
L'), so the search is exact while only R' is enumerated. R' prefixes are the
unit of parallel work and results are merged by max.
"""

import logging
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, List, Optional

import numpy as np

from pdbs.config import settings
from pdbs.errors import ParameterError
from pdbs.graph.graph import Graph
from pdbs.graph.placements import check_budget, placement_count
from pdbs.models.canonical import DetectionMethod, DetectionOutcome, ModelParams, Seed
from pdbs.engine.measures import tau_count, tau_deg, tau_scan
from pdbs.workers.pool import parallel_map

logger = logging.getLogger(__name__)


@dataclass
class DetectionOptions:
    """Budgets and knobs for run_test."""

    scan_cap: int = field(default_factory=lambda: settings.scan_cap)
    enum_cap: int = field(default_factory=lambda: settings.enum_cap)
    restarts: int = field(default_factory=lambda: settings.greedy_restarts)
    threads: int = field(default_factory=lambda: settings.threads)
    seed: Optional[Seed] = None  # greedy restarts; defaults to settings.default_seed


def count_stat(graph: Graph) -> int:
    return graph.edge_count


def maxdeg_stat(graph: Graph) -> int:
    return graph.max_degree()


def _check_sizes(graph: Graph, k_r: int, k_l: int) -> None:
    if k_r < 1 or k_l < 1:
        raise ParameterError(f"block sizes must be positive, got ({k_r}, {k_l})")
    if k_r + k_l > graph.n:
        raise ParameterError(f"k_r + k_l = {k_r + k_l} exceeds n = {graph.n}")


def _top_sum(weights: np.ndarray, k: int) -> int:
    if k == 0:
        return 0
    return int(np.partition(weights, weights.size - k)[weights.size - k:].sum())


def _prefix_combinations(n: int, k: int, first: int):
    for rest in combinations(range(first + 1, n), k - 1):
        yield (first, *rest)


def scan_stat_exact(
    graph: Graph,
    k_r: int,
    k_l: int,
    cap: Optional[int] = None,
    threads: int = 1,
) -> int:
    """
    Exhaustive scan statistic.

    Raises:
        BudgetExceeded: when C(n,kR)·C(n-kR,kL) exceeds cap
    """
    _check_sizes(graph, k_r, k_l)
    cap = settings.scan_cap if cap is None else cap
    check_budget("scan_stat_exact", placement_count(graph.n, k_r, k_l), cap)

    n = graph.n
    dense = graph.dense
    full = k_r * k_l

    def best_for_prefix(first: int) -> int:
        best = 0
        for right in _prefix_combinations(n, k_r, first):
            idx = list(right)
            w = dense[idx].sum(axis=0)
            w[idx] = -1
            best = max(best, _top_sum(w, k_l))
            if best == full:
                break
        return best

    return max(parallel_map(best_for_prefix, range(n - k_r + 1), threads))


def _best_response(dense: np.ndarray, fixed: np.ndarray, k: int) -> np.ndarray:
    """The k vertices outside `fixed` with the most neighbours in `fixed` (stable ties)."""
    w = dense[fixed].sum(axis=0)
    w[fixed] = -1
    return np.sort(np.argsort(-w, kind="stable")[:k])


def scan_stat_greedy(graph: Graph, k_r: int, k_l: int, restarts: int, seed: Seed) -> int:
    """
    Randomized local search for the scan statistic.

    From a random disjoint start, alternately replace L' by the best response to
    R' and R' by the best response to L' (a single-vertex-swap local optimum on
    each side) until the block sum stops increasing. Never exceeds the exact scan.
    """
    _check_sizes(graph, k_r, k_l)
    if restarts < 1:
        raise ParameterError(f"restarts must be positive, got {restarts}")
    dense = graph.dense
    rng = seed.stream("scan-greedy")
    full = k_r * k_l
    best = 0

    for restart in range(restarts):
        perm = rng.permutation(graph.n)
        right = np.sort(perm[:k_r])
        left = np.sort(perm[k_r:k_r + k_l])
        current = int(dense[np.ix_(right, left)].sum())
        while True:
            left = _best_response(dense, right, k_l)
            right = _best_response(dense, left, k_r)
            value = int(dense[np.ix_(right, left)].sum())
            if value <= current:
                break
            current = value
        best = max(best, current)
        if best == full:
            logger.debug(f"scan_stat_greedy: full block found after {restart + 1} restarts")
            break
    return best


def block_sum_histogram(
    graph: Graph,
    k_r: int,
    k_l: int,
    cap: Optional[int] = None,
    threads: int = 1,
) -> List[int]:
    """
    Exact number of ordered placements (R, L) whose R×L block holds s edges,
    for s = 0..kR·kL.

    For each R the residual vertices carry weights w_v = |N(v) ∩ R|; the number
    of kL-subsets with weight sum s comes from a subset-sum table.
    """
    _check_sizes(graph, k_r, k_l)
    cap = settings.enum_cap if cap is None else cap
    check_budget("block_sum_histogram", placement_count(graph.n, k_r, k_l), cap)

    n = graph.n
    dense = graph.dense
    size = k_r * k_l + 1

    def histogram_for_prefix(first: int) -> np.ndarray:
        total = np.zeros(size, dtype=object)
        for right in _prefix_combinations(n, k_r, first):
            idx = list(right)
            w = dense[idx].sum(axis=0)
            taken = set(right)
            # table[j, s]: j-subsets of the processed residual vertices with sum s
            table = np.zeros((k_l + 1, size), dtype=object)
            table[0, 0] = 1
            for v in range(n):
                if v in taken:
                    continue
                wv = int(w[v])
                shifted = np.zeros_like(table)
                shifted[1:, wv:] = table[:-1, :size - wv]
                table = table + shifted
            total = total + table[k_l]
        return total

    parts = parallel_map(histogram_for_prefix, range(n - k_r + 1), threads)
    counts = [0] * size
    for part in parts:
        for s in range(size):
            counts[s] += int(part[s])
    return counts


# ---------- Tests ----------


def _outcome(statistic: float, threshold: float, method: DetectionMethod, exact: bool = True) -> DetectionOutcome:
    return DetectionOutcome(
        statistic=statistic,
        threshold=threshold,
        verdict=int(statistic >= threshold),
        method=method,
        exact=exact,
    )


def lrt_exact(graph: Graph, params: ModelParams, cap: Optional[int] = None, threads: int = 1) -> DetectionOutcome:
    """
    Optimal (Bayes) test: reject H0 iff L_n(G) >= 1.

    The statistic is log L_n(G) against threshold 0, so it stays finite where
    L_n(G) itself overflows; it is -inf when every placement is ruled out.
    """
    from pdbs.engine.oracle import log_likelihood_ratio

    log_value = log_likelihood_ratio(graph, params, cap=cap, threads=threads)
    return _outcome(log_value, 0.0, DetectionMethod.LRT)


def check_feasible(params: ModelParams, method: DetectionMethod, options: Optional[DetectionOptions] = None) -> None:
    """Raise BudgetExceeded before any sampling if the method cannot run at params."""
    options = options or DetectionOptions()
    if method == DetectionMethod.SCAN_EXACT:
        check_budget("scan_stat_exact", params.placement_count, options.scan_cap)
    elif method == DetectionMethod.LRT:
        check_budget("lrt_exact", params.placement_count, options.enum_cap)


def run_test(
    graph: Graph,
    params: ModelParams,
    method: DetectionMethod,
    options: Optional[DetectionOptions] = None,
) -> DetectionOutcome:
    """Compute the statistic for `method`, its threshold, and verdict = 1{stat >= tau}."""
    options = options or DetectionOptions()
    if graph.n != params.n:
        raise ParameterError(f"graph has {graph.n} vertices but params.n = {params.n}")
    method = DetectionMethod(method)

    if method == DetectionMethod.COUNT:
        return _outcome(count_stat(graph), tau_count(params), method)
    if method == DetectionMethod.DEGREE:
        return _outcome(maxdeg_stat(graph), tau_deg(params), method)
    if method == DetectionMethod.SCAN_EXACT:
        stat = scan_stat_exact(graph, params.k_r, params.k_l, cap=options.scan_cap, threads=options.threads)
        return _outcome(stat, tau_scan(params), method)
    if method == DetectionMethod.SCAN_GREEDY:
        seed = options.seed or Seed(root=settings.default_seed)
        stat = scan_stat_greedy(graph, params.k_r, params.k_l, options.restarts, seed)
        return _outcome(stat, tau_scan(params), method, exact=False)
    return lrt_exact(graph, params, cap=options.enum_cap, threads=options.threads)


# Detector callable used by the Monte Carlo workers: (graph, params, seed) -> verdict
Detector = Callable[[Graph, ModelParams, Seed], int]


def method_detector(method: DetectionMethod, options: Optional[DetectionOptions] = None) -> Detector:
    """Wrap a built-in method as a Detector; the per-trial seed drives greedy restarts."""
    options = options or DetectionOptions()

    def detect(graph: Graph, params: ModelParams, seed: Seed) -> int:
        trial_options = replace(options, seed=seed, threads=1)
        return run_test(graph, params, method, trial_options).verdict

    detect.__name__ = DetectionMethod(method).value
    return detect
