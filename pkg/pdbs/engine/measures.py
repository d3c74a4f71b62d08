"""
Closed-form quantities and decision boundaries.

- chi2_bernoulli, gamma_n, maximal subgraph densities
- the scan / count / degree thresholds
- finite-n impossibility and sufficiency checkers (exact inequalities)
- the polynomial-scale region classifier behind the phase diagrams

All logarithms are natural.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Set

from pdbs.config import settings
from pdbs.errors import BudgetExceeded, ParameterError
from pdbs.graph.graph import Graph
from pdbs.models.canonical import (
    ModelParams,
    RegimeExponents,
    Region,
    RegionLabel,
    TestName,
)

logger = logging.getLogger(__name__)

MAX_DENSITY_VERTICES = 20


def chi2_bernoulli(p: float, q: float) -> float:
    """χ²(Bern(p) || Bern(q)) = (p - q)² / (q(1 - q))."""
    if not 0.0 < q < 1.0:
        raise ParameterError(f"chi-square divergence undefined for q={q}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0,1], got {p}")
    return (p - q) ** 2 / (q * (1.0 - q))


def gamma_n(n: int, x: int, y: int) -> float:
    """γ_n(x, y) = log(1 + (n / (x y)) · log(2) / 2)."""
    if n < 1 or x < 1 or y < 1:
        raise ParameterError(f"gamma_n needs n, x, y >= 1, got ({n}, {x}, {y})")
    return math.log1p(n / (x * y) * math.log(2) / 2)


def max_bipartite_density(k_r: int, k_l: int) -> Fraction:
    """m(K_{R,L}) = kR kL / (kR + kL)."""
    if k_r < 1 or k_l < 1:
        raise ParameterError(f"block sizes must be positive, got ({k_r}, {k_l})")
    return Fraction(k_r * k_l, k_r + k_l)


def max_subgraph_density(graph: Graph) -> Fraction:
    """
    Maximal subgraph density max_{S != ∅} |E(S)| / |S| by exhaustive search.

    Raises:
        BudgetExceeded: for graphs with more than MAX_DENSITY_VERTICES vertices
    """
    n = graph.n
    if n > MAX_DENSITY_VERTICES:
        raise BudgetExceeded("max_subgraph_density", 2**n, 2**MAX_DENSITY_VERTICES)
    rows = graph.rows
    best = Fraction(0)
    for subset in range(1, 1 << n):
        size = subset.bit_count()
        # each edge counted twice
        twice_edges = 0
        rest = subset
        v = 0
        while rest:
            if rest & 1:
                twice_edges += (rows[v] & subset).bit_count()
            rest >>= 1
            v += 1
        density = Fraction(twice_edges // 2, size)
        if density > best:
            best = density
    return best


# ---------- Thresholds ----------


def tau_scan(params: ModelParams) -> float:
    return params.k_r * params.k_l * (params.p + params.q) / 2


def tau_count(params: ModelParams) -> float:
    return math.comb(params.n, 2) * params.q + params.k_r * params.k_l * (params.p - params.q) / 2


def tau_deg(params: ModelParams) -> float:
    return (params.n - 1) * params.q + params.k_max * (params.p - params.q) / 2


# ---------- Finite-n theory checkers ----------


@dataclass
class ImpossibilityReport:
    """Evaluation of the statistical lower bound conditions."""

    impossible: bool
    conditions: List[str]  # satisfied labels among "3a", "3b", "3c"
    chi2: float
    bounds: Dict[str, float] = field(default_factory=dict)


def thm1_impossible(params: ModelParams) -> ImpossibilityReport:
    """
    Strong detection is impossible (R* > 1/2) when (3a) holds together with
    (3b) or (3c). Labels of every satisfied condition are reported.
    """
    n, k_r, k_l = params.n, params.k_r, params.k_l
    chi2 = chi2_bernoulli(params.p, params.q)
    g_rl = gamma_n(n, k_r, k_l)
    g_rr = gamma_n(n, k_r, k_r)
    g_ll = gamma_n(n, k_l, k_l)

    bounds = {
        "3a": n * g_rl / (8 * k_r * k_l),
        "3b": max(g_rr / (2 * k_l), g_ll / (2 * k_r)),
        "3c": max(
            min(1 / (2 * k_l), n * g_ll / (8 * k_r**2)),
            min(1 / (2 * k_r), n * g_rr / (8 * k_l**2)),
        ),
    }
    conditions = [label for label, bound in bounds.items() if chi2 <= bound]
    impossible = "3a" in conditions and ("3b" in conditions or "3c" in conditions)
    return ImpossibilityReport(impossible=impossible, conditions=conditions, chi2=chi2, bounds=bounds)


@dataclass
class SufficiencyReport:
    """Tests whose sufficient condition holds, plus advisory warnings."""

    tests: Set[TestName]
    chi2: float
    bounds: Dict[TestName, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def thm2_sufficient(params: ModelParams, delta: float = 0.05, C: float = 1.0) -> SufficiencyReport:
    """
    Check the upper-bound conditions with Ω(·) replaced by ">= C · (expression)".

    The analysis assumes |p - q| = O(q) and q bounded away from 1; violations
    are reported as warnings, not errors.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0,1), got {delta}")
    if C <= 0:
        raise ParameterError(f"C must be positive, got {C}")

    n, k_max, k_min = params.n, params.k_max, params.k_min
    chi2 = chi2_bernoulli(params.p, params.q)
    log_conf = math.log(2 / delta)

    bounds = {
        TestName.SCAN: C * (math.log(n / k_max) + log_conf / k_max) / k_min,
        TestName.COUNT: C * n**2 / (params.k_r**2 * params.k_l**2) * log_conf,
        TestName.DEGREE: C * n / k_max**2 * (math.log(n) + log_conf),
    }
    tests = {t for t, bound in bounds.items() if chi2 > 0 and chi2 >= bound}

    warnings: List[str] = []
    if params.q >= 0.99:
        warnings.append(f"q ({params.q}) is not bounded away from 1")
    if params.p - params.q > params.q:
        warnings.append(f"p - q ({params.p - params.q:.4g}) exceeds q ({params.q}); |p-q| = O(q) is doubtful")
    for w in warnings:
        logger.warning(f"thm2_sufficient: {w}")

    return SufficiencyReport(tests=tests, chi2=chi2, bounds=bounds, warnings=warnings)


@dataclass
class BarrierReport:
    """Polynomial-scale barrier terms of the sparse regime."""

    scan: float
    count: float
    degree: float

    @property
    def lower(self) -> float:
        return min(self.scan, self.count, self.degree)

    def upper(self, n: int) -> Dict[TestName, float]:
        log_n = math.log(n)
        return {
            TestName.SCAN: self.scan * log_n,
            TestName.COUNT: self.count * log_n,
            TestName.DEGREE: self.degree * log_n,
        }


def simplified_barriers(params: ModelParams) -> BarrierReport:
    return BarrierReport(
        scan=1 / params.k_min,
        count=params.n**2 / (params.k_r**2 * params.k_l**2),
        degree=params.n / params.k_max**2,
    )


# ---------- Region classifier ----------


def classify_region(exps: RegimeExponents, tol: Optional[float] = None) -> RegionLabel:
    """
    Label a polynomial-scale regime as Impossible / Hard / Easy / Boundary.

    Dense (alpha = 0): kR∧kL against O(log n) (a 0 exponent), kR∨kL against
    sqrt(n) and kR·kL against n. Sparse: compare alpha against beta_min (scan),
    2 beta_r + 2 beta_l - 2 (count) and 2 beta_max - 1 (degree).
    """
    if tol is None:
        tol = settings.boundary_tol
    b_max = max(exps.beta_r, exps.beta_l)
    b_min = min(exps.beta_r, exps.beta_l)
    alpha = exps.alpha

    if alpha == 0.0:
        return _classify_dense(exps.beta_r, exps.beta_l, tol)
    if alpha <= tol:
        return RegionLabel(region=Region.BOUNDARY)

    e_count = 2 * exps.beta_r + 2 * exps.beta_l - 2
    e_deg = 2 * b_max - 1
    if any(abs(alpha - edge) <= tol for edge in (b_min, e_count, e_deg)):
        return RegionLabel(region=Region.BOUNDARY)

    witnesses = []
    if alpha < e_count:
        witnesses.append(TestName.COUNT)
    if alpha < e_deg:
        witnesses.append(TestName.DEGREE)
    if witnesses:
        if alpha < b_min:
            witnesses.append(TestName.SCAN)
        return RegionLabel(region=Region.EASY, witnesses=witnesses)
    if alpha < b_min:
        return RegionLabel(region=Region.HARD)
    return RegionLabel(region=Region.IMPOSSIBLE)


def _classify_dense(beta_r: float, beta_l: float, tol: float) -> RegionLabel:
    b_min, b_max = min(beta_r, beta_l), max(beta_r, beta_l)
    e_count = 2 * beta_r + 2 * beta_l - 2
    if abs(b_max - 0.5) <= tol or 0.0 < b_min <= tol or abs(e_count) <= tol:
        return RegionLabel(region=Region.BOUNDARY)
    if b_max > 0.5:
        witnesses = [TestName.DEGREE]
        if e_count > 0.0:
            witnesses.append(TestName.COUNT)
        if b_min > 0.0:
            witnesses.append(TestName.SCAN)
        return RegionLabel(region=Region.EASY, witnesses=witnesses)
    if b_min == 0.0:
        return RegionLabel(region=Region.IMPOSSIBLE)
    return RegionLabel(region=Region.HARD)
