"""
Canonical data models for the PDBS Detection Lab.
Every record that crosses a module boundary or lands in an output file is one of these.
"""

import math
import zlib
from enum import Enum
from typing import Optional, List, Dict, Any, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from pdbs.errors import ParameterError

SEED_MAX = 2**64 - 1

M = TypeVar("M", bound=BaseModel)


def validated(model_cls: Type[M], **fields: Any) -> M:
    """Build a model, re-raising pydantic validation failures as ParameterError."""
    try:
        return model_cls(**fields)
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise ParameterError(f"{model_cls.__name__}: {messages}") from e


class DetectionMethod(str, Enum):
    """Detector implementations available to run_test."""
    SCAN_EXACT = "ScanExact"
    SCAN_GREEDY = "ScanGreedy"
    COUNT = "Count"
    DEGREE = "Degree"
    LRT = "LRT"


class TestName(str, Enum):
    """The three thresholded tests of the upper-bound analysis."""
    __test__ = False  # not a pytest class

    SCAN = "Scan"
    COUNT = "Count"
    DEGREE = "Degree"


TEST_ORDER = (TestName.SCAN, TestName.COUNT, TestName.DEGREE)


class Region(str, Enum):
    """Phase-diagram region."""
    IMPOSSIBLE = "Impossible"
    HARD = "Hard"
    EASY = "Easy"
    BOUNDARY = "Boundary"


class SecondMomentMethod(str, Enum):
    CLOSED_FORM_SUM = "ClosedFormSum"
    BRUTE_FORCE = "BruteForcePlacements"


class PhaseFamily(str, Enum):
    """Illustrative kL-versus-kR scalings used for phase diagrams."""
    BALANCED = "balanced"
    LIGHTLY = "lightly"
    MODERATELY = "moderately"
    EXTREME = "extreme"

    def beta_l(self, beta_r: float) -> float:
        """Exponent of kL given the exponent of kR = Θ(n^beta_r)."""
        factor = {
            PhaseFamily.BALANCED: 1.0,
            PhaseFamily.LIGHTLY: 2.0 / 3.0,
            PhaseFamily.MODERATELY: 0.5,
            PhaseFamily.EXTREME: 0.0,
        }[self]
        return factor * beta_r


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


# ---------- Randomness ----------


class Seed(BaseModel):
    """
    Root of a tree of independent random substreams.

    A stream is addressed by (purpose tag, index); the tag is hashed with CRC-32,
    so the same (root, tag, index) produces identical PCG64 draws everywhere.
    """
    root: int = Field(ge=0, le=SEED_MAX, description="64-bit root seed")
    labels: List[List[Any]] = Field(default_factory=list, description="Derivation path (purpose, index) from the original root")

    model_config = {"frozen": True}

    @staticmethod
    def _tag(purpose: str) -> int:
        return zlib.crc32(purpose.encode("utf-8"))

    def _sequence(self, purpose: str, index: int) -> np.random.SeedSequence:
        if index < 0:
            raise ParameterError(f"stream index must be non-negative, got {index}")
        return np.random.SeedSequence(entropy=self.root, spawn_key=(self._tag(purpose), index))

    def stream(self, purpose: str, index: int = 0) -> np.random.Generator:
        """Independent generator for (purpose, index)."""
        return np.random.Generator(np.random.PCG64(self._sequence(purpose, index)))

    def derive(self, purpose: str, index: int = 0) -> "Seed":
        """Child seed for a sub-task (a trial, a grid cell)."""
        state = self._sequence(purpose, index).generate_state(1, dtype=np.uint64)[0]
        return Seed(root=int(state), labels=[*self.labels, [purpose, index]])


# ---------- Model ----------


class ModelParams(BaseModel):
    """
    Parameters of PDBS(n, kR, kL, p, q): G(n,q) with a planted kR x kL bipartite
    block whose pairs are edges with probability p > q.
    """
    n: int = Field(ge=1, description="Vertex count")
    k_r: int = Field(ge=1, description="Right planted set size")
    k_l: int = Field(ge=1, description="Left planted set size")
    p: float = Field(description="Planted edge probability, in (0,1]")
    q: float = Field(description="Background edge probability, in (0,1)")

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_invariants(self) -> "ModelParams":
        if self.k_r + self.k_l > self.n:
            raise ValueError(f"k_r + k_l = {self.k_r + self.k_l} exceeds n = {self.n}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0,1), got {self.q}")
        if not self.q < self.p <= 1.0:
            raise ValueError(f"p must satisfy q < p <= 1, got p={self.p}, q={self.q}")
        return self

    @classmethod
    def create(cls, **fields: Any) -> "ModelParams":
        return validated(cls, **fields)

    @property
    def k_max(self) -> int:
        return max(self.k_r, self.k_l)

    @property
    def k_min(self) -> int:
        return min(self.k_r, self.k_l)

    @property
    def planted_edge_count(self) -> int:
        return self.k_r * self.k_l

    @property
    def placement_count(self) -> int:
        """|S_{kR,kL}| = C(n,kR) * C(n-kR,kL), the number of ordered placements."""
        return math.comb(self.n, self.k_r) * math.comb(self.n - self.k_r, self.k_l)


class PlantedSets(BaseModel):
    """The hidden disjoint right/left sets (R, L), stored sorted."""
    right: List[int] = Field(description="R, sorted vertex indices")
    left: List[int] = Field(description="L, sorted vertex indices")

    model_config = {"frozen": True}

    @field_validator("right", "left")
    @classmethod
    def sort_unique(cls, v: List[int]) -> List[int]:
        if len(set(v)) != len(v):
            raise ValueError("planted set contains repeated vertices")
        return sorted(v)

    @model_validator(mode="after")
    def check_disjoint(self) -> "PlantedSets":
        if set(self.right) & set(self.left):
            raise ValueError("R and L must be disjoint")
        return self

    def check_against(self, params: ModelParams) -> None:
        """Raise ParameterError unless sizes and ranges match params."""
        if len(self.right) != params.k_r or len(self.left) != params.k_l:
            raise ParameterError(
                f"planted set sizes ({len(self.right)}, {len(self.left)}) "
                f"do not match (k_r, k_l) = ({params.k_r}, {params.k_l})"
            )
        for v in (*self.right, *self.left):
            if not 0 <= v < params.n:
                raise ParameterError(f"planted vertex {v} outside [0, {params.n})")


# ---------- Regimes & regions ----------


class RegimeExponents(BaseModel):
    """Polynomial-scale exponents: kR = Θ(n^beta_r), kL = Θ(n^beta_l), χ² = Θ(n^-alpha)."""
    beta_r: float = Field(ge=0.0, lt=1.0)
    beta_l: float = Field(ge=0.0, lt=1.0)
    alpha: float = Field(ge=0.0, le=2.0, description="0 encodes the dense regime")

    model_config = {"frozen": True}


class RegionLabel(BaseModel):
    region: Region
    witnesses: List[TestName] = Field(default_factory=list, description="Tests whose sufficient condition holds (Easy only)")

    model_config = {"frozen": True}

    @field_validator("witnesses")
    @classmethod
    def canonical_order(cls, v: List[TestName]) -> List[TestName]:
        return [t for t in TEST_ORDER if t in set(v)]

    @model_validator(mode="after")
    def easy_needs_witness(self) -> "RegionLabel":
        if self.region == Region.EASY and not self.witnesses:
            raise ValueError("Easy label requires a non-empty witness set")
        if self.region != Region.EASY and self.witnesses:
            raise ValueError(f"{self.region.value} label carries no witnesses")
        return self

    def __str__(self) -> str:
        if self.region == Region.EASY:
            return f"Easy{{{','.join(t.value for t in self.witnesses)}}}"
        return self.region.value


class PhaseCell(BaseModel):
    beta: float
    beta_l: float
    alpha: float
    label: RegionLabel


# ---------- Detection ----------


class DetectionOutcome(BaseModel):
    """One test applied to one graph."""
    statistic: float
    threshold: float
    verdict: int = Field(ge=0, le=1)
    method: DetectionMethod
    exact: bool = Field(default=True, description="False when the statistic is a search lower bound")

    @model_validator(mode="after")
    def check_tie_rule(self) -> "DetectionOutcome":
        if self.verdict != int(self.statistic >= self.threshold):
            raise ValueError("verdict must equal 1{statistic >= threshold}")
        return self


# ---------- Oracles ----------


class SecondMoment(BaseModel):
    """E_{H0}[L_n^2]; log_value is authoritative when value overflows."""
    value: float = Field(ge=1.0 - 1e-12)
    log_value: float
    method: SecondMomentMethod


class ExactRisk(BaseModel):
    bayes_risk: float = Field(ge=0.0, le=1.0)
    tv: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def complementary(self) -> "ExactRisk":
        if self.bayes_risk != 1.0 - self.tv:
            raise ValueError("bayes_risk must equal 1 - tv")
        return self


class LdlrReport(BaseModel):
    """Squared norm of the degree-D projected likelihood ratio."""
    degree: int = Field(ge=0)
    norm_sq: float = Field(ge=1.0)
    terms_enumerated: int = Field(ge=0)
    increments: Dict[int, float] = Field(default_factory=dict, description="|alpha| -> contribution")


# ---------- Experiments ----------


class RiskEstimate(BaseModel):
    """Monte Carlo estimate of R_n(phi) = P_H0(phi=1) + P_H1(phi=0)."""
    trials: int = Field(ge=1)
    type1_hat: float = Field(ge=0.0, le=1.0)
    type2_hat: float = Field(ge=0.0, le=1.0)
    risk_hat: float = Field(ge=0.0, le=2.0)
    ci_half_width: float = Field(ge=0.0)
    type1_ci: List[float] = Field(description="Wilson interval for the type I rate")
    type2_ci: List[float] = Field(description="Wilson interval for the type II rate")
    confidence: float
    seed: int
    method: str

    @model_validator(mode="after")
    def risk_is_sum(self) -> "RiskEstimate":
        if self.risk_hat != self.type1_hat + self.type2_hat:
            raise ValueError("risk_hat must equal type1_hat + type2_hat")
        return self


class SweepRow(BaseModel):
    cell_index: int
    params: Dict[str, Any]
    method: str
    estimate: Optional[RiskEstimate] = None
    error: Optional[str] = None
    wall_time_s: float = 0.0
    provenance: Dict[str, Any] = Field(default_factory=dict)
