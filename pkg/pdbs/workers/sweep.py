"""
Parameter sweeps: one risk estimate per (cell, method).

Cell i draws from seed.derive("cell", i), so adding cells to a grid never
perturbs existing ones. Failures are recorded in the row and the sweep moves on.
"""

import logging
import time
from typing import List, Optional, Sequence, Union

from pdbs.errors import PDBSError
from pdbs.engine.detectors import DetectionOptions
from pdbs.models.canonical import DetectionMethod, ModelParams, Seed, SweepRow
from pdbs.workers.risk import RiskEstimator

logger = logging.getLogger(__name__)

CELL_STREAM = "cell"


class SweepRunner:
    def __init__(self, options: Optional[DetectionOptions] = None, confidence: Optional[float] = None):
        self.options = options or DetectionOptions()
        self.estimator = RiskEstimator(self.options, confidence)
        self._stats = {
            "cells": 0,
            "rows": 0,
            "errors": 0,
        }

    @property
    def stats(self) -> dict:
        return self._stats.copy()

    def _provenance(self, seed: Seed, cell_seed: Seed) -> dict:
        return {
            "seed_root": seed.root,
            "cell_seed": cell_seed.root,
            "scan_cap": self.options.scan_cap,
            "enum_cap": self.options.enum_cap,
            "restarts": self.options.restarts,
            "confidence": self.estimator.confidence,
        }

    def run(
        self,
        grid: Sequence[ModelParams],
        methods: Sequence[Union[DetectionMethod, str]],
        trials: int,
        seed: Seed,
    ) -> List[SweepRow]:
        rows: List[SweepRow] = []
        for index, params in enumerate(grid):
            cell_seed = seed.derive(CELL_STREAM, index)
            self._stats["cells"] += 1
            for method in methods:
                method = DetectionMethod(method)
                started = time.perf_counter()
                row = SweepRow(
                    cell_index=index,
                    params=params.model_dump(),
                    method=method.value,
                    provenance=self._provenance(seed, cell_seed),
                )
                try:
                    row.estimate = self.estimator.estimate(method, params, trials, cell_seed)
                except PDBSError as e:
                    self._stats["errors"] += 1
                    row.error = f"{e.code}: {e}"
                    logger.warning(f"sweep cell {index} {method.value} skipped: {e}")
                row.wall_time_s = time.perf_counter() - started
                rows.append(row)
                self._stats["rows"] += 1

        logger.info(
            f"Sweep done: {self._stats['cells']} cells, {self._stats['rows']} rows, {self._stats['errors']} errors"
        )
        return rows


def sweep(
    grid: Sequence[ModelParams],
    methods: Sequence[Union[DetectionMethod, str]],
    trials: int,
    seed: Seed,
    options: Optional[DetectionOptions] = None,
) -> List[SweepRow]:
    return SweepRunner(options).run(grid, methods, trials, seed)
