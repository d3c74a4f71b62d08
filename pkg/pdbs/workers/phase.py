"""
Phase-diagram grids over (beta, alpha).

Each cell fixes kR = Θ(n^beta), kL = Θ(n^beta_l(beta)) and chi2 = Θ(n^-alpha)
and is labelled with classify_region. Cells outside the valid exponent ranges
(beta or beta_l >= 1, alpha > 2) are skipped.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Union

from pydantic import ValidationError

from pdbs.errors import ParameterError
from pdbs.engine.measures import classify_region
from pdbs.models.canonical import PhaseCell, PhaseFamily, RegimeExponents

logger = logging.getLogger(__name__)

Balance = Union[PhaseFamily, Callable[[float], float]]


def grid_values(text: str) -> List[float]:
    """Parse "start:stop:step" (stop inclusive) or a single number."""
    parts = text.split(":")
    try:
        numbers = [float(x) for x in parts]
    except ValueError:
        raise ParameterError(f"invalid grid specification '{text}'")
    if len(numbers) == 1:
        return numbers
    if len(numbers) != 3:
        raise ParameterError(f"grid specification must be start:stop:step, got '{text}'")
    start, stop, step = numbers
    if step <= 0 or stop < start:
        raise ParameterError(f"grid specification needs step > 0 and stop >= start, got '{text}'")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _balance_fn(balance: Balance) -> Callable[[float], float]:
    if isinstance(balance, (PhaseFamily, str)):
        return PhaseFamily(balance).beta_l
    return balance


def phase_grid(
    beta_grid: Sequence[float],
    alpha_grid: Sequence[float],
    balance: Balance = PhaseFamily.BALANCED,
    tol: Optional[float] = None,
) -> List[PhaseCell]:
    """Label every (beta, alpha) cell, beta-major."""
    beta_l_of = _balance_fn(balance)
    cells: List[PhaseCell] = []
    skipped = 0
    for beta in beta_grid:
        beta_l = beta_l_of(beta)
        for alpha in alpha_grid:
            try:
                exps = RegimeExponents(beta_r=beta, beta_l=beta_l, alpha=alpha)
            except ValidationError:
                skipped += 1
                continue
            cells.append(PhaseCell(beta=beta, beta_l=beta_l, alpha=alpha, label=classify_region(exps, tol)))
    if skipped:
        logger.info(f"phase_grid: skipped {skipped} cells outside the exponent ranges")
    return cells
