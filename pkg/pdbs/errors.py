"""
Exception hierarchy shared by the engines, workers and CLI.

The CLI maps these onto exit codes (see pdbs.main.EXIT_CODES).
"""

from typing import Optional


class PDBSError(Exception):
    """Base class for all library errors."""

    code = "E_PDBS"


class ParameterError(PDBSError, ValueError):
    """Model or operation parameters violate a precondition."""

    code = "E_PARAM"


class BudgetExceeded(PDBSError):
    """An exhaustive enumeration would exceed its configured cap."""

    code = "E_BUDGET"

    def __init__(self, what: str, required: int, cap: int):
        self.what = what
        self.required = required
        self.cap = cap
        super().__init__(f"{what}: required enumeration size {required} exceeds cap {cap}")


class GraphParseError(PDBSError, ValueError):
    """Malformed edge-list text."""

    code = "E_PARSE"

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class NormalizationError(PDBSError):
    """Exact probabilities failed to sum to one within tolerance."""

    code = "E_NORM"
