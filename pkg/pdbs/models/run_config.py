"""
Resolved run configuration echoed into every CLI output.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from pdbs.models.canonical import OutputFormat


class RunConfig(BaseModel):
    """
    Fully resolved settings of one CLI run (defaults filled).

    Thread count, output path and verbosity are left out: they never change results.
    """
    command: str
    seed: int = Field(description="Root seed actually used")
    format: OutputFormat = OutputFormat.JSON
    scan_cap: int
    enum_cap: int
    pair_cap: int
    ldlr_budget: int
    restarts: int
    confidence: float
    params: Optional[Dict[str, Any]] = Field(default=None, description="ModelParams fields, or the grid axes for sweep")
    methods: List[str] = Field(default_factory=list)
    options: Dict[str, Any] = Field(default_factory=dict, description="Subcommand-specific arguments")

    model_config = {"frozen": True}
