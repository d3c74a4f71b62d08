"""
PDBS Detection Lab Configuration
Loads from environment variables / .env file via Pydantic Settings.

Caps can be overridden with SCAN_CAP, ENUM_CAP, PAIR_CAP, LDLR_BUDGET.
"""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # --- Enumeration budgets ---
    scan_cap: int = 10_000_000         # |S_{kR,kL}| placements for the exact scan
    enum_cap: int = 10_000_000         # placements for likelihood ratio / Bayes risk
    pair_cap: int = 100_000_000        # placement pairs for the brute-force second moment
    ldlr_budget: int = 5_000_000       # edge subsets for the low-degree norm
    graph_enum_max_pairs: int = 24     # C(n,2) limit for full graph enumeration

    # --- Reproducibility ---
    default_seed: int = 20240611
    threads: int = 1

    # --- Statistics ---
    boundary_tol: float = 1e-9
    greedy_restarts: int = 50
    confidence_level: float = 0.95

    # --- App ---
    log_level: str = "INFO"

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "extra": "ignore"}


# Singleton
settings = Settings()
