"""
Output writers.

JSON goes through orjson with sorted keys and two-space indentation; CSV uses
the csv module with repr-precision floats and "\\n" line endings. Identical
inputs give byte-identical files.
"""

import csv
import io
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import orjson
from pydantic import BaseModel

from pdbs.models.canonical import PhaseCell, RiskEstimate, SweepRow

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS

RISK_COLUMNS = ["n", "k_r", "k_l", "p", "q", "method", "trials", "type1", "type2", "risk", "ci", "seed"]
PHASE_COLUMNS = ["beta", "alpha", "label", "witnesses"]


def _default(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(payload: Any) -> bytes:
    return orjson.dumps(payload, default=_default, option=JSON_OPTIONS) + b"\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def write_bytes(data: bytes, out: Optional[Path]) -> None:
    """Write to a file, or to stdout when out is None."""
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    logger.info(f"Wrote {len(data)} bytes to {out}")


# ---------- Risk tables ----------


def risk_record(params: dict, estimate: Optional[RiskEstimate], method: str, error: Optional[str] = None) -> dict:
    record = {
        "n": params["n"],
        "k_r": params["k_r"],
        "k_l": params["k_l"],
        "p": params["p"],
        "q": params["q"],
        "method": method,
        "trials": estimate.trials if estimate else None,
        "type1": estimate.type1_hat if estimate else None,
        "type2": estimate.type2_hat if estimate else None,
        "risk": estimate.risk_hat if estimate else None,
        "ci": estimate.ci_half_width if estimate else None,
        "seed": estimate.seed if estimate else None,
    }
    if error is not None:
        record["error"] = error
    return record


def sweep_records(rows: List[SweepRow], timings: bool = False) -> List[dict]:
    records = []
    for row in rows:
        record = risk_record(row.params, row.estimate, row.method, row.error)
        record["error"] = row.error
        record["cell_index"] = row.cell_index
        record["provenance"] = row.provenance
        if timings:
            record["wall_time_s"] = row.wall_time_s
        records.append(record)
    return records


def sweep_csv(rows: List[SweepRow], timings: bool = False) -> bytes:
    header = ["cell_index", *RISK_COLUMNS, "error"] + (["wall_time_s"] if timings else [])
    records = sweep_records(rows, timings)
    return dumps_csv(header, ([r.get(col) for col in header] for r in records))


def risk_csv(records: List[dict]) -> bytes:
    return dumps_csv(RISK_COLUMNS, ([r[col] for col in RISK_COLUMNS] for r in records))


# ---------- Phase grids ----------


def phase_records(cells: List[PhaseCell]) -> List[dict]:
    return [
        {
            "beta": c.beta,
            "beta_l": c.beta_l,
            "alpha": c.alpha,
            "label": c.label.region.value,
            "witnesses": [w.value for w in c.label.witnesses],
        }
        for c in cells
    ]


def phase_csv(cells: List[PhaseCell]) -> bytes:
    rows = (
        [c.beta, c.alpha, c.label.region.value, ";".join(w.value for w in c.label.witnesses)]
        for c in cells
    )
    return dumps_csv(PHASE_COLUMNS, rows)
