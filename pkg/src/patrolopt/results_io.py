"""Episode results as a flat CSV: one row per (instance, planner) episode.

Per-iteration lists live inside single cells joined by '|'.  Floats are
written with repr, which round-trips bit-exactly, so reading a table back
gives the same numbers that were computed.
"""

from __future__ import annotations

import csv
import os
from typing import Dict, List

from .simulator import EpisodeResult

COLUMNS = [
    "instance_id",
    "H",
    "planner",
    "total_cost",
    "iter_costs",
    "iter_seconds",
    "iter_statuses",
    "failed",
]

_LIST_SEP = "|"


def result_to_row(result: EpisodeResult) -> Dict[str, str]:
    return {
        "instance_id": result.instance_id,
        "H": str(result.horizon),
        "planner": result.planner,
        "total_cost": repr(result.total_cost),
        "iter_costs": _LIST_SEP.join(repr(v) for v in result.residual_costs),
        "iter_seconds": _LIST_SEP.join(repr(v) for v in result.compute_seconds),
        "iter_statuses": _LIST_SEP.join(result.statuses),
        "failed": "1" if result.failed else "0",
    }


def write_results(path: str, rows: List[Dict[str, str]]) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_results(path: str) -> List[Dict]:
    """Rows with typed fields: H int, total_cost float, the lists split and parsed."""
    out: List[Dict] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: results table missing columns {missing}")
        for raw in reader:
            out.append(
                {
                    "instance_id": raw["instance_id"],
                    "H": int(raw["H"]),
                    "planner": raw["planner"],
                    "total_cost": float(raw["total_cost"]),
                    "iter_costs": _parse_floats(raw["iter_costs"]),
                    "iter_seconds": _parse_floats(raw["iter_seconds"]),
                    "iter_statuses": raw["iter_statuses"].split(_LIST_SEP)
                    if raw["iter_statuses"]
                    else [],
                    "failed": raw["failed"] == "1",
                }
            )
    return out


def _parse_floats(cell: str) -> List[float]:
    if not cell:
        return []
    return [float(v) for v in cell.split(_LIST_SEP)]
