"""Canonical JSON reports for the command-line checks.

Reports are deterministic: keys are sorted, floats use the shortest
round-trip form, complex numbers become {"re": ..., "im": ...} objects,
and the input config is fingerprinted with SHA-256 so a report can be tied
back to the exact configuration that produced it.  Apart from the
wall-clock field, two runs of the same config produce byte-identical
output.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from typing import Any

import numpy as np

__all__ = ["build_report", "canonical_dumps", "config_hash", "to_jsonable"]

SCHEMA_VERSION = 1


def to_jsonable(value: Any) -> Any:
    """Map numbers, arrays, dataclasses and containers onto JSON types."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, complex):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return to_jsonable(float(value))
    if isinstance(value, np.complexfloating):
        return to_jsonable(complex(value))
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: to_jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def canonical_dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_dumps(config).encode("utf-8")).hexdigest()


def build_report(command: str, config: dict, records: list[dict]) -> dict:
    """Assemble the report body; the caller adds wall_clock_s afterwards.

    A report passes when no record failed or errored; informational
    records ("info") never block.
    """
    passed = all(r["status"] in ("pass", "info") for r in records)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_sha256": config_hash(config),
        "records": records,
        "passed": passed,
    }
