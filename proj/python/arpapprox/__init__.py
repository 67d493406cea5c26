"""Objective-free adaptive p-th order regularization with approximate tensors.

The heavy lifting happens in the compiled ``_core`` module; this package adds
keyword-argument configuration and parsed traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from . import _core
from ._core import (
    ArpError,
    build_dfp_weight,
    default_start,
    derivative,
    dfp_guard,
    dfp_update,
    hosu_update,
    lipschitz,
    mann_kendall,
    op_norm,
    problem_names,
    value,
)

__all__ = [
    "ArpError",
    "RunResult",
    "STRATEGIES",
    "TRACE_SCHEMA_VERSION",
    "build_dfp_weight",
    "default_config",
    "default_start",
    "derivative",
    "dfp_guard",
    "dfp_update",
    "fit_rates",
    "hosu_update",
    "lipschitz",
    "mann_kendall",
    "op_norm",
    "parse_trace",
    "problem_names",
    "solve",
    "value",
]

TRACE_SCHEMA_VERSION: int = _core.trace_schema_version
STRATEGIES = ("lazy", "fd", "psb-lazy", "psb-fd", "dfp-fd")


def default_config() -> dict[str, Any]:
    """Solver configuration with every key at its default."""
    return json.loads(_core.default_config())


@dataclass
class RunResult:
    header: dict[str, Any]
    rows: list[dict[str, Any]]
    summary: dict[str, Any]
    jsonl: str = field(repr=False)

    @property
    def termination(self) -> str:
        return self.summary["termination"]

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    @property
    def iterations(self) -> int:
        return self.summary["iterations"]

    @property
    def x_final(self) -> list[float]:
        return self.summary["x_final"]

    def column(self, key: str) -> list[Any]:
        """One field across all iteration rows (None where absent)."""
        return [row.get(key) for row in self.rows]


def parse_trace(jsonl: str) -> RunResult:
    header: dict[str, Any] = {}
    summary: dict[str, Any] = {}
    rows: list[dict[str, Any]] = []
    for line in jsonl.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        kind = record.get("record")
        if kind == "header":
            header = record
        elif kind == "iter":
            rows.append(record)
        elif kind == "summary":
            summary = record
    if header.get("schema_version") != TRACE_SCHEMA_VERSION:
        raise ArpError(f"unsupported trace schema version {header.get('schema_version')!r}")
    return RunResult(header=header, rows=rows, summary=summary, jsonl=jsonl)


def solve(
    problem: str = "rosenbrock",
    dim: int = 2,
    *,
    x0: Optional[Sequence[float]] = None,
    jitter: float = 0.0,
    **config: Any,
) -> RunResult:
    """Run the solver; keyword arguments override keys of :func:`default_config`."""
    merged = default_config()
    unknown = set(config) - set(merged)
    if unknown:
        raise TypeError(f"unknown configuration keys: {sorted(unknown)}")
    merged.update(config)
    text = _core.solve(problem, dim, json.dumps(merged), None if x0 is None else list(x0), jitter)
    return parse_trace(text)


def fit_rates(result: RunResult | str, tail_fraction: float = 0.5, min_length: int = 50) -> dict[str, Any]:
    """Empirical rate statistics of a trace (a RunResult or JSON-lines text)."""
    text = result.jsonl if isinstance(result, RunResult) else result
    return _core.fit_rates(text, tail_fraction, min_length)
