"""Run reports: named result rows with pass/fail, and their serialization."""
from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ._config import TOL
from .io import canonical, dumps

__all__ = ["NoPriorRun", "Row", "RunReport", "RunStore", "reports_to_json", "reports_to_csv"]

CSV_HEADER = ["command", "row", "claimed", "computed", "margin", "pass"]


class NoPriorRun(FileNotFoundError):
    pass


@dataclass(frozen=True)
class Row:
    """One certified comparison.

    ``kind`` is ``"upper"`` (computed <= claimed + tol), ``"lower"``
    (computed >= claimed - tol) or ``"equal"`` (|computed - claimed| <= tol).
    """

    name: str
    claimed: float
    computed: float
    kind: str = "upper"
    tol: float = TOL

    @property
    def margin(self) -> float:
        if self.kind == "upper":
            return self.claimed - self.computed
        if self.kind == "lower":
            return self.computed - self.claimed
        return -abs(self.computed - self.claimed)

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol

    def to_dict(self) -> dict:
        return {"row": self.name, "kind": self.kind, "claimed": self.claimed, "computed": self.computed,
                "margin": self.margin, "pass": self.passed, "tol": self.tol}


@dataclass
class RunReport:
    """Result of one CLI command.

    ``wall_time`` is kept out of the serialized form unless requested, so
    that identical inputs give byte-identical files.
    """

    command: str
    inputs: dict
    results: list[Row] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    wall_time: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, name: str, claimed: float, computed: float, kind: str = "upper", tol: float | None = None):
        self.results.append(Row(name, float(claimed), float(computed), kind,
                                self.inputs.get("tol", TOL) if tol is None else tol))

    def to_dict(self, timing: bool = False) -> dict:
        out = {"command": self.command, "inputs": self.inputs,
               "results": [r.to_dict() for r in self.results], "details": self.details,
               "pass": self.passed}
        if timing:
            out["wall_time"] = self.wall_time
        return out


def reports_to_json(reports: list[dict]) -> str:
    if not reports:
        return "[]"
    return dumps(reports)


def reports_to_csv(reports: list[dict]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in canonical(reports):
        for row in rep["results"]:
            w.writerow([rep["command"], row["row"], row["claimed"], row["computed"], row["margin"],
                        "true" if row["pass"] else "false"])
    return buf.getvalue()


class RunStore:
    """Runs recorded in ``<directory>/runs.json`` (default ``./.lipext``)."""

    def __init__(self, directory: str | Path = ".lipext"):
        self.path = Path(directory) / "runs.json"

    def load(self) -> list[dict]:
        if not self.path.exists():
            raise NoPriorRun(f"no prior run recorded at {self.path}")
        with open(self.path) as fh:
            return json.load(fh)

    def append(self, report: RunReport) -> None:
        runs = self.load() if self.path.exists() else []
        runs.append(canonical(report.to_dict()))
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(reports_to_json(runs))

    def clear(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("[]")


def render(report_or_list: Any, fmt: str) -> str:
    data = report_or_list if isinstance(report_or_list, list) else [report_or_list]
    data = [d.to_dict() if isinstance(d, RunReport) else d for d in data]
    return reports_to_json(data) if fmt == "json" else reports_to_csv(data)
