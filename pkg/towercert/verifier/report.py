import json
import logging
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field


logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

CheckStatus = Literal["pass", "fail", "skipped", "budget"]

# excluded from determinism comparisons
TIMING_FIELDS = {"wall_time_ms", "timings"}


class CheckReport(BaseModel):
    id: str
    title: str
    anchor: str
    status: CheckStatus
    wall_time_ms: float = 0.0
    witness: str | None = None
    details: dict[str, Any] = Field(default_factory=dict)
    timings: dict[str, float] = Field(default_factory=dict)


class SuiteReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    config: dict[str, Any] = Field(default_factory=dict)
    summary: dict[str, Any] = Field(default_factory=dict)
    checks: list[CheckReport] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status in ("pass", "skipped") for c in self.checks)


def to_json(report: SuiteReport, timings: bool = True) -> str:
    """Stable json: fields in model order, free-form dicts in the order the runners build them."""
    data = report.model_dump(mode="json")
    if not timings:
        for check in data["checks"]:
            for key in TIMING_FIELDS:
                check.pop(key, None)
        data["summary"].pop("metrics", None)
    return json.dumps(data, indent=2, default=str) + "\n"


def _cell(text: str | None) -> str:
    return (text or "").replace("|", "\\|").replace("\n", " ")


def to_markdown(report: SuiteReport) -> str:
    lines = [
        "# towercert report",
        "",
        f"schema {report.schema_version}, " + ", ".join(f"{k}={v}" for k, v in report.config.items() if k != "checks"),
        "",
        "| id | status | anchor | title | time (ms) | witness |",
        "|----|--------|--------|-------|-----------|---------|",
    ]
    for c in report.checks:
        lines.append(f"| {c.id} | {c.status.upper()} | {c.anchor} | {_cell(c.title)} | {c.wall_time_ms:.1f} | {_cell(c.witness)} |")
    counts = report.summary.get("counts", {})
    lines += ["", "Summary: " + (", ".join(f"{k}: {v}" for k, v in counts.items()) or "no checks run"), ""]
    return "\n".join(lines)


def emit_report(report: SuiteReport, fmt: Literal["json", "md"] = "json") -> str:
    match fmt:
        case "json":
            return to_json(report)
        case "md":
            return to_markdown(report)
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(report: SuiteReport, fmt: Literal["json", "md"], path: Path) -> Path:
    """Write the rendered report; OSError propagates to the caller."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_report(report, fmt), encoding="utf-8")
    logger.info(f"Report written to {path}")
    return path
