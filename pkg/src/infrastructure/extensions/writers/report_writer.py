"""Report and log files: JSON, markdown tables and CSV loss logs."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel

from src.domain.exceptions import ReportWriteError
from src.domain.models import PipelineReport

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "markdown", "md"]


def _number(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.4f}"
    return str(value)


def _table(headers: list[str], rows: list[list[Any]]) -> list[str]:
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    lines += ["| " + " | ".join(_number(v) for v in row) + " |" for row in rows]
    return lines


def render_markdown(report: PipelineReport) -> str:
    lines = [
        "# microstack pipeline report",
        "",
        f"- tool version: {report.tool_version}",
        f"- seed: {report.seed}",
        f"- exit code: {report.exit_code}",
        f"- survivors: {', '.join(map(str, report.survivors)) or 'none'}",
        f"- fusion output: {report.fusion_output or '-'}",
        "",
    ]
    if report.frames:
        lines += ["## Frames", ""]
        lines += _table(
            ["index", "decision", "mean_level", "min_level"],
            [[f.index, f.decision.value, f.mean_level, f.min_level] for f in report.frames],
        )
        lines.append("")
    if report.deblur is not None:
        d = report.deblur
        lines += ["## Deblur", ""]
        lines += _table(
            ["metric", "before", "after"],
            [["psnr", d.psnr_before, d.psnr_after], ["ssim", d.ssim_before, d.ssim_after]],
        )
        lines.append("")
    q = report.quality
    lines += ["## Quality", ""]
    lines += _table(
        ["metric", "value"],
        [["tenengrad", q.tenengrad], ["brisque", q.brisque], ["psnr", q.psnr], ["ssim", q.ssim]],
    )
    lines += ["", "## Timings (s)", ""]
    lines += _table(["stage", "seconds"], [[k, v] for k, v in report.timings.items()])
    lines += ["", "## Config", "", "```json", json.dumps(report.config, indent=2, sort_keys=True), "```", ""]
    return "\n".join(lines)


def write_report(report: PipelineReport, path: str | Path, fmt: ReportFormat = "json") -> Path:
    path = Path(path)
    if fmt == "json":
        text = report.model_dump_json(indent=2)
    elif fmt in ("markdown", "md"):
        text = render_markdown(report)
    else:
        raise ValueError(f"Unknown report format '{fmt}'")
    return _write_text(path, text)


def write_json(payload: BaseModel | dict | list, path: str | Path) -> Path:
    """JSON file for any model or plain payload; +inf floats are written as "inf"."""
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(_replace_inf(payload), indent=2)
    return _write_text(Path(path), text)


def _replace_inf(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value) and value > 0:
        return "inf"
    if isinstance(value, dict):
        return {k: _replace_inf(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_replace_inf(v) for v in value]
    if isinstance(value, BaseModel):
        return json.loads(value.model_dump_json())
    return value


def to_json_text(payload: Any) -> str:
    return json.dumps(_replace_inf(payload), indent=2)


def _section(name: str, value: Any) -> list[str]:
    if isinstance(value, list) and value and all(isinstance(row, dict) for row in value):
        headers = list(value[0])
        return [f"## {name}", "", *_table(headers, [[row.get(h) for h in headers] for row in value]), ""]
    if isinstance(value, dict) and value and all(isinstance(v, dict) for v in value.values()):
        headers = list(next(iter(value.values())))
        rows = [[key, *(entry.get(h) for h in headers)] for key, entry in value.items()]
        return [f"## {name}", "", *_table(["name", *headers], rows), ""]
    if isinstance(value, dict):
        return [f"## {name}", "", *_table(["field", "value"], [[k, v] for k, v in value.items()]), ""]
    return []


def render_payload_markdown(title: str, payload: dict) -> str:
    """Markdown tables for a command payload: scalars first, then one section per nested entry."""
    data = _replace_inf(payload)
    lines = [f"# microstack {title} report", ""]
    scalars = [[k, v] for k, v in data.items() if not isinstance(v, (dict, list))]
    if scalars:
        lines += _table(["field", "value"], scalars) + [""]
    for key, value in data.items():
        lines += _section(key, value)
    return "\n".join(lines)


def write_payload(payload: dict, path: str | Path, fmt: ReportFormat = "json", title: str = "command") -> Path:
    if fmt == "json":
        return write_json(payload, path)
    if fmt in ("markdown", "md"):
        return _write_text(Path(path), render_payload_markdown(title, payload))
    raise ValueError(f"Unknown report format '{fmt}'")


def write_loss_log(log: list[float], path: str | Path) -> Path:
    """CSV with one `epoch,loss` row per epoch."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "loss"])
            for epoch, value in enumerate(log, start=1):
                writer.writerow([epoch, repr(float(value))])
    except OSError as e:
        raise ReportWriteError(str(path), e) from e
    return path


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(str(path), e) from e
    logger.info(f"Wrote {path}")
    return path
