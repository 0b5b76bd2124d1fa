from src.infrastructure.extensions.writers.report_writer import (
    render_markdown,
    render_payload_markdown,
    to_json_text,
    write_json,
    write_loss_log,
    write_payload,
    write_report,
)

__all__ = [
    "render_markdown",
    "render_payload_markdown",
    "to_json_text",
    "write_json",
    "write_loss_log",
    "write_payload",
    "write_report",
]
