# -*- coding: utf-8 -*-
"""
Report envelope and serialisation shared by every command.

A report carries its own parameters (effective settings, tie-break order, inputs), so
the same inputs and parameters reproduce it byte for byte.
"""
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional

from clawex.clawex import InputError, __version__
from clawex.correlate import TIE_BREAK_ORDER
from clawex.utils import iso_utc

REPORT_SCHEMA = "clawex.report/1"


class OutputFormat(Enum):
    text = "text"
    json = "json"
    jsonl = "jsonl"


def report_time(capture_time):
    """
    `generated_at` for a report: SOURCE_DATE_EPOCH (seconds) when set, otherwise the
    evidence capture time. Never the wall clock.
    """
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        try:
            return int(epoch) * 1000
        except ValueError:
            raise InputError("SOURCE_DATE_EPOCH must be an integer, got {!r}.".format(epoch))
    return capture_time


def report_parameters(settings=None, **inputs):
    parameters = {"tie_break_order": list(TIE_BREAK_ORDER)}
    if settings is not None:
        parameters["settings"] = settings.to_dict()
    parameters.update({key: value for key, value in inputs.items() if value is not None})
    return parameters


def _default_line(record):
    if not isinstance(record, dict):
        return str(record)
    return "  ".join("{}={}".format(key, _short(value)) for key, value in record.items() if value not in (None, [], {}))


def _short(value):
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, ensure_ascii=False)
    return str(value)


@dataclass
class Report:
    command: str
    parameters: dict
    generated_at: Optional[int]
    summary: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    caveats: List[str] = field(default_factory=list)
    line_formatter: Optional[Callable] = field(default=None, repr=False, compare=False)

    def header(self):
        return {
            "schema": REPORT_SCHEMA,
            "tool_version": __version__,
            "command": self.command,
            "generated_at": self.generated_at,
            "generated_at_iso": iso_utc(self.generated_at),
            "parameters": self.parameters,
        }

    def to_dict(self):
        data = self.header()
        data["body"] = {"summary": self.summary, "records": self.records}
        data["warnings"] = self.warnings
        data["caveats"] = self.caveats
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def to_jsonl(self):
        """Header line, then one line per record, warning and caveat."""
        lines = [dict(self.header(), type="header", summary=self.summary)]
        lines.extend({"type": "record", "record": record} for record in self.records)
        lines.extend({"type": "warning", "warning": warning} for warning in self.warnings)
        lines.extend({"type": "caveat", "caveat": caveat} for caveat in self.caveats)
        return "".join(json.dumps(line, sort_keys=True, ensure_ascii=False) + "\n" for line in lines)

    def to_text(self):
        formatter = self.line_formatter or _default_line
        out = ["clawex {} {} (generated {})".format(__version__, self.command, iso_utc(self.generated_at) or "-")]
        for key in sorted(self.summary):
            out.append("{}: {}".format(key, _short(self.summary[key])))
        if self.records:
            out.append("")
            out.extend(formatter(record) for record in self.records)
        if self.warnings:
            out.append("")
            out.append("warnings ({}):".format(len(self.warnings)))
            for warning in self.warnings:
                out.append("  " + _default_line(warning))
        if self.caveats:
            out.append("")
            out.append("caveats:")
            out.extend("  - " + caveat for caveat in self.caveats)
        return "\n".join(out) + "\n"

    def render(self, fmt=OutputFormat.text):
        fmt = OutputFormat(fmt) if not isinstance(fmt, OutputFormat) else fmt
        if fmt is OutputFormat.json:
            return self.to_json()
        if fmt is OutputFormat.jsonl:
            return self.to_jsonl()
        return self.to_text()
