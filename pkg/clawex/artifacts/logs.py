# -*- coding: utf-8 -*-
"""
Runtime logs (`openclaw-YYYY-MM-DD.log`), one JSON object per line, and the reasoning
about which of them should still exist under the 24-hour retention rule.
"""
import datetime
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.clawex import ParseWarning, Severity
from clawex.settings import DEFAULT_SCHEMA_MARKERS, DEFAULT_STAGE_MARKERS, LOG_ALIASES
from clawex.utils import alias_value, date_start_ms, iter_jsonl, to_utc_ms, utc_date

logger = logging.getLogger(__name__)

LOG_NAME_RE = re.compile(r"^openclaw-(\d{4}-\d{2}-\d{2})\.log$")
RETENTION_MS = 24 * 60 * 60 * 1000
DAY_MS = RETENTION_MS


class LogKind(Enum):
    ToolStart = "ToolStart"
    ToolEnd = "ToolEnd"
    ToolSchemaSnapshot = "ToolSchemaSnapshot"
    RunStage = "RunStage"
    ChannelHealth = "ChannelHealth"
    Other = "Other"


@dataclass(frozen=True)
class LogEvent:
    time: int
    subsystem: Optional[str]
    message_kind: LogKind
    message: str = ""
    run_id: Optional[str] = None
    tool_call_id: Optional[str] = None
    tool_name: Optional[str] = None
    tool_names: Tuple[str, ...] = ()
    stage: Optional[str] = None
    marker: Optional[str] = None
    session_key: Optional[str] = None
    source: str = ""
    line_no: int = 0
    raw: Dict[str, object] = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "time": self.time,
            "subsystem": self.subsystem,
            "kind": self.message_kind.value,
            "message": self.message,
            "run_id": self.run_id,
            "tool_call_id": self.tool_call_id,
            "tool_name": self.tool_name,
            "tool_names": list(self.tool_names),
            "stage": self.stage,
            "marker": self.marker,
            "source": self.source,
            "line_no": self.line_no,
        }


def log_file_date(filename):
    """The date encoded in `openclaw-YYYY-MM-DD.log`, or None."""
    match = LOG_NAME_RE.match(filename.rsplit("/", 1)[-1])
    if not match:
        return None
    try:
        return datetime.date.fromisoformat(match.group(1))
    except ValueError:
        return None


def _message_text(record, aliases):
    value = alias_value(record, aliases["message"], "")
    if isinstance(value, (dict, list)):
        return ""
    return str(value)


def _tool_names(record):
    names = []
    for key in ("tools", "functionDeclarations", "toolNames"):
        value = record.get(key)
        if not isinstance(value, list):
            continue
        for item in value:
            if isinstance(item, dict):
                item = item.get("name") or (item.get("function") or {}).get("name")
            if item:
                names.append(str(item))
        if names:
            break
    return tuple(names)


def classify_log_record(record, message, subsystem, schema_markers, stage_markers):
    """
    Returns (kind, marker or stage) for one log record. First matching rule wins:
    schema snapshot marker, tool start/end, run stage, channel health, other.
    """
    lowered = message.lower()
    for marker in schema_markers:
        if marker.lower() in lowered:
            return LogKind.ToolSchemaSnapshot, marker
    stream = record.get("stream")
    data = record.get("data") if isinstance(record.get("data"), dict) else {}
    phase = str(record.get("phase") or data.get("phase") or "").lower()
    if "tool start" in lowered or (stream == "tool" and phase == "start"):
        return LogKind.ToolStart, None
    if "tool end" in lowered or (stream == "tool" and phase in ("end", "result")):
        return LogKind.ToolEnd, None
    for stage in stage_markers:
        if stage.lower() in lowered:
            return LogKind.RunStage, stage
    if stream == "lifecycle":
        return LogKind.RunStage, phase or message or "lifecycle"
    if (subsystem or "").startswith("gateway/channels"):
        return LogKind.ChannelHealth, None
    return LogKind.Other, None


def parse_log_file(
    content,
    filename,
    schema_markers=DEFAULT_SCHEMA_MARKERS,
    stage_markers=DEFAULT_STAGE_MARKERS,
    aliases=None,
):
    """
    Parses one runtime log into (events, warnings).

    Every non-empty line yields exactly one event or one warning; a record without a
    usable time field is a warning. A filename outside the `openclaw-YYYY-MM-DD.log`
    convention adds one extra file-level warning (line_no None).
    """
    aliases = aliases or LOG_ALIASES
    events = []
    warnings = []
    if log_file_date(filename) is None:
        warnings.append(ParseWarning(filename, "filename does not follow openclaw-YYYY-MM-DD.log"))
    for line_no, record, warning in iter_jsonl(content, filename):
        if warning is not None:
            warnings.append(warning)
            continue
        time = to_utc_ms(alias_value(record, aliases["time"]))
        if time is None:
            warnings.append(ParseWarning(filename, "no usable time field", line_no))
            continue
        subsystem = alias_value(record, aliases["subsystem"])
        message = _message_text(record, aliases)
        kind, label = classify_log_record(record, message, subsystem, schema_markers, stage_markers)
        data = record.get("data") if isinstance(record.get("data"), dict) else {}
        run_id = alias_value(record, aliases["runId"]) or alias_value(data, aliases["runId"])
        call_id = alias_value(record, aliases["toolCallId"]) or alias_value(data, aliases["toolCallId"])
        tool = alias_value(record, aliases["tool"]) or alias_value(data, aliases["tool"])
        events.append(
            LogEvent(
                time=time,
                subsystem=str(subsystem) if subsystem is not None else None,
                message_kind=kind,
                message=message,
                run_id=str(run_id) if run_id else None,
                tool_call_id=str(call_id) if call_id else None,
                tool_name=str(tool) if tool and not isinstance(tool, (list, dict)) else None,
                tool_names=_tool_names(record) if kind is LogKind.ToolSchemaSnapshot else (),
                stage=label if kind is LogKind.RunStage else None,
                marker=label if kind is LogKind.ToolSchemaSnapshot else None,
                session_key=record.get("sessionKey"),
                source=filename,
                line_no=line_no,
                raw=record,
            )
        )
    return events, warnings


# --- retention -----------------------------------------------------------------------------


@dataclass(frozen=True)
class LogFileInfo:
    path: str
    date: Optional[datetime.date]
    mtime: Optional[int] = None

    @property
    def covered_day(self):
        """The UTC day the file covers, from its name, else from its mtime."""
        if self.date is not None:
            return self.date
        if self.mtime is not None:
            return utc_date(self.mtime)
        return None


@dataclass(frozen=True)
class RetentionFlag:
    kind: str
    severity: Severity
    detail: str
    path: Optional[str] = None

    def to_dict(self):
        return {"kind": self.kind, "severity": self.severity.name, "detail": self.detail, "path": self.path}


@dataclass
class RetentionReport:
    window_start: int
    window_end: int
    in_window: List[str] = field(default_factory=list)
    flags: List[RetentionFlag] = field(default_factory=list)

    def to_dict(self):
        return {
            "window_start": self.window_start,
            "window_end": self.window_end,
            "in_window": list(self.in_window),
            "flags": [f.to_dict() for f in self.flags],
        }


def log_retention_gaps(log_files, capture_time, activity_times=()):
    """
    Checks the captured logs against the 24-hour retention rule.

    A file dated D covers [D, D+1 day). Files covering nothing of
    [capture_time - 24h, capture_time] are stale survivors (Noteworthy: cleanup runs only
    when the logger initialises). Files dated after the capture time point at a skewed
    clock (Noteworthy). No file inside the window is Anomalous when there was activity
    inside the window, Info otherwise.
    """
    window_start = capture_time - RETENTION_MS
    report = RetentionReport(window_start, capture_time)
    for info in sorted(log_files, key=lambda f: f.path):
        day = info.covered_day
        if day is None:
            continue
        start = date_start_ms(day)
        end = start + DAY_MS
        if end <= window_start:
            report.flags.append(
                RetentionFlag(
                    "stale-survivor",
                    Severity.Noteworthy,
                    "{} covers {} which lies before the retention window".format(info.path, day.isoformat()),
                    info.path,
                )
            )
        elif start <= capture_time:
            report.in_window.append(info.path)
        else:
            report.flags.append(
                RetentionFlag(
                    "clock-skew",
                    Severity.Noteworthy,
                    "{} covers {} which begins after the capture time".format(info.path, day.isoformat()),
                    info.path,
                )
            )
    if not report.in_window:
        active = [t for t in activity_times if t is not None and window_start <= t <= capture_time]
        if active:
            report.flags.append(
                RetentionFlag(
                    "missing-expected-logs",
                    Severity.Anomalous,
                    "no runtime log covers the retention window although {} recorded events fall inside it".format(
                        len(active)
                    ),
                )
            )
        else:
            report.flags.append(
                RetentionFlag("no-logs-in-window", Severity.Info, "no runtime log covers the retention window")
            )
    return report
