"""
Tests for runtime log parsing and the 24-hour retention check.
"""
import datetime
import unittest

import pytest

from clawex.artifacts.logs import (
    LogFileInfo,
    LogKind,
    classify_log_record,
    log_file_date,
    log_retention_gaps,
    parse_log_file,
)
from clawex.clawex import Severity
from clawex.settings import DEFAULT_SCHEMA_MARKERS, DEFAULT_STAGE_MARKERS

from .utils import T0, jsonl

HOUR = 60 * 60 * 1000
DAY = 24 * HOUR


@pytest.mark.parametrize(
    "name, expected",
    [
        ("openclaw-2026-02-02.log", datetime.date(2026, 2, 2)),
        ("tmp/openclaw/openclaw-2026-02-02.log", datetime.date(2026, 2, 2)),
        ("openclaw-2026-02-30.log", None),
        ("openclaw.log", None),
        ("gateway-2026-02-02.log", None),
    ],
)
def test_log_file_date(name, expected):
    assert log_file_date(name) == expected


@pytest.mark.parametrize(
    "message, record, kind, label",
    [
        ("google tool schema snapshot (9 tools)", {}, LogKind.ToolSchemaSnapshot, "google tool schema snapshot"),
        ("embedded run tool start", {}, LogKind.ToolStart, None),
        ("embedded run tool end", {}, LogKind.ToolEnd, None),
        ("", {"stream": "tool", "data": {"phase": "result"}}, LogKind.ToolEnd, None),
        ("embedded run agent start", {}, LogKind.RunStage, "agent start"),
        ("", {"stream": "lifecycle", "phase": "error"}, LogKind.RunStage, "error"),
        ("listening", {}, LogKind.Other, None),
    ],
)
def test_classify_log_record(message, record, kind, label):
    assert classify_log_record(record, message, "agent/embedded", DEFAULT_SCHEMA_MARKERS, DEFAULT_STAGE_MARKERS) == (
        kind,
        label,
    )


def test_channel_health_by_subsystem():
    kind, _ = classify_log_record({}, "[default] starting provider", "gateway/channels/telegram", (), ())
    assert kind is LogKind.ChannelHealth


class ParseLogFileTestCase(unittest.TestCase):
    """
    Test cases for one log file.
    """

    NAME = "openclaw-2026-02-02.log"

    def test_records(self):
        content = jsonl(
            {"time": "2026-02-02T08:00:00.000Z", "subsystem": "agent/embedded", "msg": "embedded run agent start",
             "runId": "r1", "sessionKey": "agent:main:main"},
            {"time": "2026-02-02T08:00:01.000Z", "subsystem": "agent/embedded", "msg": "embedded run tool start",
             "runId": "r1", "tool": "exec", "toolCallId": "call_1"},
            {"time": "2026-02-02T08:00:02.000Z", "subsystem": "agent/embedded",
             "msg": "google tool schema snapshot (2 tools)", "tools": [{"name": "read"}, {"name": "exec"}]},
        )
        events, warnings = parse_log_file(content, self.NAME)
        self.assertEqual(warnings, [])
        self.assertEqual([e.message_kind for e in events], [LogKind.RunStage, LogKind.ToolStart, LogKind.ToolSchemaSnapshot])
        self.assertEqual(events[0].session_key, "agent:main:main")
        self.assertEqual(events[0].stage, "agent start")
        self.assertEqual((events[1].run_id, events[1].tool_call_id, events[1].tool_name), ("r1", "call_1", "exec"))
        self.assertEqual(events[1].time, T0 + 1000)
        self.assertEqual(events[2].tool_names, ("read", "exec"))
        self.assertEqual([e.line_no for e in events], [1, 2, 3])

    def test_variant_record_shape(self):
        content = jsonl(
            {"0": "embedded run tool end", "_meta": {"date": "2026-02-02T08:00:00.000Z", "name": "agent/embedded"},
             "run_id": "r2", "tool_call_id": "call_2", "tool_name": "read"},
        )
        (event,), warnings = parse_log_file(content, self.NAME)
        self.assertEqual(warnings, [])
        self.assertEqual(event.message_kind, LogKind.ToolEnd)
        self.assertEqual((event.subsystem, event.run_id, event.tool_call_id, event.tool_name), ("agent/embedded", "r2", "call_2", "read"))

    def test_alternate_schema_marker(self):
        content = jsonl({"time": T0, "msg": "openai tool schema snapshot (1 tools)", "tools": ["read"]})
        (default,), _ = parse_log_file(content, self.NAME)
        self.assertEqual(default.message_kind, LogKind.Other)
        (tuned,), _ = parse_log_file(content, self.NAME, schema_markers=("openai tool schema snapshot",))
        self.assertEqual(tuned.message_kind, LogKind.ToolSchemaSnapshot)
        self.assertEqual(tuned.tool_names, ("read",))

    def test_every_line_is_an_event_or_a_warning(self):
        content = jsonl({"time": T0, "msg": "a"}, {"msg": "no time"}) + b"not json\n"
        events, warnings = parse_log_file(content, "gateway.log")
        self.assertEqual(len(events), 1)
        self.assertEqual(sorted(w.line_no or 0 for w in warnings), [0, 2, 3])
        self.assertEqual(warnings[0].reason, "filename does not follow openclaw-YYYY-MM-DD.log")


class RetentionTestCase(unittest.TestCase):
    """
    Test cases for which log files should survive at capture time.
    """

    def info(self, day, mtime=None):
        return LogFileInfo("openclaw-{}.log".format(day), datetime.date.fromisoformat(day), mtime)

    def test_current_logs_only(self):
        report = log_retention_gaps([self.info("2026-02-02")], T0 + HOUR, [T0])
        self.assertEqual(report.flags, [])
        self.assertEqual(report.in_window, ["openclaw-2026-02-02.log"])
        self.assertEqual(report.window_start, T0 + HOUR - DAY)

    def test_yesterday_still_in_window(self):
        report = log_retention_gaps([self.info("2026-02-01")], T0 + HOUR, [T0])
        self.assertEqual(report.in_window, ["openclaw-2026-02-01.log"])
        self.assertEqual(report.flags, [])

    def test_stale_survivor(self):
        report = log_retention_gaps([self.info("2026-01-20"), self.info("2026-02-02")], T0, [T0])
        self.assertEqual([(f.kind, f.severity) for f in report.flags], [("stale-survivor", Severity.Noteworthy)])
        self.assertEqual(report.flags[0].path, "openclaw-2026-01-20.log")

    def test_log_dated_after_capture_is_clock_skew(self):
        report = log_retention_gaps([self.info("2026-02-02"), self.info("2026-02-05")], T0 + HOUR, [T0])
        self.assertEqual(report.in_window, ["openclaw-2026-02-02.log"])
        self.assertEqual([(f.kind, f.severity) for f in report.flags], [("clock-skew", Severity.Noteworthy)])
        self.assertEqual(report.flags[0].path, "openclaw-2026-02-05.log")

    def test_missing_logs_with_activity(self):
        report = log_retention_gaps([self.info("2026-01-20")], T0, [T0 - HOUR])
        kinds = [(f.kind, f.severity) for f in report.flags]
        self.assertIn(("missing-expected-logs", Severity.Anomalous), kinds)

    def test_missing_logs_without_activity(self):
        report = log_retention_gaps([], T0, [T0 - 3 * DAY])
        self.assertEqual([(f.kind, f.severity) for f in report.flags], [("no-logs-in-window", Severity.Info)])

    def test_undated_name_falls_back_to_mtime(self):
        info = LogFileInfo("gateway.log", None, T0)
        self.assertEqual(info.covered_day, datetime.date(2026, 2, 2))
        self.assertEqual(log_retention_gaps([info], T0, [T0]).in_window, ["gateway.log"])
