"""
Tests for findings, capability history, context estimates, origin chains and
autonomy classes.
"""
import datetime
import json
import unittest

import pytest

from clawex.artifacts.config import ConfigHistory, build_config_history
from clawex.artifacts.cron import CronRun
from clawex.artifacts.inventory import ROOT_STORE
from clawex.artifacts.logs import LogEvent, LogKind
from clawex.artifacts.transcripts import SessionStatus, parse_session_meta, parse_transcript
from clawex.artifacts.workspace import DailyMemory, WorkspaceSnapshot
from clawex.clawex import Severity
from clawex.correlate import CronAttribution, CronVenue, EvidenceRef, correlate_evidence, pair_tool_calls
from clawex.examine import (
    STALE_REPORT_NOTE,
    STANDING_CAVEATS,
    AutonomyClass,
    FindingCategory,
    OriginKind,
    ReplayBasis,
    capability_findings,
    capability_timeline,
    classify_autonomy,
    examine,
    make_finding,
    reconstruct_context,
    reconstruction_boundaries,
    trace_origin,
    workspace_relative,
)
from clawex.store import Transcript, load_evidence

from .artifacts.utils import SESSION_ID, T0, header, jsonl, message, text, tool_call
from .utils import CommonStoreTestTools, rule_ids, truth_settings

PATH = "agents/main/sessions/{}.jsonl".format(SESSION_ID)


def transcript_of(*records):
    entries, warnings = parse_transcript(jsonl(*records), PATH)
    assert warnings == []
    return Transcript(PATH, "main", SESSION_ID, SessionStatus.Indexed, entries)


def result(entry_id, parent_id, call_id, tool, output="ok", ts=T0):
    return message(entry_id, parent_id, "toolResult", text(output), ts=ts, toolCallId=call_id, toolName=tool)


def assistant(entry_id, parent_id, blocks, ts=T0, **extra):
    return message(entry_id, parent_id, "assistant", blocks, ts=ts, **extra)


def thinking(value):
    return {"type": "thinking", "thinking": value}


class MakeFindingTestCase(unittest.TestCase):
    def test_rule_metadata(self):
        ref = EvidenceRef(ROOT_STORE, PATH, 3)
        finding = make_finding("R3", "orphaned", [ref])
        self.assertEqual(finding.category, FindingCategory.AntiForensics)
        self.assertIs(finding.severity, Severity.Noteworthy)
        self.assertTrue(finding.confidence_basis.startswith("R3: "))
        self.assertEqual(finding.id, make_finding("R3", "orphaned", [ref]).id)
        self.assertNotEqual(finding.id, make_finding("R3", "orphaned", [EvidenceRef(ROOT_STORE, PATH, 4)]).id)
        self.assertTrue(finding.id.startswith("F-"))

    def test_severity_override_and_evidence_required(self):
        ref = EvidenceRef(ROOT_STORE, PATH)
        self.assertIs(make_finding("R5", "x", [ref], severity=Severity.Anomalous).severity, Severity.Anomalous)
        with self.assertRaises(ValueError):
            make_finding("R1", "no evidence", [])

    def test_sort_key_orders_rules_numerically(self):
        ref = EvidenceRef(ROOT_STORE, PATH)
        findings = [make_finding(r, r, [ref]) for r in ("R10", "C1", "R2", "R9")]
        self.assertEqual([f.rule_id for f in sorted(findings, key=lambda f: f.sort_key())], ["C1", "R2", "R9", "R10"])


def snapshot_event(time, tools, line_no):
    return LogEvent(
        time=time,
        subsystem="agent/embedded",
        message_kind=LogKind.ToolSchemaSnapshot,
        tool_names=tuple(tools),
        marker="google tool schema snapshot",
        source="openclaw-2026-02-02.log",
        line_no=line_no,
    )


class CapabilityTimelineTestCase(unittest.TestCase):
    """
    Test cases for the ordered capability history.
    """

    def test_deltas_and_orphans(self):
        events = [
            snapshot_event(T0 + 30, ["exec", "read"], 4),
            snapshot_event(T0, ["read", "browser", "exec", "exec"], 1),
            snapshot_event(T0 + 10, ["exec", "read"], 2),
            snapshot_event(T0 + 20, ["exec"], 3),
        ]
        entries = capability_timeline(events, [], ConfigHistory())
        self.assertEqual(
            [e.capability_set for e in entries],
            [("browser", "exec", "read"), ("exec", "read"), ("exec",), ("exec", "read")],
        )
        self.assertEqual([(e.added, e.removed) for e in entries[1:]], [((), ("browser",)), ((), ("read",)), (("read",), ())])
        self.assertEqual([e.orphaned for e in entries], [(), ("browser",), (), ()])
        self.assertEqual(entries[0].source, "log:google tool schema snapshot")
        (finding,) = capability_findings(entries)
        self.assertEqual((finding.rule_id, finding.details["tool"]), ("C1", "browser"))
        self.assertEqual(finding.evidence[0].line_no, 2)

    def test_prompt_report_and_config(self):
        meta = parse_session_meta(
            "agent:main:main",
            {"sessionId": SESSION_ID, "updatedAt": T0 + 50, "systemPromptReport": {"toolNames": ["read", "write"]}},
        )

        def config(allow, touched):
            return json.dumps({"tools": {"allow": allow}, "meta": {"lastTouchedAt": touched}}).encode()

        history = build_config_history(
            [("openclaw.json.bak", config(["read"], T0 - 1000), T0), ("openclaw.json", config(["read", "write"], T0 + 5), T0)]
        )
        entries = capability_timeline([], [("main", "agent:main:main", meta)], history)
        self.assertEqual([e.source for e in entries], ["config", "config", "systemPromptReport"])
        self.assertEqual(entries[1].added, ("write",))
        self.assertTrue(entries[1].config_changes)
        self.assertEqual(entries[2].session, SESSION_ID)
        self.assertEqual(entries[2].evidence_ref.json_path, '$["agent:main:main"].systemPromptReport')


class ReconstructContextTestCase(unittest.TestCase):
    """
    Test cases for context estimates at a point in time.
    """

    def setUp(self):
        soul = "/home/ada/.openclaw/workspace/SOUL.md"
        note = "memory/2026-02-02.md"
        self.transcript = transcript_of(
            header(),
            message("u1", None, "user", text("check SOUL.md"), ts=T0),
            assistant("a1", "u1", [tool_call("c_read", "read", {"path": soul})], ts=T0 + 1000),
            result("r1", "a1", "c_read", "read", "Be concise.", ts=T0 + 1500),
            assistant("a2", "r1", [tool_call("c_write", "write", {"path": note, "content": "- a\n"})], ts=T0 + 3000),
            result("r2", "a2", "c_write", "write", ts=T0 + 3100),
            assistant("a3", "r2", [tool_call("c_edit", "edit", {"path": note, "oldText": "- a", "newText": "- b"})], ts=T0 + 5000),
            result("r3", "a3", "c_edit", "edit", ts=T0 + 5100),
            {"type": "compaction", "id": "k1", "parentId": "r3", "timestamp": T0 + 5500, "tokensBefore": 9000},
        )

    def test_nothing_after_t_is_used(self):
        estimate = reconstruct_context(self.transcript, None, None, T0 + 4000)
        self.assertEqual(sorted(estimate.replayed_files), ["SOUL.md", "memory/2026-02-02.md"])
        self.assertEqual(estimate.replayed_files["SOUL.md"].basis, ReplayBasis.ReadToolPayload)
        self.assertEqual(estimate.replayed_files["SOUL.md"].content, "Be concise.")
        self.assertEqual(estimate.replayed_files["memory/2026-02-02.md"].content, "- a\n")
        self.assertEqual(estimate.compaction_boundaries, [])
        self.assertFalse(estimate.report_present)
        self.assertIn("no systemPromptReport", estimate.caveats[0])

    def test_read_result_must_precede_t(self):
        estimate = reconstruct_context(self.transcript, None, None, T0 + 1200)
        self.assertEqual(estimate.replayed_files, {})

    def test_edit_replay_and_compaction(self):
        estimate = reconstruct_context(self.transcript, None, None, T0 + 6000)
        replayed = estimate.replayed_files["memory/2026-02-02.md"]
        self.assertEqual((replayed.content, replayed.basis), ("- b\n", ReplayBasis.EditReplay))
        self.assertEqual([ref.line_no for ref in estimate.compaction_boundaries], [9])
        self.assertTrue(any("compacted 1 time(s)" in c for c in estimate.caveats))

    def test_report_and_external_modification(self):
        meta = parse_session_meta(
            "agent:main:main",
            {
                "sessionId": SESSION_ID,
                "systemPromptReport": {
                    "injectedWorkspaceFiles": [{"name": "SOUL.md", "path": "/home/ada/.openclaw/workspace/SOUL.md", "injectedChars": 11}]
                },
            },
        )
        workspace = WorkspaceSnapshot(
            agent_id="main",
            workspace_path="workspace",
            daily_memory=[
                DailyMemory(datetime.date(2026, 2, 1), "workspace/memory/2026-02-01.md", "- x\n", T0 - 86400000),
                DailyMemory(datetime.date(2026, 2, 2), "workspace/memory/2026-02-02.md", "- c\n", T0 + 600000),
            ],
        )
        estimate = reconstruct_context(self.transcript, workspace, meta, T0 + 6000)
        self.assertTrue(estimate.report_present)
        self.assertEqual([(f.name, f.injected_chars, f.note) for f in estimate.injected_files], [("SOUL.md", 11, STALE_REPORT_NOTE)])
        self.assertTrue(any("external modification possible" in c for c in estimate.caveats))
        self.assertTrue(any(c.startswith("inferred, not recorded") for c in estimate.caveats))

    def test_workspace_relative(self):
        self.assertEqual(workspace_relative("/home/ada/.openclaw/workspace/memory/x.md"), "memory/x.md")
        self.assertEqual(workspace_relative("./SOUL.md"), "SOUL.md")
        self.assertEqual(workspace_relative("/etc/hosts"), "/etc/hosts")


class OriginTestCase(unittest.TestCase):
    """
    Test cases for origin chains and autonomy classes.
    """

    def chains(self, transcript, attributions=()):
        pairing = pair_tool_calls(transcript.entries, SESSION_ID, PATH)
        out = {}
        for execution in pairing.executions:
            chain = trace_origin(execution, transcript.entries, attributions)
            out[execution.tool_call_id] = (chain,) + classify_autonomy(chain)
        return out

    def test_user_instructed(self):
        transcript = transcript_of(
            header(),
            message("u1", None, "user", text("Please read memory/2026-02-01.md, then cat notes.txt and list files"), ts=T0),
            assistant(
                "a1",
                "u1",
                [
                    tool_call("c1", "read", {"path": "memory/2026-02-01.md"}),
                    tool_call("c2", "exec", {"command": "cat notes.txt"}),
                    tool_call("c3", "exec", {"command": "ls -la"}),
                    tool_call("c4", "exec", {"command": "rm -rf /tmp/x"}),
                ],
                ts=T0 + 1000,
            ),
            result("r1", "a1", "c1", "read"),
            result("r2", "r1", "c2", "exec"),
            result("r3", "r2", "c3", "exec"),
            result("r4", "r3", "c4", "exec"),
        )
        found = self.chains(transcript)
        chain, cls, rationale = found["c1"]
        self.assertIs(chain.origin_kind, OriginKind.UserMessage)
        self.assertEqual(chain.trigger.entry_id, "u1")
        self.assertIs(cls, AutonomyClass.DirectlyInstructed)
        self.assertTrue(rationale.startswith("A1"))
        self.assertIs(found["c2"][1], AutonomyClass.DirectlyInstructed)
        self.assertIs(found["c3"][1], AutonomyClass.InterpretivelyDerived)
        self.assertIs(found["c4"][1], AutonomyClass.InterpretivelyDerived)
        self.assertEqual(chain.links[-1].role, "action")

    def test_memory_and_prior_reasoning(self):
        transcript = transcript_of(
            header(),
            message("u1", None, "user", text("hi"), ts=T0),
            assistant("a1", "u1", text("Hello."), ts=T0 + 500, stopReason="stop"),
            assistant(
                "a2",
                "a1",
                [thinking("Let me check my notes."), tool_call("c2", "read", {"path": "memory/2026-02-01.md"})],
                ts=T0 + 60000,
            ),
            result("r2", "a2", "c2", "read", "- Dentist appointment Friday 10:00", ts=T0 + 60100),
            assistant(
                "a3",
                "r2",
                [thinking("2026-02-01.md mentions the dentist."), tool_call("c3", "message", {"to": "ada", "message": "Dentist on Friday"})],
                ts=T0 + 61000,
            ),
            result("r3", "a3", "c3", "message", ts=T0 + 61100),
        )
        found = self.chains(transcript)
        self.assertIs(found["c2"][0].origin_kind, OriginKind.PriorReasoning)
        self.assertIs(found["c2"][1], AutonomyClass.AutonomouslyInitiated)
        chain, cls, _ = found["c3"]
        self.assertIs(chain.origin_kind, OriginKind.MemoryEntry)
        self.assertIs(cls, AutonomyClass.AutonomouslyInitiated)
        self.assertIsNone(chain.trigger)
        self.assertIn("memory/2026-02-01.md", chain.basis)

    def test_unresolved(self):
        transcript = transcript_of(
            header(),
            assistant("a1", None, [tool_call("c1", "exec", {"command": "uptime"})], ts=T0),
            result("r1", "a1", "c1", "exec"),
        )
        chain, cls, rationale = self.chains(transcript)["c1"]
        self.assertIs(chain.origin_kind, OriginKind.Unresolved)
        self.assertIs(cls, AutonomyClass.Indeterminate)
        self.assertEqual(rationale, "A4: origin unresolved")

    def test_isolated_cron_session(self):
        transcript = transcript_of(
            header(),
            message("u1", None, "user", text("Write the daily digest"), ts=T0),
            assistant("a1", "u1", [tool_call("c1", "write", {"path": "digest.md", "content": "x"})], ts=T0 + 1000),
            result("r1", "a1", "c1", "write"),
        )
        run = CronRun("daily-digest", T0, "ok", "cron/runs/daily-digest.jsonl", 1)
        attribution = CronAttribution(run, CronVenue.IsolatedSession, SESSION_ID, None, "agent:main:cron:daily-digest")
        chain, cls, _ = self.chains(transcript, [attribution])["c1"]
        self.assertIs(chain.origin_kind, OriginKind.CronTrigger)
        self.assertEqual(chain.trigger.role, "cron")
        self.assertIs(cls, AutonomyClass.AutonomouslyInitiated)

    def test_foreign_action(self):
        transcript = transcript_of(header(), message("u1", None, "user", text("hi")))
        other = transcript_of(
            header(),
            message("u0", None, "user", text("x")),
            assistant("a1", "u0", [tool_call("c1", "exec", {})]),
            assistant("a2", "a1", [tool_call("c2", "exec", {})]),
            result("r2", "a2", "c2", "exec"),
        )
        action = pair_tool_calls(other.entries, SESSION_ID, PATH).executions[0]
        with self.assertRaises(ValueError):
            trace_origin(action, transcript.entries)


class StoreExaminationTestCase(CommonStoreTestTools, unittest.TestCase):
    """
    Examining a pristine generated store.
    """

    @pytest.fixture(autouse=True)
    def _store(self, full_store, full_evidence):
        self.dest, self.truth = full_store
        self.evidence = full_evidence
        self.correlation = correlate_evidence(full_evidence)
        self.result = examine(full_evidence, self.correlation)

    def test_no_anomalies(self):
        self.assert_no_anomalies(self.result.findings)
        self.assert_rules_fired(self.result.findings, ["R2", "C1"])

    def test_autonomy(self):
        found = {
            chain.action.tool_call_id: {"origin": chain.origin_kind.value, "autonomy": cls.value, "session": chain.action.session}
            for chain, cls, _ in self.result.autonomy
        }
        self.assertTrue(self.truth.autonomy)
        for call_id, expected in self.truth.autonomy.items():
            self.assertEqual(found[call_id], expected, call_id)

    def test_capability_sets(self):
        logged = [e.capability_set for e in self.result.capabilities if e.source.startswith("log:")]
        self.assertEqual(logged, [tuple(s) for s in self.truth.capability_sets])

    def test_caveats(self):
        self.assertEqual(self.result.caveats[: len(STANDING_CAVEATS)], list(STANDING_CAVEATS))
        self.assertEqual(self.result.origins, [chain for chain, _, _ in self.result.autonomy])

    def test_findings_sorted_and_referenced(self):
        keys = [f.sort_key() for f in self.result.findings]
        self.assertEqual(keys, sorted(keys))
        self.assertTrue(all(f.evidence for f in self.result.findings))


def test_boundaries_without_logs(minimal_store):
    dest, truth = minimal_store
    evidence = load_evidence(dest, settings=truth_settings(truth))
    caveats = reconstruction_boundaries(evidence, correlate_evidence(evidence))
    assert caveats[: len(STANDING_CAVEATS)] == list(STANDING_CAVEATS)
    assert "runtime logs were not captured; log-based indicators were not evaluated" in caveats
    assert rule_ids(examine(evidence, correlate_evidence(evidence)).findings) == []
