# -*- coding: utf-8 -*-
"""
Investigator-facing conclusions drawn from correlated evidence: anti-forensics
indicators, capability history, context estimates, origin chains and autonomy labels.

Every conclusion names the rule that produced it.
"""
import logging
import shlex
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.artifacts.config import diff_configs
from clawex.artifacts.inventory import ROOT_LOGS, ROOT_STORE
from clawex.artifacts.logs import LogKind
from clawex.artifacts.transcripts import Compaction, Message, ModelChange, SessionStatus
from clawex.clawex import STORE_DIRNAME, Severity
from clawex.correlate import CronVenue, EvidenceRef, pair_tool_calls
from clawex.utils import excerpt, iso_utc, normalize_text, short_hash, utc_date

logger = logging.getLogger(__name__)


class FindingCategory(Enum):
    AntiForensics = "AntiForensics"
    CapabilityChange = "CapabilityChange"
    ContextGap = "ContextGap"
    AttributionConflict = "AttributionConflict"
    RetentionAnomaly = "RetentionAnomaly"


# rule id -> (category, severity, one-line statement of the rule)
RULES = {
    "R1": (FindingCategory.AntiForensics, Severity.Anomalous, "tool call logged but missing from every transcript"),
    "R2": (FindingCategory.AntiForensics, Severity.Noteworthy, "transcript soft-deleted (normal session lifecycle)"),
    "R3": (FindingCategory.AntiForensics, Severity.Noteworthy, "transcript on disk without an index entry"),
    "R4": (FindingCategory.AntiForensics, Severity.Anomalous, "index entry whose transcript is missing"),
    "R5": (FindingCategory.RetentionAnomaly, None, "runtime logs inconsistent with 24-hour retention"),
    "R6": (FindingCategory.AntiForensics, Severity.Noteworthy, "cron run whose job is no longer defined"),
    "R7": (FindingCategory.AntiForensics, Severity.Noteworthy, "transcript ends in a partial line"),
    "R8": (FindingCategory.AntiForensics, Severity.Anomalous, "file modified before the newest event it records"),
    "R9": (FindingCategory.ContextGap, Severity.Noteworthy, "parentId refers to no earlier entry"),
    "R10": (FindingCategory.AttributionConflict, Severity.Anomalous, "delegation cycle"),
    "R11": (FindingCategory.AttributionConflict, Severity.Noteworthy, "child session with more than one parent"),
    "C1": (FindingCategory.CapabilityChange, Severity.Info, "tool dropped from the capability set"),
    "C2": (FindingCategory.CapabilityChange, Severity.Info, "model changed inside a session"),
}


@dataclass(frozen=True)
class Finding:
    id: str
    rule_id: str
    category: FindingCategory
    severity: Severity
    summary: str
    evidence: Tuple[EvidenceRef, ...]
    confidence_basis: str
    details: Dict[str, object] = field(default_factory=dict, compare=False)

    def sort_key(self):
        rule_number = int(self.rule_id[1:])
        first = self.evidence[0].sort_key() if self.evidence else ()
        return (self.rule_id[0], rule_number, first, self.id)

    def to_dict(self):
        return {
            "id": self.id,
            "rule_id": self.rule_id,
            "category": self.category.value,
            "severity": self.severity.name,
            "summary": self.summary,
            "evidence": [ref.to_dict() for ref in self.evidence],
            "confidence_basis": self.confidence_basis,
            "details": self.details,
        }


def make_finding(rule_id, summary, evidence, details=None, severity=None):
    """Builds a Finding whose id is a hash of its rule, summary and evidence."""
    category, default_severity, statement = RULES[rule_id]
    evidence = tuple(evidence)
    if not evidence:
        raise ValueError("Finding {} needs at least one evidence reference.".format(rule_id))
    finding_id = "F-" + short_hash(rule_id, summary, [ref.to_dict() for ref in evidence])
    logger.debug("rule %s fired: %s", rule_id, summary)
    return Finding(
        id=finding_id,
        rule_id=rule_id,
        category=category,
        severity=severity or default_severity,
        summary=summary,
        evidence=evidence,
        confidence_basis="{}: {}".format(rule_id, statement),
        details=details or {},
    )


# --- anti-forensics ---------------------------------------------------------------------------


def _transcript_tool_ids(evidence):
    calls = set()
    results = set()
    for transcript in evidence.transcripts:
        for entry in transcript.entries:
            payload = entry.payload
            if not isinstance(payload, Message):
                continue
            calls.update(block.id for block in payload.tool_calls)
            if payload.role == "toolResult" and payload.tool_call_id:
                results.add(payload.tool_call_id)
    return calls, results


def _rule_logged_calls(evidence):
    calls, results = _transcript_tool_ids(evidence)
    logged = {}
    for event in evidence.log_events:
        if event.tool_call_id and event.message_kind in (LogKind.ToolStart, LogKind.ToolEnd):
            logged.setdefault(event.tool_call_id, []).append(event)
    for call_id in sorted(logged):
        events = logged[call_id]
        missing = []
        if call_id not in calls:
            missing.append("toolCall")
        if call_id not in results and any(e.message_kind is LogKind.ToolEnd for e in events):
            missing.append("toolResult")
        if not missing:
            continue
        tool = next((e.tool_name for e in events if e.tool_name), None)
        yield make_finding(
            "R1",
            "tool call {} ({}) is logged but its {} is absent from every transcript".format(
                call_id, tool or "unknown tool", " and ".join(missing)
            ),
            [EvidenceRef(ROOT_LOGS, e.source, e.line_no) for e in events],
            {"tool_call_id": call_id, "tool_name": tool, "missing": missing, "run_id": events[0].run_id},
        )


def _rule_session_records(evidence):
    for record in evidence.session_records:
        if record.status is SessionStatus.SoftDeleted:
            yield make_finding(
                "R2",
                "session {} was soft-deleted at {}".format(record.session_id, iso_utc(record.deleted_at)),
                [EvidenceRef(ROOT_STORE, record.path)],
                {"session_id": record.session_id, "deleted_at": record.deleted_at},
            )
        elif record.status is SessionStatus.Orphaned:
            yield make_finding(
                "R3",
                "transcript {} has no entry in the session index".format(record.path),
                [EvidenceRef(ROOT_STORE, record.path)],
                {"session_id": record.session_id},
            )
        elif record.status is SessionStatus.Dangling:
            index_path = "agents/{}/sessions/sessions.json".format(record.agent_id)
            yield make_finding(
                "R4",
                "index entry {} names session {} but no transcript exists".format(
                    record.session_key, record.session_id
                ),
                [EvidenceRef(ROOT_STORE, index_path, None, '$["{}"]'.format(record.session_key))],
                {"session_id": record.session_id, "session_key": record.session_key},
            )


def _rule_retention(evidence):
    report = evidence.retention()
    if report is None:
        return
    for flag in report.flags:
        if flag.severity is Severity.Info:
            continue
        if flag.path:
            refs = [EvidenceRef(ROOT_LOGS, flag.path)]
        else:
            refs = [EvidenceRef(ROOT_LOGS, ".")]
        yield make_finding(
            "R5",
            "{}: {}".format(flag.kind, flag.detail),
            refs,
            {"flag": flag.kind, "window_start": report.window_start, "window_end": report.window_end},
            severity=flag.severity,
        )


def _rule_orphan_runs(evidence):
    by_job = {}
    for run in evidence.cron.orphan_runs:
        by_job.setdefault(run.job_id, []).append(run)
    for job_id in sorted(by_job):
        runs = by_job[job_id]
        yield make_finding(
            "R6",
            "{} cron run(s) of job {} whose definition is gone from cron/jobs.json".format(len(runs), job_id),
            [EvidenceRef(ROOT_STORE, run.source, run.line_no) for run in runs],
            {"job_id": job_id},
        )


def _rule_truncated(evidence):
    for transcript in evidence.transcripts:
        if transcript.truncated_tail:
            last_line = max((w.line_no for w in transcript.warnings if w.line_no), default=None)
            yield make_finding(
                "R7",
                "transcript {} ends in a partial line without a newline".format(transcript.path),
                [EvidenceRef(ROOT_STORE, transcript.path, last_line)],
                {"session_id": transcript.session_id},
            )


def _backdated(path, root, mtime, newest, tolerance, line_no=None):
    if mtime is None or newest is None or mtime + tolerance >= newest:
        return None
    return make_finding(
        "R8",
        "{} was last modified at {} but records an event at {}".format(path, iso_utc(mtime), iso_utc(newest)),
        [EvidenceRef(root, path, line_no)],
        {"mtime": mtime, "newest_recorded": newest, "gap_ms": newest - mtime},
    )


def _rule_backdating(evidence):
    tolerance = evidence.settings.mtime_tolerance_ms
    for transcript in evidence.transcripts:
        newest = transcript.newest_time
        line = next((e.line_no for e in transcript.entries if e.time == newest), None)
        finding = _backdated(transcript.path, ROOT_STORE, transcript.mtime, newest, tolerance, line)
        if finding:
            yield finding
    for log in evidence.log_files:
        if not log.events:
            continue
        newest = max(log.events, key=lambda e: (e.time, -e.line_no))
        finding = _backdated(log.info.path, ROOT_LOGS, log.info.mtime, newest.time, tolerance, newest.line_no)
        if finding:
            yield finding
    by_file = {}
    for run in evidence.cron.runs:
        by_file.setdefault(run.source, []).append(run)
    for path in sorted(by_file):
        newest = max(by_file[path], key=lambda r: (r.time, -r.line_no))
        finding = _backdated(
            path, ROOT_STORE, evidence.cron_run_mtimes.get(path), newest.time, tolerance, newest.line_no
        )
        if finding:
            yield finding


def _rule_parent_chain(evidence):
    for transcript in evidence.transcripts:
        seen = set()
        broken = []
        for entry in transcript.entries:
            if entry.parent_id is not None and entry.parent_id not in seen:
                broken.append(entry)
            if entry.id is not None:
                seen.add(entry.id)
        if broken:
            yield make_finding(
                "R9",
                "{} entr{} in {} point at a parentId that does not precede them".format(
                    len(broken), "y" if len(broken) == 1 else "ies", transcript.path
                ),
                [EvidenceRef(ROOT_STORE, transcript.path, entry.line_no) for entry in broken],
                {"session_id": transcript.session_id, "missing_parents": [e.parent_id for e in broken]},
            )


def _rule_delegation(correlation):
    graph = correlation.delegation
    for cycle in graph.cycles:
        refs = [ref for edge in graph.edges if edge.parent in cycle and edge.child in cycle for ref in edge.evidence]
        yield make_finding(
            "R10",
            "delegation cycle {}".format(" -> ".join(cycle + cycle[:1])),
            refs or [EvidenceRef(ROOT_STORE, "subagents/runs.json")],
            {"cycle": cycle},
        )
    for child, parents in sorted(graph.conflicts.items()):
        refs = [ref for edge in graph.edges if edge.child == child for ref in edge.evidence]
        yield make_finding(
            "R11",
            "session {} is claimed by {} parents: {}".format(child, len(parents), ", ".join(parents)),
            refs or [EvidenceRef(ROOT_STORE, "subagents/runs.json")],
            {"child": child, "parents": parents},
        )


def detect_antiforensics(evidence, correlation):
    """
    Applies the anti-forensics rule set (R1 to R11) to loaded and correlated evidence.

    Soft deletes, orphaned transcripts and stale logs are lifecycle-normal and stay at
    Noteworthy; only cross-source contradictions reach Anomalous.
    """
    findings = []
    for rule in (
        _rule_logged_calls,
        _rule_session_records,
        _rule_retention,
        _rule_orphan_runs,
        _rule_truncated,
        _rule_backdating,
        _rule_parent_chain,
    ):
        findings.extend(rule(evidence))
    findings.extend(_rule_delegation(correlation))
    findings.sort(key=Finding.sort_key)
    return findings


# --- capabilities ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapabilityEntry:
    time: Optional[int]
    capability_set: Optional[Tuple[str, ...]]
    source: str
    evidence_ref: EvidenceRef
    added: Tuple[str, ...] = ()
    removed: Tuple[str, ...] = ()
    orphaned: Tuple[str, ...] = ()
    session: Optional[str] = None
    config_changes: Tuple[str, ...] = ()

    def to_dict(self):
        return {
            "time": self.time,
            "time_iso": iso_utc(self.time),
            "capability_set": list(self.capability_set) if self.capability_set is not None else None,
            "source": self.source,
            "session": self.session,
            "delta_from_previous": {"added": list(self.added), "removed": list(self.removed)},
            "orphaned": list(self.orphaned),
            "config_changes": list(self.config_changes),
            "evidence": self.evidence_ref.to_dict(),
        }


_SOURCE_ORDER = {"config": 0, "systemPromptReport": 1}


def _config_tools(config):
    tools = (config.raw or {}).get("tools")
    if isinstance(tools, dict) and isinstance(tools.get("allow"), list):
        return tuple(sorted(str(t) for t in tools["allow"]))
    return None


def capability_timeline(log_events, index_entries, config_history, associations=()):
    """
    Orders every observation of the tool set the model was offered: logged schema
    snapshots, `systemPromptReport.toolNames` of session entries, and configuration
    changes (with `tools.allow` when the config pins one).

    Each entry carrying a set gets its delta from the previous set; a tool that
    disappears and never comes back is reported as orphaned where it disappears.
    """
    snapshot_sessions = {a.evidence_ref: a.session_id for a in associations if a.evidence_ref is not None}
    raw = []
    for event in log_events:
        if event.message_kind is not LogKind.ToolSchemaSnapshot:
            continue
        ref = EvidenceRef(ROOT_LOGS, event.source, event.line_no)
        raw.append(
            (
                event.time,
                "log:{}".format(event.marker),
                tuple(sorted(set(event.tool_names))),
                ref,
                snapshot_sessions.get(ref),
                (),
            )
        )
    for agent_id, key, meta in index_entries:
        report = meta.system_prompt_report
        if report is None or report.tool_names is None:
            continue
        ref = EvidenceRef(
            ROOT_STORE,
            "agents/{}/sessions/sessions.json".format(agent_id),
            None,
            '$["{}"].systemPromptReport'.format(key),
        )
        raw.append((meta.updated_at, "systemPromptReport", tuple(sorted(set(report.tool_names))), ref, meta.session_id, ()))
    previous_config = None
    for snapshot in config_history.snapshots:
        changes = ()
        if previous_config is not None:
            changes = tuple(change.path for change in diff_configs(previous_config, snapshot.config))
        if previous_config is None or changes:
            ref = EvidenceRef(ROOT_STORE, snapshot.source_path)
            raw.append((snapshot.ordering_key, "config", _config_tools(snapshot.config), ref, None, changes))
        previous_config = snapshot.config

    raw.sort(
        key=lambda item: (
            item[0] is None,
            item[0] or 0,
            _SOURCE_ORDER.get(item[1], 2),
            item[3].sort_key(),
        )
    )
    sets = [item[2] for item in raw]
    entries = []
    previous = None
    for position, (time, source, tools, ref, session, changes) in enumerate(raw):
        added = removed = orphaned = ()
        if tools is not None:
            if previous is not None:
                added = tuple(sorted(set(tools) - set(previous)))
                removed = tuple(sorted(set(previous) - set(tools)))
                later = set(t for s in sets[position + 1:] if s is not None for t in s)
                orphaned = tuple(t for t in removed if t not in later)
            previous = tools
        entries.append(CapabilityEntry(time, tools, source, ref, added, removed, orphaned, session, changes))
    return entries


def capability_findings(entries, evidence=None):
    """C1 for every orphaned tool; C2 for every in-session model change."""
    findings = []
    for entry in entries:
        for tool in entry.orphaned:
            findings.append(
                make_finding(
                    "C1",
                    "tool {} is offered until {} and never again".format(tool, iso_utc(entry.time)),
                    [entry.evidence_ref],
                    {"tool": tool, "source": entry.source},
                )
            )
    if evidence is not None:
        for transcript in evidence.transcripts:
            talked = False
            for entry in transcript.entries:
                talked = talked or isinstance(entry.payload, Message)
                if isinstance(entry.payload, ModelChange) and talked:
                    findings.append(
                        make_finding(
                            "C2",
                            "session {} switched to {}/{} mid-session; capability entries are not re-scoped per run".format(
                                transcript.session_id, entry.payload.provider, entry.payload.model
                            ),
                            [EvidenceRef(ROOT_STORE, transcript.path, entry.line_no)],
                            {"provider": entry.payload.provider, "model": entry.payload.model},
                        )
                    )
    findings.sort(key=Finding.sort_key)
    return findings


# --- context --------------------------------------------------------------------------------


class ReplayBasis(Enum):
    ReadToolPayload = "ReadToolPayload"
    WriteToolPayload = "WriteToolPayload"
    EditReplay = "EditReplay"


READ_TOOLS = ("read", "read_file")
WRITE_TOOLS = ("write", "write_file")
EDIT_TOOLS = ("edit", "apply_patch", "edit_file")
PATH_ARGS = ("path", "file_path", "filePath", "file")

STALE_REPORT_NOTE = "may only reflect the latest recorded state"


@dataclass(frozen=True)
class InjectedEstimate:
    name: str
    path: str
    injected_chars: int
    note: str = STALE_REPORT_NOTE


@dataclass(frozen=True)
class ReplayedFile:
    path: str
    content: Optional[str]
    content_as_of: Optional[int]
    basis: ReplayBasis
    tool_call_id: str
    evidence_ref: EvidenceRef

    def to_dict(self):
        return {
            "path": self.path,
            "content": self.content,
            "content_as_of": self.content_as_of,
            "basis": self.basis.value,
            "tool_call_id": self.tool_call_id,
            "evidence": self.evidence_ref.to_dict(),
        }


@dataclass
class ContextEstimate:
    at_time: int
    session: Optional[str] = None
    injected_files: List[InjectedEstimate] = field(default_factory=list)
    replayed_files: Dict[str, ReplayedFile] = field(default_factory=dict)
    compaction_boundaries: List[EvidenceRef] = field(default_factory=list)
    caveats: List[str] = field(default_factory=list)
    report_present: bool = False

    def to_dict(self):
        return {
            "at_time": self.at_time,
            "at_time_iso": iso_utc(self.at_time),
            "session": self.session,
            "report_present": self.report_present,
            "injected_files": [vars(f) for f in self.injected_files],
            "replayed_files": {path: item.to_dict() for path, item in sorted(self.replayed_files.items())},
            "compaction_boundaries": [ref.to_dict() for ref in self.compaction_boundaries],
            "caveats": list(self.caveats),
        }


def workspace_relative(path, workspace_rel="workspace"):
    """
    Maps a file path as the agent saw it to a workspace-relative one where possible;
    paths outside the workspace come back unchanged.
    """
    text = str(path or "").replace("\\", "/")
    marker = "/{}/".format(STORE_DIRNAME)
    if marker in text:
        text = text.split(marker, 1)[1]
    prefix = workspace_rel.rstrip("/") + "/"
    if text.startswith(prefix):
        return text[len(prefix):]
    if text.startswith("./"):
        return text[2:]
    return text


def _path_argument(arguments):
    if not isinstance(arguments, dict):
        return None
    for key in PATH_ARGS:
        if arguments.get(key):
            return str(arguments[key])
    return None


def _apply_edit(before, arguments):
    old = arguments.get("oldText", arguments.get("old_string"))
    new = arguments.get("newText", arguments.get("new_string"))
    if before is None or old is None or new is None or old not in before:
        return None
    return before.replace(old, new, 1)


def reconstruct_context(transcript, workspace, session_meta, t, tolerance_ms=2000):
    """
    Approximates what the model had in context at time `t` of one session.

    Injected files come from the session's systemPromptReport when one exists. File
    contents are replayed from read, write and edit tool payloads up to `t`; nothing
    later than `t` is used. Workspace files modified after the agent's last recorded
    write are called out as possibly edited from outside.
    """
    estimate = ContextEstimate(at_time=t, session=transcript.session_id if transcript else None)
    report = session_meta.system_prompt_report if session_meta is not None else None
    workspace_rel = workspace.workspace_path if workspace is not None else "workspace"
    if report is not None:
        estimate.report_present = True
        estimate.injected_files = [
            InjectedEstimate(f.name, f.path, f.injected_chars) for f in report.injected_files
        ]
        estimate.caveats.append(
            "injected file list comes from systemPromptReport and {}, not necessarily the state at {}".format(
                STALE_REPORT_NOTE, iso_utc(t)
            )
        )
    else:
        estimate.caveats.append(
            "no systemPromptReport recorded for this session; the report may not persist reliably, "
            "so injected files are unknown and the estimate rests on tool replay alone"
        )

    last_agent_write = {}
    if transcript is not None:
        pairing = pair_tool_calls(transcript.entries, transcript.session_id, transcript.path)
        executions = sorted(pairing.executions, key=lambda e: e.call_line)
        for entry in transcript.entries:
            if isinstance(entry.payload, Compaction) and entry.time is not None and entry.time <= t:
                estimate.compaction_boundaries.append(EvidenceRef(ROOT_STORE, transcript.path, entry.line_no))
        for execution in executions:
            if execution.call_time is None or execution.call_time > t:
                continue
            path = _path_argument(execution.arguments)
            if path is None:
                continue
            key = workspace_relative(path, workspace_rel)
            name = execution.tool_name
            ref = EvidenceRef(ROOT_STORE, transcript.path, execution.call_line)
            if name in READ_TOOLS:
                result_time = execution.result_time if execution.result_time is not None else execution.call_time
                if execution.result_line is None or result_time > t or execution.is_error:
                    continue
                estimate.replayed_files[key] = ReplayedFile(
                    key,
                    execution.result_content,
                    result_time,
                    ReplayBasis.ReadToolPayload,
                    execution.tool_call_id,
                    EvidenceRef(ROOT_STORE, transcript.path, execution.result_line),
                )
            elif name in WRITE_TOOLS:
                content = execution.arguments.get("content")
                estimate.replayed_files[key] = ReplayedFile(
                    key, content, execution.call_time, ReplayBasis.WriteToolPayload, execution.tool_call_id, ref
                )
                last_agent_write[key] = execution.call_time
            elif name in EDIT_TOOLS:
                before = estimate.replayed_files.get(key)
                content = _apply_edit(before.content if before else None, execution.arguments)
                if content is None:
                    estimate.caveats.append(
                        "{}: edit at {} could not be replayed without the prior content".format(
                            key, iso_utc(execution.call_time)
                        )
                    )
                estimate.replayed_files[key] = ReplayedFile(
                    key, content, execution.call_time, ReplayBasis.EditReplay, execution.tool_call_id, ref
                )
                last_agent_write[key] = execution.call_time

    if workspace is not None:
        for key in sorted(last_agent_write):
            item = workspace.file_by_path(key)
            if item is not None and item.mtime is not None and item.mtime > last_agent_write[key] + tolerance_ms:
                estimate.caveats.append(
                    "{}: workspace file modified at {} after the agent's last recorded write at {}; "
                    "external modification possible".format(key, iso_utc(item.mtime), iso_utc(last_agent_write[key]))
                )
        day = utc_date(t)
        recent = [m for m in workspace.daily_memory if m.date <= day][-2:]
        if recent:
            estimate.caveats.append(
                "inferred, not recorded: by the AGENTS.md convention the agent reads the two most recent "
                "daily memory files at session start ({})".format(", ".join(m.path for m in recent))
            )
    if estimate.compaction_boundaries:
        estimate.caveats.append(
            "context was compacted {} time(s) before {}; earlier turns were summarised".format(
                len(estimate.compaction_boundaries), iso_utc(t)
            )
        )
    estimate.caveats.append(
        "replayed contents show what the agent read or wrote; changes made outside the agent cannot be excluded"
    )
    return estimate


# --- origin and autonomy --------------------------------------------------------------------


class OriginKind(Enum):
    UserMessage = "UserMessage"
    MemoryEntry = "MemoryEntry"
    CronTrigger = "CronTrigger"
    PriorReasoning = "PriorReasoning"
    Unresolved = "Unresolved"


class AutonomyClass(Enum):
    DirectlyInstructed = "DirectlyInstructed"
    InterpretivelyDerived = "InterpretivelyDerived"
    AutonomouslyInitiated = "AutonomouslyInitiated"
    Indeterminate = "Indeterminate"


@dataclass(frozen=True)
class OriginLink:
    entry_id: Optional[str]
    line_no: int
    role: str
    excerpt: str
    evidence_ref: EvidenceRef

    def to_dict(self):
        return {
            "entry_id": self.entry_id,
            "line_no": self.line_no,
            "role": self.role,
            "excerpt": self.excerpt,
            "evidence": self.evidence_ref.to_dict(),
        }


@dataclass(frozen=True)
class OriginChain:
    action: object
    links: Tuple[OriginLink, ...]
    origin_kind: OriginKind
    basis: str = ""
    agent_driven: bool = False

    @property
    def trigger(self):
        """The first link when it is the user, cron or injected entry that opened the run."""
        if self.links and self.links[0].role in ("user", "cron", "injected"):
            return self.links[0]
        return None

    def to_dict(self):
        return {
            "tool_call_id": self.action.tool_call_id,
            "tool_name": self.action.tool_name,
            "session": self.action.session,
            "origin_kind": self.origin_kind.value,
            "basis": self.basis,
            "agent_driven": self.agent_driven,
            "links": [link.to_dict() for link in self.links],
        }


MEMORY_MARKERS = ("memory/", "MEMORY.md")


def _is_memory_path(path):
    return bool(path) and any(marker in path for marker in MEMORY_MARKERS)


def trace_origin(action, entries, cron_attributions=(), source=None, agent_driven_ids=()):
    """
    Walks back from a tool call to what prompted it.

    The run containing the call starts after the latest user entry or the latest
    assistant turn that ended with stopReason `stop`. Rules, first match wins:
    CronTrigger (the session is an isolated cron session, or the opening user entry is
    an injected cron event), UserMessage (a user entry opens the run), MemoryEntry
    (thinking in the run names a memory file read in the run), PriorReasoning
    (assistant reasoning precedes the call), else Unresolved.
    """
    source = source or action.source
    position = next((i for i, e in enumerate(entries) if e.line_no == action.call_line), None)
    if position is None:
        raise ValueError("Tool call {} is not part of the given transcript.".format(action.tool_call_id))

    def ref(entry):
        return EvidenceRef(ROOT_STORE, source, entry.line_no)

    opener = None
    run = []
    for entry in reversed(entries[:position]):
        payload = entry.payload
        if not isinstance(payload, Message):
            continue
        if payload.role == "user":
            opener = entry
            break
        if payload.role == "assistant" and payload.usage and payload.usage.stop_reason == "stop":
            break
        run.append(entry)
    run.reverse()
    action_entry = entries[position]

    isolated = any(
        a.venue is CronVenue.IsolatedSession and a.linked_session == action.session for a in cron_attributions
    )
    injected_ids = {
        a.linked_entry_id
        for a in cron_attributions
        if a.venue is CronVenue.MainSession and a.linked_session == action.session
    }

    links = []
    if opener is not None:
        role = "user"
        if opener.id in injected_ids:
            role = "injected"
        elif isolated:
            role = "cron"
        links.append(OriginLink(opener.id, opener.line_no, role, excerpt(opener.payload.text), ref(opener)))

    memory_reads = []
    thinking_entries = []
    for entry in run + [action_entry]:
        payload = entry.payload
        if payload.role == "assistant":
            if payload.thinking:
                thinking_entries.append(entry)
            if entry is not action_entry:
                for block in payload.tool_calls:
                    path = _path_argument(block.arguments)
                    if block.name in READ_TOOLS and _is_memory_path(path):
                        memory_reads.append((entry, path))

    thinking_text = " ".join(e.payload.thinking for e in thinking_entries)
    cited = [(entry, path) for entry, path in memory_reads if path.rsplit("/", 1)[-1] in thinking_text]

    for entry in run:
        if entry in thinking_entries:
            links.append(OriginLink(entry.id, entry.line_no, "thinking", excerpt(entry.payload.thinking), ref(entry)))
        elif any(entry is read for read, _ in cited):
            links.append(OriginLink(entry.id, entry.line_no, "memory-read", excerpt(entry.payload.text), ref(entry)))
    if action_entry in thinking_entries:
        links.append(
            OriginLink(
                action_entry.id, action_entry.line_no, "thinking", excerpt(action_entry.payload.thinking), ref(action_entry)
            )
        )
    links.append(
        OriginLink(
            action_entry.id,
            action_entry.line_no,
            "action",
            excerpt("{} {}".format(action.tool_name, _key_argument(action.tool_name, action.arguments) or "")),
            ref(action_entry),
        )
    )

    agent_driven = opener is not None and opener.id in set(agent_driven_ids)
    if isolated or (opener is not None and opener.id in injected_ids):
        kind, basis = OriginKind.CronTrigger, "run belongs to a cron-attributed session or injected cron event"
    elif opener is not None:
        kind, basis = OriginKind.UserMessage, "user entry at line {} opens the run".format(opener.line_no)
    elif cited:
        kind, basis = OriginKind.MemoryEntry, "reasoning names {} read earlier in the run".format(cited[0][1])
    elif run or thinking_entries:
        kind, basis = OriginKind.PriorReasoning, "only assistant entries precede the call since the last turn"
    else:
        kind, basis = OriginKind.Unresolved, "no user turn, cron trigger or reasoning precedes the call"
    return OriginChain(action, tuple(links), kind, basis, agent_driven)


KEY_ARGUMENTS = ("path", "file_path", "filePath", "command", "cmd", "to", "recipient", "target", "url", "query")


def _key_argument(tool_name, arguments):
    if isinstance(arguments, str):
        return arguments
    if not isinstance(arguments, dict):
        return None
    for key in KEY_ARGUMENTS:
        if arguments.get(key) not in (None, ""):
            return str(arguments[key])
    return None


def _operands(command):
    try:
        words = shlex.split(command)
    except ValueError:
        words = command.split()
    return [w for w in words[1:] if not w.startswith("-")]


def classify_autonomy(chain):
    """
    Places an action on the autonomy spectrum. Returns (AutonomyClass, rationale).

    A1 DirectlyInstructed: a user message opens the run and names the action's key
    argument (the path, the recipient, or for shell commands every operand).
    A2 InterpretivelyDerived: a user message opens the run without naming it.
    A3 AutonomouslyInitiated: cron trigger, memory entry or prior reasoning.
    A4 Indeterminate: origin unresolved.
    """
    kind = chain.origin_kind
    if kind is OriginKind.UserMessage:
        said = normalize_text(chain.trigger.excerpt if chain.trigger else "")
        argument = _key_argument(chain.action.tool_name, chain.action.arguments)
        candidates = []
        if argument:
            if isinstance(chain.action.arguments, dict) and (
                "command" in chain.action.arguments or "cmd" in chain.action.arguments
            ):
                operands = _operands(argument)
                if operands and all(normalize_text(op) in said for op in operands):
                    candidates.append(" ".join(operands))
            else:
                value = normalize_text(argument)
                base = normalize_text(argument.replace("\\", "/").rsplit("/", 1)[-1])
                if value and value in said:
                    candidates.append(argument)
                elif base and base in said:
                    candidates.append(base)
        if candidates:
            rationale = "A1: user message names {!r}".format(candidates[0])
            cls = AutonomyClass.DirectlyInstructed
        else:
            rationale = "A2: user message opens the run but does not name {!r}".format(argument)
            cls = AutonomyClass.InterpretivelyDerived
        if chain.agent_driven:
            rationale += " (the user entry was written by a parent agent)"
        return cls, rationale
    if kind in (OriginKind.CronTrigger, OriginKind.MemoryEntry, OriginKind.PriorReasoning):
        return AutonomyClass.AutonomouslyInitiated, "A3: origin is {}".format(kind.value)
    return AutonomyClass.Indeterminate, "A4: origin unresolved"


# --- boundaries -----------------------------------------------------------------------------

STANDING_CAVEATS = (
    "Reasoning is only partially observable: thinking traces are recorded when the provider emits them "
    "and may be summarised, filtered or absent.",
    "The context window assembled at inference time is not stored; injected files and replayed contents "
    "are approximations.",
    "Model decisions are nondeterministic; replaying the same inputs need not reproduce the recorded actions.",
)


def reconstruction_boundaries(evidence, correlation):
    """
    The limits of what this examination can establish: three standing caveats plus one
    per gap found in this store. Never empty.
    """
    caveats = list(STANDING_CAVEATS)
    transcripts = {t.session_id for t in evidence.transcripts}
    missing = sorted(
        key
        for _, key, meta in evidence.index_entries()
        if meta.session_id in transcripts and meta.system_prompt_report is None
    )
    if missing:
        caveats.append(
            "no systemPromptReport for {} (the report may not persist reliably); "
            "context for these sessions rests on tool replay alone".format(", ".join(missing))
        )
    for association in correlation.associations:
        if association.assigned:
            continue
        caveats.append(
            "{} {} at {} ({}) could not be assigned to a session: {} candidate(s) within {} ms".format(
                association.subject,
                association.run_id or "",
                iso_utc(association.anchor_time),
                association.evidence_ref,
                len(association.candidates),
                evidence.settings.window_ms,
            ).replace("  ", " ")
        )
    for attribution in correlation.cron_attributions:
        if attribution.venue is CronVenue.Unlocated:
            caveats.append(
                "cron run of job {} at {} ({}:{}) could not be located in any session".format(
                    attribution.run.job_id,
                    iso_utc(attribution.run.time),
                    attribution.run.source,
                    attribution.run.line_no,
                )
            )
    if evidence.root.log_dir is None:
        caveats.append("runtime logs were not captured; log-based indicators were not evaluated")
    return caveats


# --- everything -----------------------------------------------------------------------------


@dataclass
class Examination:
    findings: List[Finding] = field(default_factory=list)
    capabilities: List[CapabilityEntry] = field(default_factory=list)
    origins: List[OriginChain] = field(default_factory=list)
    autonomy: List[Tuple[OriginChain, AutonomyClass, str]] = field(default_factory=list)
    caveats: List[str] = field(default_factory=list)


def trace_all(evidence, correlation):
    """(chain, class, rationale) for every paired tool execution, in transcript order."""
    agent_driven = {a.entry_id for a in correlation.delegation.agent_driven}
    out = []
    for transcript in sorted(evidence.transcripts, key=lambda t: t.path):
        pairing = correlation.pairings.get(transcript.path)
        if pairing is None:
            continue
        for call in sorted(pairing.executions, key=lambda e: (e.call_line, e.tool_call_id)):
            chain = trace_origin(call, transcript.entries, correlation.cron_attributions, transcript.path, agent_driven)
            cls, rationale = classify_autonomy(chain)
            out.append((chain, cls, rationale))
    return out


def examine(evidence, correlation):
    """Runs every examination over loaded and correlated evidence."""
    result = Examination()
    result.capabilities = capability_timeline(
        evidence.log_events, evidence.index_entries(), evidence.config_history, correlation.associations
    )
    result.findings = detect_antiforensics(evidence, correlation) + capability_findings(result.capabilities, evidence)
    result.findings.sort(key=Finding.sort_key)
    result.autonomy = trace_all(evidence, correlation)
    result.origins = [chain for chain, _, _ in result.autonomy]
    result.caveats = reconstruction_boundaries(evidence, correlation)
    return result
