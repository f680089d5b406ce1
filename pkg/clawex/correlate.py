# -*- coding: utf-8 -*-
"""
Cross-source correlation: the unified timeline, tool-call pairing, run association,
subagent delegation and cron attribution.

Every association is rule-based and carries the basis it was made on.
"""
import json
import logging
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.artifacts.inventory import ROOT_LOGS, ROOT_STORE, primary_plane
from clawex.artifacts.logs import LogKind
from clawex.artifacts.transcripts import (
    Compaction,
    Message,
    ModelChange,
    SessionHeader,
    SessionStatus,
    ToolCallBlock,
)
from clawex.clawex import ArtifactKind, Plane
from clawex.utils import excerpt, iso_utc

logger = logging.getLogger(__name__)

SUBAGENT_KEY_RE = re.compile(r"^agent:(?P<agent>[^:]+):subagent:(?P<child>[^:]+)$")
MAIN_KEY_RE = re.compile(r"^agent:(?P<agent>[^:]+):main$")
SPAWN_TOOL = "sessions_spawn"


class Source(Enum):
    """Evidence sources, in tie-break order."""

    Transcript = 0
    Log = 1
    CronRuns = 2
    SubagentRegistry = 3
    ConfigMeta = 4
    FileMtime = 5

    @property
    def rank(self):
        return self.value


TIE_BREAK_ORDER = [source.name for source in Source]


@dataclass(frozen=True)
class EvidenceRef:
    """A location inside a captured file: a line number, a JSON path, or both."""

    root: str
    path: str
    line_no: Optional[int] = None
    json_path: Optional[str] = None

    def full_path(self, store_root):
        base = store_root.base_path if self.root == ROOT_STORE else store_root.log_dir
        return os.path.join(base, *self.path.split("/"))

    def sort_key(self):
        return (self.root, self.path, self.line_no or 0, self.json_path or "")

    def to_dict(self):
        return {"root": self.root, "path": self.path, "line_no": self.line_no, "json_path": self.json_path}

    def __str__(self):
        text = self.path if self.root == ROOT_STORE else "{}:{}".format(self.root, self.path)
        if self.line_no is not None:
            text += ":{}".format(self.line_no)
        if self.json_path:
            text += "#{}".format(self.json_path)
        return text


@dataclass(frozen=True)
class TimelineEvent:
    time: Optional[int]
    source: Source
    plane: Plane
    kind: str
    summary: str
    evidence_ref: EvidenceRef
    session: Optional[str] = None
    run_id: Optional[str] = None
    tool_call_id: Optional[str] = None
    seq: int = 0

    def sort_key(self):
        return (self.time, self.source.rank) + self.evidence_ref.sort_key() + (self.seq,)

    def to_dict(self):
        return {
            "time": self.time,
            "time_iso": iso_utc(self.time),
            "source": self.source.name,
            "plane": self.plane.slug,
            "kind": self.kind,
            "summary": self.summary,
            "session": self.session,
            "run_id": self.run_id,
            "tool_call_id": self.tool_call_id,
            "evidence": self.evidence_ref.to_dict(),
        }


@dataclass
class Timeline:
    events: List[TimelineEvent] = field(default_factory=list)
    undated: List[TimelineEvent] = field(default_factory=list)


# --- tool pairing ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToolExecution:
    tool_call_id: str
    tool_name: str
    arguments: object
    session: Optional[str]
    call_entry_id: Optional[str]
    call_line: int
    call_time: Optional[int]
    result_entry_id: Optional[str] = None
    result_line: Optional[int] = None
    result_time: Optional[int] = None
    result_content: Optional[str] = None
    is_error: Optional[bool] = None
    duration_ms: Optional[int] = None
    exit_code: Optional[int] = None
    status: Optional[str] = None
    source: Optional[str] = None

    def to_dict(self):
        return {
            "tool_call_id": self.tool_call_id,
            "tool_name": self.tool_name,
            "arguments": self.arguments,
            "session": self.session,
            "call_entry_id": self.call_entry_id,
            "call_line": self.call_line,
            "call_time": self.call_time,
            "result_entry_id": self.result_entry_id,
            "result_line": self.result_line,
            "result_time": self.result_time,
            "result_content": excerpt(self.result_content, 500) if self.result_content else None,
            "is_error": self.is_error,
            "duration_ms": self.duration_ms,
            "exit_code": self.exit_code,
            "status": self.status,
            "source": self.source,
        }


@dataclass(frozen=True)
class UnpairedCall:
    tool_call_id: str
    tool_name: str
    entry_id: Optional[str]
    line_no: int
    time: Optional[int]
    session: Optional[str] = None
    source: Optional[str] = None

    def to_dict(self):
        return dict(vars(self))


@dataclass(frozen=True)
class UnpairedResult:
    tool_call_id: Optional[str]
    entry_id: Optional[str]
    line_no: int
    time: Optional[int]
    session: Optional[str] = None
    source: Optional[str] = None

    def to_dict(self):
        return dict(vars(self))


@dataclass(frozen=True)
class DuplicateToolCallId:
    tool_call_id: str
    line_nos: Tuple[int, ...]
    source: Optional[str] = None

    def to_dict(self):
        return {"tool_call_id": self.tool_call_id, "line_nos": list(self.line_nos), "source": self.source}


@dataclass
class ToolPairing:
    executions: List[ToolExecution] = field(default_factory=list)
    unpaired_calls: List[UnpairedCall] = field(default_factory=list)
    unpaired_results: List[UnpairedResult] = field(default_factory=list)
    duplicates: List[DuplicateToolCallId] = field(default_factory=list)

    def to_dict(self):
        return {
            "executions": [e.to_dict() for e in self.executions],
            "unpaired_calls": [c.to_dict() for c in self.unpaired_calls],
            "unpaired_results": [r.to_dict() for r in self.unpaired_results],
            "duplicates": [d.to_dict() for d in self.duplicates],
        }


def result_text(message):
    return "".join(getattr(b, "text", "") for b in message.blocks)


def pair_tool_calls(entries, session=None, source=None):
    """
    Matches every ToolCall block to the first later, not yet consumed toolResult with
    the same id. Nothing is dropped: leftovers come back as unpaired calls or results,
    and ids used more than once are flagged.

    executions + unpaired calls == ToolCall blocks, and
    executions + unpaired results == toolResult entries.
    """
    calls = []
    results = []
    for position, entry in enumerate(entries):
        payload = entry.payload
        if not isinstance(payload, Message):
            continue
        if payload.role == "assistant":
            for block in payload.tool_calls:
                calls.append((position, entry, block))
        elif payload.role == "toolResult":
            results.append((position, entry))

    pairing = ToolPairing()
    for kind, items in (("call", [(c[1], c[2].id) for c in calls]), ("result", [(r[1], r[1].payload.tool_call_id) for r in results])):
        lines = {}
        for entry, call_id in items:
            if call_id:
                lines.setdefault(call_id, []).append(entry.line_no)
        for call_id in sorted(lines):
            if len(lines[call_id]) > 1:
                logger.debug("duplicate tool %s id %s in %s", kind, call_id, source)
                pairing.duplicates.append(DuplicateToolCallId(call_id, tuple(lines[call_id]), source))

    consumed = set()
    for position, entry, block in calls:
        match = None
        for index, (result_position, result_entry) in enumerate(results):
            if index in consumed or result_position <= position:
                continue
            if result_entry.payload.tool_call_id == block.id:
                match = index
                break
        if match is None:
            pairing.unpaired_calls.append(
                UnpairedCall(block.id, block.name, entry.id, entry.line_no, entry.time, session, source)
            )
            continue
        consumed.add(match)
        result_entry = results[match][1]
        message = result_entry.payload
        details = message.details
        call_time = entry.time
        result_time = result_entry.time
        pairing.executions.append(
            ToolExecution(
                tool_call_id=block.id,
                tool_name=block.name or message.tool_name or "",
                arguments=block.arguments,
                session=session,
                call_entry_id=entry.id,
                call_line=entry.line_no,
                call_time=call_time,
                result_entry_id=result_entry.id,
                result_line=result_entry.line_no,
                result_time=result_time,
                result_content=result_text(message),
                is_error=message.is_error,
                duration_ms=details.duration_ms if details else None,
                exit_code=details.exit_code if details else None,
                status=details.status if details else None,
                source=source,
            )
        )
    for index, (_, result_entry) in enumerate(results):
        if index not in consumed:
            pairing.unpaired_results.append(
                UnpairedResult(
                    result_entry.payload.tool_call_id,
                    result_entry.id,
                    result_entry.line_no,
                    result_entry.time,
                    session,
                    source,
                )
            )
    return pairing


# --- timeline -------------------------------------------------------------------------------


def _transcript_events(transcript):
    ref_kind = (
        ArtifactKind.DeletedSessionTranscript
        if transcript.status is SessionStatus.SoftDeleted
        else ArtifactKind.SessionTranscript
    )
    for entry in transcript.entries:
        payload = entry.payload
        ref = EvidenceRef(ROOT_STORE, transcript.path, entry.line_no)
        common = {"session": transcript.session_id, "evidence_ref": ref, "source": Source.Transcript}
        if isinstance(payload, SessionHeader):
            yield TimelineEvent(
                entry.time,
                plane=Plane.IdentityConfiguration,
                kind="session.header",
                summary="session {} opened (version {}) in {}".format(
                    payload.session_uuid, payload.version, payload.working_dir
                ),
                **common
            )
        elif isinstance(payload, Message) and payload.role == "user":
            yield TimelineEvent(
                entry.time, plane=Plane.CommunicationIO, kind="message.user", summary=excerpt(payload.text), **common
            )
        elif isinstance(payload, Message) and payload.role == "assistant":
            plane = Plane.ReasoningCognition if payload.thinking else Plane.CommunicationIO
            yield TimelineEvent(
                entry.time,
                plane=plane,
                kind="message.assistant",
                summary=excerpt(payload.text or payload.thinking),
                **common
            )
            for seq, block in enumerate(payload.blocks):
                if isinstance(block, ToolCallBlock):
                    yield TimelineEvent(
                        entry.time,
                        source=Source.Transcript,
                        plane=Plane.ActionsEffects,
                        kind="tool.call",
                        summary="{} {}".format(block.name, excerpt(json.dumps(block.arguments, sort_keys=True), 160)),
                        evidence_ref=EvidenceRef(
                            ROOT_STORE, transcript.path, entry.line_no, "$.message.content[{}]".format(seq)
                        ),
                        session=transcript.session_id,
                        tool_call_id=block.id,
                        seq=seq + 1,
                    )
        elif isinstance(payload, Message):
            yield TimelineEvent(
                entry.time,
                plane=Plane.ActionsEffects,
                kind="tool.result",
                summary="{}{}".format(
                    "error: " if payload.is_error else "", excerpt(result_text(payload), 160)
                ),
                tool_call_id=payload.tool_call_id,
                **common
            )
        elif isinstance(payload, ModelChange):
            yield TimelineEvent(
                entry.time,
                plane=Plane.ReasoningCognition,
                kind="model.change",
                summary="model switched to {}/{}".format(payload.provider, payload.model),
                **common
            )
        elif isinstance(payload, Compaction):
            yield TimelineEvent(
                entry.time, plane=Plane.KnowledgeRecall, kind="context.compaction", summary="context compacted", **common
            )
        else:
            yield TimelineEvent(
                entry.time,
                plane=primary_plane(ref_kind),
                kind="transcript.other",
                summary=excerpt(json.dumps(payload.raw, sort_keys=True, default=str), 160),
                **common
            )


_LOG_PLANES = {
    LogKind.ToolStart: (Plane.ActionsEffects, "log.tool.start"),
    LogKind.ToolEnd: (Plane.ActionsEffects, "log.tool.end"),
    LogKind.RunStage: (Plane.ActionsEffects, "log.run.stage"),
    LogKind.ToolSchemaSnapshot: (Plane.IdentityConfiguration, "log.tool.schema"),
    LogKind.ChannelHealth: (Plane.CommunicationIO, "log.channel"),
    LogKind.Other: (primary_plane(ArtifactKind.RuntimeLog), "log.other"),
}


def _log_events(evidence, run_sessions):
    for log in evidence.log_files:
        for event in log.events:
            plane, kind = _LOG_PLANES[event.message_kind]
            if event.message_kind is LogKind.ToolSchemaSnapshot:
                summary = "tool schema snapshot: {}".format(", ".join(event.tool_names))
            elif event.message_kind in (LogKind.ToolStart, LogKind.ToolEnd):
                summary = "{} {}".format(event.message or kind, event.tool_name or "").strip()
            else:
                summary = excerpt(event.message, 160)
            yield TimelineEvent(
                event.time,
                Source.Log,
                plane,
                kind,
                summary,
                EvidenceRef(ROOT_LOGS, event.source, event.line_no),
                session=run_sessions.get(event.run_id),
                run_id=event.run_id,
                tool_call_id=event.tool_call_id,
            )


def _registry_events(evidence):
    for record in evidence.registry.records:
        for label, value, json_key in (
            ("created", record.created, "createdAt"),
            ("started", record.started if record.started != record.created else None, "startedAt"),
            ("ended", record.ended, "endedAt"),
        ):
            if value is None:
                continue
            yield TimelineEvent(
                value,
                Source.SubagentRegistry,
                Plane.ActionsEffects,
                "subagent.{}".format(label),
                "subagent run {} {} ({})".format(record.run_id, label, excerpt(record.task or "", 120)),
                EvidenceRef(ROOT_STORE, "subagents/runs.json", None, "$.runs.{}.{}".format(record.run_id, json_key)),
                session=record.child_session_id or record.child_session,
            )


def build_timeline(evidence, associations=()):
    """
    Merges every dated event of every source into one list.

    Sorted by time, then source (Transcript, Log, CronRuns, SubagentRegistry,
    ConfigMeta, FileMtime), then file, line and JSON path. Events without a usable time go
    to `Timeline.undated`.
    """
    run_sessions = {a.run_id: a.session_id for a in associations if a.run_id and a.session_id}
    events = []
    for transcript in evidence.transcripts:
        events.extend(_transcript_events(transcript))
    events.extend(_log_events(evidence, run_sessions))
    for run in evidence.cron.runs:
        job = evidence.cron.job(run.job_id)
        schedule = " ({})".format(job.schedule.describe()) if job is not None and job.schedule is not None else ""
        events.append(
            TimelineEvent(
                run.time,
                Source.CronRuns,
                Plane.ActionsEffects,
                "cron.run",
                "cron job {}{} ran: {}".format(run.job_id, schedule, run.outcome),
                EvidenceRef(ROOT_STORE, run.source, run.line_no),
                session=run.session_id,
            )
        )
    events.extend(_registry_events(evidence))
    for snapshot in evidence.config_history.snapshots:
        if snapshot.ordering != "lastTouchedAt":
            continue
        version = snapshot.config.meta.last_touched_version if snapshot.config.meta else None
        events.append(
            TimelineEvent(
                snapshot.ordering_key,
                Source.ConfigMeta,
                Plane.IdentityConfiguration,
                "config.touched",
                "configuration written (version {})".format(version),
                EvidenceRef(ROOT_STORE, snapshot.source_path, None, "$.meta.lastTouchedAt"),
            )
        )
    for descriptor in evidence.inventory.descriptors:
        events.append(
            TimelineEvent(
                descriptor.mtime,
                Source.FileMtime,
                primary_plane(descriptor.kind),
                "file.mtime",
                "{} last modified".format(descriptor.kind.value),
                EvidenceRef(descriptor.root, descriptor.path),
            )
        )
    timeline = Timeline()
    for event in events:
        (timeline.events if event.time is not None else timeline.undated).append(event)
    timeline.events.sort(key=TimelineEvent.sort_key)
    timeline.undated.sort(key=lambda e: (e.source.rank,) + e.evidence_ref.sort_key() + (e.seq,))
    return timeline


# --- run association ------------------------------------------------------------------------


class AssociationBasis(Enum):
    SharedToolCallId = "SharedToolCallId"
    TemporalProximity = "TemporalProximity"


@dataclass(frozen=True)
class Candidate:
    session_id: str
    delta_ms: int
    entry_id: Optional[str] = None


@dataclass(frozen=True)
class RunAssociation:
    subject: str
    run_id: Optional[str]
    session_id: Optional[str]
    basis: Optional[AssociationBasis]
    anchor_time: Optional[int]
    candidates: Tuple[Candidate, ...] = ()
    evidence_ref: Optional[EvidenceRef] = None

    @property
    def assigned(self):
        return self.session_id is not None

    def to_dict(self):
        return {
            "subject": self.subject,
            "run_id": self.run_id,
            "session_id": self.session_id if self.session_id else "Unassigned",
            "basis": self.basis.value if self.basis else None,
            "anchor_time": self.anchor_time,
            "candidates": [vars(c) for c in self.candidates],
            "evidence": self.evidence_ref.to_dict() if self.evidence_ref else None,
        }


def run_starts(sessions):
    """(time, session id, entry id) for every user turn, the transcript's run openers."""
    starts = []
    for session_id in sorted(sessions):
        for entry in sessions[session_id]:
            payload = entry.payload
            if isinstance(payload, Message) and payload.role == "user" and entry.time is not None:
                starts.append((entry.time, session_id, entry.id))
    return starts


def _by_proximity(anchor, starts, window_ms):
    nearest = {}
    for time, session_id, entry_id in starts:
        delta = time - anchor
        if abs(delta) > window_ms:
            continue
        best = nearest.get(session_id)
        if best is None or abs(delta) < abs(best.delta_ms):
            nearest[session_id] = Candidate(session_id, delta, entry_id)
    return sorted(nearest.values(), key=lambda c: (abs(c.delta_ms), c.session_id))


def associate_runs(log_events, sessions, window_ms=5000):
    """
    Assigns log runs (and tool-schema snapshots logged without a runId) to sessions.

    An exact toolCallId match with exactly one session wins outright. Otherwise the run
    goes to the session whose user turn lies within `window_ms` of the run's first log
    event, provided exactly one session qualifies.

    Proximity never breaks ties. When two or more sessions have a user turn inside the
    window the run stays Unassigned, even if one of them is much nearer than the rest;
    the candidates are listed nearest first so the examiner can weigh them. Each session
    counts once, at its nearest user turn.
    """
    call_sessions = {}
    for session_id, entries in sessions.items():
        for entry in entries:
            payload = entry.payload
            if not isinstance(payload, Message):
                continue
            ids = [b.id for b in payload.tool_calls]
            if payload.tool_call_id:
                ids.append(payload.tool_call_id)
            for call_id in ids:
                call_sessions.setdefault(call_id, set()).add(session_id)
    starts = run_starts(sessions)

    runs = {}
    loose = []
    for event in log_events:
        if event.run_id:
            runs.setdefault(event.run_id, []).append(event)
        elif event.message_kind is LogKind.ToolSchemaSnapshot:
            loose.append(event)

    associations = []
    for run_id in sorted(runs):
        events = sorted(runs[run_id], key=lambda e: (e.time, e.source, e.line_no))
        first = events[0]
        ref = EvidenceRef(ROOT_LOGS, first.source, first.line_no)
        shared = set()
        for event in events:
            if event.tool_call_id:
                shared |= call_sessions.get(event.tool_call_id, set())
        if len(shared) == 1:
            associations.append(
                RunAssociation(
                    "run", run_id, next(iter(shared)), AssociationBasis.SharedToolCallId, first.time, (), ref
                )
            )
            continue
        associations.append(_proximity_association("run", run_id, first.time, starts, window_ms, ref))
    for event in sorted(loose, key=lambda e: (e.time, e.source, e.line_no)):
        ref = EvidenceRef(ROOT_LOGS, event.source, event.line_no)
        associations.append(_proximity_association("snapshot", None, event.time, starts, window_ms, ref))
    return associations


def _proximity_association(subject, run_id, anchor, starts, window_ms, ref):
    candidates = _by_proximity(anchor, starts, window_ms)
    if len(candidates) == 1:
        return RunAssociation(
            subject, run_id, candidates[0].session_id, AssociationBasis.TemporalProximity, anchor, tuple(candidates), ref
        )
    return RunAssociation(subject, run_id, None, None, anchor, tuple(candidates), ref)


# --- delegation -----------------------------------------------------------------------------


class DelegationBasis(Enum):
    SpawnCall = "SpawnCall"
    SpawnedBy = "SpawnedBy"
    Registry = "Registry"
    KeyPattern = "KeyPattern"


@dataclass
class DelegationEdge:
    parent: str
    child: str
    bases: List[DelegationBasis] = field(default_factory=list)
    spawn_tool_call_id: Optional[str] = None
    task: Optional[str] = None
    cleanup_observed: bool = False
    conflict: bool = False
    evidence: List[EvidenceRef] = field(default_factory=list)

    def to_dict(self):
        return {
            "parent": self.parent,
            "child": self.child,
            "bases": [b.value for b in self.bases],
            "spawn_tool_call_id": self.spawn_tool_call_id,
            "task": self.task,
            "cleanup_observed": self.cleanup_observed,
            "conflict": self.conflict,
            "evidence": [ref.to_dict() for ref in self.evidence],
        }


@dataclass(frozen=True)
class AgentDrivenEntry:
    session: str
    entry_id: Optional[str]
    line_no: int
    parent: str
    path: Optional[str] = None

    def to_dict(self):
        return dict(vars(self))


@dataclass
class DelegationGraph:
    nodes: List[str] = field(default_factory=list)
    edges: List[DelegationEdge] = field(default_factory=list)
    conflicts: Dict[str, List[str]] = field(default_factory=dict)
    cycles: List[List[str]] = field(default_factory=list)
    agent_driven: List[AgentDrivenEntry] = field(default_factory=list)

    def parents_of(self, child):
        return [edge.parent for edge in self.edges if edge.child == child]

    def to_dict(self):
        return {
            "nodes": list(self.nodes),
            "edges": [e.to_dict() for e in self.edges],
            "conflicts": {k: list(v) for k, v in sorted(self.conflicts.items())},
            "cycles": [list(c) for c in self.cycles],
            "agent_driven": [a.to_dict() for a in self.agent_driven],
        }


def _spawn_child(execution):
    """(child key, child session id) named by a sessions_spawn call or its result."""
    found = {}
    sources = []
    if isinstance(execution.arguments, dict):
        sources.append(execution.arguments)
    if execution.result_content:
        try:
            parsed = json.loads(execution.result_content)
            if isinstance(parsed, dict):
                sources.append(parsed)
        except ValueError:
            pass
    for source in sources:
        for name, keys in (("key", ("childSessionKey", "sessionKey")), ("id", ("childSessionId", "sessionId"))):
            for key in keys:
                if source.get(key) and name not in found:
                    found[name] = str(source[key])
    return found.get("key"), found.get("id")


def _find_cycles(nodes, edges):
    children = {}
    for edge in edges:
        children.setdefault(edge.parent, set()).add(edge.child)
    cycles = []
    seen_cycles = set()
    state = {}

    def visit(node, stack):
        state[node] = 1
        stack.append(node)
        for child in sorted(children.get(node, ())):
            if state.get(child) == 1:
                cycle = stack[stack.index(child):]
                pivot = cycle.index(min(cycle))
                normal = tuple(cycle[pivot:] + cycle[:pivot])
                if normal not in seen_cycles:
                    seen_cycles.add(normal)
                    cycles.append(list(normal))
            elif state.get(child) is None:
                visit(child, stack)
        stack.pop()
        state[node] = 2

    for node in sorted(nodes):
        if state.get(node) is None:
            visit(node, [])
    return cycles


def link_subagents(index_entries, session_records, transcripts, registry, executions=()):
    """
    Builds the delegation graph from four independent kinds of evidence: sessions_spawn
    calls, `spawnedBy` in the index, registry records and, only when nothing else names
    a parent, the `agent:<id>:subagent:<uuid>` key pattern.

    Nodes are session ids where they can be resolved, session keys otherwise. A child
    whose transcript survives without an index entry is marked cleanup_observed. Two
    different parents for one child are both kept and flagged; cycles are reported.
    User-role entries inside child transcripts are listed as agent-driven.

    `index_entries` yields (agent_id, key, SessionMeta); `transcripts` is a list of
    store Transcript values; `executions` are paired ToolExecutions of all transcripts.
    """
    index_entries = list(index_entries)
    key_to_id = {key: meta.session_id for _, key, meta in index_entries if meta.session_id}
    for record in registry.records:
        if record.child_session and record.child_session_id:
            key_to_id.setdefault(record.child_session, record.child_session_id)
    for execution in executions:
        if execution.tool_name == SPAWN_TOOL:
            child_key, child_id = _spawn_child(execution)
            if child_key and child_id:
                key_to_id.setdefault(child_key, child_id)

    def node(key=None, session_id=None):
        if session_id:
            return session_id
        return key_to_id.get(key, key)

    status = {}
    for record in session_records:
        if record.status is SessionStatus.SoftDeleted and record.session_id in status:
            continue
        status[record.session_id] = record.status

    nodes = set(key_to_id.get(key, key) for _, key, _ in index_entries)
    nodes.update(record.session_id for record in session_records)
    edges = {}

    def add(parent, child, basis, ref, call_id=None, task=None):
        if not parent or not child or parent == child and basis is not DelegationBasis.SpawnCall:
            return
        edge = edges.get((parent, child))
        if edge is None:
            edge = edges[(parent, child)] = DelegationEdge(parent, child)
        if basis not in edge.bases:
            edge.bases.append(basis)
        if call_id and not edge.spawn_tool_call_id:
            edge.spawn_tool_call_id = call_id
        if task and not edge.task:
            edge.task = task
        if ref is not None and ref not in edge.evidence:
            edge.evidence.append(ref)
        nodes.update((parent, child))

    for execution in executions:
        if execution.tool_name != SPAWN_TOOL or not execution.session:
            continue
        child_key, child_id = _spawn_child(execution)
        child = node(child_key, child_id)
        task = execution.arguments.get("task") if isinstance(execution.arguments, dict) else None
        ref = EvidenceRef(ROOT_STORE, execution.source, execution.call_line) if execution.source else None
        add(execution.session, child, DelegationBasis.SpawnCall, ref, execution.tool_call_id, task)

    for agent_id, key, meta in index_entries:
        if meta.spawned_by:
            ref = EvidenceRef(
                ROOT_STORE, "agents/{}/sessions/sessions.json".format(agent_id), None, '$["{}"].spawnedBy'.format(key)
            )
            add(node(meta.spawned_by), node(key, meta.session_id), DelegationBasis.SpawnedBy, ref)

    for record in registry.records:
        child = node(record.child_session, record.child_session_id)
        ref = EvidenceRef(ROOT_STORE, "subagents/runs.json", None, "$.runs.{}".format(record.run_id))
        add(node(record.requester_session), child, DelegationBasis.Registry, ref, task=record.task)

    has_parent = {child for (_, child) in edges}
    for agent_id, key, meta in index_entries:
        match = SUBAGENT_KEY_RE.match(key)
        child = node(key, meta.session_id)
        if match and child not in has_parent:
            parent = node("agent:{}:main".format(match.group("agent")))
            ref = EvidenceRef(ROOT_STORE, "agents/{}/sessions/sessions.json".format(agent_id), None, '$["{}"]'.format(key))
            add(parent, child, DelegationBasis.KeyPattern, ref)

    graph = DelegationGraph()
    for (parent, child) in sorted(edges):
        edge = edges[(parent, child)]
        edge.cleanup_observed = status.get(child) is SessionStatus.Orphaned
        graph.edges.append(edge)
    parents = {}
    for edge in graph.edges:
        parents.setdefault(edge.child, []).append(edge.parent)
    for child, names in sorted(parents.items()):
        if len(names) > 1:
            graph.conflicts[child] = sorted(names)
            for edge in graph.edges:
                if edge.child == child:
                    edge.conflict = True
    graph.nodes = sorted(n for n in nodes if n)
    graph.cycles = _find_cycles(graph.nodes, graph.edges)

    by_session = {}
    for transcript in transcripts:
        if transcript.session_id not in by_session or transcript.status is not SessionStatus.SoftDeleted:
            by_session[transcript.session_id] = transcript
    for child, names in sorted(parents.items()):
        transcript = by_session.get(child)
        if transcript is None:
            continue
        for entry in transcript.entries:
            if isinstance(entry.payload, Message) and entry.payload.role == "user":
                graph.agent_driven.append(
                    AgentDrivenEntry(child, entry.id, entry.line_no, names[0], transcript.path)
                )
    return graph


# --- cron attribution -----------------------------------------------------------------------


class CronVenue(Enum):
    MainSession = "MainSession"
    IsolatedSession = "IsolatedSession"
    Unlocated = "Unlocated"


@dataclass(frozen=True)
class CronAttribution:
    run: object
    venue: CronVenue
    linked_session: Optional[str] = None
    linked_entry_id: Optional[str] = None
    session_key: Optional[str] = None
    basis: str = ""

    def to_dict(self):
        return {
            "job_id": self.run.job_id,
            "time": self.run.time,
            "outcome": self.run.outcome,
            "run_ref": "{}:{}".format(self.run.source, self.run.line_no),
            "venue": self.venue.value,
            "linked_session": self.linked_session,
            "linked_entry_id": self.linked_entry_id,
            "session_key": self.session_key,
            "basis": self.basis,
        }


def _isolated_keys(job_id, index_entries):
    exact = "cron:{}".format(job_id)
    contained = ":cron:{}".format(job_id)
    keys = []
    for _, key, meta in index_entries:
        if key == exact or key.endswith(contained) or contained + ":" in key or key.startswith(exact + ":"):
            keys.append((key, meta))
    return keys


def attribute_cron_runs(cron_state, sessions, index_entries, window_ms=5000):
    """
    Locates where each cron run executed.

    IsolatedSession when an index key names `cron:<jobId>` (nearest such session by
    first activity); MainSession when a main-session entry names the jobId within
    `window_ms` of the run; Unlocated otherwise.

    `sessions` maps session id to transcript entries.
    """
    index_entries = list(index_entries)
    main_sessions = [
        meta.session_id for _, key, meta in index_entries if MAIN_KEY_RE.match(key) and meta.session_id
    ]
    attributions = []
    for run in sorted(cron_state.runs, key=lambda r: (r.time, r.source, r.line_no)):
        isolated = _isolated_keys(run.job_id, index_entries)
        if run.session_key and not any(key == run.session_key for key, _ in isolated):
            for _, key, meta in index_entries:
                if key == run.session_key and ":cron:" in key:
                    isolated.append((key, meta))
        if isolated:
            best = None
            for key, meta in isolated:
                entries = sessions.get(meta.session_id) or []
                times = [e.time for e in entries if e.time is not None]
                distance = min((abs(t - run.time) for t in times), default=None)
                rank = (distance is None, distance or 0, key)
                if best is None or rank < best[0]:
                    best = (rank, key, meta)
            _, key, meta = best
            attributions.append(
                CronAttribution(run, CronVenue.IsolatedSession, meta.session_id, None, key, "session key {}".format(key))
            )
            continue
        found = None
        for session_id in main_sessions:
            for entry in sessions.get(session_id) or []:
                payload = entry.payload
                if not isinstance(payload, Message) or entry.time is None:
                    continue
                if abs(entry.time - run.time) > window_ms or run.job_id not in payload.text:
                    continue
                rank = (abs(entry.time - run.time), session_id, entry.line_no)
                if found is None or rank < found[0]:
                    found = (rank, session_id, entry.id)
        if found is not None:
            attributions.append(
                CronAttribution(
                    run,
                    CronVenue.MainSession,
                    found[1],
                    found[2],
                    None,
                    "main-session entry names job {} {} ms from the run".format(run.job_id, found[0][0]),
                )
            )
            continue
        attributions.append(CronAttribution(run, CronVenue.Unlocated, basis="no session evidence"))
    return attributions


# --- everything at once ---------------------------------------------------------------------


@dataclass
class Correlation:
    pairings: Dict[str, ToolPairing] = field(default_factory=dict)
    timeline: Timeline = field(default_factory=Timeline)
    associations: List[RunAssociation] = field(default_factory=list)
    delegation: DelegationGraph = field(default_factory=DelegationGraph)
    cron_attributions: List[CronAttribution] = field(default_factory=list)

    @property
    def executions(self):
        return [e for path in sorted(self.pairings) for e in self.pairings[path].executions]

    def execution(self, tool_call_id):
        for execution in self.executions:
            if execution.tool_call_id == tool_call_id:
                return execution
        return None


def correlate_evidence(evidence):
    """Runs every correlation over a loaded Evidence value."""
    correlation = Correlation()
    for transcript in evidence.transcripts:
        correlation.pairings[transcript.path] = pair_tool_calls(
            transcript.entries, transcript.session_id, transcript.path
        )
    sessions = evidence.sessions()
    window = evidence.settings.window_ms
    correlation.associations = associate_runs(evidence.log_events, sessions, window)
    correlation.delegation = link_subagents(
        evidence.index_entries(),
        evidence.session_records,
        evidence.transcripts,
        evidence.registry,
        correlation.executions,
    )
    correlation.cron_attributions = attribute_cron_runs(
        evidence.cron, sessions, evidence.index_entries(), window
    )
    correlation.timeline = build_timeline(evidence, correlation.associations)
    return correlation
