# -*- coding: utf-8 -*-
"""
Loads a captured store into one Evidence value every analysis works from.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from clawex.artifacts.config import AgentConfig, ConfigHistory, build_config_history, parse_config
from clawex.artifacts.cron import CronState, parse_cron
from clawex.artifacts.inventory import ROOT_LOGS, ROOT_STORE, Inventory, discover_store
from clawex.artifacts.logs import LogFileInfo, log_file_date, log_retention_gaps, parse_log_file
from clawex.artifacts.subagents import SubagentRegistry, parse_subagent_registry
from clawex.artifacts.transcripts import (
    SessionIndex,
    SessionStatus,
    has_truncated_tail,
    header_is_valid,
    parse_session_index,
    parse_transcript,
    resolve_sessions,
)
from clawex.artifacts.workspace import inventory_credentials, inventory_workspace
from clawex.clawex import ArtifactKind, ParseWarning, StoreRoot
from clawex.decorators import salvage_file
from clawex.settings import ExaminerSettings

logger = logging.getLogger(__name__)


@dataclass
class Transcript:
    """One parsed transcript file together with what is known about it on disk."""

    path: str
    agent_id: str
    session_id: str
    status: SessionStatus
    entries: list
    warnings: List[ParseWarning] = field(default_factory=list)
    session_key: Optional[str] = None
    deleted_at: Optional[int] = None
    truncated_tail: bool = False
    mtime: Optional[int] = None

    @property
    def header_ok(self):
        return header_is_valid(self.entries)

    @property
    def times(self):
        return [e.time for e in self.entries if e.time is not None]

    @property
    def newest_time(self):
        times = self.times
        return max(times) if times else None

    @property
    def first_time(self):
        times = self.times
        return min(times) if times else None


@dataclass
class LogFile:
    info: LogFileInfo
    events: list = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)


@dataclass
class Evidence:
    root: StoreRoot
    settings: ExaminerSettings
    inventory: Inventory
    capture_time: int
    config: Optional[AgentConfig] = None
    config_history: ConfigHistory = field(default_factory=ConfigHistory)
    indexes: Dict[str, SessionIndex] = field(default_factory=dict)
    session_records: list = field(default_factory=list)
    transcripts: List[Transcript] = field(default_factory=list)
    log_files: List[LogFile] = field(default_factory=list)
    cron: CronState = field(default_factory=CronState)
    cron_run_mtimes: Dict[str, int] = field(default_factory=dict)
    registry: SubagentRegistry = field(default_factory=SubagentRegistry)
    workspaces: dict = field(default_factory=dict)
    credentials: list = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)

    @property
    def log_events(self):
        return [event for log in self.log_files for event in log.events]

    def index_entries(self):
        """(agent_id, session key, SessionMeta) for every index entry, sorted."""
        for agent_id in sorted(self.indexes):
            index = self.indexes[agent_id]
            for key in sorted(index.entries):
                yield agent_id, key, index.entries[key]

    def meta_for_session(self, session_id):
        for _, _, meta in self.index_entries():
            if meta.session_id == session_id:
                return meta
        return None

    def sessions(self):
        """
        session id -> entries. A live transcript wins over a soft-deleted one of the
        same id.
        """
        out = {}
        rank = {}
        for transcript in self.transcripts:
            weight = 0 if transcript.status is SessionStatus.SoftDeleted else 1
            if transcript.session_id not in out or weight > rank[transcript.session_id]:
                out[transcript.session_id] = transcript.entries
                rank[transcript.session_id] = weight
        return out

    def transcript_for(self, session_id):
        best = None
        for transcript in self.transcripts:
            if transcript.session_id != session_id:
                continue
            if best is None or best.status is SessionStatus.SoftDeleted:
                best = transcript
        return best

    def activity_times(self):
        times = [t for transcript in self.transcripts for t in transcript.times]
        times.extend(run.time for run in self.cron.runs)
        return times

    def retention(self):
        if self.root.log_dir is None:
            return None
        return log_retention_gaps(
            [log.info for log in self.log_files], self.capture_time, self.activity_times()
        )


class ArtifactStore(object):
    """
    Reads a captured store. Never writes to it.

    Per-file problems are collected on `self.warnings`; only an unreadable store root
    aborts loading.
    """

    SESSION_INDEX = "sessions.json"
    CRON_JOBS = "cron/jobs.json"
    REGISTRY = "subagents/runs.json"

    def __init__(self, root, settings=None):
        if not isinstance(root, StoreRoot):
            root = StoreRoot.resolve(root)
        self.root = root
        self.settings = settings or ExaminerSettings()
        self.warnings = []

    def full_path(self, path, root=ROOT_STORE):
        base = self.root.base_path if root == ROOT_STORE else self.root.log_dir
        return os.path.join(base, *path.split("/"))

    @salvage_file()
    def read_bytes(self, path, root=ROOT_STORE):
        with open(self.full_path(path, root), "rb") as handle:
            return handle.read()

    def _read_if_present(self, path):
        if not os.path.isfile(self.full_path(path)):
            return None
        return self.read_bytes(path)

    @salvage_file(fallback=SessionIndex)
    def load_index(self, path):
        with open(self.full_path(path), "rb") as handle:
            content = handle.read()
        index = parse_session_index(content, self.settings.index_aliases, source=path)
        self.warnings.extend(index.warnings)
        return index

    @salvage_file()
    def load_transcript(self, path, record, mtime=None):
        with open(self.full_path(path), "rb") as handle:
            content = handle.read()
        entries, warnings = parse_transcript(content, path, self.settings.transcript_aliases)
        return Transcript(
            path=path,
            agent_id=record.agent_id,
            session_id=record.session_id,
            status=record.status,
            entries=entries,
            warnings=warnings,
            session_key=record.session_key,
            deleted_at=record.deleted_at,
            truncated_tail=has_truncated_tail(content),
            mtime=mtime,
        )

    @salvage_file()
    def load_log(self, path, mtime=None):
        with open(self.full_path(path, ROOT_LOGS), "rb") as handle:
            content = handle.read()
        events, warnings = parse_log_file(
            content,
            path,
            schema_markers=self.settings.schema_markers,
            stage_markers=self.settings.stage_markers,
            aliases=self.settings.log_aliases,
        )
        return LogFile(LogFileInfo(path, log_file_date(path), mtime), events, warnings)

    def load_config_history(self, inventory):
        sources = []
        for descriptor in inventory.of_kind(ArtifactKind.Config, ArtifactKind.ConfigBackup):
            content = self.read_bytes(descriptor.path)
            if content is not None:
                sources.append((descriptor.path, content, descriptor.mtime))
        history = build_config_history(sources)
        self.warnings.extend(history.warnings)
        return history

    def load(self):
        """Discovers and parses everything; returns an Evidence value."""
        inventory = discover_store(self.root)
        self.warnings.extend(inventory.warnings)
        capture_time = self.settings.capture_time
        if capture_time is None:
            capture_time = inventory.max_mtime or 0
        evidence = Evidence(self.root, self.settings, inventory, capture_time)

        evidence.config_history = self.load_config_history(inventory)
        live = [s for s in evidence.config_history.snapshots if s.source_path == "openclaw.json"]
        evidence.config = live[0].config if live else None

        agents = sorted(
            {
                d.captures["agent_id"]
                for d in inventory.of_kind(
                    ArtifactKind.SessionIndex,
                    ArtifactKind.SessionTranscript,
                    ArtifactKind.DeletedSessionTranscript,
                )
            }
        )
        for agent_id in agents:
            index_path = "agents/{}/sessions/{}".format(agent_id, self.SESSION_INDEX)
            if inventory.find(index_path) is not None:
                evidence.indexes[agent_id] = self.load_index(index_path)
            else:
                evidence.indexes[agent_id] = SessionIndex()
            listing = {
                d.path.rsplit("/", 1)[-1]: d
                for d in inventory.of_kind(
                    ArtifactKind.SessionTranscript, ArtifactKind.DeletedSessionTranscript
                )
                if d.captures.get("agent_id") == agent_id
            }
            records = resolve_sessions(evidence.indexes[agent_id], listing, agent_id=agent_id)
            evidence.session_records.extend(records)
            for record in records:
                if record.filename is None:
                    continue
                transcript = self.load_transcript(record.path, record, listing[record.filename].mtime)
                if transcript is not None:
                    evidence.transcripts.append(transcript)
                    self.warnings.extend(transcript.warnings)

        for descriptor in inventory.of_kind(ArtifactKind.RuntimeLog):
            log = self.load_log(descriptor.path, descriptor.mtime)
            if log is not None:
                evidence.log_files.append(log)
                self.warnings.extend(log.warnings)

        runs = []
        for descriptor in inventory.of_kind(ArtifactKind.CronRunLog):
            content = self.read_bytes(descriptor.path)
            if content is not None:
                runs.append((descriptor.path, content))
                evidence.cron_run_mtimes[descriptor.path] = descriptor.mtime
        jobs = self.read_bytes(self.CRON_JOBS) if inventory.find(self.CRON_JOBS) else None
        evidence.cron = parse_cron(jobs, runs)
        self.warnings.extend(evidence.cron.warnings)

        registry_content = self._read_if_present(self.REGISTRY)
        evidence.registry = parse_subagent_registry(registry_content, self.REGISTRY)
        self.warnings.extend(evidence.registry.warnings)

        agent_ids = [a.id for a in evidence.config.agents] if evidence.config else []
        for agent_id in agent_ids or ["main"]:
            workspace = inventory_workspace(self.root.base_path, evidence.config, agent_id)
            evidence.workspaces[agent_id] = workspace
            self.warnings.extend(workspace.warnings)

        evidence.credentials, credential_warnings = inventory_credentials(
            self.root.base_path, inventory, evidence.config, reveal=self.settings.reveal
        )
        self.warnings.extend(credential_warnings)
        evidence.warnings = list(self.warnings)
        logger.info(
            "loaded %d transcripts, %d log files, %d cron runs from %s",
            len(evidence.transcripts),
            len(evidence.log_files),
            len(evidence.cron.runs),
            self.root.base_path,
        )
        return evidence


def load_evidence(path, log_dir=None, settings=None):
    """Shortcut: resolve a store path and load it."""
    return ArtifactStore(StoreRoot.resolve(path, log_dir), settings).load()
