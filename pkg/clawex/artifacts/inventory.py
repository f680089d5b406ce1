# -*- coding: utf-8 -*-
"""
Store discovery: locates every artifact of a captured store and maps it onto the
five evidence planes.
"""
import logging
import os
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import yaml

from clawex.clawex import ArtifactKind, ParseWarning, Plane, RelevanceLevel, StoreRoot
from clawex.utils import match_glob

logger = logging.getLogger(__name__)

P = RelevanceLevel.Primary
S = RelevanceLevel.Secondary

# Relevance per kind; unlisted planes are NotRelevant.
PLANE_TABLE = {
    ArtifactKind.Config: {
        Plane.IdentityConfiguration: P,
        Plane.CommunicationIO: P,
        Plane.ReasoningCognition: S,
    },
    ArtifactKind.ConfigBackup: {
        Plane.IdentityConfiguration: P,
        Plane.CommunicationIO: S,
        Plane.ReasoningCognition: S,
    },
    ArtifactKind.ChannelCredentials: {Plane.IdentityConfiguration: S, Plane.CommunicationIO: P},
    ArtifactKind.AuthProfiles: {Plane.IdentityConfiguration: P},
    ArtifactKind.DeviceIdentity: {Plane.CommunicationIO: P},
    ArtifactKind.WorkspaceIdentityFile: {
        Plane.IdentityConfiguration: P,
        Plane.KnowledgeRecall: P,
    },
    ArtifactKind.SkillDefinition: {Plane.IdentityConfiguration: P, Plane.KnowledgeRecall: S},
    ArtifactKind.DailyMemoryLog: {Plane.KnowledgeRecall: P, Plane.CommunicationIO: S},
    ArtifactKind.SemanticMemoryDb: {Plane.KnowledgeRecall: P},
    ArtifactKind.SessionIndex: {
        Plane.IdentityConfiguration: P,
        Plane.KnowledgeRecall: S,
        Plane.CommunicationIO: P,
        Plane.ActionsEffects: S,
        Plane.ReasoningCognition: S,
    },
    ArtifactKind.SessionTranscript: {
        Plane.IdentityConfiguration: S,
        Plane.KnowledgeRecall: P,
        Plane.CommunicationIO: P,
        Plane.ActionsEffects: P,
        Plane.ReasoningCognition: P,
    },
    ArtifactKind.DeletedSessionTranscript: {
        Plane.IdentityConfiguration: S,
        Plane.KnowledgeRecall: P,
        Plane.CommunicationIO: P,
        Plane.ActionsEffects: P,
        Plane.ReasoningCognition: P,
    },
    ArtifactKind.InboundMedia: {Plane.KnowledgeRecall: S, Plane.CommunicationIO: P},
    ArtifactKind.CronJobs: {Plane.IdentityConfiguration: P, Plane.ActionsEffects: P},
    ArtifactKind.CronRunLog: {Plane.ActionsEffects: P},
    ArtifactKind.SubagentRegistry: {Plane.ActionsEffects: P},
    ArtifactKind.RuntimeLog: {
        Plane.IdentityConfiguration: S,
        Plane.CommunicationIO: S,
        Plane.ActionsEffects: P,
    },
}

ROOT_STORE = "store"
ROOT_LOGS = "logs"

# (kind, root, pattern). `{name}` is one captured segment, `**` any number of segments.
PATH_PATTERNS = (
    (ArtifactKind.Config, ROOT_STORE, "openclaw.json"),
    (ArtifactKind.ConfigBackup, ROOT_STORE, "openclaw.json.bak*"),
    (ArtifactKind.ChannelCredentials, ROOT_STORE, "credentials/**"),
    (ArtifactKind.AuthProfiles, ROOT_STORE, "agents/{agent_id}/agent/auth-profiles.json"),
    (ArtifactKind.DeviceIdentity, ROOT_STORE, "devices/**"),
    (ArtifactKind.DeviceIdentity, ROOT_STORE, "identity/**"),
    (ArtifactKind.WorkspaceIdentityFile, ROOT_STORE, "workspace/*.md"),
    (ArtifactKind.SkillDefinition, ROOT_STORE, "workspace/skills/**"),
    (ArtifactKind.SkillDefinition, ROOT_STORE, "skills/**"),
    (ArtifactKind.DailyMemoryLog, ROOT_STORE, "workspace/memory/*"),
    (ArtifactKind.SemanticMemoryDb, ROOT_STORE, "memory/*.sqlite"),
    (ArtifactKind.SessionIndex, ROOT_STORE, "agents/{agent_id}/sessions/sessions.json"),
    (ArtifactKind.SessionTranscript, ROOT_STORE, "agents/{agent_id}/sessions/*.jsonl"),
    (
        ArtifactKind.DeletedSessionTranscript,
        ROOT_STORE,
        "agents/{agent_id}/sessions/*.jsonl.deleted.*",
    ),
    (ArtifactKind.InboundMedia, ROOT_STORE, "media/inbound/*"),
    (ArtifactKind.CronJobs, ROOT_STORE, "cron/jobs.json"),
    (ArtifactKind.CronRunLog, ROOT_STORE, "cron/runs/*.jsonl"),
    (ArtifactKind.SubagentRegistry, ROOT_STORE, "subagents/runs.json"),
    (ArtifactKind.RuntimeLog, ROOT_LOGS, "*.log"),
)

SQLITE_MAGIC = b"SQLite format 3\x00"


@dataclass(frozen=True)
class ArtifactDescriptor:
    """One located artifact."""

    kind: ArtifactKind
    path: str
    plane_relevance: Dict[Plane, RelevanceLevel]
    size_bytes: int
    mtime: int
    root: str = ROOT_STORE
    captures: Dict[str, str] = field(default_factory=dict)
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def primary_plane(self):
        return primary_plane(self.kind)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "root": self.root,
            "path": self.path,
            "size_bytes": self.size_bytes,
            "mtime": self.mtime,
            "planes": {
                plane.slug: level.name for plane, level in self.plane_relevance.items()
            },
            "captures": dict(sorted(self.captures.items())),
            "metadata": dict(sorted(self.metadata.items())),
        }


@dataclass(frozen=True)
class UnclassifiedFile:
    path: str
    size_bytes: int
    mtime: int
    root: str = ROOT_STORE

    def to_dict(self):
        return {"root": self.root, "path": self.path, "size_bytes": self.size_bytes, "mtime": self.mtime}


@dataclass
class Inventory:
    descriptors: List[ArtifactDescriptor] = field(default_factory=list)
    unclassified: List[UnclassifiedFile] = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)

    def of_kind(self, *kinds):
        return [d for d in self.descriptors if d.kind in kinds]

    def find(self, path, root=ROOT_STORE):
        for descriptor in self.descriptors:
            if descriptor.path == path and descriptor.root == root:
                return descriptor
        return None

    @property
    def max_mtime(self):
        times = [d.mtime for d in self.descriptors] + [u.mtime for u in self.unclassified]
        return max(times) if times else None

    def to_dict(self):
        return {
            "descriptors": [d.to_dict() for d in self.descriptors],
            "unclassified": [u.to_dict() for u in self.unclassified],
            "warnings": [w.to_dict() for w in self.warnings],
        }


def classify_plane(descriptor_or_kind):
    """
    Returns the relevance of an artifact for each of the five planes.

    A pure function of the artifact kind; accepts a descriptor or the kind itself.

        >>> classify_plane(ArtifactKind.CronRunLog)[Plane.ActionsEffects]
        <RelevanceLevel.Primary: 2>
    """
    kind = getattr(descriptor_or_kind, "kind", descriptor_or_kind)
    listed = PLANE_TABLE[kind]
    return {plane: listed.get(plane, RelevanceLevel.NotRelevant) for plane in Plane}


def primary_plane(kind):
    """The first plane (in enumeration order) carrying the kind's highest relevance."""
    mapping = classify_plane(kind)
    best = max(mapping.values())
    for plane in Plane:
        if mapping[plane] == best:
            return plane


def match_artifact(relpath, root=ROOT_STORE):
    """
    Returns (kind, captures) for `relpath`, or (None, None) when no pattern claims it.
    """
    for kind, pattern_root, pattern in PATH_PATTERNS:
        if pattern_root != root:
            continue
        captures = match_glob(pattern, relpath)
        if captures is not None:
            return kind, captures
    return None, None


def read_sqlite_header(path):
    """
    Reads page size and page count from a SQLite file's 100-byte header.
    The database itself is never opened.
    """
    with open(path, "rb") as handle:
        header = handle.read(100)
    if len(header) < 100 or not header.startswith(SQLITE_MAGIC):
        return {"sqlite_header": "absent"}
    (page_size,) = struct.unpack(">H", header[16:18])
    (page_count,) = struct.unpack(">I", header[28:32])
    if page_size == 1:
        page_size = 65536
    return {"sqlite_header": "ok", "page_size": page_size, "page_count": page_count}


def _walk(base, root_label, warnings):
    def _onerror(exc):
        rel = os.path.relpath(getattr(exc, "filename", base) or base, base)
        warnings.append(ParseWarning(_display(root_label, rel), "unreadable directory: {}".format(exc)))

    for dirpath, dirnames, filenames in os.walk(base, onerror=_onerror, followlinks=False):
        dirnames.sort()
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            rel = os.path.relpath(full, base).replace(os.sep, "/")
            yield full, rel


def _display(root_label, rel):
    return rel if root_label == ROOT_STORE else "{}:{}".format(root_label, rel)


def discover_store(root: StoreRoot) -> Inventory:
    """
    Walks the store (and the log directory, when captured) and classifies every file.

    Files no pattern claims go to `Inventory.unclassified`. Files that cannot be
    stat'ed become warnings; discovery never aborts on a single file.
    """
    inventory = Inventory()
    bases = [(ROOT_STORE, root.base_path)]
    if root.log_dir:
        bases.append((ROOT_LOGS, root.log_dir))
    for root_label, base in bases:
        for full, rel in _walk(base, root_label, inventory.warnings):
            try:
                stat = os.lstat(full)
            except OSError as exc:
                inventory.warnings.append(ParseWarning(_display(root_label, rel), str(exc)))
                continue
            mtime = stat.st_mtime_ns // 1000000
            kind, captures = match_artifact(rel, root_label)
            if kind is None:
                inventory.unclassified.append(UnclassifiedFile(rel, stat.st_size, mtime, root_label))
                continue
            metadata = {}
            if kind is ArtifactKind.SemanticMemoryDb:
                captures = dict(captures, agent_id=rel.rsplit("/", 1)[-1][: -len(".sqlite")])
                try:
                    metadata = read_sqlite_header(full)
                except OSError as exc:
                    inventory.warnings.append(ParseWarning(rel, "unreadable: {}".format(exc)))
            elif kind is ArtifactKind.CronRunLog:
                captures = dict(captures, job_id=rel.rsplit("/", 1)[-1][: -len(".jsonl")])
            inventory.descriptors.append(
                ArtifactDescriptor(
                    kind=kind,
                    path=rel,
                    plane_relevance=classify_plane(kind),
                    size_bytes=stat.st_size,
                    mtime=mtime,
                    root=root_label,
                    captures=captures,
                    metadata=metadata,
                )
            )
    inventory.descriptors.sort(key=lambda d: (d.root != ROOT_STORE, d.path))
    inventory.unclassified.sort(key=lambda u: (u.root != ROOT_STORE, u.path))
    logger.info(
        "discovered %d artifacts, %d unclassified, %d warnings",
        len(inventory.descriptors),
        len(inventory.unclassified),
        len(inventory.warnings),
    )
    return inventory


_KIND_DOCS = {
    ArtifactKind.Config: "Live gateway configuration (agents, channels, meta).",
    ArtifactKind.ConfigBackup: "Prior configurations kept on configuration writes.",
    ArtifactKind.ChannelCredentials: "Channel pairing and allow-list credential material.",
    ArtifactKind.AuthProfiles: "Model-provider authentication profiles per agent.",
    ArtifactKind.DeviceIdentity: "Paired device and gateway identity material.",
    ArtifactKind.WorkspaceIdentityFile: "Persona and operating-rule files injected into prompts.",
    ArtifactKind.SkillDefinition: "Skill definitions (SKILL.md) and their resources.",
    ArtifactKind.DailyMemoryLog: "Append-only daily memory notes.",
    ArtifactKind.SemanticMemoryDb: "Semantic memory index (SQLite).",
    ArtifactKind.SessionIndex: "Session key to session id map with per-session metadata.",
    ArtifactKind.SessionTranscript: "Append-only session transcript (JSONL).",
    ArtifactKind.DeletedSessionTranscript: "Soft-deleted session transcript.",
    ArtifactKind.InboundMedia: "Media received over messaging channels.",
    ArtifactKind.CronJobs: "Scheduled job definitions and runtime state.",
    ArtifactKind.CronRunLog: "Per-job execution history (JSONL).",
    ArtifactKind.SubagentRegistry: "Registry of spawned subagent runs.",
    ArtifactKind.RuntimeLog: "Daily gateway runtime log (JSONL).",
}


def export_artifact_definitions():
    """
    Renders the store layout as artifact definitions in YAML, one document per kind.

    Store paths are given relative to `%%openclaw_home%%`, runtime logs relative to
    `%%openclaw_logs%%`.
    """
    documents = []
    for kind in ArtifactKind:
        paths = []
        for pattern_kind, root, pattern in PATH_PATTERNS:
            if pattern_kind is not kind:
                continue
            prefix = "%%openclaw_home%%" if root == ROOT_STORE else "%%openclaw_logs%%"
            pattern = pattern.replace("{agent_id}", "*")
            paths.append("{}/{}".format(prefix, pattern))
        relevance = classify_plane(kind)
        documents.append(
            {
                "name": "OpenClaw{}".format(kind.value),
                "doc": _KIND_DOCS[kind],
                "sources": [{"type": "FILE", "attributes": {"paths": paths}}],
                "labels": [plane.slug for plane in Plane if relevance[plane] is RelevanceLevel.Primary],
                "supported_os": ["Darwin", "Linux", "Windows"],
            }
        )
    return yaml.safe_dump_all(documents, sort_keys=False, default_flow_style=False)
