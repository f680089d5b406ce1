# -*- coding: utf-8 -*-
"""
Agent workspace files (identity slots, daily memory, skills) and the credential
inventory.
"""
import datetime
import json
import logging
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.clawex import STORE_DIRNAME, ArtifactKind, ParseWarning
from clawex.utils import redact

logger = logging.getLogger(__name__)

IDENTITY_FILES = (
    "AGENTS.md",
    "BOOTSTRAP.md",
    "IDENTITY.md",
    "SOUL.md",
    "TOOLS.md",
    "HEARTBEAT.md",
    "MEMORY.md",
    "USER.md",
)
DAILY_MEMORY_RE = re.compile(r"^(\d{4}-\d{2}-\d{2})\.md$")


class SkillScope(Enum):
    Global = "global"
    AgentLocal = "agent-local"


@dataclass(frozen=True)
class IdentityFile:
    name: str
    present: bool
    content: Optional[str] = None
    mtime: Optional[int] = None
    path: Optional[str] = None


@dataclass(frozen=True)
class DailyMemory:
    date: datetime.date
    path: str
    content: str
    mtime: int


@dataclass(frozen=True)
class SkillEntry:
    name: str
    path: str
    scope: SkillScope


@dataclass
class WorkspaceSnapshot:
    agent_id: str
    workspace_path: Optional[str]
    identity_files: Dict[str, IdentityFile] = field(default_factory=dict)
    daily_memory: List[DailyMemory] = field(default_factory=list)
    skills: List[SkillEntry] = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)

    def file_by_path(self, relpath):
        """Workspace-relative lookup over identity and daily memory files."""
        for item in self.identity_files.values():
            if item.present and item.name == relpath:
                return item
        for item in self.daily_memory:
            if "memory/{}.md".format(item.date.isoformat()) == relpath:
                return item
        return None

    def to_dict(self, include_content=False):
        return {
            "agent_id": self.agent_id,
            "workspace_path": self.workspace_path,
            "identity_files": {
                name: {
                    "present": item.present,
                    "mtime": item.mtime,
                    "path": item.path,
                    "content": item.content if include_content else None,
                }
                for name, item in self.identity_files.items()
            },
            "daily_memory": [
                {"date": m.date.isoformat(), "path": m.path, "mtime": m.mtime} for m in self.daily_memory
            ],
            "skills": [{"name": s.name, "path": s.path, "scope": s.scope.value} for s in self.skills],
            "warnings": [w.to_dict() for w in self.warnings],
        }


def map_into_store(configured_path, store_base):
    """
    Maps a workspace path recorded on the source machine into the captured store.

    `~/.openclaw/workspace` and `/home/u/.openclaw/workspace-x` map to the part after
    `.openclaw/`; relative paths are taken relative to the store. Returns
    (store-relative path, absolute path).
    """
    text = str(configured_path or "workspace").replace("\\", "/").rstrip("/")
    marker = "/{}/".format(STORE_DIRNAME)
    if marker in "/" + text + "/":
        rel = ("/" + text + "/").split(marker, 1)[1].strip("/")
    elif text.startswith("~") or os.path.isabs(text):
        rel = text.rsplit("/", 1)[-1]
    else:
        rel = text.strip("/")
    rel = rel or "workspace"
    return rel, os.path.join(store_base, *rel.split("/"))


def _read_text(full, display, warnings):
    try:
        with open(full, "rb") as handle:
            data = handle.read()
        return data.decode("utf-8", "replace"), os.stat(full).st_mtime_ns // 1000000
    except OSError as exc:
        warnings.append(ParseWarning(display, "unreadable: {}".format(exc)))
        return None, None


def _collect_skills(base_full, base_rel, scope, warnings):
    skills = []
    if not os.path.isdir(base_full):
        return skills
    try:
        names = sorted(os.listdir(base_full))
    except OSError as exc:
        warnings.append(ParseWarning(base_rel, "unreadable: {}".format(exc)))
        return skills
    for name in names:
        if os.path.isfile(os.path.join(base_full, name, "SKILL.md")):
            skills.append(SkillEntry(name, "{}/{}/SKILL.md".format(base_rel, name), scope))
    return skills


def inventory_workspace(store_base, config=None, agent_id="main"):
    """
    Reads one agent's workspace: the eight identity slots (absent ones marked
    present=False; a missing BOOTSTRAP.md is normal after first run), daily memory
    notes sorted by date, and skills from the global and agent-local scopes.
    """
    configured = config.workspace_for(agent_id) if config is not None else None
    rel, full = map_into_store(configured, store_base)
    snapshot = WorkspaceSnapshot(agent_id=agent_id, workspace_path=rel)
    if not os.path.isdir(full):
        snapshot.warnings.append(ParseWarning(rel, "workspace directory not captured"))
    for name in IDENTITY_FILES:
        path = os.path.join(full, name)
        if os.path.isfile(path):
            content, mtime = _read_text(path, "{}/{}".format(rel, name), snapshot.warnings)
            snapshot.identity_files[name] = IdentityFile(
                name, content is not None, content, mtime, "{}/{}".format(rel, name)
            )
        else:
            snapshot.identity_files[name] = IdentityFile(name, False)
    memory_dir = os.path.join(full, "memory")
    if os.path.isdir(memory_dir):
        for name in sorted(os.listdir(memory_dir)):
            match = DAILY_MEMORY_RE.match(name)
            display = "{}/memory/{}".format(rel, name)
            if not match:
                continue
            try:
                day = datetime.date.fromisoformat(match.group(1))
            except ValueError:
                snapshot.warnings.append(ParseWarning(display, "not a valid date"))
                continue
            content, mtime = _read_text(os.path.join(memory_dir, name), display, snapshot.warnings)
            if content is not None:
                snapshot.daily_memory.append(DailyMemory(day, display, content, mtime))
    snapshot.daily_memory.sort(key=lambda m: m.date)
    snapshot.skills.extend(
        _collect_skills(os.path.join(store_base, "skills"), "skills", SkillScope.Global, snapshot.warnings)
    )
    snapshot.skills.extend(
        _collect_skills(
            os.path.join(full, "skills"), "{}/skills".format(rel), SkillScope.AgentLocal, snapshot.warnings
        )
    )
    return snapshot


# --- credentials --------------------------------------------------------------------------


@dataclass(frozen=True)
class CredentialItem:
    path: str
    channel: Optional[str]
    keys: Tuple[str, ...] = ()
    values: Dict[str, str] = field(default_factory=dict)
    revealed: bool = False

    def to_dict(self):
        return {
            "path": self.path,
            "channel": self.channel,
            "keys": list(self.keys),
            "values": dict(sorted(self.values.items())),
            "revealed": self.revealed,
        }


def _flatten(value, prefix, out):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(value[key], "{}.{}".format(prefix, key) if prefix else str(key), out)
    else:
        out[prefix or "$"] = value


def _shown(value, reveal):
    if reveal:
        return value if isinstance(value, str) else json.dumps(value, sort_keys=True)
    return redact(value)


def inventory_credentials(store_base, inventory, config=None, reveal=False):
    """
    Lists credential material: key names in clear, values replaced by a digest unless
    `reveal` is set. Nothing is decrypted.
    """
    items = []
    warnings = []
    for descriptor in inventory.of_kind(ArtifactKind.ChannelCredentials, ArtifactKind.AuthProfiles):
        full = os.path.join(store_base, *descriptor.path.split("/"))
        parts = descriptor.path.split("/")
        channel = None
        if descriptor.kind is ArtifactKind.ChannelCredentials and len(parts) > 1:
            channel = parts[1].split("-", 1)[0].split(".", 1)[0]
        try:
            with open(full, "rb") as handle:
                data = handle.read()
        except OSError as exc:
            warnings.append(ParseWarning(descriptor.path, "unreadable: {}".format(exc)))
            continue
        flat = {}
        try:
            _flatten(json.loads(data.decode("utf-8")), "", flat)
        except (ValueError, UnicodeDecodeError):
            flat = {"$bytes": data.decode("latin-1") if reveal else data}
        items.append(
            CredentialItem(
                path=descriptor.path,
                channel=channel,
                keys=tuple(sorted(flat)),
                values={k: _shown(v, reveal) for k, v in flat.items()},
                revealed=reveal,
            )
        )
    if config is not None:
        for name, channel in sorted(config.channels.items()):
            if channel.bot_token:
                items.append(
                    CredentialItem(
                        path="openclaw.json#channels.{}.botToken".format(name),
                        channel=name,
                        keys=("botToken",),
                        values={"botToken": _shown(channel.bot_token, reveal)},
                        revealed=reveal,
                    )
                )
    return items, warnings
