# -*- coding: utf-8 -*-
"""
Gateway configuration (`openclaw.json`) and its backup chain.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.clawex import MalformedConfig, ParseWarning
from clawex.utils import alias_value, loads_object, redact, to_utc_ms

logger = logging.getLogger(__name__)

DEFAULT_WORKSPACE_ROOT = "workspace/"
DEFAULT_MODEL_ALIASES = ("agents.defaults.model", "agents.default_model", "agents.defaultModel")

ORDERING_META = "lastTouchedAt"
ORDERING_MTIME = "mtime-fallback"


@dataclass(frozen=True)
class AgentEntry:
    id: str
    model: Optional[str] = None
    workspace: Optional[str] = None
    agent_dir: Optional[str] = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ChannelConfig:
    name: str
    enabled: bool
    bot_token: Optional[str] = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ConfigMeta:
    last_touched_at: Optional[int] = None
    last_touched_version: Optional[str] = None


@dataclass(frozen=True)
class AgentConfig:
    default_model: Optional[str] = None
    agents: Tuple[AgentEntry, ...] = ()
    channels: Dict[str, ChannelConfig] = field(default_factory=dict)
    workspace_root: str = DEFAULT_WORKSPACE_ROOT
    meta: Optional[ConfigMeta] = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)

    def agent(self, agent_id):
        for entry in self.agents:
            if entry.id == agent_id:
                return entry
        return None

    def workspace_for(self, agent_id):
        """The configured workspace path of `agent_id`, falling back to the default root."""
        entry = self.agent(agent_id)
        if entry is not None and entry.workspace:
            return entry.workspace
        return self.workspace_root

    def to_dict(self, reveal=False):
        return {
            "default_model": self.default_model,
            "agents": [
                {"id": a.id, "model": a.model, "workspace": a.workspace, "agent_dir": a.agent_dir}
                for a in self.agents
            ],
            "channels": {
                name: {
                    "enabled": channel.enabled,
                    "bot_token": channel.bot_token if reveal else redact(channel.bot_token),
                }
                for name, channel in sorted(self.channels.items())
            },
            "workspace_root": self.workspace_root,
            "meta": (
                {
                    "lastTouchedAt": self.meta.last_touched_at,
                    "lastTouchedVersion": self.meta.last_touched_version,
                }
                if self.meta
                else None
            ),
        }


def _model_name(value):
    if isinstance(value, dict):
        value = value.get("primary")
    return str(value) if value else None


def parse_config(content):
    """
    Parses `openclaw.json` (or a backup) into an AgentConfig.

    Known fields are typed, everything is retained raw. Raises MalformedConfig with the
    byte offset of the problem when the content is not a structured object.

        >>> parse_config(b'{"agents": {"list": [{"id": "main"}]}}').agents[0].id
        'main'
    """
    data = loads_object(content, MalformedConfig, "Configuration")
    agents_section = data.get("agents") if isinstance(data.get("agents"), dict) else {}
    defaults = agents_section.get("defaults") if isinstance(agents_section.get("defaults"), dict) else {}

    agents = []
    seen = set()
    for item in agents_section.get("list") or []:
        if not isinstance(item, dict) or not item.get("id"):
            continue
        agent_id = str(item["id"])
        if agent_id in seen:
            raise MalformedConfig("Duplicate agent id {!r}.".format(agent_id))
        seen.add(agent_id)
        agents.append(
            AgentEntry(
                id=agent_id,
                model=_model_name(item.get("model")),
                workspace=item.get("workspace"),
                agent_dir=item.get("agentDir"),
                raw=item,
            )
        )

    channels = {}
    raw_channels = data.get("channels") if isinstance(data.get("channels"), dict) else {}
    for name in sorted(raw_channels):
        section = raw_channels[name]
        if not isinstance(section, dict):
            continue
        channels[name] = ChannelConfig(
            name=name,
            enabled=bool(section.get("enabled", True)),
            bot_token=section.get("botToken"),
            raw=section,
        )

    meta = None
    if isinstance(data.get("meta"), dict):
        meta = ConfigMeta(
            last_touched_at=to_utc_ms(data["meta"].get("lastTouchedAt")),
            last_touched_version=data["meta"].get("lastTouchedVersion"),
        )

    return AgentConfig(
        default_model=_model_name(alias_value(data, DEFAULT_MODEL_ALIASES)),
        agents=tuple(agents),
        channels=channels,
        workspace_root=str(defaults.get("workspace") or DEFAULT_WORKSPACE_ROOT),
        meta=meta,
        raw=data,
    )


# --- history -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfigSnapshot:
    source_path: str
    config: AgentConfig
    ordering_key: int
    ordering: str
    mtime: Optional[int] = None

    def to_dict(self):
        return {
            "source_path": self.source_path,
            "ordering_key": self.ordering_key,
            "ordering": self.ordering,
            "mtime": self.mtime,
        }


@dataclass
class ConfigHistory:
    snapshots: List[ConfigSnapshot] = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)


def build_config_history(sources):
    """
    Orders configuration snapshots by `meta.lastTouchedAt`, not by backup suffix.

    `sources` yields (relative path, content bytes, mtime ms). A snapshot without
    `meta.lastTouchedAt` is placed by file mtime and flagged `mtime-fallback`.
    A file that does not parse becomes a warning; the history is still returned.
    """
    history = ConfigHistory()
    for path, content, mtime in sources:
        try:
            config = parse_config(content)
        except MalformedConfig as exc:
            history.warnings.append(
                ParseWarning(path, "{} (byte offset {})".format(exc, exc.offset))
            )
            continue
        touched = config.meta.last_touched_at if config.meta else None
        if touched is not None:
            history.snapshots.append(ConfigSnapshot(path, config, touched, ORDERING_META, mtime))
        else:
            logger.debug("%s has no lastTouchedAt, ordering by mtime", path)
            history.snapshots.append(
                ConfigSnapshot(path, config, mtime if mtime is not None else 0, ORDERING_MTIME, mtime)
            )
    history.snapshots.sort(key=lambda s: (s.ordering_key, s.source_path))
    return history


def config_at(history, t):
    """
    The snapshot in force at time `t`: the greatest ordering key at or before `t`.
    None when `t` precedes every snapshot.
    """
    found = None
    for snapshot in history.snapshots:
        if snapshot.ordering_key <= t:
            found = snapshot
        else:
            break
    return found


# --- differencing --------------------------------------------------------------------------


class ChangeKind(Enum):
    Added = "Added"
    Removed = "Removed"
    Changed = "Changed"


@dataclass(frozen=True)
class ConfigChange:
    path: str
    change: ChangeKind
    before: object = None
    after: object = None

    def to_dict(self):
        return {"path": self.path, "change": self.change.value, "before": self.before, "after": self.after}


def canonical_config_view(config):
    """
    The comparison view of a configuration: agents keyed by id, the default model
    under one name, and every other top-level section except `meta` as recorded.
    """
    raw = config.raw or {}
    agents = {"default_model": config.default_model, "list": {a.id: a.raw for a in config.agents}}
    raw_agents = raw.get("agents") if isinstance(raw.get("agents"), dict) else {}
    defaults = raw_agents.get("defaults")
    if isinstance(defaults, dict):
        rest = {k: v for k, v in defaults.items() if k != "model"}
        if rest:
            agents["defaults"] = rest
    for key, value in raw_agents.items():
        if key not in ("defaults", "list", "default_model", "defaultModel"):
            agents[key] = value
    view = {"agents": agents, "channels": raw.get("channels") or {}, "workspace_root": config.workspace_root}
    for key, value in raw.items():
        if key not in ("agents", "channels", "meta"):
            view[key] = value
    return view


def _join(prefix, key):
    key = str(key)
    part = '["{}"]'.format(key) if "." in key else key
    if not prefix:
        return part
    return prefix + part if part.startswith("[") else "{}.{}".format(prefix, part)


def _walk_diff(before, after, prefix, out):
    if isinstance(before, dict) and isinstance(after, dict):
        for key in set(before) | set(after):
            path = _join(prefix, key)
            if key not in after:
                out.append(ConfigChange(path, ChangeKind.Removed, before[key], None))
            elif key not in before:
                out.append(ConfigChange(path, ChangeKind.Added, None, after[key]))
            else:
                _walk_diff(before[key], after[key], path, out)
    elif before != after or type(before) is not type(after):
        out.append(ConfigChange(prefix, ChangeKind.Changed, before, after))


def diff_configs(a, b):
    """
    Structural difference between two configurations, sorted by dotted path.
    Lists compare as whole values.
    """
    out = []
    _walk_diff(canonical_config_view(a), canonical_config_view(b), "", out)
    out.sort(key=lambda change: change.path)
    return out
