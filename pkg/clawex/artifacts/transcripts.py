# -*- coding: utf-8 -*-
"""
Session index and session transcript parsing.

Transcripts are append-only JSONL files, one self-contained JSON object per line.
Parsing is salvage-oriented: a bad line becomes a ParseWarning, never an exception.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from clawex.clawex import MalformedIndex, NotMediaName, ParseWarning
from clawex.settings import DEFAULT_HEADER_CHANNELS, INDEX_ALIASES, TRANSCRIPT_ALIASES
from clawex.utils import alias_value, get_alias, iter_jsonl, loads_object, to_utc_ms

logger = logging.getLogger(__name__)

UUID_PATTERN = r"[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}"
SESSION_KEY_RE = re.compile(r"^[A-Za-z0-9_.\-]+(:[^:\s]+)+$")
SESSION_STATES = ("idle", "processing", "waiting")
TRANSCRIPT_VERSION = 3


class SessionStatus(Enum):
    Indexed = "Indexed"
    SoftDeleted = "SoftDeleted"
    Orphaned = "Orphaned"
    Dangling = "Dangling"


class ProviderMode(Enum):
    TagFiltered = "TagFiltered"
    NativeThinking = "NativeThinking"


# --- session index ---------------------------------------------------------------------


@dataclass(frozen=True)
class OriginInfo:
    provider: str
    from_: Optional[str] = None
    label: Optional[str] = None

    def to_dict(self):
        return {"provider": self.provider, "from": self.from_, "label": self.label}


@dataclass(frozen=True)
class ResolvedSkill:
    name: str
    path: str
    source: Optional[str] = None


@dataclass(frozen=True)
class SkillsSnapshot:
    skills: Tuple[str, ...] = ()
    resolved: Tuple[ResolvedSkill, ...] = ()
    prompt_text: Optional[str] = None

    def to_dict(self):
        return {
            "skills": list(self.skills),
            "resolved": [vars(r) for r in self.resolved],
            "prompt_text": self.prompt_text,
        }


@dataclass(frozen=True)
class InjectedFile:
    name: str
    path: str
    injected_chars: int = 0


@dataclass(frozen=True)
class SystemPromptReport:
    injected_files: Tuple[InjectedFile, ...] = ()
    tool_names: Optional[Tuple[str, ...]] = None
    schema_metrics: Dict[str, int] = field(default_factory=dict)

    def to_dict(self):
        return {
            "injected_files": [vars(f) for f in self.injected_files],
            "tool_names": list(self.tool_names) if self.tool_names is not None else None,
            "schema_metrics": dict(sorted(self.schema_metrics.items())),
        }


@dataclass(frozen=True)
class SessionMeta:
    session_key: str
    session_id: Optional[str]
    state: Optional[str] = None
    transcript_path: Optional[str] = None
    model_provider: Optional[str] = None
    model_name: Optional[str] = None
    thinking_level: Optional[str] = None
    working_dir: Optional[str] = None
    channel: Optional[str] = None
    last_recipient: Optional[str] = None
    origin: Optional[OriginInfo] = None
    spawned_by: Optional[str] = None
    skills_snapshot: Optional[SkillsSnapshot] = None
    system_prompt_report: Optional[SystemPromptReport] = None
    token_usage: Dict[str, int] = field(default_factory=dict)
    updated_at: Optional[int] = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "session_key": self.session_key,
            "session_id": self.session_id,
            "state": self.state,
            "transcript_path": self.transcript_path,
            "model_provider": self.model_provider,
            "model_name": self.model_name,
            "thinking_level": self.thinking_level,
            "working_dir": self.working_dir,
            "channel": self.channel,
            "last_recipient": self.last_recipient,
            "origin": self.origin.to_dict() if self.origin else None,
            "spawned_by": self.spawned_by,
            "skills_snapshot": self.skills_snapshot.to_dict() if self.skills_snapshot else None,
            "system_prompt_report": (
                self.system_prompt_report.to_dict() if self.system_prompt_report else None
            ),
            "token_usage": dict(sorted(self.token_usage.items())),
            "updated_at": self.updated_at,
            "unknown_fields": dict(sorted(self.raw.items())),
        }


@dataclass
class SessionIndex:
    entries: Dict[str, SessionMeta] = field(default_factory=dict)
    warnings: List[ParseWarning] = field(default_factory=list)

    def by_session_id(self):
        return {meta.session_id: key for key, meta in self.entries.items() if meta.session_id}


_TOKEN_FIELDS = ("inputTokens", "outputTokens", "totalTokens", "contextTokens", "cacheRead", "cacheWrite")


def _as_int(value):
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value)
    return None


def _read_time(value, source, line_no, warnings):
    """to_utc_ms, recording a warning when a time is present but unusable."""
    ms = to_utc_ms(value)
    if ms is None and value is not None:
        warnings.append(ParseWarning(source, "unusable timestamp {!r}".format(value)[:120], line_no))
    return ms


def _parse_skills(value):
    if not isinstance(value, dict):
        return None
    names = [str(s.get("name")) if isinstance(s, dict) else str(s) for s in value.get("skills") or []]
    resolved = []
    for item in value.get("resolvedSkills") or []:
        if isinstance(item, dict) and item.get("name"):
            resolved.append(
                ResolvedSkill(
                    name=str(item["name"]),
                    path=str(item.get("path") or item.get("filePath") or ""),
                    source=item.get("source"),
                )
            )
    return SkillsSnapshot(tuple(names), tuple(resolved), value.get("prompt"))


def _parse_prompt_report(value):
    if not isinstance(value, dict):
        return None
    injected = []
    for item in value.get("injectedWorkspaceFiles") or []:
        if not isinstance(item, dict):
            continue
        chars = _as_int(item.get("injectedChars", item.get("rawChars", 0))) or 0
        injected.append(
            InjectedFile(
                name=str(item.get("name") or ""),
                path=str(item.get("path") or ""),
                injected_chars=max(chars, 0),
            )
        )
    tools = value.get("toolNames")
    if tools is None and isinstance(value.get("tools"), (list, dict)):
        tools = value["tools"]
        if isinstance(tools, dict):
            tools = tools.get("entries") or tools.get("names") or []
    tool_names = None
    if isinstance(tools, list):
        tool_names = tuple(
            str(t.get("name")) if isinstance(t, dict) else str(t)
            for t in tools
            if (t.get("name") if isinstance(t, dict) else t)
        )
    metrics = {}
    for key, item in value.items():
        number = _as_int(item)
        if number is not None and key.lower().endswith(("chars", "count", "tokens")):
            metrics[key] = number
    schema = value.get("schema") if isinstance(value.get("schema"), dict) else {}
    for key, item in schema.items():
        number = _as_int(item)
        if number is not None:
            metrics["schema." + key] = number
    return SystemPromptReport(tuple(injected), tool_names, metrics)


def _parse_origin(value):
    if isinstance(value, dict) and value.get("provider"):
        return OriginInfo(str(value["provider"]), value.get("from"), value.get("label"))
    if isinstance(value, str) and value:
        return OriginInfo(value)
    return None


def parse_session_meta(key, record, aliases=None):
    """Types one sessions.json record; fields no alias claims are kept in `raw`."""
    aliases = aliases or INDEX_ALIASES
    used = set()

    def take(name):
        alias, value = get_alias(record, aliases[name])
        if alias is not None:
            used.add(alias.split(".", 1)[0])
        return value

    session_id = take("sessionId")
    state = take("state")
    meta = SessionMeta(
        session_key=key,
        session_id=str(session_id) if session_id is not None else None,
        state=str(state) if state is not None else None,
        transcript_path=take("transcript_path"),
        model_provider=take("model_provider"),
        model_name=take("model_name"),
        thinking_level=take("thinking_level"),
        working_dir=take("working_dir"),
        channel=take("channel"),
        last_recipient=take("last_recipient"),
        origin=_parse_origin(take("origin")),
        spawned_by=take("spawned_by"),
        skills_snapshot=_parse_skills(take("skills_snapshot")),
        system_prompt_report=_parse_prompt_report(take("system_prompt_report")),
        token_usage={
            name: _as_int(record[name])
            for name in _TOKEN_FIELDS
            if name in record and _as_int(record[name]) is not None
        },
        updated_at=to_utc_ms(take("updated_at")),
        raw={k: v for k, v in record.items() if k not in used and k not in _TOKEN_FIELDS},
    )
    return meta


def parse_session_index(content, aliases=None, source="sessions.json"):
    """
    Parses `sessions.json` into a SessionIndex.

    Accepts both a flat `{sessionKey: record}` map and the same map nested under a
    `sessions` key. Raises MalformedIndex (with byte offset) when the content is not a
    structured object; problems inside single records become warnings.
    """
    data = loads_object(content, MalformedIndex, "Session index")
    if isinstance(data.get("sessions"), dict) and all(
        isinstance(v, dict) for v in data["sessions"].values()
    ):
        data = data["sessions"]
    index = SessionIndex()
    for key in sorted(data):
        record = data[key]
        if not isinstance(record, dict):
            index.warnings.append(ParseWarning(source, "entry {!r} is not an object".format(key)))
            continue
        meta = parse_session_meta(key, record, aliases)
        if meta.session_id is None or not re.match("^{}$".format(UUID_PATTERN), meta.session_id):
            index.warnings.append(
                ParseWarning(source, "entry {!r} has no UUID sessionId".format(key))
            )
        if meta.state is not None and meta.state not in SESSION_STATES:
            index.warnings.append(
                ParseWarning(source, "entry {!r} has unknown state {!r}".format(key, meta.state))
            )
        if meta.spawned_by is not None and not SESSION_KEY_RE.match(str(meta.spawned_by)):
            index.warnings.append(
                ParseWarning(source, "entry {!r} spawnedBy is not a session key".format(key))
            )
        index.entries[key] = meta
    return index


# --- transcript entries ----------------------------------------------------------------


@dataclass(frozen=True)
class TextBlock:
    text: str
    tag = "Text"


@dataclass(frozen=True)
class ThinkingBlock:
    text: str
    tag = "Thinking"


@dataclass(frozen=True)
class ToolCallBlock:
    id: str
    name: str
    arguments: object = None
    tag = "ToolCall"


@dataclass(frozen=True)
class FinalTagged:
    text: str
    tag = "FinalTagged"


@dataclass(frozen=True)
class ThinkTagged:
    text: str
    tag = "ThinkTagged"


TEXT_SEGMENTS = (TextBlock, FinalTagged, ThinkTagged)


@dataclass(frozen=True)
class UsageMeta:
    input_tokens: Optional[int] = None
    output_tokens: Optional[int] = None
    cost: Optional[float] = None
    stop_reason: Optional[str] = None
    provider_data: Dict[str, object] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ExecDetails:
    duration_ms: Optional[int] = None
    exit_code: Optional[int] = None
    status: Optional[str] = None


@dataclass(frozen=True)
class SessionHeader:
    version: Optional[int]
    session_uuid: Optional[str]
    created: Optional[int]
    working_dir: Optional[str]
    tag = "SessionHeader"


@dataclass(frozen=True)
class Message:
    role: str
    timestamp: Optional[int]
    blocks: Tuple[object, ...] = ()
    usage: Optional[UsageMeta] = None
    tool_call_id: Optional[str] = None
    tool_name: Optional[str] = None
    is_error: Optional[bool] = None
    details: Optional[ExecDetails] = None
    provider: Optional[str] = None
    model: Optional[str] = None
    tag = "Message"

    @property
    def text(self):
        """All text segments of the message, in order."""
        return "".join(b.text for b in self.blocks if isinstance(b, TEXT_SEGMENTS))

    @property
    def thinking(self):
        return "".join(b.text for b in self.blocks if isinstance(b, (ThinkingBlock, ThinkTagged)))

    @property
    def tool_calls(self):
        return [b for b in self.blocks if isinstance(b, ToolCallBlock)]


@dataclass(frozen=True)
class ModelChange:
    provider: Optional[str]
    model: Optional[str]
    tag = "ModelChange"


@dataclass(frozen=True)
class Compaction:
    summary_span: Dict[str, object] = field(default_factory=dict, compare=False)
    tag = "Compaction"


@dataclass(frozen=True)
class Custom:
    raw: Dict[str, object] = field(default_factory=dict, compare=False)
    tag = "Custom"


@dataclass(frozen=True)
class TranscriptEntry:
    id: Optional[str]
    parent_id: Optional[str]
    payload: object
    line_no: int
    timestamp: Optional[int] = None

    @property
    def tag(self):
        """`Message:<role>` for messages, the payload tag otherwise."""
        if isinstance(self.payload, Message):
            return "Message:{}".format(self.payload.role)
        return self.payload.tag

    @property
    def time(self):
        """Best timestamp: the message's own, else the entry's."""
        if isinstance(self.payload, Message) and self.payload.timestamp is not None:
            return self.payload.timestamp
        if isinstance(self.payload, SessionHeader) and self.payload.created is not None:
            return self.payload.created
        return self.timestamp


_TAG_RE = re.compile(r"<(/?)(think|final)>", re.IGNORECASE)


def split_tagged_text(text, source="", line_no=None):
    """
    Splits assistant text on `<think>`/`<final>` tags.

    Text takes the innermost open tag. An unclosed tag extends to the end of the text and
    a stray closing tag is ignored; both produce a warning.
    Returns (segments, warnings).
    """
    segments = []
    warnings = []
    stack = []
    pos = 0

    def emit(chunk):
        if not chunk:
            return
        if not stack:
            segments.append(TextBlock(chunk))
        elif stack[-1] == "think":
            segments.append(ThinkTagged(chunk))
        else:
            segments.append(FinalTagged(chunk))

    for match in _TAG_RE.finditer(text):
        emit(text[pos : match.start()])
        pos = match.end()
        closing, name = match.group(1) == "/", match.group(2).lower()
        if not closing:
            stack.append(name)
        elif name in stack:
            while stack and stack.pop() != name:
                pass
        else:
            warnings.append(ParseWarning(source, "stray </{}> tag".format(name), line_no))
    emit(text[pos:])
    if stack:
        warnings.append(
            ParseWarning(source, "unclosed <{}> tag runs to end of block".format(stack[-1]), line_no)
        )
    return segments, warnings


def _content_blocks(content, role, source, line_no, aliases):
    if content is None:
        return [], []
    if isinstance(content, str):
        content = [{"type": "text", "text": content}]
    if not isinstance(content, list):
        return [], [ParseWarning(source, "message content is not a list", line_no)]
    blocks = []
    warnings = []
    for item in content:
        if isinstance(item, str):
            item = {"type": "text", "text": item}
        if not isinstance(item, dict):
            warnings.append(ParseWarning(source, "content block is not an object", line_no))
            continue
        kind = item.get("type")
        if kind == "text":
            text = str(item.get("text") or "")
            if role == "assistant" and _TAG_RE.search(text):
                segments, tag_warnings = split_tagged_text(text, source, line_no)
                blocks.extend(segments)
                warnings.extend(tag_warnings)
            else:
                blocks.append(TextBlock(text))
        elif kind in ("thinking", "reasoning"):
            blocks.append(ThinkingBlock(str(item.get("thinking") or item.get("text") or "")))
        elif kind in ("toolCall", "tool_use", "toolUse"):
            call_id = item.get("id") or alias_value(item, aliases["toolCallId"])
            if not call_id:
                warnings.append(ParseWarning(source, "toolCall block without id", line_no))
                continue
            arguments = item.get("arguments", item.get("input"))
            blocks.append(ToolCallBlock(str(call_id), str(item.get("name") or ""), arguments))
        elif kind == "image":
            continue
        else:
            warnings.append(
                ParseWarning(source, "unknown content block type {!r}".format(kind), line_no)
            )
    return blocks, warnings


def _parse_message(record, source, line_no, aliases):
    message = record.get("message")
    if not isinstance(message, dict):
        message = record
    role = message.get("role")
    if role not in ("user", "assistant", "toolResult"):
        return None, []
    blocks, warnings = _content_blocks(message.get("content"), role, source, line_no, aliases)
    usage = None
    if role == "assistant":
        raw_usage = message.get("usage") if isinstance(message.get("usage"), dict) else {}
        cost = raw_usage.get("cost")
        if isinstance(cost, dict):
            cost = cost.get("total")
        usage = UsageMeta(
            input_tokens=_as_int(raw_usage.get("input", raw_usage.get("inputTokens"))),
            output_tokens=_as_int(raw_usage.get("output", raw_usage.get("outputTokens"))),
            cost=float(cost) if isinstance(cost, (int, float)) and not isinstance(cost, bool) else None,
            stop_reason=alias_value(message, aliases["stopReason"]),
            provider_data=raw_usage,
        )
    details = None
    tool_call_id = None
    is_error = None
    tool_name = None
    if role == "toolResult":
        tool_call_id = alias_value(message, aliases["toolCallId"])
        tool_name = alias_value(message, aliases["toolName"])
        is_error = bool(alias_value(message, aliases["isError"], False))
        raw_details = message.get("details")
        if isinstance(raw_details, dict):
            duration = _as_int(raw_details.get("durationMs"))
            details = ExecDetails(
                duration_ms=duration if duration is None or duration >= 0 else None,
                exit_code=_as_int(raw_details.get("exitCode")),
                status=raw_details.get("status"),
            )
        if not tool_call_id:
            warnings.append(ParseWarning(source, "toolResult without toolCallId", line_no))
    timestamp = None
    if message is not record:
        timestamp = _read_time(alias_value(message, aliases["timestamp"]), source, line_no, warnings)
    if timestamp is None:
        timestamp = to_utc_ms(alias_value(record, aliases["timestamp"]))
    return (
        Message(
            role=role,
            timestamp=timestamp,
            blocks=tuple(blocks),
            usage=usage,
            tool_call_id=str(tool_call_id) if tool_call_id else None,
            tool_name=tool_name,
            is_error=is_error,
            details=details,
            provider=message.get("provider"),
            model=message.get("model"),
        ),
        warnings,
    )


def parse_transcript(content, source="", aliases=None):
    """
    Parses transcript bytes into (entries, warnings).

    One entry per well-formed line, in file order. Lines that are not JSON objects become
    warnings. Records of an unknown shape are kept as Custom entries.

        >>> parse_transcript(b"")
        ([], [])
    """
    aliases = aliases or TRANSCRIPT_ALIASES
    entries = []
    warnings = []
    for line_no, record, warning in iter_jsonl(content, source):
        if warning is not None:
            logger.debug("salvaged %s:%s %s", source, line_no, warning.reason)
            warnings.append(warning)
            continue
        kind = record.get("type")
        entry_id = record.get("id")
        parent_id = alias_value(record, aliases["parentId"])
        timestamp = _read_time(alias_value(record, aliases["timestamp"]), source, line_no, warnings)
        payload = None
        if kind == "session":
            payload = SessionHeader(
                version=_as_int(record.get("version")),
                session_uuid=record.get("id"),
                created=timestamp,
                working_dir=record.get("cwd"),
            )
        elif kind == "message" or (kind is None and "role" in record):
            payload, message_warnings = _parse_message(record, source, line_no, aliases)
            warnings.extend(message_warnings)
        elif kind == "model_change":
            payload = ModelChange(
                provider=record.get("provider"),
                model=alias_value(record, aliases["modelId"]),
            )
        elif kind == "compaction":
            payload = Compaction(summary_span=record)
        if payload is None:
            payload = Custom(raw=record)
        entries.append(
            TranscriptEntry(
                id=str(entry_id) if entry_id is not None else None,
                parent_id=str(parent_id) if parent_id is not None else None,
                payload=payload,
                line_no=line_no,
                timestamp=timestamp,
            )
        )
    return entries, warnings


def has_truncated_tail(content):
    """
    True when the last non-empty line is not valid JSON and the file lacks a final
    newline, the footprint of a write cut short or a file truncated mid-line.
    """
    if not content or content.endswith(b"\n"):
        return False
    last = content.rstrip(b"\r").rsplit(b"\n", 1)[-1]
    return any(warning is not None for _, _, warning in iter_jsonl(last, ""))


def header_is_valid(entries):
    return bool(entries) and isinstance(entries[0].payload, SessionHeader) and (
        entries[0].payload.version == TRANSCRIPT_VERSION
    )


# --- sessions on disk -------------------------------------------------------------------

_DELETED_RE = re.compile(r"^(?P<sid>.+)\.jsonl\.deleted\.(?P<stamp>.+)$")


@dataclass(frozen=True)
class SessionRecord:
    status: SessionStatus
    session_id: str
    filename: Optional[str] = None
    session_key: Optional[str] = None
    deleted_at: Optional[int] = None
    agent_id: Optional[str] = None

    @property
    def path(self):
        if self.filename is None or self.agent_id is None:
            return self.filename
        return "agents/{}/sessions/{}".format(self.agent_id, self.filename)

    def to_dict(self):
        return {
            "status": self.status.value,
            "session_id": self.session_id,
            "session_key": self.session_key,
            "filename": self.filename,
            "path": self.path,
            "deleted_at": self.deleted_at,
            "agent_id": self.agent_id,
        }


_DASHED_STAMP_RE = re.compile(r"^(\d{4}-\d{2}-\d{2})T(\d{2})-(\d{2})-(\d{2})(.*)$")


def _deleted_stamp(stamp):
    # ISO stamps with ':' replaced for filesystem safety, e.g. 2026-02-02T10-30-00.000Z.
    match = _DASHED_STAMP_RE.match(stamp)
    if match:
        date, hh, mm, ss, rest = match.groups()
        return to_utc_ms("{}T{}:{}:{}{}".format(date, hh, mm, ss, rest))
    return to_utc_ms(stamp)


def resolve_sessions(index, listing, agent_id=None):
    """
    Classifies the transcript files of one `agents/<id>/sessions/` directory.

    Every `.jsonl` and `.jsonl.deleted.*` file lands in exactly one of Indexed,
    SoftDeleted or Orphaned; index entries with neither a live nor a soft-deleted
    file are returned as Dangling.
    """
    by_id = index.by_session_id()
    by_file = {}
    for key, meta in index.entries.items():
        if meta.transcript_path:
            by_file[str(meta.transcript_path).replace("\\", "/").rsplit("/", 1)[-1]] = key
    records = []
    seen_ids = set()
    for name in sorted(listing):
        deleted = _DELETED_RE.match(name)
        if deleted:
            sid = deleted.group("sid")
            seen_ids.add(sid)
            records.append(
                SessionRecord(
                    SessionStatus.SoftDeleted,
                    sid,
                    filename=name,
                    session_key=by_id.get(sid),
                    deleted_at=_deleted_stamp(deleted.group("stamp")),
                    agent_id=agent_id,
                )
            )
        elif name.endswith(".jsonl"):
            sid = name[: -len(".jsonl")]
            seen_ids.add(sid)
            key = by_id.get(sid) or by_file.get(name)
            if key is not None:
                seen_ids.add(index.entries[key].session_id)
            status = SessionStatus.Indexed if key is not None else SessionStatus.Orphaned
            records.append(SessionRecord(status, sid, filename=name, session_key=key, agent_id=agent_id))
    for key in sorted(index.entries):
        meta = index.entries[key]
        if meta.session_id and meta.session_id not in seen_ids:
            records.append(
                SessionRecord(SessionStatus.Dangling, meta.session_id, session_key=key, agent_id=agent_id)
            )
    return records


# --- channel attribution -----------------------------------------------------------------


@dataclass(frozen=True)
class MediaRef:
    path: str
    mime: str
    url: Optional[str] = None


@dataclass(frozen=True)
class ChannelAttribution:
    channel: Optional[str]
    display_name: Optional[str] = None
    handle: Optional[str] = None
    platform_user_id: Optional[str] = None
    message_time: Optional[int] = None
    platform_message_id: Optional[int] = None
    media_refs: Tuple[MediaRef, ...] = ()
    warnings: Tuple[ParseWarning, ...] = field(default=(), compare=False)

    def to_dict(self):
        return {
            "channel": self.channel,
            "display_name": self.display_name,
            "handle": self.handle,
            "platform_user_id": self.platform_user_id,
            "message_time": self.message_time,
            "platform_message_id": self.platform_message_id,
            "media_refs": [vars(m) for m in self.media_refs],
            "warnings": [w.to_dict() for w in self.warnings],
        }


_MESSAGE_ID_RE = re.compile(r"^\[message_id:\s*(\d+)\]\s*$", re.MULTILINE)
_MEDIA_RE = re.compile(
    r"\[media attached:\s*(?P<path>.+?)\s+\((?P<mime>[^()\s]+/[^()\s]+)\)(?:\s*\|\s*(?P<url>[^\]\s]+))?\]"
)


@lru_cache(maxsize=8)
def _header_re(channels):
    return re.compile(
        r"^\[(?P<channel>{})\s+(?P<name>.+?)(?:\s+\(@(?P<handle>[^)\s]+)\))?"
        r"\s+id:(?P<uid>\d+)\s+(?P<date>\d{{4}}-\d{{2}}-\d{{2}})\s+(?P<time>\d{{2}}:\d{{2}})\s+UTC\]".format(
            "|".join(re.escape(c) for c in channels)
        )
    )


def extract_user_attribution(message, channels=DEFAULT_HEADER_CHANNELS, source=""):
    """
    Reads the channel envelope a gateway prepends to inbound user text:

        [Telegram Ada (@ada) id:42 2026-02-02 14:05 UTC] hello
        [message_id: 7]

    plus any `[media attached: PATH (mime/type) | URL]` notes.
    Returns None when none of the three is present. A header that opens like one but
    breaks the grammar yields a best-effort attribution carrying a warning.
    """
    text = message.text if isinstance(message, Message) else str(message or "")
    text = text.lstrip()
    warnings = []
    channel = name = handle = uid = None
    message_time = None
    header = _header_re(tuple(channels)).match(text)
    if header:
        channel = header.group("channel")
        name = header.group("name")
        handle = header.group("handle")
        uid = header.group("uid")
        message_time = to_utc_ms("{} {} UTC".format(header.group("date"), header.group("time")))
    else:
        opener = re.match(r"^\[({})\b([^\]\n]*)\]?".format("|".join(re.escape(c) for c in channels)), text)
        if opener:
            channel = opener.group(1)
            body = opener.group(2)
            id_match = re.search(r"id:(\d+)", body)
            uid = id_match.group(1) if id_match else None
            handle_match = re.search(r"\(@([^)\s]+)\)", body)
            handle = handle_match.group(1) if handle_match else None
            when = re.search(r"(\d{4}-\d{2}-\d{2})\s+(\d{2}:\d{2})", body)
            if when:
                message_time = to_utc_ms("{} {} UTC".format(*when.groups()))
            warnings.append(ParseWarning(source, "malformed {} header".format(channel)))
    message_id = None
    id_line = _MESSAGE_ID_RE.search(text)
    if id_line:
        message_id = int(id_line.group(1))
    media = tuple(
        MediaRef(m.group("path"), m.group("mime"), m.group("url")) for m in _MEDIA_RE.finditer(text)
    )
    if channel is None and message_id is None and not media:
        return None
    return ChannelAttribution(
        channel=channel,
        display_name=name,
        handle=handle,
        platform_user_id=uid,
        message_time=message_time,
        platform_message_id=message_id,
        media_refs=media,
        warnings=tuple(warnings),
    )


def visible_output(message, provider_mode=ProviderMode.TagFiltered):
    """
    What the channel user would have seen of an assistant message.

    Tag-filtered providers forward only `<final>` text; native-thinking providers forward
    every text segment.
    """
    if provider_mode is ProviderMode.TagFiltered:
        return "".join(b.text for b in message.blocks if isinstance(b, FinalTagged))
    return "".join(b.text for b in message.blocks if isinstance(b, TEXT_SEGMENTS))


# --- inbound media ------------------------------------------------------------------------


@dataclass(frozen=True)
class MediaName:
    original: Optional[str]
    uuid: str
    ext: str


_MEDIA_NAME_RE = re.compile(
    r"^(?:(?P<orig>.+)---)?(?P<uuid>{})(?:\.(?P<ext>[A-Za-z0-9]+(?:\.[A-Za-z0-9]+)*))?$".format(UUID_PATTERN)
)


def parse_media_filename(name):
    """
    Splits an inbound media filename, `{sanitized_original}---{uuid}.{ext}` or
    `{uuid}.{ext}`. The original part ends at the last `---` before the UUID.

        >>> parse_media_filename("notes---v2---0f8fad5b-d9cb-469f-a165-70867728950e.md").original
        'notes---v2'
    """
    match = _MEDIA_NAME_RE.match(name)
    if not match:
        raise NotMediaName("No UUID in media filename {!r}.".format(name))
    return MediaName(match.group("orig"), match.group("uuid").lower(), match.group("ext") or "")
