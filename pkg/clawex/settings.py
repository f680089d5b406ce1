# -*- coding: utf-8 -*-
"""
Examiner settings: every tunable that changes an analysis result.

The effective settings are embedded in each report, so a run can be repeated
bit-identically from the report header alone.
"""
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Optional, Tuple

import yaml

from clawex.clawex import InputError

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_MS = 5000
DEFAULT_MTIME_TOLERANCE_MS = 2000
DEFAULT_SCHEMA_MARKERS = ("google tool schema snapshot",)
DEFAULT_STAGE_MARKERS = ("prompt start", "agent start", "agent end", "prompt end")
DEFAULT_HEADER_CHANNELS = ("Telegram", "WhatsApp", "Discord", "Signal", "Slack")

# Field aliases, first match wins. Dotted names reach into nested objects.
INDEX_ALIASES = {
    "sessionId": ("sessionId", "session_id", "id"),
    "state": ("state", "status"),
    "transcript_path": ("sessionFile", "transcriptPath"),
    "model_provider": ("modelProvider", "provider"),
    "model_name": ("model", "modelOverride"),
    "thinking_level": ("thinkingLevel", "thinking"),
    "working_dir": ("cwd", "workingDir"),
    "channel": ("channel", "lastChannel"),
    "last_recipient": ("lastTo", "lastRecipient"),
    "origin": ("origin", "source"),
    "spawned_by": ("spawnedBy", "parentSessionKey"),
    "skills_snapshot": ("skillsSnapshot", "skills"),
    "system_prompt_report": ("systemPromptReport", "promptReport"),
    "updated_at": ("updatedAt", "lastUpdatedAt"),
}

TRANSCRIPT_ALIASES = {
    "parentId": ("parentId", "parent_id"),
    "timestamp": ("timestamp", "ts"),
    "toolCallId": ("toolCallId", "tool_call_id", "toolUseId"),
    "toolName": ("toolName", "tool_name"),
    "isError": ("isError", "is_error"),
    "stopReason": ("stopReason", "stop_reason"),
    "modelId": ("modelId", "model"),
}

LOG_ALIASES = {
    "time": ("time", "_meta.date", "ts", "timestamp"),
    "subsystem": ("subsystem", "_meta.name", "module", "name"),
    "message": ("msg", "message", "0"),
    "runId": ("runId", "run_id"),
    "toolCallId": ("toolCallId", "tool_call_id", "toolUseId"),
    "tool": ("tool", "toolName", "tool_name"),
}


def _merge_aliases(defaults, overrides):
    merged = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in defaults:
            raise InputError("Unknown alias field {!r}.".format(key))
        if isinstance(value, str):
            value = (value,)
        merged[key] = tuple(value)
    return merged


@dataclass(frozen=True)
class ExaminerSettings:
    window_ms: int = DEFAULT_WINDOW_MS
    mtime_tolerance_ms: int = DEFAULT_MTIME_TOLERANCE_MS
    schema_markers: Tuple[str, ...] = DEFAULT_SCHEMA_MARKERS
    stage_markers: Tuple[str, ...] = DEFAULT_STAGE_MARKERS
    header_channels: Tuple[str, ...] = DEFAULT_HEADER_CHANNELS
    index_aliases: Dict[str, Tuple[str, ...]] = field(default_factory=lambda: dict(INDEX_ALIASES))
    transcript_aliases: Dict[str, Tuple[str, ...]] = field(
        default_factory=lambda: dict(TRANSCRIPT_ALIASES)
    )
    log_aliases: Dict[str, Tuple[str, ...]] = field(default_factory=lambda: dict(LOG_ALIASES))
    filter_rules: Tuple[str, ...] = ()
    reveal: bool = False
    capture_time: Optional[int] = None

    def __post_init__(self):
        if self.window_ms < 0:
            raise InputError("window_ms must be non-negative, got {}.".format(self.window_ms))
        if self.mtime_tolerance_ms < 0:
            raise InputError("mtime_tolerance_ms must be non-negative.")

    def with_overrides(self, **overrides):
        """Returns a copy with the non-None `overrides` applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self):
        data = asdict(self)
        for key in ("schema_markers", "stage_markers", "header_channels", "filter_rules"):
            data[key] = list(data[key])
        for key in ("index_aliases", "transcript_aliases", "log_aliases"):
            data[key] = {name: list(aliases) for name, aliases in sorted(data[key].items())}
        return data

    @classmethod
    def from_mapping(cls, data):
        """
        Builds settings from a plain mapping, as loaded from a settings file.

        Alias tables are merged over the defaults, so a file only names what it changes.
        """
        if not isinstance(data, dict):
            raise InputError("Settings must be a mapping, got {}.".format(type(data).__name__))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError("Unknown settings: {}.".format(", ".join(unknown)))
        kwargs = {}
        for key, value in data.items():
            if key == "index_aliases":
                value = _merge_aliases(INDEX_ALIASES, value)
            elif key == "transcript_aliases":
                value = _merge_aliases(TRANSCRIPT_ALIASES, value)
            elif key == "log_aliases":
                value = _merge_aliases(LOG_ALIASES, value)
            elif key in ("schema_markers", "stage_markers", "header_channels", "filter_rules"):
                if isinstance(value, str):
                    value = [value]
                value = tuple(str(item) for item in value or ())
            kwargs[key] = value
        return cls(**kwargs)


def read_yaml(path, what):
    if not os.path.isfile(path):
        raise InputError("{} file {} does not exist.".format(what, path))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return yaml.safe_load(handle)
    except (OSError, yaml.YAMLError) as exc:
        raise InputError("Cannot read {} file {}: {}".format(what.lower(), path, exc))


def load_settings(path):
    """Loads ExaminerSettings from a YAML (or JSON) file."""
    data = read_yaml(path, "Settings")
    logger.info("settings loaded from %s", path)
    return ExaminerSettings.from_mapping(data or {})


def load_filter_rules(path):
    """
    Loads noise-filter globs from `path`.

    Accepts a YAML list, a mapping with an `exclude` list, or plain text with one glob
    per line (`#` starts a comment).
    """
    if not os.path.isfile(path):
        raise InputError("Filter file {} does not exist.".format(path))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError("Cannot read filter file {}: {}".format(path, exc))
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError:
        # Bare globs such as `**/*.tmp` are not valid YAML.
        data = None
    if isinstance(data, dict):
        data = data.get("exclude", [])
    elif not isinstance(data, list):
        data = [line.split("#", 1)[0].strip() for line in text.splitlines()]
    if not isinstance(data, list):
        raise InputError("Filter file {} must hold a list of globs.".format(path))
    return tuple(str(rule) for rule in data if rule)
