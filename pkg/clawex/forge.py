# -*- coding: utf-8 -*-
"""
Synthetic artifact stores with known ground truth.

`generate_store` writes a complete `.openclaw` tree plus a `tmp/openclaw` log directory
from a ScenarioSpec. Every random choice comes from one seeded stream and every
timestamp from a virtual clock, so the same (spec, seed) always yields the same bytes
and the same GroundTruth. `apply_tamper` then damages a generated store the way an
adversary would and reports which anti-forensics rules must fire.
"""
import json
import logging
import os
import random
import sqlite3
import uuid
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.artifacts.logs import LOG_NAME_RE
from clawex.clawex import DEFAULT_LOG_SUBDIR, STORE_DIRNAME, ArtifactKind, InputError
from clawex.settings import DEFAULT_SCHEMA_MARKERS, read_yaml
from clawex.utils import calc_file_sha256, iso_utc, to_utc_ms, utc_date

logger = logging.getLogger(__name__)

SCENARIO_VERSION = 1
BASE_TIME = to_utc_ms("2026-02-02T08:00:00Z")
DAY_MS = 24 * 60 * 60 * 1000
CAPTURE_MARGIN_MS = 30 * 60 * 1000
HOME = "/home/ada"
AGENT_ID = "main"
MAIN_KEY = "agent:main:main"
MODEL_PROVIDER = "google"
MODEL = "gemini-3-pro-preview"
SWITCHED_MODEL = "gemini-3-flash-preview"
TOOL_SET = ("browser", "cron", "edit", "exec", "message", "read", "sessions_spawn", "web_search", "write")
DROPPED_TOOL = "browser"
ALTERNATE_SCHEMA_MARKER = "openai tool schema snapshot"
ISOLATED_JOB = "daily-digest"
MAIN_JOB = "nightly-backup"

# field -> variant name, for the dialect that exercises the alias tables.
VARIANT_INDEX_FIELDS = {
    "sessionId": "session_id",
    "sessionFile": "transcriptPath",
    "updatedAt": "lastUpdatedAt",
    "spawnedBy": "parentSessionKey",
    "systemPromptReport": "promptReport",
}
VARIANT_ENTRY_FIELDS = {"parentId": "parent_id", "timestamp": "ts"}
VARIANT_MESSAGE_FIELDS = {
    "timestamp": "ts",
    "toolCallId": "tool_call_id",
    "toolName": "tool_name",
    "isError": "is_error",
    "stopReason": "stop_reason",
}

IDENTITY_CONTENT = {
    "AGENTS.md": (
        "# AGENTS.md\n\nRead SOUL.md and USER.md first.\n"
        "Read memory/YYYY-MM-DD.md for today and yesterday before answering.\n"
    ),
    "SOUL.md": "# SOUL.md\n\nBe brief. Be kind. Never guess a file path.\n",
    "USER.md": "# USER.md\n\n- Name: Ada\n- Timezone: UTC\n",
    "IDENTITY.md": "# IDENTITY.md\n\nName: Claw\nEmoji: crab\n",
    "TOOLS.md": "# TOOLS.md\n\nPrinter is called office-laser.\n",
    "HEARTBEAT.md": "# HEARTBEAT.md\n\nCheck the inbox twice a day.\n",
    "MEMORY.md": "# MEMORY.md\n\nAda prefers short answers.\n",
}
YESTERDAY_NOTE = "- Dentist appointment Friday 10:00\n- Weekend: hiking if the weather holds\n"
TODAY_NOTE = "- Buy coffee\n- Call mum\n"
TIDIED_NOTE = "- Call mum\n- Buy coffee (done)\n"


@dataclass(frozen=True)
class ScenarioSpec:
    """What a generated store contains. Counts of zero switch a feature off."""

    version: int = SCENARIO_VERSION
    turns: int = 4
    replies: bool = True
    thinking: bool = True
    tool_calls: bool = True
    channel_sessions: int = 1
    subagents: int = 1
    subagent_cleanup: bool = True
    compactions: int = 1
    model_changes: int = 1
    autonomous_runs: int = 1
    cron_isolated_runs: int = 2
    cron_main_runs: int = 1
    config_backups: int = 2
    backup_without_meta: bool = True
    logs: bool = True
    stale_logs: int = 1
    dropped_tool: bool = True
    alternate_marker: bool = False
    media: int = 2
    memory_files: int = 2
    soft_deleted: int = 1
    workspace: bool = True
    credentials: bool = True
    prompt_reports: bool = True
    variant_dialect: bool = False

    def __post_init__(self):
        if self.version != SCENARIO_VERSION:
            raise InputError("Unsupported scenario version {!r}.".format(self.version))
        if self.turns < 1:
            raise InputError("A scenario needs at least one turn.")
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, bool) and value < 0:
                raise InputError("{} must be non-negative.".format(f.name))

    @classmethod
    def full(cls):
        return cls()

    @classmethod
    def minimal(cls):
        """One session holding one user message, with config and index."""
        return cls(
            turns=1,
            replies=False,
            thinking=False,
            tool_calls=False,
            channel_sessions=0,
            subagents=0,
            compactions=0,
            model_changes=0,
            autonomous_runs=0,
            cron_isolated_runs=0,
            cron_main_runs=0,
            config_backups=0,
            backup_without_meta=False,
            logs=False,
            stale_logs=0,
            dropped_tool=False,
            media=0,
            memory_files=0,
            soft_deleted=0,
            workspace=False,
            credentials=False,
            prompt_reports=False,
        )

    @classmethod
    def random(cls, seed):
        rng = random.Random(seed)
        return cls(
            turns=rng.randint(1, 7),
            thinking=rng.random() < 0.7,
            tool_calls=rng.random() < 0.8,
            channel_sessions=rng.randint(0, 2),
            subagents=rng.randint(0, 2),
            subagent_cleanup=rng.random() < 0.5,
            compactions=rng.randint(0, 1),
            model_changes=rng.randint(0, 2),
            autonomous_runs=rng.randint(0, 1),
            cron_isolated_runs=rng.randint(0, 3),
            cron_main_runs=rng.randint(0, 2),
            config_backups=rng.randint(0, 3),
            backup_without_meta=rng.random() < 0.5,
            logs=rng.random() < 0.85,
            stale_logs=rng.randint(0, 1),
            dropped_tool=rng.random() < 0.5,
            alternate_marker=rng.random() < 0.3,
            media=rng.randint(0, 2),
            memory_files=rng.randint(0, 2),
            soft_deleted=rng.randint(0, 1),
            workspace=rng.random() < 0.8,
            credentials=rng.random() < 0.7,
            prompt_reports=rng.random() < 0.8,
            variant_dialect=rng.random() < 0.3,
        )

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InputError("A scenario must be a mapping.")
        if data.get("version") != SCENARIO_VERSION:
            raise InputError("Scenario must declare version: {}.".format(SCENARIO_VERSION))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError("Unknown scenario fields: {}.".format(", ".join(unknown)))
        return cls(**data)

    def to_dict(self):
        return asdict(self)


def load_scenario(path):
    """Reads a ScenarioSpec from YAML or JSON. `preset: full|minimal` starts from a preset."""
    data = read_yaml(path, "Scenario")
    if isinstance(data, dict) and "preset" in data:
        data = dict(data)
        preset = data.pop("preset")
        if preset not in ("full", "minimal"):
            raise InputError("Unknown scenario preset {!r}.".format(preset))
        base = getattr(ScenarioSpec, preset)().to_dict()
        base.update(data)
        data = base
    return ScenarioSpec.from_dict(data)


@dataclass
class GroundTruth:
    """Everything a generated store is known to contain, as plain data."""

    seed: int
    spec: ScenarioSpec
    capture_time: int = 0
    store_dir: str = STORE_DIRNAME
    log_dir: Optional[str] = None
    inventory: List[Tuple[str, str, str]] = field(default_factory=list)
    sessions: Dict[str, dict] = field(default_factory=dict)
    main_session_id: Optional[str] = None
    pairings: Dict[str, dict] = field(default_factory=dict)
    logged_calls: List[str] = field(default_factory=list)
    delegation: List[dict] = field(default_factory=list)
    cron: List[dict] = field(default_factory=list)
    capability_sets: List[Tuple[str, ...]] = field(default_factory=list)
    autonomy: Dict[str, dict] = field(default_factory=dict)
    config_order: List[str] = field(default_factory=list)
    manifest: Dict[str, str] = field(default_factory=dict)
    settings: Dict[str, object] = field(default_factory=dict)

    def session_by_key(self, key):
        for session_id, info in self.sessions.items():
            if info.get("key") == key:
                return session_id
        return None

    def to_dict(self):
        return {
            "seed": self.seed,
            "spec": self.spec.to_dict(),
            "capture_time": self.capture_time,
            "store_dir": self.store_dir,
            "log_dir": self.log_dir,
            "inventory": [list(item) for item in self.inventory],
            "sessions": self.sessions,
            "main_session_id": self.main_session_id,
            "pairings": self.pairings,
            "logged_calls": list(self.logged_calls),
            "delegation": self.delegation,
            "cron": self.cron,
            "capability_sets": [list(s) for s in self.capability_sets],
            "autonomy": self.autonomy,
            "config_order": list(self.config_order),
            "manifest": self.manifest,
            "settings": self.settings,
        }


@dataclass(frozen=True)
class _Action:
    tool: str
    arguments: dict
    output: str
    origin: str
    autonomy: str
    thinking: str = ""
    exec_details: bool = False
    exit_code: int = 0


@dataclass(frozen=True)
class _Turn:
    kind: str
    text: str
    actions: Tuple[_Action, ...] = ()
    reply: str = "Done."


class _SessionWriter(object):
    """Appends entries to one transcript, keeping the parentId chain."""

    def __init__(self, forge, key, session_id, agent_id=AGENT_ID):
        self.forge = forge
        self.key = key
        self.session_id = session_id
        self.agent_id = agent_id
        self.lines = []
        self.tags = []
        self.times = []
        self.last_id = None
        self.model = MODEL
        self.messages = 0

    def _record(self, record, time, tag):
        if self.forge.spec.variant_dialect:
            record = _rename(record, VARIANT_ENTRY_FIELDS)
            if isinstance(record.get("message"), dict):
                record["message"] = _rename(record["message"], VARIANT_MESSAGE_FIELDS)
        self.lines.append(record)
        self.tags.append(tag)
        self.times.append(time)

    def _entry(self, kind, time, **extra):
        entry_id = self.forge.short_id()
        record = {"type": kind, "id": entry_id, "parentId": self.last_id, "timestamp": iso_utc(time)}
        record.update(extra)
        self.last_id = entry_id
        return entry_id, record

    def header(self, time):
        record = {
            "type": "session",
            "version": 3,
            "id": self.session_id,
            "timestamp": iso_utc(time),
            "cwd": HOME + "/.openclaw/workspace",
        }
        self.lines.append(record)
        self.tags.append("SessionHeader")
        self.times.append(time)

    def model_change(self, time, model):
        self.model = model
        _, record = self._entry("model_change", time, provider=MODEL_PROVIDER, modelId=model)
        self._record(record, time, "ModelChange")

    def custom(self, time, kind, **extra):
        _, record = self._entry(kind, time, **extra)
        self._record(record, time, "Custom")

    def compaction(self, time, tokens_before):
        _, record = self._entry(
            "compaction", time, summary="Earlier turns summarised.", firstKeptEntryId=self.last_id, tokensBefore=tokens_before
        )
        self._record(record, time, "Compaction")

    def message(self, time, role, content, **extra):
        message = {"role": role, "content": content, "timestamp": time}
        if role == "assistant":
            message.update(
                {
                    "api": "google-generative-ai",
                    "provider": MODEL_PROVIDER,
                    "model": self.model,
                    "usage": {
                        "input": self.forge.rng.randint(800, 4000),
                        "output": self.forge.rng.randint(20, 400),
                        "cost": {"total": round(self.forge.rng.random() / 100, 6)},
                    },
                }
            )
        message.update(extra)
        entry_id, record = self._entry("message", time, message=message)
        self._record(record, time, "Message:{}".format(role))
        self.messages += 1
        return entry_id

    def content(self):
        return "".join(json.dumps(line, separators=(",", ":"), ensure_ascii=False) + "\n" for line in self.lines)


def _rename(record, renames):
    return {renames.get(key, key): value for key, value in record.items()}


class StoreForge(object):
    """
    Builds one synthetic store. Use `generate_store` rather than this class directly.
    """

    RUN_GAP_MS = (60000, 180000)
    CHILD_DELAY_MS = 8000
    CRON_INJECT_DELAY_MS = 2000
    SNAPSHOT_DELAY_MS = 300

    def __init__(self, dest, spec, seed=0):
        self.dest = dest
        self.spec = spec
        self.rng = random.Random(seed)
        self.store = os.path.join(dest, STORE_DIRNAME)
        self.logs = os.path.join(dest, DEFAULT_LOG_SUBDIR)
        self.truth = GroundTruth(seed=seed, spec=spec)
        self.files = {}
        self.log_lines = []
        self.writers = []
        self.index = {}
        self.now = BASE_TIME
        self.registry = {}
        self.cron_runs = {}
        self.tools = list(TOOL_SET)
        self.snapshot_count = 0
        self.memory = {}
        self.identity = {}
        self.main_writer = None
        self.pending_spawn = None
        self._child = None

    # --- primitives ---------------------------------------------------------------------------

    def uuid(self):
        return str(uuid.UUID(int=self.rng.getrandbits(128), version=4))

    def short_id(self):
        return "{:08x}".format(self.rng.getrandbits(32))

    def call_id(self):
        return "call_{:016x}".format(self.rng.getrandbits(64))

    def advance(self, low, high):
        self.now += self.rng.randint(low, high)
        return self.now

    def put(self, kind, rel, content, mtime, root="store"):
        if isinstance(content, str):
            content = content.encode("utf-8")
        self.files[(root, rel)] = (kind, content, mtime)

    def put_json(self, kind, rel, obj, mtime):
        self.put(kind, rel, json.dumps(obj, indent=2, ensure_ascii=False) + "\n", mtime)

    def log(self, time, subsystem, message, **extra):
        if not self.spec.logs:
            return
        if self.spec.variant_dialect:
            record = {"0": message, "_meta": {"date": iso_utc(time), "name": subsystem, "logLevelName": "INFO"}}
            renames = {"runId": "run_id", "toolCallId": "tool_call_id", "tool": "tool_name"}
            record.update({renames.get(k, k): v for k, v in extra.items()})
        else:
            record = {"time": iso_utc(time), "level": "info", "subsystem": subsystem, "msg": message}
            record.update(extra)
        self.log_lines.append((time, len(self.log_lines), record))

    def schema_snapshot(self, time):
        marker = DEFAULT_SCHEMA_MARKERS[0]
        if self.spec.alternate_marker and self.snapshot_count % 2 == 1:
            marker = ALTERNATE_SCHEMA_MARKER
        self.snapshot_count += 1
        self.log(time, "agent/embedded", "{} ({} tools)".format(marker, len(self.tools)), tools=[{"name": t} for t in self.tools])
        if self.spec.logs:
            self.truth.capability_sets.append(tuple(sorted(self.tools)))

    # --- scripted conversation ----------------------------------------------------------------

    def header_text(self, time, text, name="Ada", handle="ada", uid="42", message_id=None):
        stamp = iso_utc(time)
        head = "[Telegram {} (@{}) id:{} {} {} UTC] ".format(name, handle, uid, stamp[:10], stamp[11:16])
        message_id = message_id if message_id is not None else self.rng.randint(100, 9999)
        return "{}{}\n[message_id: {}]".format(head, text, message_id)

    def thinking_block(self, text):
        return [{"type": "thinking", "thinking": text}] if self.spec.thinking and text else []

    def run(self, writer, turn, opener_text, run_id=None, opener=True, stage_logs=True):
        """
        Writes one run: optional user opener, one assistant entry per action with its
        toolResult, then the closing reply. Returns the time of the last entry.
        """
        run_id = run_id or self.uuid()
        start = self.now
        if opener:
            writer.message(start, "user", [{"type": "text", "text": opener_text}])
            if stage_logs:
                self.log(start + 50, "agent/embedded", "embedded run agent start", runId=run_id, sessionKey=writer.key)
        if writer is self.main_writer and opener and self.snapshot_due(writer):
            self.schema_snapshot(start + self.SNAPSHOT_DELAY_MS)
        t = start + self.SNAPSHOT_DELAY_MS + 50
        for action in turn.actions:
            call = self.call_id()
            t += self.rng.randint(600, 1500)
            blocks = self.thinking_block(action.thinking) + [
                {"type": "toolCall", "id": call, "name": action.tool, "arguments": action.arguments}
            ]
            writer.message(t, "assistant", blocks, stopReason="toolUse")
            self.log(t + 5, "agent/embedded", "embedded run tool start", runId=run_id, tool=action.tool, toolCallId=call)
            duration = self.rng.randint(40, 900)
            result_time = t + duration + 20
            extra = {"toolCallId": call, "toolName": action.tool, "isError": False}
            record = {"session": writer.session_id, "tool": action.tool, "is_error": False}
            if action.exec_details:
                extra["details"] = {"durationMs": duration, "exitCode": action.exit_code, "status": "completed"}
                record.update(duration_ms=duration, exit_code=action.exit_code, status="completed")
            output = self.spawn_result() if action.tool == "sessions_spawn" else action.output
            writer.message(result_time, "toolResult", [{"type": "text", "text": output}], **extra)
            self.log(result_time - 5, "agent/embedded", "embedded run tool end", runId=run_id, tool=action.tool, toolCallId=call)
            self.truth.pairings[call] = record
            if self.spec.logs:
                self.truth.logged_calls.append(call)
            self.truth.autonomy[call] = {"origin": action.origin, "autonomy": action.autonomy, "session": writer.session_id}
            t = result_time
            self.after_action(writer, action, call, result_time)
        if self.spec.replies:
            t += self.rng.randint(600, 1200)
            if self.spec.thinking:
                text = "<think>sentinel-reasoning-{}</think><final>{}</final>".format(self.short_id(), turn.reply)
            else:
                text = "<final>{}</final>".format(turn.reply)
            writer.message(t, "assistant", [{"type": "text", "text": text}], stopReason="stop")
            if opener and stage_logs:
                self.log(t + 20, "agent/embedded", "embedded run agent end", runId=run_id, sessionKey=writer.key)
        self.now = max(self.now, t)
        return t

    def snapshot_due(self, writer):
        if writer.messages <= 1:
            return True
        if self.spec.dropped_tool and DROPPED_TOOL in self.tools and writer.messages > 3:
            self.tools.remove(DROPPED_TOOL)
            return True
        return False

    def after_action(self, writer, action, call, time):
        path = action.arguments.get("path")
        if action.tool == "write" and path in self.identity:
            self.identity[path] = (action.arguments["content"], time)
        elif action.tool == "edit" and path in self.memory:
            before, _ = self.memory[path]
            self.memory[path] = (before.replace(action.arguments["oldText"], action.arguments["newText"], 1), time)
        elif action.tool == "sessions_spawn":
            self.pending_spawn = (writer, call, time)

    def memory_paths(self):
        return sorted(self.memory)

    def turn_catalog(self):
        """The main session's turns, in order of use."""
        turns = [_Turn("chat", "good morning, anything on today?", reply="Morning! Nothing urgent.")]
        if self.spec.tool_calls:
            turns.append(
                _Turn(
                    "list",
                    "can you list what is in the workspace",
                    (
                        _Action(
                            "exec",
                            {"command": "ls -la"},
                            "AGENTS.md\nSOUL.md\nUSER.md\nmemory\n",
                            "UserMessage",
                            "InterpretivelyDerived",
                            "The user wants a directory listing.",
                            exec_details=True,
                        ),
                    ),
                    reply="Here is the listing.",
                )
            )
            turns.append(
                _Turn(
                    "delete",
                    "please delete /tmp/old-report.txt",
                    (
                        _Action(
                            "exec",
                            {"command": "rm /tmp/old-report.txt"},
                            "",
                            "UserMessage",
                            "DirectlyInstructed",
                            "Removing the file the user named.",
                            exec_details=True,
                        ),
                    ),
                    reply="Deleted.",
                )
            )
            if self.spec.workspace:
                turns.append(
                    _Turn(
                        "read_soul",
                        "show me SOUL.md",
                        (
                            _Action(
                                "read",
                                {"path": "SOUL.md"},
                                IDENTITY_CONTENT["SOUL.md"],
                                "UserMessage",
                                "DirectlyInstructed",
                                "Reading the persona file.",
                            ),
                        ),
                        reply="That is my persona file.",
                    )
                )
                turns.append(
                    _Turn(
                        "remember",
                        "remember that I prefer tea over coffee",
                        (
                            _Action(
                                "write",
                                {"path": "USER.md", "content": IDENTITY_CONTENT["USER.md"] + "- Prefers tea\n"},
                                "Wrote USER.md",
                                "UserMessage",
                                "InterpretivelyDerived",
                                "This belongs with the user profile.",
                            ),
                        ),
                        reply="Noted.",
                    )
                )
                today = self.memory_paths()[-1] if self.memory else None
                if today is not None:
                    turns.append(
                        _Turn(
                            "tidy",
                            "tidy up my notes please",
                            (
                                _Action(
                                    "read",
                                    {"path": today},
                                    self.memory[today][0],
                                    "UserMessage",
                                    "InterpretivelyDerived",
                                    "Let me look at the notes first.",
                                ),
                                _Action(
                                    "edit",
                                    {"path": today, "oldText": TODAY_NOTE, "newText": TIDIED_NOTE},
                                    "Edited " + today,
                                    "UserMessage",
                                    "InterpretivelyDerived",
                                    "Reordering the list.",
                                ),
                            ),
                            reply="Tidied.",
                        )
                    )
        return turns

    def spawn_turn(self, task):
        return _Turn(
            "spawn",
            "look into the weekend plans in the background",
            (
                _Action(
                    "sessions_spawn",
                    {"task": task, "label": "weekend", "cleanup": "delete" if self.spec.subagent_cleanup else "keep"},
                    "",
                    "UserMessage",
                    "InterpretivelyDerived",
                    "A helper can do this without blocking.",
                ),
            ),
            reply="A helper is on it.",
        )

    # --- sessions -----------------------------------------------------------------------------

    def new_session(self, key, start):
        writer = _SessionWriter(self, key, self.uuid())
        writer.header(start)
        self.writers.append(writer)
        return writer

    def preamble(self, writer):
        writer.model_change(self.now + 1, MODEL)
        writer.custom(self.now + 2, "thinking_level_change", thinkingLevel="low")
        self.now += 3

    def index_entry(self, writer, extra=None):
        record = {
            "sessionId": writer.session_id,
            "updatedAt": max(writer.times),
            "sessionFile": "{}/.openclaw/agents/{}/sessions/{}.jsonl".format(HOME, writer.agent_id, writer.session_id),
            "chatType": "direct",
            "channel": "telegram",
            "lastTo": "telegram:42",
            "modelProvider": MODEL_PROVIDER,
            "model": writer.model,
            "inputTokens": self.rng.randint(1000, 90000),
            "outputTokens": self.rng.randint(100, 9000),
        }
        if self.spec.prompt_reports:
            injected = []
            if self.spec.workspace:
                for name in sorted(IDENTITY_CONTENT):
                    injected.append(
                        {
                            "name": name,
                            "path": "{}/.openclaw/workspace/{}".format(HOME, name),
                            "missing": False,
                            "rawChars": len(IDENTITY_CONTENT[name]),
                            "injectedChars": len(IDENTITY_CONTENT[name]),
                            "truncated": False,
                        }
                    )
            record["systemPromptReport"] = {
                "source": "run",
                "generatedAt": max(writer.times),
                "systemPrompt": {"chars": self.rng.randint(8000, 20000)},
                "injectedWorkspaceFiles": injected,
                "toolNames": list(self.tools),
            }
        record.update(extra or {})
        if self.spec.variant_dialect:
            record = _rename(record, VARIANT_INDEX_FIELDS)
        self.index[writer.key] = record

    def session_truth(self, writer, status, path):
        self.truth.sessions[writer.session_id] = {
            "key": writer.key if status == "Indexed" else None,
            "status": status,
            "path": path,
            "tags": list(writer.tags),
        }

    def transcript_mtime(self, writer):
        return max(writer.times)

    # --- build --------------------------------------------------------------------------------

    def build_workspace(self):
        base = BASE_TIME - 2 * DAY_MS
        if self.spec.memory_files:
            days = [utc_date(BASE_TIME - DAY_MS), utc_date(BASE_TIME)][-self.spec.memory_files :]
            notes = {utc_date(BASE_TIME - DAY_MS): YESTERDAY_NOTE, utc_date(BASE_TIME): TODAY_NOTE}
            for day in days:
                rel = "memory/{}.md".format(day.isoformat())
                self.memory[rel] = ("# {}\n\n{}".format(day.isoformat(), notes[day]), BASE_TIME - DAY_MS // 2)
        if self.spec.workspace:
            for name, content in IDENTITY_CONTENT.items():
                self.identity[name] = (content, base)

    def write_workspace(self):
        for name, (content, mtime) in sorted(self.identity.items()):
            self.put(ArtifactKind.WorkspaceIdentityFile, "workspace/" + name, content, mtime)
        for rel, (content, mtime) in sorted(self.memory.items()):
            self.put(ArtifactKind.DailyMemoryLog, "workspace/" + rel, content, mtime)
        if self.spec.workspace:
            self.put(
                ArtifactKind.SkillDefinition,
                "workspace/skills/weather/SKILL.md",
                "---\nname: weather\ndescription: Current weather via wttr.in\n---\n",
                BASE_TIME - 3 * DAY_MS,
            )
            self.put(
                ArtifactKind.SkillDefinition,
                "skills/summarize/SKILL.md",
                "---\nname: summarize\ndescription: Summarise long text\n---\n",
                BASE_TIME - 3 * DAY_MS,
            )
            self.put(ArtifactKind.SemanticMemoryDb, "memory/main.sqlite", _sqlite_bytes(self.dest), BASE_TIME - DAY_MS)

    def build_config(self):
        live_touched = BASE_TIME - 5 * 60 * 1000
        live = _config_document(MODEL, ["telegram"], live_touched, self.spec.credentials)
        self.put_json(ArtifactKind.Config, "openclaw.json", live, live_touched)
        order = [(live_touched, "openclaw.json")]
        names = ["openclaw.json.bak"] + ["openclaw.json.bak.{}".format(i) for i in range(1, self.spec.config_backups)]
        names = names[: self.spec.config_backups]
        times = [BASE_TIME - (k + 1) * DAY_MS - self.rng.randint(0, 3600000) for k in range(len(names))]
        # Suffix order says nothing about age.
        self.rng.shuffle(times)
        for k, (name, touched) in enumerate(zip(names, times)):
            without_meta = self.spec.backup_without_meta and k == len(names) - 1
            model = "gemini-2.5-pro" if k % 2 == 0 else "gemini-2.5-flash"
            channels = ["telegram"] if k % 2 else ["telegram", "discord"]
            document = _config_document(model, channels, None if without_meta else touched, self.spec.credentials)
            self.put_json(ArtifactKind.ConfigBackup, name, document, touched)
            order.append((touched, name))
        self.truth.config_order = [name for _, name in sorted(order)]

    def build_main_session(self):
        writer = self.new_session(MAIN_KEY, self.now)
        self.main_writer = writer
        self.truth.main_session_id = writer.session_id
        self.preamble(writer)
        catalog = self.turn_catalog()
        # Turns that change workspace files run once; later turns cycle the rest.
        repeatable = [turn for turn in catalog if turn.kind not in ("remember", "tidy")]
        for i in range(self.spec.turns):
            if i < len(catalog):
                turn = catalog[i]
            else:
                turn = repeatable[(i - len(catalog)) % len(repeatable)]
            self.now += 1000
            user = self.header_text(self.now, turn.text)
            self.pending_spawn = None
            self.run(writer, turn, user)
            if i == 0 and self.spec.model_changes:
                for _ in range(self.spec.model_changes):
                    self.now += 500
                    writer.model_change(self.now, SWITCHED_MODEL if writer.model == MODEL else MODEL)
            if i == 1 and self.spec.compactions:
                for _ in range(self.spec.compactions):
                    self.now += 500
                    writer.compaction(self.now, self.rng.randint(30000, 120000))
            self.advance(*self.RUN_GAP_MS)
            if i == 0:
                self.media_turn(writer)
                self.spawn_turns(writer)
        for _ in range(self.spec.autonomous_runs):
            self.autonomous_run(writer)
        return writer

    def media_turn(self, writer):
        if not self.spec.media:
            return
        notes = []
        for k in range(self.spec.media):
            media_id = self.uuid()
            if k % 2 == 0:
                name, mime = "holiday-photo---{}.jpg".format(media_id), "image/jpeg"
            else:
                name, mime = "{}.ogg".format(media_id), "audio/ogg"
            rel = "media/inbound/" + name
            self.put(ArtifactKind.InboundMedia, rel, bytes(self.rng.getrandbits(8) for _ in range(64)), self.now)
            notes.append("[media attached: {}/.openclaw/{} ({})]".format(HOME, rel, mime))
        self.now += 1000
        text = self.header_text(self.now, "what do you make of these?\n" + "\n".join(notes))
        self.run(writer, _Turn("media", "", reply="Nice photo."), text)
        self.advance(*self.RUN_GAP_MS)

    def spawn_turns(self, writer):
        if not self.spec.tool_calls:
            return
        for _ in range(self.spec.subagents):
            target = self.memory_paths()[0] if self.memory else "SOUL.md"
            task = "Read {} and summarise the weekend plans".format(target)
            turn = self.spawn_turn(task)
            self.now += 1000
            parent_start = self.now
            self.pending_spawn = None
            child_key = "agent:main:subagent:{}".format(self.uuid())
            child_id = self.uuid()
            run_id = self.uuid()
            self._child = (child_key, child_id, run_id)
            self.run(writer, turn, self.header_text(self.now, turn.text))
            _, call, spawn_time = self.pending_spawn
            self.now = max(self.now + 1000, parent_start + self.CHILD_DELAY_MS)
            child = _SessionWriter(self, child_key, child_id)
            child.header(self.now - 10)
            self.writers.append(child)
            content = self.memory[target][0] if target in self.memory else IDENTITY_CONTENT["SOUL.md"]
            child_turn = _Turn(
                "child",
                task,
                (_Action("read", {"path": target}, content, "UserMessage", "DirectlyInstructed", "Reading the note."),),
                reply="Hiking if the weather holds.",
            )
            started = self.now
            ended = self.run(child, child_turn, task, run_id=run_id)
            self.registry[run_id] = {
                "runId": run_id,
                "childSessionKey": child_key,
                "childSessionId": child_id,
                "requesterSessionKey": MAIN_KEY,
                "requesterDisplayKey": "main",
                "task": task,
                "cleanup": "delete" if self.spec.subagent_cleanup else "keep",
                "label": "weekend",
                "createdAt": spawn_time,
                "startedAt": started,
                "endedAt": ended,
                "archiveAtMs": spawn_time + 60 * 60 * 1000,
            }
            if self.spec.subagent_cleanup:
                self.session_truth(child, "Orphaned", self.transcript_rel(child))
            else:
                self.index_entry(child, {"spawnedBy": MAIN_KEY})
                self.session_truth(child, "Indexed", self.transcript_rel(child))
            self.truth.delegation.append(
                {
                    "parent": writer.session_id,
                    "child": child_id,
                    "spawn_tool_call_id": call,
                    "cleanup_observed": self.spec.subagent_cleanup,
                }
            )
            self.advance(*self.RUN_GAP_MS)

    def spawn_result(self):
        child_key, child_id, run_id = self._child
        return json.dumps({"status": "accepted", "childSessionKey": child_key, "childSessionId": child_id, "runId": run_id})

    def autonomous_run(self, writer):
        """A follow-up run the agent starts on its own after reading a memory note."""
        if not self.memory or not self.spec.tool_calls:
            return
        path = self.memory_paths()[0]
        if self.spec.thinking:
            first = ("PriorReasoning", "AutonomouslyInitiated")
            second = ("MemoryEntry", "AutonomouslyInitiated")
        else:
            # Without recorded reasoning the opening read has no traceable origin.
            first = ("Unresolved", "Indeterminate")
            second = ("PriorReasoning", "AutonomouslyInitiated")
        turn = _Turn(
            "autonomous",
            "",
            (
                _Action("read", {"path": path}, self.memory[path][0], first[0], first[1], "Time to check the notes."),
                _Action(
                    "message",
                    {"action": "send", "to": "telegram:42", "message": "Reminder: dentist on Friday at 10:00"},
                    "sent",
                    second[0],
                    second[1],
                    "The note in {} mentions the dentist, a reminder is due.".format(path.rsplit("/", 1)[-1]),
                ),
            ),
            reply="Reminder sent.",
        )
        self.now += 30000
        self.run(writer, turn, None, opener=False, stage_logs=False)
        self.advance(*self.RUN_GAP_MS)

    def build_channel_sessions(self):
        for k in range(self.spec.channel_sessions):
            uid = str(77 + k)
            key = "agent:main:telegram:direct:{}".format(uid)
            writer = self.new_session(key, self.now)
            self.preamble(writer)
            self.now += 1000
            text = self.header_text(self.now, "hi, is Ada around?", name="Bob", handle="bob{}".format(k), uid=uid)
            self.run(writer, _Turn("chat", text, reply="Ada will get back to you."), text)
            self.index_entry(writer, {"lastTo": "telegram:" + uid, "origin": {"provider": "telegram", "from": "telegram:" + uid, "label": "Bob"}})
            self.session_truth(writer, "Indexed", self.transcript_rel(writer))
            self.advance(*self.RUN_GAP_MS)

    def build_cron(self, main):
        jobs = []
        if self.spec.cron_isolated_runs:
            jobs.append(
                {
                    "id": ISOLATED_JOB,
                    "name": "Morning digest",
                    "enabled": True,
                    "schedule": {"kind": "cron", "expr": "0 8 * * *", "tz": "UTC"},
                    "sessionTarget": "isolated",
                    "payload": {"kind": "agentTurn", "message": "Send Ada the morning digest"},
                }
            )
            key = "agent:main:cron:{}".format(ISOLATED_JOB)
            writer = None
            for _ in range(self.spec.cron_isolated_runs):
                run_time = self.now
                if writer is None:
                    writer = self.new_session(key, run_time + 50)
                self.now = run_time + 100
                turn = _Turn(
                    "cron",
                    "",
                    (
                        _Action(
                            "message",
                            {"action": "send", "to": "telegram:42", "message": "Digest: two new notes"},
                            "sent",
                            "CronTrigger",
                            "AutonomouslyInitiated",
                            "Compose the digest.",
                        ),
                    ),
                    reply="Digest delivered.",
                )
                end = self.run(writer, turn, "[cron:{}] Send Ada the morning digest".format(ISOLATED_JOB))
                self.cron_run(ISOLATED_JOB, run_time, end, {"sessionId": writer.session_id, "sessionKey": key})
                self.truth.cron.append(
                    {"job_id": ISOLATED_JOB, "time": run_time, "venue": "IsolatedSession", "session": writer.session_id}
                )
                self.advance(*self.RUN_GAP_MS)
            self.index_entry(writer, {"channel": "cron", "lastTo": None})
            self.session_truth(writer, "Indexed", self.transcript_rel(writer))
        if self.spec.cron_main_runs:
            jobs.append(
                {
                    "id": MAIN_JOB,
                    "name": "Nightly backup",
                    "enabled": True,
                    "schedule": {"kind": "every", "everyMs": DAY_MS},
                    "sessionTarget": "main",
                    "payload": {"kind": "systemEvent", "text": "Run the workspace backup"},
                }
            )
            for _ in range(self.spec.cron_main_runs):
                run_time = self.now
                self.now = run_time + self.CRON_INJECT_DELAY_MS
                actions = ()
                if self.spec.tool_calls:
                    actions = (
                        _Action(
                            "exec",
                            {"command": "tar czf /tmp/workspace-backup.tgz workspace"},
                            "",
                            "CronTrigger",
                            "AutonomouslyInitiated",
                            "Running the scheduled backup.",
                            exec_details=True,
                        ),
                    )
                turn = _Turn("cron", "", actions, reply="Backup finished.")
                end = self.run(main, turn, "System: [cron:{}] Run the workspace backup".format(MAIN_JOB))
                self.cron_run(MAIN_JOB, run_time, end, {})
                self.truth.cron.append(
                    {"job_id": MAIN_JOB, "time": run_time, "venue": "MainSession", "session": main.session_id}
                )
                self.advance(*self.RUN_GAP_MS)
        if jobs:
            for job in jobs:
                runs = self.cron_runs.get(job["id"], [])
                if runs:
                    job["state"] = {"lastRunAtMs": runs[-1]["ts"], "lastStatus": "ok"}
            last = max([r["ts"] for runs in self.cron_runs.values() for r in runs] or [self.now])
            self.put_json(ArtifactKind.CronJobs, "cron/jobs.json", {"version": 1, "jobs": jobs}, last)
        for job_id, runs in sorted(self.cron_runs.items()):
            lines = []
            for run in runs:
                if self.spec.variant_dialect:
                    run = _rename(run, {"ts": "runAtMs", "status": "outcome"})
                lines.append(json.dumps(run, separators=(",", ":")) + "\n")
            self.put(ArtifactKind.CronRunLog, "cron/runs/{}.jsonl".format(job_id), "".join(lines), runs[-1]["ts"])

    def cron_run(self, job_id, run_time, end, extra):
        record = {"ts": run_time, "jobId": job_id, "action": "finished", "status": "ok", "durationMs": end - run_time}
        record.update(extra)
        self.cron_runs.setdefault(job_id, []).append(record)

    def build_soft_deleted(self):
        for k in range(self.spec.soft_deleted):
            start = BASE_TIME - (3 + k) * 60 * 60 * 1000
            writer = _SessionWriter(self, MAIN_KEY, self.uuid())
            writer.header(start)
            saved = self.now
            self.now = start + 1000
            text = self.header_text(self.now, "what was the name of that restaurant?")
            self.run(writer, _Turn("chat", text, reply="La Piazza."), text, stage_logs=False)
            self.now = saved
            deleted_at = max(writer.times) + 10 * 60 * 1000
            stamp = iso_utc(deleted_at).replace(":", "-")
            rel = "agents/{}/sessions/{}.jsonl.deleted.{}".format(AGENT_ID, writer.session_id, stamp)
            self.put(ArtifactKind.DeletedSessionTranscript, rel, writer.content(), max(writer.times))
            self.session_truth(writer, "SoftDeleted", rel)

    def build_credentials(self):
        if not self.spec.credentials:
            return
        when = BASE_TIME - 3 * DAY_MS
        self.put_json(ArtifactKind.ChannelCredentials, "credentials/telegram-allowFrom.json", {"version": 1, "allowFrom": ["42"]}, when)
        self.put_json(ArtifactKind.ChannelCredentials, "credentials/telegram-pairing.json", {"version": 1, "requests": []}, when)
        self.put_json(
            ArtifactKind.AuthProfiles,
            "agents/main/agent/auth-profiles.json",
            {"version": 1, "profiles": {"google:default": {"type": "api_key", "provider": "google", "key": "AIza-" + self.short_id()}}},
            when,
        )
        self.put_json(
            ArtifactKind.DeviceIdentity,
            "identity/device.json",
            {"version": 1, "deviceId": self.short_id() * 8, "publicKeyPem": "-----BEGIN PUBLIC KEY-----\nMCow\n-----END PUBLIC KEY-----\n"},
            when,
        )

    def transcript_rel(self, writer):
        return "agents/{}/sessions/{}.jsonl".format(writer.agent_id, writer.session_id)

    def write_logs(self):
        if not self.spec.logs:
            return
        self.truth.log_dir = DEFAULT_LOG_SUBDIR.replace(os.sep, "/")
        for k in range(self.spec.stale_logs):
            old = BASE_TIME - (10 + k) * DAY_MS
            self.log(old, "gateway", "gateway listening on ws://127.0.0.1:18789")
            self.log(old + 60000, "gateway", "gateway shutting down")
        by_day = {}
        for time, order, record in sorted(self.log_lines, key=lambda item: (item[0], item[1])):
            by_day.setdefault(utc_date(time), []).append((time, record))
        for day, lines in sorted(by_day.items()):
            name = "openclaw-{}.log".format(day.isoformat())
            content = "".join(json.dumps(r, separators=(",", ":"), ensure_ascii=False) + "\n" for _, r in lines)
            self.put(ArtifactKind.RuntimeLog, name, content, lines[-1][0], root="logs")

    def build(self):
        self.build_workspace()
        self.build_config()
        self.build_credentials()
        self.build_soft_deleted()
        self.log(self.now - 60000, "gateway", "gateway listening on ws://127.0.0.1:18789")
        if self.spec.credentials:
            self.log(self.now - 55000, "gateway/channels/telegram", "[default] starting provider (@claw_bot)")
        main = self.build_main_session()
        self.build_channel_sessions()
        self.build_cron(main)
        self.index_entry(main, {"origin": {"provider": "telegram", "from": "telegram:42", "label": "Ada"}})
        self.session_truth(main, "Indexed", self.transcript_rel(main))

        for writer in self.writers:
            self.put(ArtifactKind.SessionTranscript, self.transcript_rel(writer), writer.content(), self.transcript_mtime(writer))
        last_activity = max(t for writer in self.writers for t in writer.times)
        cron_times = [r["ts"] for runs in self.cron_runs.values() for r in runs]
        last_activity = max([last_activity] + cron_times)
        self.put_json(ArtifactKind.SessionIndex, "agents/{}/sessions/sessions.json".format(AGENT_ID), self.index, last_activity)
        if self.registry:
            self.put_json(
                ArtifactKind.SubagentRegistry,
                "subagents/runs.json",
                {"version": 2, "runs": self.registry},
                max(r["createdAt"] for r in self.registry.values()),
            )
        self.write_workspace()
        self.write_logs()
        self.truth.capture_time = last_activity + CAPTURE_MARGIN_MS
        if self.spec.alternate_marker:
            self.truth.settings["schema_markers"] = list(DEFAULT_SCHEMA_MARKERS) + [ALTERNATE_SCHEMA_MARKER]

    def flush(self):
        """Writes every collected file and pins its mtime."""
        for (root, rel), (kind, content, mtime) in sorted(self.files.items()):
            base = self.store if root == "store" else self.logs
            full = os.path.join(base, *rel.split("/"))
            os.makedirs(os.path.dirname(full), exist_ok=True)
            if kind is ArtifactKind.SemanticMemoryDb:
                os.replace(content.decode("utf-8"), full)
            else:
                with open(full, "wb") as handle:
                    handle.write(content)
            os.utime(full, ns=(mtime * 1000000, mtime * 1000000))
            self.truth.inventory.append((kind.name, root, rel))
            prefix = STORE_DIRNAME if root == "store" else self.truth.log_dir
            self.truth.manifest["{}/{}".format(prefix, rel)] = calc_file_sha256(full)
        self.truth.inventory.sort(key=lambda item: (item[1] != "store", item[2]))


def _config_document(model, channels, touched, with_tokens):
    document = {}
    if touched is not None:
        document["meta"] = {"lastTouchedVersion": "2026.1.29", "lastTouchedAt": iso_utc(touched)}
    document["agents"] = {
        "defaults": {"model": {"primary": "{}/{}".format(MODEL_PROVIDER, model)}, "workspace": HOME + "/.openclaw/workspace"},
        "list": [{"id": AGENT_ID}],
    }
    document["channels"] = {}
    for name in channels:
        section = {"enabled": True, "dmPolicy": "pairing"}
        if with_tokens and name == "telegram":
            section["botToken"] = "123456:AAE-forged-token"
        document["channels"][name] = section
    document["gateway"] = {"port": 18789, "mode": "local"}
    return document


def _sqlite_bytes(dest):
    """Builds a small semantic-memory database next to `dest`; returns its path as bytes."""
    path = os.path.join(dest, ".forge-main.sqlite")
    if os.path.exists(path):
        os.remove(path)
    connection = sqlite3.connect(path)
    try:
        connection.execute("CREATE TABLE chunks (id TEXT PRIMARY KEY, path TEXT, text TEXT)")
        connection.execute("INSERT INTO chunks VALUES ('c1', 'memory/notes.md', 'Dentist Friday')")
        connection.commit()
    finally:
        connection.close()
    return path.encode("utf-8")


def generate_store(dest, spec=None, seed=0):
    """
    Writes a synthetic store under `dest` (`dest/.openclaw` and `dest/tmp/openclaw`) and
    returns its GroundTruth. `dest` must not already hold a store.
    """
    spec = spec or ScenarioSpec.full()
    if os.path.exists(os.path.join(dest, STORE_DIRNAME)):
        raise InputError("{} already holds a store.".format(dest))
    os.makedirs(dest, exist_ok=True)
    forge = StoreForge(dest, spec, seed)
    forge.build()
    forge.flush()
    truth = forge.truth
    logger.info(
        "forged store in %s: %d files, %d sessions, capture time %s",
        dest,
        len(truth.inventory),
        len(truth.sessions),
        iso_utc(truth.capture_time),
    )
    return truth


def save_ground_truth(truth, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(truth.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_ground_truth(path):
    """Reads a GroundTruth written by `save_ground_truth`."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, ValueError) as exc:
        raise InputError("Cannot read ground truth {}: {}".format(path, exc))
    if not isinstance(data, dict) or "spec" not in data:
        raise InputError("{} is not a ground truth file.".format(path))
    data = dict(data)
    data["spec"] = ScenarioSpec.from_dict(data["spec"])
    data["inventory"] = [tuple(item) for item in data.get("inventory", [])]
    data["capability_sets"] = [tuple(item) for item in data.get("capability_sets", [])]
    known = {f.name for f in fields(GroundTruth)}
    return GroundTruth(**{key: value for key, value in data.items() if key in known})


# --- tampering ------------------------------------------------------------------------------


class TamperKind(Enum):
    DeleteTranscriptLine = "DeleteTranscriptLine"
    RemoveIndexEntry = "RemoveIndexEntry"
    DeleteLogs = "DeleteLogs"
    TruncateTranscript = "TruncateTranscript"
    BackdateMtime = "BackdateMtime"


EXPECTED_RULES = {
    TamperKind.DeleteTranscriptLine: "R1",
    TamperKind.RemoveIndexEntry: "R3",
    TamperKind.DeleteLogs: "R5",
    TamperKind.TruncateTranscript: "R7",
    TamperKind.BackdateMtime: "R8",
}


@dataclass(frozen=True)
class TamperOp:
    """
    One tampering step. `target` is a toolCallId, session key, session id or
    store-relative path depending on `kind`; None picks a default from the ground truth.
    """

    kind: TamperKind
    target: Optional[str] = None
    amount_ms: int = DAY_MS

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, str):
            data = {"kind": data}
        try:
            kind = TamperKind(data.get("kind"))
        except ValueError:
            raise InputError("Unknown tamper operation {!r}.".format(data.get("kind")))
        return cls(kind, data.get("target"), int(data.get("amount_ms", DAY_MS)))


@dataclass(frozen=True)
class TamperSpec:
    operations: Tuple[TamperOp, ...] = ()

    @property
    def expected_findings(self):
        return tuple(sorted({EXPECTED_RULES[op.kind] for op in self.operations}, key=lambda r: int(r[1:])))

    @classmethod
    def of(cls, *kinds):
        return cls(tuple(TamperOp(TamperKind(k) if isinstance(k, str) else k) for k in kinds))

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, dict):
            if data.get("version", SCENARIO_VERSION) != SCENARIO_VERSION:
                raise InputError("Unsupported tamper spec version {!r}.".format(data.get("version")))
            data = data.get("operations", [])
        if not isinstance(data, list):
            raise InputError("Tamper operations must be a list.")
        return cls(tuple(TamperOp.from_dict(item) for item in data))


def load_tamper_spec(path):
    return TamperSpec.from_dict(read_yaml(path, "Tamper spec"))


@dataclass(frozen=True)
class AppliedTamper:
    op: TamperOp
    path: str
    expected_rule: str
    detail: str = ""

    def to_dict(self):
        return {"kind": self.op.kind.value, "path": self.path, "expected_rule": self.expected_rule, "detail": self.detail}


def _mtime_ns(path):
    return os.stat(path).st_mtime_ns


def _restore_mtime(path, mtime_ns):
    os.utime(path, ns=(mtime_ns, mtime_ns))


def _read_lines(path):
    with open(path, "rb") as handle:
        return handle.read().split(b"\n")


def _session_path(store, truth, session_id):
    info = truth.sessions.get(session_id)
    if info is None or not info.get("path"):
        raise InputError("No transcript for session {!r} in this store.".format(session_id))
    return os.path.join(store, *info["path"].split("/")), info["path"]


def _delete_transcript_line(store, truth, op):
    call_id = op.target or next(iter(truth.logged_calls), None)
    if call_id is None:
        raise InputError("The store has no logged tool call to delete.")
    for session_id in sorted(truth.sessions):
        full, rel = _session_path(store, truth, session_id)
        lines = _read_lines(full)
        for k, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                record = json.loads(line.decode("utf-8"))
            except ValueError:
                continue
            message = record.get("message") if isinstance(record.get("message"), dict) else {}
            ids = [b.get("id") for b in message.get("content") or [] if isinstance(b, dict) and b.get("type") == "toolCall"]
            if call_id in ids:
                mtime = _mtime_ns(full)
                with open(full, "wb") as handle:
                    handle.write(b"\n".join(lines[:k] + lines[k + 1 :]))
                _restore_mtime(full, mtime)
                return rel, "removed line {} holding toolCall {}".format(k + 1, call_id)
    raise InputError("toolCall {!r} not found in any transcript.".format(call_id))


def _remove_index_entry(store, truth, op):
    key = op.target or MAIN_KEY
    rel = "agents/{}/sessions/sessions.json".format(AGENT_ID)
    full = os.path.join(store, *rel.split("/"))
    mtime = _mtime_ns(full)
    with open(full, "r", encoding="utf-8") as handle:
        index = json.load(handle)
    if key not in index:
        raise InputError("Index has no entry {!r}.".format(key))
    del index[key]
    with open(full, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(index, indent=2, ensure_ascii=False) + "\n")
    _restore_mtime(full, mtime)
    return rel, "removed index entry {}".format(key)


def _delete_logs(dest, truth, op):
    if not truth.log_dir:
        raise InputError("The store has no runtime logs to delete.")
    log_dir = os.path.join(dest, *truth.log_dir.split("/"))
    window_start = utc_date(truth.capture_time - DAY_MS)
    removed = []
    for name in sorted(os.listdir(log_dir)):
        match = LOG_NAME_RE.match(name)
        if match and match.group(1) >= window_start.isoformat():
            os.remove(os.path.join(log_dir, name))
            removed.append(name)
    return truth.log_dir, "deleted {}".format(", ".join(removed) or "nothing")


def _truncate_transcript(store, truth, op):
    full, rel = _session_path(store, truth, op.target or truth.main_session_id)
    mtime = _mtime_ns(full)
    with open(full, "rb") as handle:
        content = handle.read().rstrip(b"\n")
    last = content.rsplit(b"\n", 1)[-1]
    cut = len(content) - len(last) // 2
    with open(full, "wb") as handle:
        handle.write(content[:cut])
    _restore_mtime(full, mtime)
    return rel, "cut the last line after {} bytes".format(cut)


def _backdate_mtime(store, truth, op):
    rel = op.target or truth.sessions[truth.main_session_id]["path"]
    full = os.path.join(store, *rel.split("/"))
    mtime = _mtime_ns(full) - op.amount_ms * 1000000
    _restore_mtime(full, mtime)
    return rel, "mtime moved back {} ms".format(op.amount_ms)


def apply_tamper(dest, tamper, truth):
    """
    Applies `tamper` to the store generated under `dest`.

    Returns (applied operations, rule ids the examiner must report). Except for
    BackdateMtime, every touched file keeps its mtime.
    """
    store = os.path.join(dest, truth.store_dir)
    applied = []
    for op in tamper.operations:
        if op.kind is TamperKind.DeleteTranscriptLine:
            path, detail = _delete_transcript_line(store, truth, op)
        elif op.kind is TamperKind.RemoveIndexEntry:
            path, detail = _remove_index_entry(store, truth, op)
        elif op.kind is TamperKind.DeleteLogs:
            path, detail = _delete_logs(dest, truth, op)
        elif op.kind is TamperKind.TruncateTranscript:
            path, detail = _truncate_transcript(store, truth, op)
        else:
            path, detail = _backdate_mtime(store, truth, op)
        logger.info("tamper %s on %s: %s", op.kind.value, path, detail)
        applied.append(AppliedTamper(op, path, EXPECTED_RULES[op.kind], detail))
    return applied, tamper.expected_findings
