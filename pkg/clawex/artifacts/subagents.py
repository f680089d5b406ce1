# -*- coding: utf-8 -*-
"""
Subagent run registry (`subagents/runs.json`).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from clawex.clawex import MalformedRegistry, ParseWarning
from clawex.utils import alias_value, loads_object, to_utc_ms

logger = logging.getLogger(__name__)

# Runs are swept this long after creation unless archiveAtMs says otherwise.
DEFAULT_ARCHIVE_AFTER_MS = 60 * 60 * 1000


@dataclass(frozen=True)
class SubagentRunRecord:
    run_id: str
    task: Optional[str] = None
    child_session: Optional[str] = None
    child_session_id: Optional[str] = None
    requester_session: Optional[str] = None
    cleanup: Optional[str] = None
    created: Optional[int] = None
    started: Optional[int] = None
    ended: Optional[int] = None
    archive_at_ms: Optional[int] = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def sweep_deadline(self):
        """
        (deadline ms, basis): `archiveAtMs` when recorded, else creation + 60 minutes.
        """
        if self.archive_at_ms is not None:
            return self.archive_at_ms, "archiveAtMs"
        anchor = self.created if self.created is not None else self.started
        if anchor is None:
            return None, "unknown"
        return anchor + DEFAULT_ARCHIVE_AFTER_MS, "default"

    def to_dict(self):
        deadline, basis = self.sweep_deadline
        return {
            "run_id": self.run_id,
            "task": self.task,
            "child_session": self.child_session,
            "child_session_id": self.child_session_id,
            "requester_session": self.requester_session,
            "cleanup": self.cleanup,
            "created": self.created,
            "started": self.started,
            "ended": self.ended,
            "archive_at_ms": self.archive_at_ms,
            "sweep_deadline": deadline,
            "sweep_basis": basis,
        }


@dataclass
class SubagentRegistry:
    records: List[SubagentRunRecord] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)
    present: bool = True
    raw_text: Optional[str] = None


def parse_subagent_registry(content, source="subagents/runs.json"):
    """
    Parses the registry. `content` None means the file is absent, which is a valid state
    worth noting. Content that is not a structured object is kept as raw text with a
    warning instead of raising.
    """
    registry = SubagentRegistry()
    if content is None:
        registry.present = False
        registry.notes.append(
            "subagents/runs.json is absent; absence can itself indicate cleanup or no delegation"
        )
        return registry
    try:
        data = loads_object(content, MalformedRegistry, "Subagent registry")
    except MalformedRegistry as exc:
        registry.warnings.append(ParseWarning(source, "{} (byte offset {})".format(exc, exc.offset)))
        registry.raw_text = content.decode("utf-8", "replace") if isinstance(content, bytes) else content
        return registry
    runs = data.get("runs", data)
    if isinstance(runs, dict):
        items = [(str(k), v) for k, v in sorted(runs.items())]
    elif isinstance(runs, list):
        items = [(None, v) for v in runs]
    else:
        items = []
    for key, record in items:
        if not isinstance(record, dict):
            registry.warnings.append(ParseWarning(source, "run {!r} is not an object".format(key)))
            continue
        run_id = record.get("runId") or key
        if not run_id:
            registry.warnings.append(ParseWarning(source, "run record without runId"))
            continue
        created = to_utc_ms(record.get("createdAt"))
        started = to_utc_ms(alias_value(record, ("startedAt", "createdAt")))
        ended = to_utc_ms(record.get("endedAt"))
        if started is not None and ended is not None and ended < started:
            registry.warnings.append(
                ParseWarning(source, "run {!r} ends before it starts".format(run_id))
            )
        registry.records.append(
            SubagentRunRecord(
                run_id=str(run_id),
                task=record.get("task"),
                child_session=record.get("childSessionKey"),
                child_session_id=record.get("childSessionId"),
                requester_session=record.get("requesterSessionKey"),
                cleanup=record.get("cleanup"),
                created=created,
                started=started,
                ended=ended,
                archive_at_ms=to_utc_ms(record.get("archiveAtMs")),
                raw=record,
            )
        )
    return registry
