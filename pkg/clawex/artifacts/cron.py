# -*- coding: utf-8 -*-
"""
Scheduler state: job definitions in `cron/jobs.json` and per-job run history in
`cron/runs/<jobId>.jsonl`.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from clawex.clawex import ClawexError, ParseWarning
from clawex.utils import alias_value, iso_utc, iter_jsonl, loads_object, to_utc_ms

logger = logging.getLogger(__name__)

RUN_TIME_ALIASES = ("ts", "runAtMs", "time", "timestamp")
RUN_OUTCOME_ALIASES = ("status", "outcome", "result")


class ExecutionTarget(Enum):
    MainSessionEvent = "main"
    IsolatedRun = "isolated"


@dataclass(frozen=True)
class At:
    at_ms: Optional[int]
    kind = "at"

    def to_dict(self):
        return {"kind": self.kind, "at_ms": self.at_ms}

    def describe(self):
        return "at {}".format(iso_utc(self.at_ms) or "?")


@dataclass(frozen=True)
class Every:
    """A fixed interval. Non-numeric intervals such as `"30m"` are kept verbatim in `every_raw`."""

    every_ms: Optional[int]
    anchor_ms: Optional[int] = None
    every_raw: object = None
    kind = "every"

    def to_dict(self):
        return {
            "kind": self.kind,
            "every_ms": self.every_ms,
            "every_raw": self.every_raw,
            "anchor_ms": self.anchor_ms,
        }

    def describe(self):
        if self.every_ms is not None:
            return "every {} ms".format(self.every_ms)
        return "every {}".format(self.every_raw if self.every_raw is not None else "?")


@dataclass(frozen=True)
class CronExpr:
    expression: str
    timezone: Optional[str] = None
    kind = "cron"

    def to_dict(self):
        return {"kind": self.kind, "expression": self.expression, "timezone": self.timezone}

    def describe(self):
        if self.timezone:
            return "cron {} {}".format(self.expression, self.timezone)
        return "cron {}".format(self.expression)


@dataclass(frozen=True)
class CronJob:
    job_id: str
    schedule: object
    execution_target: Optional[ExecutionTarget] = None
    name: Optional[str] = None
    enabled: bool = True
    payload: object = None
    runtime_state: object = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "job_id": self.job_id,
            "name": self.name,
            "enabled": self.enabled,
            "schedule": self.schedule.to_dict() if self.schedule is not None else None,
            "execution_target": self.execution_target.name if self.execution_target else None,
            "payload": self.payload,
            "runtime_state": self.runtime_state,
        }


@dataclass(frozen=True)
class CronRun:
    job_id: str
    time: int
    outcome: Optional[str]
    source: str = ""
    line_no: int = 0
    session_id: Optional[str] = None
    session_key: Optional[str] = None
    raw: Dict[str, object] = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "job_id": self.job_id,
            "time": self.time,
            "outcome": self.outcome,
            "source": self.source,
            "line_no": self.line_no,
            "session_id": self.session_id,
            "session_key": self.session_key,
        }


@dataclass
class CronState:
    jobs: List[CronJob] = field(default_factory=list)
    runs: List[CronRun] = field(default_factory=list)
    warnings: List[ParseWarning] = field(default_factory=list)

    def job(self, job_id):
        for job in self.jobs:
            if job.job_id == job_id:
                return job
        return None

    @property
    def orphan_runs(self):
        """Runs whose job no longer exists in jobs.json."""
        known = {job.job_id for job in self.jobs}
        return [run for run in self.runs if run.job_id not in known]


def _check_cron_expression(expression, source, warnings, job_id):
    fields_count = len(str(expression).split())
    if not 5 <= fields_count <= 6:
        warnings.append(
            ParseWarning(
                source,
                "job {!r} cron expression has {} fields, expected 5 or 6".format(job_id, fields_count),
            )
        )


def parse_schedule(record, source="cron/jobs.json", warnings=None, job_id=None):
    """
    Types a job's schedule: `{kind: at|every|cron, ...}`, or flat `at`/`every`/`cron` keys.
    Returns None (with a warning) when no variant can be recognised.
    """
    warnings = warnings if warnings is not None else []
    schedule = record.get("schedule")
    if isinstance(schedule, str):
        schedule = {"kind": "cron", "expr": schedule}
    if not isinstance(schedule, dict):
        schedule = {}
        for kind, key in (("at", "at"), ("every", "every"), ("cron", "cron")):
            if key in record:
                schedule = {"kind": kind, key: record[key]}
                break
    kind = schedule.get("kind")
    if kind == "at":
        return At(to_utc_ms(alias_value(schedule, ("atMs", "at"))))
    if kind == "every":
        every = alias_value(schedule, ("everyMs", "every"))
        every_ms = None
        if isinstance(every, (int, float)) and not isinstance(every, bool) and float(every).is_integer():
            every_ms = int(every)
        return Every(
            every_ms,
            to_utc_ms(schedule.get("anchorMs")),
            every if every_ms is None else None,
        )
    if kind == "cron":
        expression = str(alias_value(schedule, ("expr", "cron", "expression"), ""))
        _check_cron_expression(expression, source, warnings, job_id)
        return CronExpr(expression, schedule.get("tz"))
    warnings.append(ParseWarning(source, "job {!r} has no recognisable schedule".format(job_id)))
    return None


def parse_jobs(content, source="cron/jobs.json"):
    """Parses jobs.json into (jobs, warnings). A structurally broken file is one warning."""
    warnings = []
    try:
        data = loads_object(content, ClawexError, "Cron jobs")
    except ClawexError as exc:
        return [], [ParseWarning(source, "{} (byte offset {})".format(exc, exc.offset))]
    records = data.get("jobs", [])
    if isinstance(records, dict):
        records = [dict(v, id=v.get("id", k)) for k, v in sorted(records.items()) if isinstance(v, dict)]
    jobs = []
    for record in records if isinstance(records, list) else []:
        if not isinstance(record, dict) or not (record.get("id") or record.get("jobId")):
            warnings.append(ParseWarning(source, "job record without id"))
            continue
        job_id = str(record.get("id") or record.get("jobId"))
        target = record.get("sessionTarget")
        try:
            target = ExecutionTarget(target) if target else None
        except ValueError:
            warnings.append(ParseWarning(source, "job {!r} has unknown sessionTarget {!r}".format(job_id, target)))
            target = None
        jobs.append(
            CronJob(
                job_id=job_id,
                schedule=parse_schedule(record, source, warnings, job_id),
                execution_target=target,
                name=record.get("name"),
                enabled=bool(record.get("enabled", True)),
                payload=record.get("payload"),
                runtime_state=record.get("state"),
                raw=record,
            )
        )
    return jobs, warnings


def parse_run_file(content, filename):
    """
    Parses one `cron/runs/<jobId>.jsonl`. The jobId comes from the filename; runs keep
    file order.
    """
    job_id = filename.replace("\\", "/").rsplit("/", 1)[-1]
    if job_id.endswith(".jsonl"):
        job_id = job_id[: -len(".jsonl")]
    runs = []
    warnings = []
    for line_no, record, warning in iter_jsonl(content, filename):
        if warning is not None:
            warnings.append(warning)
            continue
        time = to_utc_ms(alias_value(record, RUN_TIME_ALIASES))
        if time is None:
            warnings.append(ParseWarning(filename, "run record without usable time", line_no))
            continue
        runs.append(
            CronRun(
                job_id=job_id,
                time=time,
                outcome=alias_value(record, RUN_OUTCOME_ALIASES),
                source=filename,
                line_no=line_no,
                session_id=record.get("sessionId"),
                session_key=record.get("sessionKey"),
                raw=record,
            )
        )
    return runs, warnings


def parse_cron(jobs_content, runs_dir_files, jobs_source="cron/jobs.json"):
    """
    Parses the scheduler state.

    `jobs_content` may be None when jobs.json is absent; `runs_dir_files` is an iterable
    of (relative filename, content bytes).
    """
    state = CronState()
    if jobs_content is not None:
        state.jobs, state.warnings = parse_jobs(jobs_content, jobs_source)
    for filename, content in sorted(runs_dir_files, key=lambda item: item[0]):
        runs, warnings = parse_run_file(content, filename)
        state.runs.extend(runs)
        state.warnings.extend(warnings)
    for run in state.orphan_runs:
        logger.debug("cron run %s:%s belongs to no known job", run.source, run.line_no)
    return state
