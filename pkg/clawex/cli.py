# -*- coding: utf-8 -*-
"""
Command-line surface: `clawex <command> [store] [options]`.

Every command builds one Report and writes it to stdout. Nothing is ever written inside
the examined store.

Exit codes: 0 success, 1 findings present (antiforensics --fail-on-findings),
2 usage error, 3 input error.
"""
import argparse
import logging
import os
import sys

import yaml

from clawex.artifacts.config import config_at, diff_configs
from clawex.artifacts.inventory import classify_plane, export_artifact_definitions, primary_plane
from clawex.clawex import ArtifactKind, ClawexError, InputError, Plane, Severity, UsageError, __version__
from clawex.correlate import correlate_evidence
from clawex.diffkit import ActionLabel, diff_manifests, filter_noise, load_manifest, save_manifest, snapshot_manifest
from clawex.examine import (
    AutonomyClass,
    capability_findings,
    capability_timeline,
    examine,
    reconstruct_context,
    reconstruction_boundaries,
)
from clawex.forge import (
    ScenarioSpec,
    TamperKind,
    TamperOp,
    TamperSpec,
    apply_tamper,
    generate_store,
    load_ground_truth,
    load_scenario,
    load_tamper_spec,
    save_ground_truth,
)
from clawex.report import OutputFormat, Report, report_parameters, report_time
from clawex.settings import ExaminerSettings, load_filter_rules, load_settings
from clawex.store import load_evidence
from clawex.utils import iso_utc, to_utc_ms

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INPUT = 3

GROUND_TRUTH_NAME = "ground-truth.json"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class _ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting, so `run` owns every exit code."""

    def error(self, message):
        raise UsageError("{}: {}".format(self.prog, message))


# --- shared plumbing ------------------------------------------------------------------------


def _timestamp(value, flag):
    parsed = to_utc_ms(value)
    if parsed is None:
        raise UsageError("{} expects an ISO-8601 time or epoch milliseconds, got {!r}.".format(flag, value))
    return parsed


def _settings(args):
    settings = load_settings(args.settings) if args.settings else ExaminerSettings()
    return settings.with_overrides(
        window_ms=args.window_ms,
        filter_rules=load_filter_rules(args.filter) if args.filter else None,
        capture_time=_timestamp(args.capture_time, "--capture-time") if args.capture_time else None,
        reveal=True if args.reveal else None,
    )


def _store_path(args):
    path = getattr(args, "store_arg", None) or args.store
    if path is None:
        raise UsageError("No store given: pass it as an argument or with --store.")
    return path


def _load(args):
    settings = _settings(args)
    evidence = load_evidence(_store_path(args), args.logs, settings)
    return evidence, settings


def _evidence_report(command, evidence, settings, summary, records, caveats=(), formatter=None, **inputs):
    return Report(
        command=command,
        parameters=report_parameters(
            settings, store=evidence.root.base_path, logs=evidence.root.log_dir, **inputs
        ),
        generated_at=report_time(evidence.capture_time),
        summary=summary,
        records=records,
        warnings=[w.to_dict() for w in evidence.warnings],
        caveats=list(caveats),
        line_formatter=formatter,
    )


def _counts(values):
    out = {}
    for value in values:
        out[value] = out.get(value, 0) + 1
    return dict(sorted(out.items()))


def _find_session(evidence, ref):
    """(session id, session key) for a key or id; InputError when neither matches."""
    for _, key, meta in evidence.index_entries():
        if ref in (key, meta.session_id):
            return meta.session_id, key
    for record in evidence.session_records:
        if ref == record.session_id:
            return record.session_id, record.session_key
    raise InputError("No session with key or id {!r}.".format(ref))


# --- commands -------------------------------------------------------------------------------


def cmd_scan(args):
    evidence, settings = _load(args)
    inventory = evidence.inventory
    summary = {
        "capture_time": evidence.capture_time,
        "capture_time_iso": iso_utc(evidence.capture_time),
        "artifacts": len(inventory.descriptors),
        "unclassified": len(inventory.unclassified),
        "by_kind": _counts(d.kind.value for d in inventory.descriptors),
        "store_notes": list(evidence.root.notes),
    }
    records = [d.to_dict() for d in inventory.descriptors]
    records.extend(dict(u.to_dict(), kind="Unclassified") for u in inventory.unclassified)
    records.sort(key=lambda r: (r["root"], r["path"]))

    def line(record):
        return "{:<26} {:<5} {:>9}  {}".format(record["kind"], record["root"], record["size_bytes"], record["path"])

    return _evidence_report("scan", evidence, settings, summary, records, formatter=line), EXIT_OK


def _event_line(record):
    return "{}  {:<16} {:<22} {:<14} {}".format(
        record["time_iso"] or "-", record["source"], record["plane"], record["kind"], record["summary"]
    )


def cmd_timeline(args):
    evidence, settings = _load(args)
    correlation = correlate_evidence(evidence)
    events = correlation.timeline.events + correlation.timeline.undated
    if args.plane:
        events = [e for e in events if e.plane.slug == args.plane]
    records = [e.to_dict() for e in events]
    summary = {
        "events": len(records),
        "undated": sum(1 for e in events if e.time is None),
        "by_plane": _counts(e.plane.slug for e in events),
        "by_source": _counts(e.source.name for e in events),
        "associations": [a.to_dict() for a in correlation.associations],
    }
    caveats = reconstruction_boundaries(evidence, correlation)
    report = _evidence_report(
        "timeline", evidence, settings, summary, records, caveats, _event_line, plane=args.plane
    )
    return report, EXIT_OK


def cmd_session_list(args):
    evidence, settings = _load(args)
    metas = {meta.session_id: meta for _, _, meta in evidence.index_entries()}
    records = []
    for record in sorted(
        evidence.session_records, key=lambda r: (r.agent_id or "", r.session_key or "", r.session_id, r.filename or "")
    ):
        item = record.to_dict()
        transcript = evidence.transcript_for(record.session_id) if record.filename else None
        item["entries"] = len(transcript.entries) if transcript else 0
        item["first_time"] = transcript.first_time if transcript else None
        item["last_time"] = transcript.newest_time if transcript else None
        meta = metas.get(record.session_id)
        item["channel"] = meta.channel if meta is not None else None
        records.append(item)

    def line(item):
        return "{:<12} {:<40} {:<36} {}".format(
            item["status"], item["session_key"] or "-", item["session_id"], iso_utc(item["last_time"]) or "-"
        )

    summary = {"sessions": len(records), "by_status": _counts(r["status"] for r in records)}
    return _evidence_report("session list", evidence, settings, summary, records, formatter=line), EXIT_OK


def cmd_session_show(args):
    evidence, settings = _load(args)
    session_id, key = _find_session(evidence, args.session)
    meta = evidence.meta_for_session(session_id)
    transcript = evidence.transcript_for(session_id)
    correlation = correlate_evidence(evidence)
    events = [e for e in correlation.timeline.events + correlation.timeline.undated if e.session == session_id]
    summary = {
        "session_id": session_id,
        "session_key": key,
        "meta": meta.to_dict() if meta is not None else None,
        "transcript": transcript.path if transcript else None,
        "status": transcript.status.value if transcript else None,
        "header_ok": transcript.header_ok if transcript else None,
        "entries": len(transcript.entries) if transcript else 0,
        "truncated_tail": transcript.truncated_tail if transcript else None,
        "deleted_at": transcript.deleted_at if transcript else None,
    }
    records = [e.to_dict() for e in events]
    report = _evidence_report(
        "session show", evidence, settings, summary, records, formatter=_event_line, session=args.session
    )
    return report, EXIT_OK


def cmd_tools(args):
    evidence, settings = _load(args)
    correlation = correlate_evidence(evidence)
    records = []
    unpaired_calls = unpaired_results = duplicates = 0
    for path in sorted(correlation.pairings):
        pairing = correlation.pairings[path]
        records.extend(dict(e.to_dict(), pairing="paired") for e in pairing.executions)
        records.extend(dict(c.to_dict(), pairing="unpaired_call", source=path) for c in pairing.unpaired_calls)
        records.extend(dict(r.to_dict(), pairing="unpaired_result", source=path) for r in pairing.unpaired_results)
        unpaired_calls += len(pairing.unpaired_calls)
        unpaired_results += len(pairing.unpaired_results)
        duplicates += len(pairing.duplicates)
    summary = {
        "executions": len(correlation.executions),
        "unpaired_calls": unpaired_calls,
        "unpaired_results": unpaired_results,
        "duplicate_ids": duplicates,
        "by_tool": _counts(e.tool_name for e in correlation.executions),
    }

    def line(record):
        status = "error" if record.get("is_error") else record["pairing"]
        return "{:<14} {:<16} {:<16} {}".format(
            record["tool_call_id"], record.get("tool_name") or "-", status, record.get("session") or "-"
        )

    return _evidence_report("tools", evidence, settings, summary, records, formatter=line), EXIT_OK


def cmd_attribution(args):
    evidence, settings = _load(args)
    correlation = correlate_evidence(evidence)
    execution = correlation.execution(args.tool_call_id)
    if execution is None:
        raise InputError("No paired tool execution with toolCallId {!r}.".format(args.tool_call_id))
    result = examine(evidence, correlation)
    chain, cls, rationale = next(
        (item for item in result.autonomy if item[0].action.tool_call_id == args.tool_call_id),
        (None, AutonomyClass.Indeterminate, "no origin chain"),
    )
    events = [
        e for e in correlation.timeline.events + correlation.timeline.undated if e.tool_call_id == args.tool_call_id
    ]
    summary = {
        "execution": execution.to_dict(),
        "origin": chain.to_dict() if chain is not None else None,
        "autonomy": cls.value,
        "rationale": rationale,
        "associations": [a.to_dict() for a in correlation.associations if a.subject == args.tool_call_id],
    }
    report = _evidence_report(
        "attribution",
        evidence,
        settings,
        summary,
        [e.to_dict() for e in events],
        result.caveats,
        _event_line,
        tool_call_id=args.tool_call_id,
    )
    return report, EXIT_OK


def cmd_autonomy(args):
    evidence, settings = _load(args)
    correlation = correlate_evidence(evidence)
    result = examine(evidence, correlation)
    records = []
    for chain, cls, rationale in result.autonomy:
        trigger = chain.trigger
        records.append(
            {
                "tool_call_id": chain.action.tool_call_id,
                "tool_name": chain.action.tool_name,
                "session": chain.action.session,
                "time": chain.action.call_time,
                "origin_kind": chain.origin_kind.value,
                "autonomy": cls.value,
                "rationale": rationale,
                "trigger": trigger.excerpt if trigger else None,
                "agent_driven": chain.agent_driven,
            }
        )
    summary = {"actions": len(records), "by_class": {c.value: 0 for c in AutonomyClass}}
    for record in records:
        summary["by_class"][record["autonomy"]] += 1

    def line(record):
        return "{:<14} {:<16} {:<22} {}".format(
            record["tool_call_id"], record["tool_name"], record["autonomy"], record["rationale"]
        )

    return _evidence_report("autonomy", evidence, settings, summary, records, result.caveats, line), EXIT_OK


def cmd_antiforensics(args):
    evidence, settings = _load(args)
    correlation = correlate_evidence(evidence)
    result = examine(evidence, correlation)
    findings = [f for f in result.findings if f.rule_id.startswith("R")]
    retention = evidence.retention()
    summary = {
        "findings": len(findings),
        "by_severity": {s.name: sum(1 for f in findings if f.severity is s) for s in Severity},
        "by_rule": _counts(f.rule_id for f in findings),
        "retention": retention.to_dict() if retention is not None else None,
    }

    def line(record):
        return "{} {:<4} {:<10} {}".format(record["id"], record["rule_id"], record["severity"], record["summary"])

    report = _evidence_report(
        "antiforensics",
        evidence,
        settings,
        summary,
        [f.to_dict() for f in findings],
        result.caveats,
        line,
        fail_severity=args.fail_severity if args.fail_on_findings else None,
    )
    threshold = Severity[args.fail_severity]
    failing = [f for f in findings if f.severity.value >= threshold.value]
    if args.fail_on_findings and failing:
        logger.info("%d findings at or above %s", len(failing), threshold.name)
        return report, EXIT_FINDINGS
    return report, EXIT_OK


def cmd_capabilities(args):
    evidence, settings = _load(args)
    correlation = correlate_evidence(evidence)
    entries = capability_timeline(
        evidence.log_events, evidence.index_entries(), evidence.config_history, correlation.associations
    )
    findings = capability_findings(entries, evidence)
    summary = {"entries": len(entries), "findings": [f.to_dict() for f in findings]}

    def line(record):
        tools = ",".join(record["capability_set"]) if record["capability_set"] is not None else "-"
        delta = record["delta_from_previous"]
        change = " ".join(["+" + t for t in delta["added"]] + ["-" + t for t in delta["removed"]])
        return "{}  {:<20} {}  {}".format(record["time_iso"] or "-", record["source"], tools, change)

    records = [e.to_dict() for e in entries]
    caveats = reconstruction_boundaries(evidence, correlation)
    return _evidence_report("capabilities", evidence, settings, summary, records, caveats, line), EXIT_OK


def _session_at(evidence, t):
    """The live session with the latest entry at or before `t`."""
    best = None
    for transcript in sorted(evidence.transcripts, key=lambda tr: tr.path):
        times = [x for x in transcript.times if x <= t]
        if not times:
            continue
        if best is None or max(times) > best[0]:
            best = (max(times), transcript)
    return best[1] if best else None


def cmd_context(args):
    evidence, settings = _load(args)
    t = _timestamp(args.at, "--at")
    if args.session:
        session_id, _ = _find_session(evidence, args.session)
        transcript = evidence.transcript_for(session_id)
    else:
        transcript = _session_at(evidence, t)
        if transcript is None:
            raise InputError("No session has entries at or before {}.".format(iso_utc(t)))
    meta = evidence.meta_for_session(transcript.session_id) if transcript else None
    workspace = evidence.workspaces.get(transcript.agent_id if transcript else "main")
    estimate = reconstruct_context(transcript, workspace, meta, t, settings.mtime_tolerance_ms)
    summary = {
        "at_time": t,
        "at_time_iso": iso_utc(t),
        "session": estimate.session,
        "report_present": estimate.report_present,
        "injected_files": len(estimate.injected_files),
        "replayed_files": sorted(estimate.replayed_files),
    }
    report = _evidence_report(
        "context", evidence, settings, summary, [estimate.to_dict()], estimate.caveats, at=t, session=args.session
    )
    return report, EXIT_OK


def cmd_config_at(args):
    evidence, settings = _load(args)
    t = _timestamp(args.time, "time")
    snapshots = evidence.config_history.snapshots
    snapshot = config_at(evidence.config_history, t)
    records = []
    if snapshot is not None:
        position = snapshots.index(snapshot)
        previous = snapshots[position - 1] if position else None
        changes = diff_configs(previous.config, snapshot.config) if previous is not None else []
        records.append(
            {
                "snapshot": snapshot.to_dict(),
                "config": snapshot.config.to_dict(reveal=settings.reveal),
                "previous": previous.source_path if previous is not None else None,
                "changes_from_previous": [c.to_dict() for c in changes],
            }
        )
    summary = {
        "at_time": t,
        "at_time_iso": iso_utc(t),
        "in_force": snapshot.source_path if snapshot is not None else None,
        "history": [s.to_dict() for s in snapshots],
    }
    caveats = []
    if snapshot is None:
        caveats.append("no configuration snapshot is ordered at or before {}".format(iso_utc(t)))
    if any(s.ordering != "lastTouchedAt" for s in snapshots):
        caveats.append("some snapshots lack meta.lastTouchedAt and are ordered by file mtime")
    return _evidence_report("config-at", evidence, settings, summary, records, caveats, at=t), EXIT_OK


def _manifest_of(path, state_id):
    if os.path.isdir(path):
        return snapshot_manifest(path, state_id)
    return load_manifest(path)


def _plain_report(command, settings, summary, records, caveats=(), formatter=None, **inputs):
    return Report(
        command=command,
        parameters=report_parameters(settings, **inputs),
        generated_at=report_time(None),
        summary=summary,
        records=records,
        caveats=list(caveats),
        line_formatter=formatter,
    )


def cmd_diff(args):
    settings = _settings(args)
    a = _manifest_of(args.a, args.from_state)
    b = _manifest_of(args.b, args.to_state)
    changeset = diff_manifests(a, b)
    if settings.filter_rules:
        changeset = filter_noise(changeset, settings.filter_rules)
    data = changeset.to_dict()
    records = data.pop("records")

    def line(record):
        path = "{} -> {}".format(record["old_path"], record["path"]) if record["old_path"] else record["path"]
        return "{:<16} {}".format(record["category"], path)

    return _plain_report("diff", settings, data, records, formatter=line, a=args.a, b=args.b), EXIT_OK


def cmd_manifest(args):
    settings = _settings(args)
    root = os.path.abspath(args.root)
    label = ActionLabel(args.label) if args.label else None
    snapshot = snapshot_manifest(root, args.state_id or os.path.basename(root), label)
    if args.out:
        out = os.path.abspath(args.out)
        if os.path.commonpath([out, root]) == root:
            raise UsageError("Refusing to write the manifest inside the tree being recorded.")
        save_manifest(snapshot, out)
    data = snapshot.to_dict()
    records = data.pop("entries", [])
    if isinstance(records, dict):
        records = [dict(entry, path=path) for path, entry in sorted(records.items())]

    def line(record):
        digest = record.get("content_hash") or record.get("symlink_target") or ("<dir>" if record.get("is_dir") else "")
        return "{:<64} {}".format(digest or "-", record.get("path"))

    return _plain_report("manifest", settings, data, records, formatter=line, root=root, out=args.out), EXIT_OK


def cmd_forge_generate(args):
    settings = _settings(args)
    if args.scenario:
        spec = load_scenario(args.scenario)
    elif args.preset == "random":
        spec = ScenarioSpec.random(args.seed)
    else:
        spec = getattr(ScenarioSpec, args.preset)()
    dest = os.path.abspath(args.dest)
    truth = generate_store(dest, spec, args.seed)
    truth_path = args.truth or os.path.join(dest, GROUND_TRUTH_NAME)
    save_ground_truth(truth, truth_path)
    summary = {
        "dest": dest,
        "ground_truth": truth_path,
        "capture_time": truth.capture_time,
        "capture_time_iso": iso_utc(truth.capture_time),
        "files": len(truth.inventory),
        "sessions": len(truth.sessions),
        "tool_calls": len(truth.pairings),
    }
    records = [{"kind": kind, "root": root, "path": rel} for kind, root, rel in truth.inventory]
    report = _plain_report(
        "forge generate", settings, summary, records, dest=dest, seed=args.seed, scenario=spec.to_dict()
    )
    return report, EXIT_OK


def cmd_forge_tamper(args):
    settings = _settings(args)
    dest = os.path.abspath(args.dest)
    truth = load_ground_truth(args.truth or os.path.join(dest, GROUND_TRUTH_NAME))
    if args.tamper_spec:
        tamper = load_tamper_spec(args.tamper_spec)
    elif args.op:
        tamper = TamperSpec(tuple(TamperOp(TamperKind(op), args.target) for op in args.op))
    else:
        raise UsageError("forge tamper needs --op or --tamper-spec.")
    applied, expected = apply_tamper(dest, tamper, truth)
    summary = {"dest": dest, "expected_findings": list(expected)}
    records = [item.to_dict() for item in applied]
    return _plain_report("forge tamper", settings, summary, records, dest=dest), EXIT_OK


def cmd_planes(args):
    settings = _settings(args)
    records = []
    for kind in ArtifactKind:
        relevance = classify_plane(kind)
        records.append(
            {
                "kind": kind.value,
                "primary_plane": primary_plane(kind).slug,
                "planes": {plane.slug: relevance[plane].name for plane in Plane},
            }
        )
    summary = {"planes": {plane.slug: plane.nickname for plane in Plane}}

    def line(record):
        marks = {"Primary": "P", "Secondary": "S", "NotRelevant": "."}
        return "{:<26} {}".format(record["kind"], " ".join(marks[record["planes"][p.slug]] for p in Plane))

    return _plain_report("planes", settings, summary, records, formatter=line), EXIT_OK


def cmd_artifact_defs(args):
    settings = _settings(args)
    text = export_artifact_definitions()
    if OutputFormat(args.format) is OutputFormat.text:
        return text, EXIT_OK
    records = list(yaml.safe_load_all(text))
    return _plain_report("artifact-defs", settings, {"definitions": len(records)}, records), EXIT_OK


# --- parser ---------------------------------------------------------------------------------


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", metavar="PATH", help="the .openclaw directory or a capture directory holding one")
    common.add_argument("--logs", metavar="PATH", help="captured runtime-log directory (default: auto-detect tmp/openclaw)")
    common.add_argument("--window-ms", type=int, metavar="W", help="proximity window in milliseconds (default 5000)")
    common.add_argument("--filter", metavar="FILE", help="noise filter rules (YAML list or one glob per line)")
    common.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.text.value, help="output format"
    )
    common.add_argument("--settings", metavar="FILE", help="examiner settings (YAML)")
    common.add_argument("--capture-time", metavar="TIME", help="override the evidence capture time")
    common.add_argument("--reveal", action="store_true", help="show credential values instead of digests")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return common


def _make_parser():
    common = _common_options()
    parser = _ArgumentParser(
        prog="clawex",
        description="Forensic examination of OpenClaw agent artifact stores.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s {}".format(__version__))
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_ArgumentParser)
    commands.required = True

    def command(name, handler, help_text, store_positional=False, parent=commands):
        sub = parent.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        if store_positional:
            sub.add_argument("store_arg", nargs="?", metavar="STORE", help="store path (same as --store)")
        return sub

    command("scan", cmd_scan, "Inventory the store and classify every artifact.", True)
    timeline = command("timeline", cmd_timeline, "Unified timeline across transcripts, logs, cron and registry.", True)
    timeline.add_argument("--plane", choices=[p.slug for p in Plane], help="only events of one plane")

    session = commands.add_parser("session", help="Session inspection.")
    session_commands = session.add_subparsers(dest="session_command", metavar="ACTION", parser_class=_ArgumentParser)
    session_commands.required = True
    command("list", cmd_session_list, "List every session with its status.", parent=session_commands)
    show = command("show", cmd_session_show, "Show one session by key or id.", parent=session_commands)
    show.add_argument("session", metavar="KEY_OR_ID")

    command("tools", cmd_tools, "Tool calls paired with their results.", True)
    attribution = command("attribution", cmd_attribution, "Trace one tool call back to its origin.")
    attribution.add_argument("tool_call_id", metavar="TOOL_CALL_ID")
    command("autonomy", cmd_autonomy, "Place every tool call on the autonomy spectrum.", True)

    anti = command("antiforensics", cmd_antiforensics, "Cross-source tampering indicators.", True)
    anti.add_argument("--fail-on-findings", action="store_true", help="exit 1 when findings are present")
    anti.add_argument(
        "--fail-severity",
        choices=[s.name for s in Severity],
        default=Severity.Anomalous.name,
        help="lowest severity that fails the run (default Anomalous)",
    )

    command("capabilities", cmd_capabilities, "Capability envelope over time.", True)
    context = command("context", cmd_context, "Estimate the model context at a point in time.")
    context.add_argument("--at", required=True, metavar="TIME")
    context.add_argument("--session", metavar="KEY_OR_ID")
    config = command("config-at", cmd_config_at, "Configuration in force at a point in time.")
    config.add_argument("time", metavar="TIME")

    diff = command("diff", cmd_diff, "Differential analysis of two trees or manifests.")
    diff.add_argument("a", metavar="A")
    diff.add_argument("b", metavar="B")
    diff.add_argument("--from-state", default="A")
    diff.add_argument("--to-state", default="B")
    manifest = command("manifest", cmd_manifest, "Record a manifest of a tree.")
    manifest.add_argument("root", metavar="ROOT")
    manifest.add_argument("--out", metavar="FILE", help="also save the manifest as JSON")
    manifest.add_argument("--state-id")
    manifest.add_argument("--label")

    forge = commands.add_parser("forge", help="Synthetic stores with ground truth, for testing.")
    forge_commands = forge.add_subparsers(dest="forge_command", metavar="ACTION", parser_class=_ArgumentParser)
    forge_commands.required = True
    generate = command("generate", cmd_forge_generate, "Generate a synthetic store.", parent=forge_commands)
    generate.add_argument("dest", metavar="DEST")
    generate.add_argument("--scenario", metavar="FILE", help="scenario spec (YAML or JSON, version: 1)")
    generate.add_argument("--preset", choices=["full", "minimal", "random"], default="full")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--truth", metavar="FILE", help="ground truth path (default DEST/{})".format(GROUND_TRUTH_NAME))
    tamper = command("tamper", cmd_forge_tamper, "Apply tampering to a generated store.", parent=forge_commands)
    tamper.add_argument("dest", metavar="DEST")
    tamper.add_argument("--op", action="append", choices=[k.value for k in TamperKind])
    tamper.add_argument("--target", help="toolCallId, session key/id or path the operations act on")
    tamper.add_argument("--tamper-spec", metavar="FILE")
    tamper.add_argument("--truth", metavar="FILE")

    command("planes", cmd_planes, "The five-plane taxonomy per artifact kind.")
    command("artifact-defs", cmd_artifact_defs, "Store layout as YAML artifact definitions.")
    return parser


def _configure_logging(verbosity, stream=None):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    package = logging.getLogger("clawex")
    for handler in list(package.handlers):
        if getattr(handler, "_clawex_cli", False):
            package.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._clawex_cli = True
    package.addHandler(handler)
    package.setLevel(level)


def run(argv=None, stdout=None, stderr=None):
    """Parses `argv`, runs one command and returns its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        stderr.write("{}\n".format(exc))
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    _configure_logging(args.verbose, stderr)
    try:
        report, code = args.handler(args)
    except UsageError as exc:
        stderr.write("clawex: {}\n".format(exc))
        return EXIT_USAGE
    except ClawexError as exc:
        stderr.write("clawex: {}\n".format(exc))
        return EXIT_INPUT
    stdout.write(report if isinstance(report, str) else report.render(args.format))
    return code


def main():
    sys.exit(run())
