# -*- coding: utf-8 -*-
from .clawex import (
    ArtifactKind,
    ClawexError,
    InputError,
    MalformedConfig,
    MalformedIndex,
    MalformedRegistry,
    NotMediaName,
    ParseWarning,
    Plane,
    RelevanceLevel,
    Severity,
    StoreRoot,
    UnreadableRoot,
    UsageError,
    __version__,
)
from .settings import ExaminerSettings, load_settings
from .store import Evidence, load_evidence
from .correlate import (
    EvidenceRef,
    associate_runs,
    attribute_cron_runs,
    build_timeline,
    correlate_evidence,
    link_subagents,
    pair_tool_calls,
)
from .examine import (
    AutonomyClass,
    OriginKind,
    classify_autonomy,
    detect_antiforensics,
    examine,
    reconstruct_context,
    reconstruction_boundaries,
    trace_origin,
)
from .diffkit import diff_manifests, filter_noise, snapshot_manifest
from .forge import ScenarioSpec, TamperSpec, apply_tamper, generate_store
from .report import OutputFormat, Report

__all__ = [
    "ArtifactKind",
    "AutonomyClass",
    "ClawexError",
    "Evidence",
    "EvidenceRef",
    "ExaminerSettings",
    "InputError",
    "MalformedConfig",
    "MalformedIndex",
    "MalformedRegistry",
    "NotMediaName",
    "OriginKind",
    "OutputFormat",
    "ParseWarning",
    "Plane",
    "RelevanceLevel",
    "Report",
    "ScenarioSpec",
    "Severity",
    "StoreRoot",
    "TamperSpec",
    "UnreadableRoot",
    "UsageError",
    "apply_tamper",
    "associate_runs",
    "attribute_cron_runs",
    "build_timeline",
    "classify_autonomy",
    "correlate_evidence",
    "detect_antiforensics",
    "diff_manifests",
    "examine",
    "filter_noise",
    "generate_store",
    "link_subagents",
    "load_evidence",
    "load_settings",
    "pair_tool_calls",
    "reconstruct_context",
    "reconstruction_boundaries",
    "snapshot_manifest",
    "trace_origin",
]
