from .inventory import (
    ArtifactDescriptor,
    Inventory,
    classify_plane,
    discover_store,
    export_artifact_definitions,
)
from .transcripts import (
    ProviderMode,
    SessionIndex,
    SessionStatus,
    extract_user_attribution,
    parse_media_filename,
    parse_session_index,
    parse_transcript,
    resolve_sessions,
    visible_output,
)
from .config import ConfigHistory, build_config_history, config_at, diff_configs, parse_config
from .logs import LogKind, log_retention_gaps, parse_log_file
from .cron import CronState, parse_cron
from .subagents import SubagentRegistry, parse_subagent_registry
from .workspace import WorkspaceSnapshot, inventory_credentials, inventory_workspace

__all__ = [
    "ArtifactDescriptor",
    "ConfigHistory",
    "CronState",
    "Inventory",
    "LogKind",
    "ProviderMode",
    "SessionIndex",
    "SessionStatus",
    "SubagentRegistry",
    "WorkspaceSnapshot",
    "build_config_history",
    "classify_plane",
    "config_at",
    "diff_configs",
    "discover_store",
    "export_artifact_definitions",
    "extract_user_attribution",
    "inventory_credentials",
    "inventory_workspace",
    "log_retention_gaps",
    "parse_config",
    "parse_cron",
    "parse_log_file",
    "parse_media_filename",
    "parse_session_index",
    "parse_subagent_registry",
    "parse_transcript",
    "resolve_sessions",
    "visible_output",
]
