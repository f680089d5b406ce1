"""
Tests for store discovery, the plane table and artifact definition export.
"""
import struct

import pytest
import yaml

from clawex.artifacts.inventory import (
    PATH_PATTERNS,
    ROOT_LOGS,
    ROOT_STORE,
    SQLITE_MAGIC,
    classify_plane,
    discover_store,
    export_artifact_definitions,
    match_artifact,
    primary_plane,
    read_sqlite_header,
)
from clawex.clawex import ArtifactKind, Plane, RelevanceLevel, StoreRoot

from .utils import SESSION_ID, T0, write_tree


def sqlite_bytes(page_size=4096, page_count=3):
    header = bytearray(100)
    header[: len(SQLITE_MAGIC)] = SQLITE_MAGIC
    header[16:18] = struct.pack(">H", 1 if page_size == 65536 else page_size)
    header[28:32] = struct.pack(">I", page_count)
    return bytes(header) + b"\x00" * 32


@pytest.mark.parametrize(
    "path, root, kind, captures",
    [
        ("openclaw.json", ROOT_STORE, ArtifactKind.Config, {}),
        ("openclaw.json.bak.2", ROOT_STORE, ArtifactKind.ConfigBackup, {}),
        ("credentials/telegram-allowFrom.json", ROOT_STORE, ArtifactKind.ChannelCredentials, {}),
        ("agents/ops/agent/auth-profiles.json", ROOT_STORE, ArtifactKind.AuthProfiles, {"agent_id": "ops"}),
        ("identity/device.json", ROOT_STORE, ArtifactKind.DeviceIdentity, {}),
        ("workspace/SOUL.md", ROOT_STORE, ArtifactKind.WorkspaceIdentityFile, {}),
        ("workspace/skills/weather/SKILL.md", ROOT_STORE, ArtifactKind.SkillDefinition, {}),
        ("skills/weather/SKILL.md", ROOT_STORE, ArtifactKind.SkillDefinition, {}),
        ("workspace/memory/2026-02-01.md", ROOT_STORE, ArtifactKind.DailyMemoryLog, {}),
        ("memory/main.sqlite", ROOT_STORE, ArtifactKind.SemanticMemoryDb, {}),
        ("agents/main/sessions/sessions.json", ROOT_STORE, ArtifactKind.SessionIndex, {"agent_id": "main"}),
        ("agents/main/sessions/" + SESSION_ID + ".jsonl", ROOT_STORE, ArtifactKind.SessionTranscript, {"agent_id": "main"}),
        (
            "agents/main/sessions/" + SESSION_ID + ".jsonl.deleted.2026-02-02T10-30-00.000Z",
            ROOT_STORE,
            ArtifactKind.DeletedSessionTranscript,
            {"agent_id": "main"},
        ),
        ("media/inbound/photo---" + SESSION_ID + ".jpg", ROOT_STORE, ArtifactKind.InboundMedia, {}),
        ("cron/jobs.json", ROOT_STORE, ArtifactKind.CronJobs, {}),
        ("cron/runs/daily-digest.jsonl", ROOT_STORE, ArtifactKind.CronRunLog, {}),
        ("subagents/runs.json", ROOT_STORE, ArtifactKind.SubagentRegistry, {}),
        ("openclaw-2026-02-02.log", ROOT_LOGS, ArtifactKind.RuntimeLog, {}),
    ],
)
def test_match_artifact(path, root, kind, captures):
    assert match_artifact(path, root) == (kind, captures)


@pytest.mark.parametrize(
    "path, root",
    [
        ("openclaw-2026-02-02.log", ROOT_STORE),
        ("openclaw.json", ROOT_LOGS),
        ("agents/main/sessions/notes.txt", ROOT_STORE),
        ("workspace/memory/2026/02.md", ROOT_STORE),
        ("canvas/index.html", ROOT_STORE),
    ],
)
def test_unclaimed_paths(path, root):
    assert match_artifact(path, root) == (None, None)


def test_every_kind_has_a_pattern():
    assert {kind for kind, _, _ in PATH_PATTERNS} == set(ArtifactKind)


def test_plane_table_covers_every_plane():
    for kind in ArtifactKind:
        mapping = classify_plane(kind)
        assert set(mapping) == set(Plane)
        assert RelevanceLevel.Primary in mapping.values()


def test_session_transcript_planes():
    mapping = classify_plane(ArtifactKind.SessionTranscript)
    for plane in (Plane.KnowledgeRecall, Plane.CommunicationIO, Plane.ActionsEffects, Plane.ReasoningCognition):
        assert mapping[plane] is RelevanceLevel.Primary
    assert mapping[Plane.IdentityConfiguration] is RelevanceLevel.Secondary
    assert classify_plane(ArtifactKind.CronRunLog)[Plane.KnowledgeRecall] is RelevanceLevel.NotRelevant


@pytest.mark.parametrize(
    "kind, plane",
    [
        (ArtifactKind.Config, Plane.IdentityConfiguration),
        (ArtifactKind.SessionTranscript, Plane.ReasoningCognition),
        (ArtifactKind.InboundMedia, Plane.CommunicationIO),
        (ArtifactKind.SemanticMemoryDb, Plane.KnowledgeRecall),
        (ArtifactKind.RuntimeLog, Plane.ActionsEffects),
    ],
)
def test_primary_plane(kind, plane):
    assert primary_plane(kind) is plane


def test_read_sqlite_header(tmp_path):
    db = tmp_path / "main.sqlite"
    db.write_bytes(sqlite_bytes())
    assert read_sqlite_header(str(db)) == {"sqlite_header": "ok", "page_size": 4096, "page_count": 3}
    db.write_bytes(sqlite_bytes(page_size=65536, page_count=1))
    assert read_sqlite_header(str(db))["page_size"] == 65536
    db.write_bytes(b"not a database")
    assert read_sqlite_header(str(db)) == {"sqlite_header": "absent"}


class TestDiscoverStore(object):
    def store(self, tmp_path):
        base = write_tree(
            tmp_path / ".openclaw",
            {
                "openclaw.json": "{}",
                "agents/main/sessions/sessions.json": "{}",
                "agents/main/sessions/" + SESSION_ID + ".jsonl": "",
                "cron/runs/daily-digest.jsonl": "",
                "memory/main.sqlite": sqlite_bytes(),
                "canvas/index.html": "<html></html>",
            },
            mtime_ms=T0,
        )
        logs = write_tree(tmp_path / "tmp" / "openclaw", {"openclaw-2026-02-02.log": "{}\n"}, mtime_ms=T0 + 5)
        return base, logs

    def test_classifies_everything(self, tmp_path):
        base, logs = self.store(tmp_path)
        inventory = discover_store(StoreRoot(base, logs))
        assert [(d.root, d.path) for d in inventory.descriptors] == [
            (ROOT_STORE, "agents/main/sessions/" + SESSION_ID + ".jsonl"),
            (ROOT_STORE, "agents/main/sessions/sessions.json"),
            (ROOT_STORE, "cron/runs/daily-digest.jsonl"),
            (ROOT_STORE, "memory/main.sqlite"),
            (ROOT_STORE, "openclaw.json"),
            (ROOT_LOGS, "openclaw-2026-02-02.log"),
        ]
        assert [u.path for u in inventory.unclassified] == ["canvas/index.html"]
        assert inventory.warnings == []
        assert inventory.max_mtime == T0 + 5

    def test_captures_and_metadata(self, tmp_path):
        base, logs = self.store(tmp_path)
        inventory = discover_store(StoreRoot(base, logs))
        db = inventory.find("memory/main.sqlite")
        assert db.captures == {"agent_id": "main"}
        assert db.metadata["sqlite_header"] == "ok"
        assert inventory.find("cron/runs/daily-digest.jsonl").captures == {"job_id": "daily-digest"}
        assert inventory.find("openclaw-2026-02-02.log") is None
        log = inventory.find("openclaw-2026-02-02.log", root=ROOT_LOGS)
        assert log.mtime == T0 + 5
        assert log.primary_plane is Plane.ActionsEffects
        assert log.to_dict()["planes"]["actions-effects"] == "Primary"

    def test_without_logs(self, tmp_path):
        base, _ = self.store(tmp_path)
        inventory = discover_store(StoreRoot(base))
        assert inventory.of_kind(ArtifactKind.RuntimeLog) == []
        assert len(inventory.of_kind(ArtifactKind.SessionIndex, ArtifactKind.SessionTranscript)) == 2

    def test_resolve_finds_nested_store_and_logs(self, tmp_path):
        self.store(tmp_path)
        root = StoreRoot.resolve(str(tmp_path))
        assert root.base_path.endswith(".openclaw")
        assert root.log_dir.endswith("openclaw")
        assert len(root.notes) == 2


def test_artifact_definitions():
    documents = list(yaml.safe_load_all(export_artifact_definitions()))
    assert len(documents) == len(ArtifactKind)
    by_name = {doc["name"]: doc for doc in documents}
    transcript = by_name["OpenClawSessionTranscript"]
    assert transcript["sources"][0]["attributes"]["paths"] == ["%%openclaw_home%%/agents/*/sessions/*.jsonl"]
    assert transcript["labels"] == ["reasoning-cognition", "knowledge-recall", "communication-io", "actions-effects"]
    assert by_name["OpenClawRuntimeLog"]["sources"][0]["attributes"]["paths"] == ["%%openclaw_logs%%/*.log"]
    assert by_name["OpenClawDeviceIdentity"]["sources"][0]["attributes"]["paths"] == [
        "%%openclaw_home%%/devices/**",
        "%%openclaw_home%%/identity/**",
    ]
