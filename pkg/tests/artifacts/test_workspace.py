"""
Tests for workspace inventory and credential listing.
"""
import json
import os

import pytest

from clawex.artifacts.config import parse_config
from clawex.artifacts.inventory import discover_store
from clawex.artifacts.workspace import (
    IDENTITY_FILES,
    SkillScope,
    inventory_credentials,
    inventory_workspace,
    map_into_store,
)
from clawex.clawex import StoreRoot

from .utils import T0, write_tree

WORKSPACE_FILES = {
    "workspace/AGENTS.md": "# Operating rules\n",
    "workspace/SOUL.md": "Be concise.\n",
    "workspace/memory/2026-02-01.md": "- bought milk\n",
    "workspace/memory/2026-01-31.md": "- started\n",
    "workspace/memory/2026-02-30.md": "bad date\n",
    "workspace/memory/notes.txt": "ignored\n",
    "workspace/skills/local-tool/SKILL.md": "---\nname: local-tool\n---\n",
    "workspace/skills/no-skill/README.md": "not a skill\n",
    "skills/weather/SKILL.md": "---\nname: weather\n---\n",
}


@pytest.mark.parametrize(
    "configured, expected",
    [
        (None, "workspace"),
        ("~/.openclaw/workspace", "workspace"),
        ("/home/ada/.openclaw/workspace-ops/", "workspace-ops"),
        ("C:\\Users\\ada\\.openclaw\\workspace", "workspace"),
        ("/srv/agents/ops", "ops"),
        ("custom/ws", "custom/ws"),
    ],
)
def test_map_into_store(configured, expected, tmp_path):
    rel, full = map_into_store(configured, str(tmp_path))
    assert rel == expected
    assert full == os.path.join(str(tmp_path), *expected.split("/"))


def test_inventory_workspace(tmp_path):
    base = write_tree(tmp_path, WORKSPACE_FILES, mtime_ms=T0)
    snapshot = inventory_workspace(base)
    assert snapshot.workspace_path == "workspace"
    assert list(snapshot.identity_files) == list(IDENTITY_FILES)
    present = sorted(name for name, item in snapshot.identity_files.items() if item.present)
    assert present == ["AGENTS.md", "SOUL.md"]
    assert snapshot.identity_files["SOUL.md"].content == "Be concise.\n"
    assert snapshot.identity_files["SOUL.md"].mtime == T0
    assert snapshot.identity_files["BOOTSTRAP.md"].path is None
    assert [m.date.isoformat() for m in snapshot.daily_memory] == ["2026-01-31", "2026-02-01"]
    assert [w.source for w in snapshot.warnings] == ["workspace/memory/2026-02-30.md"]
    assert [(s.name, s.scope) for s in snapshot.skills] == [
        ("weather", SkillScope.Global),
        ("local-tool", SkillScope.AgentLocal),
    ]
    assert snapshot.skills[1].path == "workspace/skills/local-tool/SKILL.md"
    assert snapshot.file_by_path("memory/2026-02-01.md").content == "- bought milk\n"
    assert snapshot.file_by_path("SOUL.md").name == "SOUL.md"
    assert snapshot.file_by_path("BOOTSTRAP.md") is None


def test_content_only_on_request(tmp_path):
    snapshot = inventory_workspace(write_tree(tmp_path, WORKSPACE_FILES))
    assert snapshot.to_dict()["identity_files"]["SOUL.md"]["content"] is None
    assert snapshot.to_dict(include_content=True)["identity_files"]["SOUL.md"]["content"] == "Be concise.\n"


def test_configured_workspace(tmp_path):
    base = write_tree(tmp_path, {"workspace-ops/IDENTITY.md": "ops\n"})
    config = parse_config(json.dumps({"agents": {"list": [{"id": "ops", "workspace": "~/.openclaw/workspace-ops"}]}}).encode())
    snapshot = inventory_workspace(base, config, agent_id="ops")
    assert snapshot.workspace_path == "workspace-ops"
    assert snapshot.identity_files["IDENTITY.md"].present
    assert snapshot.warnings == []


def test_workspace_not_captured(tmp_path):
    snapshot = inventory_workspace(str(tmp_path))
    assert [w.reason for w in snapshot.warnings] == ["workspace directory not captured"]
    assert not any(item.present for item in snapshot.identity_files.values())
    assert snapshot.daily_memory == []


class TestCredentials(object):
    FILES = {
        "credentials/telegram-pairing.json": json.dumps({"version": 1, "requests": [{"code": "X7K2"}]}),
        "credentials/whatsapp/creds.bin": b"\x00\x01secret",
        "agents/main/agent/auth-profiles.json": json.dumps({"profiles": {"google:default": {"apiKey": "AIza-forged"}}}),
    }

    def inventory(self, tmp_path):
        base = write_tree(tmp_path, self.FILES)
        return base, discover_store(StoreRoot(base))

    def test_redacted(self, tmp_path):
        base, inventory = self.inventory(tmp_path)
        config = parse_config(b'{"channels": {"telegram": {"botToken": "123:abc"}}}')
        items, warnings = inventory_credentials(base, inventory, config)
        assert warnings == []
        assert [(i.path, i.channel) for i in items] == [
            ("agents/main/agent/auth-profiles.json", None),
            ("credentials/telegram-pairing.json", "telegram"),
            ("credentials/whatsapp/creds.bin", "whatsapp"),
            ("openclaw.json#channels.telegram.botToken", "telegram"),
        ]
        assert items[0].keys == ("profiles.google:default.apiKey",)
        assert items[1].keys == ("requests", "version")
        assert items[2].keys == ("$bytes",)
        for item in items:
            assert not item.revealed
            assert all(str(v).startswith("sha256:") for v in item.values.values())
        assert "AIza-forged" not in json.dumps([i.to_dict() for i in items])

    def test_revealed(self, tmp_path):
        base, inventory = self.inventory(tmp_path)
        items, _ = inventory_credentials(base, inventory, reveal=True)
        assert items[0].values == {"profiles.google:default.apiKey": "AIza-forged"}
        assert items[1].values["requests"] == '[{"code": "X7K2"}]'
        assert all(item.revealed for item in items)
