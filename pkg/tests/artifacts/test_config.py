"""
Tests for openclaw.json parsing, backup ordering and configuration diffs.
"""
import json
import unittest

from clawex.artifacts.config import (
    ORDERING_META,
    ORDERING_MTIME,
    ChangeKind,
    build_config_history,
    config_at,
    diff_configs,
    parse_config,
)
from clawex.clawex import MalformedConfig

from .utils import T0

DAY = 24 * 60 * 60 * 1000


def document(model="google/gemini-3-pro-preview", touched=None, channels=("telegram",), token="123:abc", **extra):
    data = {
        "agents": {
            "defaults": {"model": {"primary": model}, "workspace": "/home/ada/.openclaw/workspace"},
            "list": [{"id": "main"}],
        },
        "channels": {name: {"enabled": True, "botToken": token} for name in channels},
        "gateway": {"port": 18789},
    }
    if touched is not None:
        data["meta"] = {"lastTouchedAt": touched, "lastTouchedVersion": "2026.1.29"}
    data.update(extra)
    return json.dumps(data).encode("utf-8")


class ParseConfigTestCase(unittest.TestCase):
    """
    Test cases for a single configuration file.
    """

    def test_known_fields(self):
        config = parse_config(document(touched="2026-02-02T08:00:00.000Z"))
        self.assertEqual(config.default_model, "google/gemini-3-pro-preview")
        self.assertEqual([a.id for a in config.agents], ["main"])
        self.assertEqual(config.workspace_for("main"), "/home/ada/.openclaw/workspace")
        self.assertEqual(config.channels["telegram"].bot_token, "123:abc")
        self.assertEqual(config.meta.last_touched_at, T0)
        self.assertEqual(config.raw["gateway"], {"port": 18789})

    def test_token_redacted_unless_revealed(self):
        config = parse_config(document())
        redacted = config.to_dict()["channels"]["telegram"]["bot_token"]
        self.assertTrue(redacted.startswith("sha256:"))
        self.assertEqual(config.to_dict(reveal=True)["channels"]["telegram"]["bot_token"], "123:abc")

    def test_per_agent_workspace(self):
        config = parse_config(b'{"agents": {"list": [{"id": "ops", "workspace": "/srv/ops"}, {"id": "main"}]}}')
        self.assertEqual(config.workspace_for("ops"), "/srv/ops")
        self.assertEqual(config.workspace_for("main"), "workspace/")
        self.assertIsNone(config.default_model)

    def test_duplicate_agent_ids(self):
        with self.assertRaises(MalformedConfig):
            parse_config(b'{"agents": {"list": [{"id": "main"}, {"id": "main"}]}}')

    def test_not_an_object(self):
        with self.assertRaises(MalformedConfig) as caught:
            parse_config(b'{"agents": [')
        self.assertIsNotNone(caught.exception.offset)
        with self.assertRaises(MalformedConfig):
            parse_config(b'"just a string"')


class ConfigHistoryTestCase(unittest.TestCase):
    """
    Test cases for ordering the backup chain.
    """

    def setUp(self):
        # Suffix order deliberately disagrees with age.
        self.sources = [
            ("openclaw.json", document(touched=T0), T0 + 5),
            ("openclaw.json.bak", document(model="google/gemini-2.5-flash", touched=T0 - 3 * DAY), T0),
            ("openclaw.json.bak.1", document(model="google/gemini-2.5-pro", touched=T0 - DAY), T0),
            ("openclaw.json.bak.2", document(model="google/gemini-2.5-pro", channels=("telegram", "discord")), T0 - 2 * DAY),
            ("openclaw.json.bak.3", b"{broken", T0),
        ]
        self.history = build_config_history(self.sources)

    def test_ordered_by_last_touched(self):
        self.assertEqual(
            [s.source_path for s in self.history.snapshots],
            ["openclaw.json.bak", "openclaw.json.bak.2", "openclaw.json.bak.1", "openclaw.json"],
        )
        orderings = {s.source_path: s.ordering for s in self.history.snapshots}
        self.assertEqual(orderings["openclaw.json.bak.2"], ORDERING_MTIME)
        self.assertEqual(orderings["openclaw.json"], ORDERING_META)

    def test_broken_backup_is_a_warning(self):
        self.assertEqual([w.source for w in self.history.warnings], ["openclaw.json.bak.3"])

    def test_config_at(self):
        self.assertIsNone(config_at(self.history, T0 - 4 * DAY))
        self.assertEqual(config_at(self.history, T0 - 3 * DAY).source_path, "openclaw.json.bak")
        self.assertEqual(config_at(self.history, T0 - DAY - 1).source_path, "openclaw.json.bak.2")
        self.assertEqual(config_at(self.history, T0 + 1).source_path, "openclaw.json")


class DiffConfigsTestCase(unittest.TestCase):
    """
    Test cases for structural configuration diffs.
    """

    def test_identical(self):
        self.assertEqual(diff_configs(parse_config(document()), parse_config(document())), [])

    def test_meta_is_ignored(self):
        a = parse_config(document(touched=T0))
        b = parse_config(document(touched=T0 + DAY))
        self.assertEqual(diff_configs(a, b), [])

    def test_model_channel_and_section_changes(self):
        a = parse_config(document(model="google/gemini-2.5-pro", channels=("telegram", "discord")))
        b = parse_config(document(tools={"allow": ["read", "exec"]}))
        changes = {c.path: c for c in diff_configs(a, b)}
        self.assertEqual(sorted(changes), ["agents.default_model", "channels.discord", "tools"])
        self.assertEqual(changes["agents.default_model"].change, ChangeKind.Changed)
        self.assertEqual(changes["agents.default_model"].after, "google/gemini-3-pro-preview")
        self.assertEqual(changes["channels.discord"].change, ChangeKind.Removed)
        self.assertEqual(changes["tools"].change, ChangeKind.Added)
        self.assertEqual(changes["tools"].to_dict()["change"], "Added")

    def test_sorted_by_path(self):
        a = parse_config(document(token="1"))
        b = parse_config(document(token="2", gateway={"port": 1}))
        paths = [c.path for c in diff_configs(a, b)]
        self.assertEqual(paths, sorted(paths))
        self.assertEqual(paths, ["channels.telegram.botToken", "gateway.port"])
