"""
Tests for the subagent run registry.
"""
import json
import unittest

from clawex.artifacts.subagents import DEFAULT_ARCHIVE_AFTER_MS, parse_subagent_registry

from .utils import SESSION_ID, T0


class SubagentRegistryTestCase(unittest.TestCase):
    """
    Test cases for subagents/runs.json.
    """

    def registry(self, runs):
        return json.dumps({"version": 2, "runs": runs}).encode("utf-8")

    def test_records(self):
        registry = parse_subagent_registry(
            self.registry(
                {
                    "run-1": {
                        "runId": "run-1",
                        "childSessionKey": "agent:main:subagent:" + SESSION_ID,
                        "childSessionId": SESSION_ID,
                        "requesterSessionKey": "agent:main:main",
                        "task": "Read memory/2026-02-01.md",
                        "cleanup": "delete",
                        "createdAt": T0,
                        "startedAt": T0 + 100,
                        "endedAt": T0 + 9000,
                    }
                }
            )
        )
        self.assertTrue(registry.present)
        self.assertEqual(registry.warnings, [])
        (record,) = registry.records
        self.assertEqual(record.requester_session, "agent:main:main")
        self.assertEqual(record.child_session_id, SESSION_ID)
        self.assertEqual(record.sweep_deadline, (T0 + DEFAULT_ARCHIVE_AFTER_MS, "default"))
        self.assertEqual(DEFAULT_ARCHIVE_AFTER_MS, 60 * 60 * 1000)
        self.assertEqual(record.to_dict()["sweep_basis"], "default")

    def test_archive_at_wins(self):
        registry = parse_subagent_registry(self.registry({"r": {"createdAt": T0, "archiveAtMs": T0 + 5}}))
        self.assertEqual(registry.records[0].run_id, "r")
        self.assertEqual(registry.records[0].sweep_deadline, (T0 + 5, "archiveAtMs"))

    def test_list_form_and_bad_records(self):
        registry = parse_subagent_registry(
            self.registry([{"runId": "a", "startedAt": T0 + 10, "endedAt": T0}, {"task": "no id"}, "junk"])
        )
        self.assertEqual([r.run_id for r in registry.records], ["a"])
        self.assertEqual(len(registry.warnings), 3)
        self.assertEqual(registry.records[0].sweep_deadline, (T0 + 10 + DEFAULT_ARCHIVE_AFTER_MS, "default"))

    def test_absent(self):
        registry = parse_subagent_registry(None)
        self.assertFalse(registry.present)
        self.assertEqual(registry.records, [])
        self.assertEqual(len(registry.notes), 1)

    def test_malformed_is_kept_raw(self):
        registry = parse_subagent_registry(b"runs: not json")
        self.assertTrue(registry.present)
        self.assertEqual(registry.raw_text, "runs: not json")
        self.assertEqual(len(registry.warnings), 1)
