"""
Utilities common to store-level tests.
"""
from clawex.settings import ExaminerSettings


def truth_settings(truth):
    """Settings a generated store must be examined with to reproduce its ground truth."""
    settings = ExaminerSettings.from_mapping(dict(truth.settings))
    return settings.with_overrides(capture_time=truth.capture_time)


def rule_ids(findings):
    return sorted({f.rule_id for f in findings}, key=lambda r: (r[0], int(r[1:])))


class CommonStoreTestTools(object):
    """Assertions shared by tests that load generated stores."""

    def assert_no_anomalies(self, findings):
        anomalous = [f.summary for f in findings if f.severity.name == "Anomalous"]
        self.assertEqual(anomalous, [])

    def assert_rules_fired(self, findings, expected):
        fired = set(rule_ids(findings))
        missing = sorted(set(expected) - fired)
        self.assertEqual(missing, [], "expected rules did not fire; got {}".format(sorted(fired)))

    def assert_inventory_matches(self, evidence, truth):
        found = [(d.kind.name, d.root, d.path) for d in evidence.inventory.descriptors]
        self.assertEqual(found, [tuple(item) for item in truth.inventory])
        self.assertEqual(evidence.inventory.unclassified, [])

    def assert_sessions_match(self, evidence, truth):
        records = {r.session_id: r for r in evidence.session_records}
        self.assertEqual(sorted(records), sorted(truth.sessions))
        for session_id, expected in truth.sessions.items():
            record = records[session_id]
            self.assertEqual(
                (record.status.value, record.session_key, record.path),
                (expected["status"], expected["key"], expected["path"]),
                session_id,
            )
            transcript = evidence.transcript_for(session_id)
            self.assertEqual([e.tag for e in transcript.entries], expected["tags"], session_id)

    def assert_pairings_match(self, correlation, truth):
        found = {
            e.tool_call_id: (e.session, e.tool_name, bool(e.is_error)) for e in correlation.executions
        }
        expected = {
            call_id: (item["session"], item["tool"], item["is_error"]) for call_id, item in truth.pairings.items()
        }
        self.assertEqual(found, expected)

    def assert_delegation_matches(self, correlation, truth):
        key = lambda d: (d["parent"], d["child"])
        edges = [
            {
                "parent": e.parent,
                "child": e.child,
                "spawn_tool_call_id": e.spawn_tool_call_id,
                "cleanup_observed": e.cleanup_observed,
            }
            for e in correlation.delegation.edges
        ]
        self.assertEqual(sorted(edges, key=key), sorted(truth.delegation, key=key))

    def assert_cron_matches(self, correlation, truth):
        found = sorted(
            (a.run.job_id, a.run.time, a.venue.value, a.linked_session) for a in correlation.cron_attributions
        )
        self.assertEqual(found, sorted((c["job_id"], c["time"], c["venue"], c["session"]) for c in truth.cron))
