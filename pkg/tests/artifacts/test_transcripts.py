"""
Tests for session index and transcript parsing.
"""
import json
import unittest

import pytest

from clawex.artifacts.transcripts import (
    FinalTagged,
    Message,
    ProviderMode,
    SessionHeader,
    SessionStatus,
    ThinkTagged,
    TextBlock,
    extract_user_attribution,
    has_truncated_tail,
    header_is_valid,
    parse_media_filename,
    parse_session_index,
    parse_transcript,
    resolve_sessions,
    split_tagged_text,
    visible_output,
)
from clawex.clawex import MalformedIndex, NotMediaName
from clawex.utils import to_utc_ms

from .utils import OTHER_SESSION_ID, SESSION_ID, T0, CommonArtifactTestTools, header, jsonl, message, text


class TranscriptTestCase(unittest.TestCase, CommonArtifactTestTools):
    """
    Test cases for transcript parsing.
    """

    def setUp(self):
        self.entries, self.warnings = parse_transcript(self.simple_transcript(), "s.jsonl")

    def test_entries_in_file_order(self):
        self.assertEqual(self.warnings, [])
        self.assertEqual([e.line_no for e in self.entries], [1, 2, 3, 4, 5])
        self.assertEqual(
            [e.tag for e in self.entries],
            ["SessionHeader", "Message:user", "Message:assistant", "Message:toolResult", "Message:assistant"],
        )
        self.assertEqual([e.parent_id for e in self.entries], [None, None, "a1", "a2", "a3"])

    def test_header(self):
        first = self.entries[0].payload
        self.assertIsInstance(first, SessionHeader)
        self.assertEqual(first.version, 3)
        self.assertEqual(first.session_uuid, SESSION_ID)
        self.assertEqual(first.created, T0)
        self.assertTrue(header_is_valid(self.entries))

    def test_header_other_version_is_invalid(self):
        entries, _ = parse_transcript(jsonl(header(version=2)))
        self.assertFalse(header_is_valid(entries))
        self.assertFalse(header_is_valid([]))

    def test_tool_call_and_result(self):
        call = self.entries[2].payload
        self.assertEqual(call.thinking, "List it.")
        self.assertEqual(call.usage.stop_reason, "toolUse")
        (block,) = call.tool_calls
        self.assertEqual((block.id, block.name, block.arguments), ("call_1", "exec", {"command": "ls"}))
        result = self.entries[3].payload
        self.assertEqual(result.tool_call_id, "call_1")
        self.assertEqual(result.tool_name, "exec")
        self.assertIs(result.is_error, False)
        self.assertEqual((result.details.duration_ms, result.details.exit_code), (480, 0))
        self.assertEqual(result.details.status, "completed")
        self.assertEqual(self.entries[3].time, T0 + 1500)

    def test_tagged_reply(self):
        reply = self.entries[4].payload
        self.assertEqual(reply.blocks, (ThinkTagged("done"), FinalTagged("Here.")))
        self.assertEqual(reply.thinking, "done")
        self.assertEqual(visible_output(reply), "Here.")
        self.assertEqual(visible_output(reply, ProviderMode.NativeThinking), "doneHere.")

    def test_user_text_is_not_tag_split(self):
        entries, _ = parse_transcript(jsonl(message("u", None, "user", text("<final>hi</final>"))))
        self.assertEqual(entries[0].payload.blocks, (TextBlock("<final>hi</final>"),))

    def test_bad_lines_are_salvaged(self):
        content = self.simple_transcript().replace(b'{"type":"message","id":"a3"', b'{"type":"message","id":"a3"<<', 1)
        entries, warnings = parse_transcript(content, "s.jsonl")
        self.assertEqual(len(entries), 4)
        self.assert_warning_at(warnings, 4)
        self.assertEqual(warnings[0].source, "s.jsonl")

    def test_variant_field_names(self):
        record = {
            "type": "message",
            "id": "b2",
            "parent_id": "b1",
            "ts": "2026-02-02T08:00:01Z",
            "message": {"role": "toolResult", "content": [], "tool_call_id": "c9", "is_error": True},
        }
        (entry,), warnings = parse_transcript(jsonl(record))
        self.assertEqual(warnings, [])
        self.assertEqual(entry.parent_id, "b1")
        self.assertEqual(entry.time, T0 + 1000)
        self.assertEqual(entry.payload.tool_call_id, "c9")
        self.assertIs(entry.payload.is_error, True)

    def test_unknown_records_are_custom(self):
        entries, _ = parse_transcript(jsonl({"type": "thinking_level_change", "id": "x", "thinkingLevel": "low"}))
        self.assertEqual(entries[0].tag, "Custom")
        self.assertEqual(entries[0].payload.raw["thinkingLevel"], "low")

    def test_result_without_call_id_warns(self):
        _, warnings = parse_transcript(jsonl(message("r", None, "toolResult", text("x"))), "s.jsonl")
        self.assertEqual([w.reason for w in warnings], ["toolResult without toolCallId"])

    def test_empty(self):
        self.assertEqual(parse_transcript(b""), ([], []))


@pytest.mark.parametrize(
    "content, expected",
    [
        (b'{"a":1}\n{"b":', True),
        (b'{"a":1}\n{"b":2}', False),
        (b'{"a":1}\n{"b":\n', False),
        (b"", False),
    ],
)
def test_has_truncated_tail(content, expected):
    assert has_truncated_tail(content) is expected


def test_split_tagged_text_warnings():
    segments, warnings = split_tagged_text("<think>plan</think>said</final> <final>out", "s.jsonl", 4)
    assert segments == [ThinkTagged("plan"), TextBlock("said"), TextBlock(" "), FinalTagged("out")]
    assert [w.reason for w in warnings] == ["stray </final> tag", "unclosed <final> tag runs to end of block"]
    assert all(w.line_no == 4 for w in warnings)


def test_split_tagged_text_nested():
    segments, warnings = split_tagged_text("<final>a<think>b</think>c</final>")
    assert segments == [FinalTagged("a"), ThinkTagged("b"), FinalTagged("c")]
    assert warnings == []


class SessionIndexTestCase(unittest.TestCase):
    """
    Test cases for sessions.json.
    """

    def index_bytes(self, data):
        return json.dumps(data).encode("utf-8")

    def test_flat_and_nested_forms_agree(self):
        entries = {
            "agent:main:main": {
                "sessionId": SESSION_ID,
                "updatedAt": T0,
                "sessionFile": "/home/ada/.openclaw/agents/main/sessions/{}.jsonl".format(SESSION_ID),
                "model": "gemini-3-pro-preview",
                "inputTokens": 1200,
                "origin": {"provider": "telegram", "from": "telegram:42", "label": "Ada"},
                "extraField": 1,
            }
        }
        flat = parse_session_index(self.index_bytes(entries))
        nested = parse_session_index(self.index_bytes({"sessions": entries}))
        self.assertEqual(flat.entries, nested.entries)
        meta = flat.entries["agent:main:main"]
        self.assertEqual(meta.session_id, SESSION_ID)
        self.assertEqual(meta.updated_at, T0)
        self.assertEqual(meta.model_name, "gemini-3-pro-preview")
        self.assertEqual(meta.token_usage, {"inputTokens": 1200})
        self.assertEqual(meta.origin.from_, "telegram:42")
        self.assertEqual(meta.raw, {"extraField": 1})
        self.assertEqual(flat.warnings, [])
        self.assertEqual(flat.by_session_id(), {SESSION_ID: "agent:main:main"})

    def test_variant_aliases(self):
        index = parse_session_index(
            self.index_bytes({"agent:main:subagent:x": {"session_id": SESSION_ID, "parentSessionKey": "agent:main:main"}})
        )
        meta = index.entries["agent:main:subagent:x"]
        self.assertEqual(meta.session_id, SESSION_ID)
        self.assertEqual(meta.spawned_by, "agent:main:main")

    def test_record_warnings(self):
        index = parse_session_index(
            self.index_bytes(
                {
                    "a:b": {"sessionId": "not-a-uuid"},
                    "a:c": {"sessionId": SESSION_ID, "state": "sleeping"},
                    "a:d": {"sessionId": OTHER_SESSION_ID, "spawnedBy": "not a key"},
                    "a:e": ["not", "an", "object"],
                }
            ),
            source="sessions.json",
        )
        reasons = [w.reason for w in index.warnings]
        self.assertEqual(len(reasons), 4)
        self.assertIn("entry 'a:b' has no UUID sessionId", reasons)
        self.assertIn("entry 'a:c' has unknown state 'sleeping'", reasons)
        self.assertIn("entry 'a:d' spawnedBy is not a session key", reasons)
        self.assertIn("entry 'a:e' is not an object", reasons)
        self.assertNotIn("a:e", index.entries)

    def test_malformed_index(self):
        with self.assertRaises(MalformedIndex):
            parse_session_index(b"[1, 2]")
        with self.assertRaises(MalformedIndex) as caught:
            parse_session_index(b'{"agent:main:main": ')
        self.assertIsNotNone(caught.exception.offset)


class ResolveSessionsTestCase(unittest.TestCase):
    """
    Test cases for classifying transcript files against the index.
    """

    def setUp(self):
        dangling = "11111111-2222-4333-8444-555555555555"
        self.index = parse_session_index(
            json.dumps(
                {
                    "agent:main:main": {"sessionId": SESSION_ID},
                    "agent:main:telegram:direct:77": {"sessionId": dangling},
                }
            ).encode("utf-8")
        )
        self.dangling = dangling
        self.listing = {
            SESSION_ID + ".jsonl": None,
            OTHER_SESSION_ID + ".jsonl": None,
            OTHER_SESSION_ID + ".jsonl.deleted.2026-02-02T10-30-00.000Z": None,
            "notes.txt": None,
        }
        self.records = resolve_sessions(self.index, self.listing, agent_id="main")

    def test_every_file_lands_once(self):
        by_file = {r.filename: r for r in self.records if r.filename}
        self.assertEqual(len(by_file), 3)
        self.assertEqual(by_file[SESSION_ID + ".jsonl"].status, SessionStatus.Indexed)
        self.assertEqual(by_file[SESSION_ID + ".jsonl"].session_key, "agent:main:main")
        self.assertEqual(by_file[OTHER_SESSION_ID + ".jsonl"].status, SessionStatus.Orphaned)
        deleted = by_file[OTHER_SESSION_ID + ".jsonl.deleted.2026-02-02T10-30-00.000Z"]
        self.assertEqual(deleted.status, SessionStatus.SoftDeleted)
        self.assertEqual(deleted.deleted_at, to_utc_ms("2026-02-02T10:30:00.000Z"))
        self.assertEqual(deleted.path, "agents/main/sessions/" + deleted.filename)

    def test_dangling_index_entry(self):
        dangling = [r for r in self.records if r.status is SessionStatus.Dangling]
        self.assertEqual(len(dangling), 1)
        self.assertEqual(dangling[0].session_id, self.dangling)
        self.assertEqual(dangling[0].session_key, "agent:main:telegram:direct:77")
        self.assertIsNone(dangling[0].path)

    def test_deleted_copy_keeps_live_one_indexed(self):
        listing = {SESSION_ID + ".jsonl": None, SESSION_ID + ".jsonl.deleted.2026-02-01T00-00-00Z": None}
        records = resolve_sessions(self.index, listing, agent_id="main")
        statuses = sorted(r.status.value for r in records if r.session_id == SESSION_ID)
        self.assertEqual(statuses, ["Indexed", "SoftDeleted"])


class AttributionTestCase(unittest.TestCase):
    """
    Test cases for channel envelopes on inbound user text.
    """

    def test_telegram_header(self):
        attribution = extract_user_attribution(
            "[Telegram Ada Lovelace (@ada) id:42 2026-02-02 08:00 UTC] hello\n[message_id: 7]"
        )
        self.assertEqual(attribution.channel, "Telegram")
        self.assertEqual(attribution.display_name, "Ada Lovelace")
        self.assertEqual(attribution.handle, "ada")
        self.assertEqual(attribution.platform_user_id, "42")
        self.assertEqual(attribution.message_time, T0)
        self.assertEqual(attribution.platform_message_id, 7)
        self.assertEqual(attribution.warnings, ())

    def test_header_without_handle(self):
        attribution = extract_user_attribution("[WhatsApp Bob id:77 2026-02-02 08:00 UTC] hi")
        self.assertEqual((attribution.display_name, attribution.handle), ("Bob", None))

    def test_media_notes(self):
        attribution = extract_user_attribution(
            "look\n[media attached: /home/ada/.openclaw/media/inbound/a.jpg (image/jpeg)]\n"
            "[media attached: /tmp/b.ogg (audio/ogg) | https://example.org/b]"
        )
        self.assertIsNone(attribution.channel)
        self.assertEqual([m.mime for m in attribution.media_refs], ["image/jpeg", "audio/ogg"])
        self.assertEqual(attribution.media_refs[1].url, "https://example.org/b")

    def test_malformed_header_is_best_effort(self):
        attribution = extract_user_attribution("[Telegram Ada id:42 yesterday] hi", source="s.jsonl")
        self.assertEqual(attribution.channel, "Telegram")
        self.assertEqual(attribution.platform_user_id, "42")
        self.assertIsNone(attribution.message_time)
        self.assertEqual([w.reason for w in attribution.warnings], ["malformed Telegram header"])

    def test_plain_text(self):
        self.assertIsNone(extract_user_attribution("just text"))

    def test_accepts_message(self):
        entries, _ = parse_transcript(jsonl(message("u", None, "user", text("[message_id: 12]"))))
        self.assertIsInstance(entries[0].payload, Message)
        self.assertEqual(extract_user_attribution(entries[0].payload).platform_message_id, 12)


@pytest.mark.parametrize(
    "name, original, ext",
    [
        ("holiday-photo---{}.jpg".format(SESSION_ID), "holiday-photo", "jpg"),
        ("{}.ogg".format(SESSION_ID), None, "ogg"),
        ("notes---v2---{}.md".format(SESSION_ID), "notes---v2", "md"),
        ("backup---{}.tar.gz".format(SESSION_ID), "backup", "tar.gz"),
        ("{}".format(SESSION_ID.upper()), None, ""),
    ],
)
def test_parse_media_filename(name, original, ext):
    parsed = parse_media_filename(name)
    assert parsed.original == original
    assert parsed.uuid == SESSION_ID
    assert parsed.ext == ext


@pytest.mark.parametrize("name", ["photo.jpg", "photo---1234.jpg", "", "{}.tar.".format(SESSION_ID)])
def test_parse_media_filename_rejects(name):
    with pytest.raises(NotMediaName):
        parse_media_filename(name)
