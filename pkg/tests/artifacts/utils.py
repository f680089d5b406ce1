"""
Utilities common to artifact parser tests.
"""
import json
import os

SESSION_ID = "0f8fad5b-d9cb-469f-a165-70867728950e"
OTHER_SESSION_ID = "7c9e6679-7425-40de-944b-e07fc1f90ae7"
T0 = 1770019200000  # 2026-02-02T08:00:00Z


def jsonl(*records):
    """Bytes of one JSON object per line, newline-terminated."""
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records).encode("utf-8")


def header(session_id=SESSION_ID, version=3, ts="2026-02-02T08:00:00.000Z"):
    return {"type": "session", "version": version, "id": session_id, "timestamp": ts, "cwd": "/home/ada/.openclaw/workspace"}


def message(entry_id, parent_id, role, content, ts=T0, **extra):
    body = {"role": role, "content": content, "timestamp": ts}
    body.update(extra)
    return {"type": "message", "id": entry_id, "parentId": parent_id, "timestamp": ts, "message": body}


def text(value):
    return [{"type": "text", "text": value}]


def tool_call(call_id, name, arguments):
    return {"type": "toolCall", "id": call_id, "name": name, "arguments": arguments}


def write_tree(base, files, mtime_ms=None):
    """
    Writes `files` ({relative path: bytes or str}) under `base`, creating parents.
    Every written file gets `mtime_ms` as its modification time when given.
    """
    for rel, content in files.items():
        full = os.path.join(str(base), *rel.split("/"))
        os.makedirs(os.path.dirname(full), exist_ok=True)
        with open(full, "wb") as handle:
            handle.write(content.encode("utf-8") if isinstance(content, str) else content)
        if mtime_ms is not None:
            os.utime(full, ns=(mtime_ms * 1000000, mtime_ms * 1000000))
    return str(base)


class CommonArtifactTestTools(object):
    """Builds small transcripts for parser tests."""

    def simple_transcript(self):
        return jsonl(
            header(),
            message("a1", None, "user", text("[Telegram Ada (@ada) id:42 2026-02-02 08:00 UTC] list files\n[message_id: 7]")),
            message(
                "a2",
                "a1",
                "assistant",
                [{"type": "thinking", "thinking": "List it."}, tool_call("call_1", "exec", {"command": "ls"})],
                ts=T0 + 1000,
                stopReason="toolUse",
            ),
            message(
                "a3",
                "a2",
                "toolResult",
                text("AGENTS.md\n"),
                ts=T0 + 1500,
                toolCallId="call_1",
                toolName="exec",
                isError=False,
                details={"durationMs": 480, "exitCode": 0, "status": "completed"},
            ),
            message("a4", "a3", "assistant", text("<think>done</think><final>Here.</final>"), ts=T0 + 2000, stopReason="stop"),
        )

    def assert_warning_at(self, warnings, line_no):
        self.assertIn(line_no, [w.line_no for w in warnings])
