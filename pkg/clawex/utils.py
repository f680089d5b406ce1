# -*- coding: utf-8 -*-
"""A bunch of small utilities shared by the parsers and the analyses.

Timestamps, hashing, aliased field access, path globbing and line-salvaging JSONL reads.
"""
import datetime
import fnmatch
import hashlib
import json
import re

from clawex.clawex import ParseWarning

# Integer epochs below this are seconds, at or above it milliseconds.
EPOCH_MS_THRESHOLD = 10 ** 11

# The span datetime can represent, 0001-01-01 to 9999-12-31T23:59:59.999Z.
MIN_UTC_MS = -62135596800000
MAX_UTC_MS = 253402300799999

_HEADER_STYLE_TIME = re.compile(r"^(\d{4}-\d{2}-\d{2})[ T](\d{2}:\d{2})(?::(\d{2}))?\s*UTC$")


def to_utc_ms(value):
    """
    Normalizes a timestamp to integer UTC milliseconds.

    Accepts integer/float epochs (seconds or milliseconds, told apart by magnitude),
    digit strings, ISO-8601 strings (naive values are taken as UTC) and the
    `YYYY-MM-DD HH:MM UTC` form used in channel headers.
    Returns None when the value cannot be interpreted or lies outside the years 1-9999.
    """
    if value is None or isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        if value != value or value in (float("inf"), float("-inf")):
            return None
        ms = int(round(value * 1000)) if abs(value) < EPOCH_MS_THRESHOLD else int(value)
        return ms if MIN_UTC_MS <= ms <= MAX_UTC_MS else None
    if not isinstance(value, str):
        return None
    text = value.strip()
    if not text:
        return None
    if re.match(r"^-?\d+(\.\d+)?$", text):
        return to_utc_ms(float(text) if "." in text else int(text))
    match = _HEADER_STYLE_TIME.match(text)
    if match:
        date, hhmm, seconds = match.groups()
        text = "{}T{}:{}".format(date, hhmm, seconds or "00")
    if text.endswith("Z") or text.endswith("z"):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.datetime.fromisoformat(text)
    except ValueError:
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=datetime.timezone.utc)
    delta = parsed - datetime.datetime(1970, 1, 1, tzinfo=datetime.timezone.utc)
    ms = (delta.days * 86400 + delta.seconds) * 1000 + delta.microseconds // 1000
    return ms if MIN_UTC_MS <= ms <= MAX_UTC_MS else None


def iso_utc(ms):
    """
    Returns the UTC timestamp for `ms` in ISO-8601 format with millisecond precision.
    """
    if ms is None or not MIN_UTC_MS <= ms <= MAX_UTC_MS:
        return None
    moment = datetime.datetime(1970, 1, 1, tzinfo=datetime.timezone.utc) + datetime.timedelta(
        milliseconds=ms
    )
    return moment.strftime("%Y-%m-%dT%H:%M:%S.") + "{:03d}Z".format(moment.microsecond // 1000)


def utc_date(ms):
    """The UTC calendar date (datetime.date) containing `ms`, None when out of range."""
    if ms is None or not MIN_UTC_MS <= ms <= MAX_UTC_MS:
        return None
    return (
        datetime.datetime(1970, 1, 1, tzinfo=datetime.timezone.utc)
        + datetime.timedelta(milliseconds=ms)
    ).date()


def date_start_ms(date):
    """Milliseconds at 00:00 UTC of `date`."""
    return to_utc_ms(date.isoformat() + "T00:00:00Z")


def calc_sha256(data):
    """
    Calculates the SHA-256 digest of the given bytes, as lowercase hex.
    """
    sha = hashlib.sha256()
    sha.update(data)
    return sha.hexdigest()


def calc_file_sha256(path, chunk_size=1 << 16):
    """SHA-256 of a file's bytes, read in chunks."""
    sha = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b""):
            sha.update(chunk)
    return sha.hexdigest()


def redact(value):
    """
    Replaces a credential value with a short digest so equal secrets stay comparable.
    """
    if value is None:
        return None
    if not isinstance(value, (bytes, str)):
        value = canonical_json(value)
    if isinstance(value, str):
        value = value.encode("utf-8")
    return "sha256:" + calc_sha256(value)[:16]


def short_hash(*parts):
    """Stable 12-hex identifier over the canonical JSON of `parts`."""
    return calc_sha256(canonical_json(list(parts)).encode("utf-8"))[:12]


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)


def get_alias(record, aliases, default=None):
    """
    Returns the first present value among `aliases` in `record`.

    An alias may be dotted (`_meta.date`) to reach into nested objects.
    Returns (alias_used, value); alias_used is None when nothing matched.
    """
    if not isinstance(record, dict):
        return None, default
    for alias in aliases:
        node = record
        found = True
        for part in alias.split("."):
            if isinstance(node, dict) and part in node:
                node = node[part]
            else:
                found = False
                break
        if found and node is not None:
            return alias, node
    return None, default


def alias_value(record, aliases, default=None):
    return get_alias(record, aliases, default)[1]


def loads_object(content, error_cls, what):
    """
    Parses `content` (bytes or str) as one JSON document.

    Raises `error_cls(message, offset=byte offset)` when it is not JSON at all, or when
    the top-level value is not an object.
    """
    if isinstance(content, bytes):
        try:
            text = content.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise error_cls("{} is not UTF-8: {}".format(what, exc), offset=exc.start)
    else:
        text = content
    if not text.strip():
        return {}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise error_cls("{} is not valid JSON: {}".format(what, exc.msg), offset=offset)
    if not isinstance(obj, dict):
        raise error_cls("{} is not a structured object".format(what), offset=0)
    return obj


def iter_jsonl(content, source):
    """
    Walks newline-delimited JSON, salvaging line by line.

    Yields (line_no, obj, warning) for every non-empty line, exactly one of obj and
    warning being set. Never raises on bad input.
    """
    if not content:
        return
    if isinstance(content, str):
        content = content.encode("utf-8", errors="surrogatepass")
    for idx, raw in enumerate(content.split(b"\n")):
        line_no = idx + 1
        raw = raw.rstrip(b"\r")
        if not raw.strip():
            continue
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            yield line_no, None, ParseWarning(source, "line is not UTF-8: {}".format(exc.reason), line_no)
            continue
        try:
            obj = json.loads(text)
        except (ValueError, RecursionError) as exc:
            yield line_no, None, ParseWarning(source, "malformed JSON: {}".format(exc), line_no)
            continue
        if not isinstance(obj, dict):
            yield line_no, None, ParseWarning(source, "line is not a JSON object", line_no)
            continue
        yield line_no, obj, None


def match_glob(pattern, path):
    """
    Matches a slash-separated relative `path` against `pattern`.

    `{name}` matches exactly one segment and captures it, `*`/`?` work within one segment,
    `**` matches zero or more whole segments.
    Returns the dict of captures on a match, otherwise None.
    """
    return _match_segments(pattern.split("/"), path.split("/"), {})


def _match_segments(pat, parts, captures):
    if not pat:
        return dict(captures) if not parts else None
    head = pat[0]
    if head == "**":
        for cut in range(len(parts) + 1):
            found = _match_segments(pat[1:], parts[cut:], captures)
            if found is not None:
                return found
        return None
    if not parts:
        return None
    segment = parts[0]
    if head.startswith("{") and head.endswith("}"):
        if not segment:
            return None
        name = head[1:-1]
        if name in captures and captures[name] != segment:
            return None
        nested = dict(captures)
        nested[name] = segment
        return _match_segments(pat[1:], parts[1:], nested)
    if not fnmatch.fnmatchcase(segment, head):
        return None
    return _match_segments(pat[1:], parts[1:], captures)


def normalize_text(text):
    """Casefolds and collapses whitespace, for containment checks."""
    return " ".join((text or "").casefold().split())


def excerpt(text, limit=200):
    text = " ".join((text or "").split())
    if len(text) <= limit:
        return text
    return text[: limit - 3] + "..."
