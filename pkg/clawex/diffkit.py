# -*- coding: utf-8 -*-
"""
Differential analysis of directory trees.

A manifest records one state of a tree; comparing two consecutive manifests yields the
changes an action caused, each in exactly one of five categories: Created, Deleted,
Renamed, ContentModified, TimestampUpdated.
"""
import json
import logging
import os
import stat
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from clawex.clawex import InputError
from clawex.utils import calc_file_sha256, canonical_json, match_glob, short_hash

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA = "clawex.manifest/1"
CHANGESET_SCHEMA = "clawex.changeset/1"
HASH_ALGORITHM = "sha256"


@dataclass(frozen=True)
class ActionLabel:
    name: str
    index: int = 0

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("Action index must be non-negative, got {}.".format(self.index))


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    size: int = 0
    mtime: Optional[int] = None
    ctime: Optional[int] = None
    content_hash: Optional[str] = None
    is_dir: bool = False
    symlink_target: Optional[str] = None
    error: Optional[str] = None

    @property
    def is_file(self):
        return not self.is_dir and self.symlink_target is None

    def content_key(self):
        """What "same content" means for this entry."""
        if self.is_dir:
            return ("dir",)
        if self.symlink_target is not None:
            return ("link", self.symlink_target)
        return ("file", self.content_hash, self.size)

    def to_dict(self):
        data = {"size": self.size, "mtime": self.mtime, "ctime": self.ctime, "is_dir": self.is_dir}
        if self.content_hash is not None:
            data["content_hash"] = self.content_hash
        if self.symlink_target is not None:
            data["symlink_target"] = self.symlink_target
        if self.error is not None:
            data["error"] = self.error
        return data

    @classmethod
    def from_dict(cls, path, data):
        return cls(
            path=path,
            size=int(data.get("size") or 0),
            mtime=data.get("mtime"),
            ctime=data.get("ctime"),
            content_hash=data.get("content_hash"),
            is_dir=bool(data.get("is_dir")),
            symlink_target=data.get("symlink_target"),
            error=data.get("error"),
        )


@dataclass
class Snapshot:
    state_id: str
    entries: Dict[str, ManifestEntry] = field(default_factory=dict)
    label: Optional[ActionLabel] = None
    root: Optional[str] = None

    @property
    def files(self):
        return {path: entry for path, entry in self.entries.items() if not entry.is_dir}

    def to_dict(self):
        return {
            "schema": MANIFEST_SCHEMA,
            "hash_algorithm": HASH_ALGORITHM,
            "state_id": self.state_id,
            "label": {"name": self.label.name, "index": self.label.index} if self.label else None,
            "entries": {path: self.entries[path].to_dict() for path in sorted(self.entries)},
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or data.get("schema") != MANIFEST_SCHEMA:
            raise InputError("Not a {} document.".format(MANIFEST_SCHEMA))
        label = data.get("label")
        return cls(
            state_id=str(data.get("state_id")),
            entries={
                path: ManifestEntry.from_dict(path, entry) for path, entry in (data.get("entries") or {}).items()
            },
            label=ActionLabel(label["name"], int(label.get("index", 0))) if label else None,
        )


def _ms(ns):
    return ns // 1000000


def snapshot_manifest(root, state_id, label=None):
    """
    Records the state of the tree under `root`.

    The walk is sorted and does not follow symlinks; links are recorded with their
    target. Every regular file is hashed. An entry that cannot be read keeps an
    `error` flag and the walk continues.
    """
    if not os.path.isdir(root):
        raise InputError("{} is not a directory.".format(root))
    snapshot = Snapshot(state_id=state_id, label=label, root=root)

    def _onerror(exc):
        rel = os.path.relpath(getattr(exc, "filename", root) or root, root).replace(os.sep, "/")
        snapshot.entries[rel] = ManifestEntry(rel, is_dir=True, error=str(exc))

    for dirpath, dirnames, filenames in os.walk(root, onerror=_onerror, followlinks=False):
        dirnames.sort()
        names = sorted(filenames)
        for name in list(dirnames):
            if os.path.islink(os.path.join(dirpath, name)):
                names.append(name)
        for name in sorted(dirnames):
            full = os.path.join(dirpath, name)
            if os.path.islink(full):
                continue
            rel = os.path.relpath(full, root).replace(os.sep, "/")
            try:
                st = os.lstat(full)
                snapshot.entries[rel] = ManifestEntry(
                    rel, 0, _ms(st.st_mtime_ns), _ms(st.st_ctime_ns), is_dir=True
                )
            except OSError as exc:
                snapshot.entries[rel] = ManifestEntry(rel, is_dir=True, error=str(exc))
        for name in sorted(names):
            full = os.path.join(dirpath, name)
            rel = os.path.relpath(full, root).replace(os.sep, "/")
            try:
                st = os.lstat(full)
                if stat.S_ISLNK(st.st_mode):
                    entry = ManifestEntry(
                        rel, st.st_size, _ms(st.st_mtime_ns), _ms(st.st_ctime_ns), symlink_target=os.readlink(full)
                    )
                else:
                    entry = ManifestEntry(
                        rel, st.st_size, _ms(st.st_mtime_ns), _ms(st.st_ctime_ns), calc_file_sha256(full)
                    )
            except OSError as exc:
                logger.debug("cannot read %s: %s", full, exc)
                entry = ManifestEntry(rel, error=str(exc))
            snapshot.entries[rel] = entry
    logger.info("manifest %s: %d entries under %s", state_id, len(snapshot.entries), root)
    return snapshot


def save_manifest(snapshot, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(canonical_json(snapshot.to_dict()))
        handle.write("\n")


def load_manifest(path):
    """Reads a manifest written by `save_manifest`, possibly on another machine."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, ValueError) as exc:
        raise InputError("Cannot read manifest {}: {}".format(path, exc))
    return Snapshot.from_dict(data)


# --- change sets ----------------------------------------------------------------------------


class ChangeCategory(Enum):
    Created = "Created"
    Deleted = "Deleted"
    Renamed = "Renamed"
    ContentModified = "ContentModified"
    TimestampUpdated = "TimestampUpdated"


@dataclass(frozen=True)
class ChangeRecord:
    category: ChangeCategory
    path: str
    old_path: Optional[str] = None
    before: Optional[ManifestEntry] = None
    after: Optional[ManifestEntry] = None

    def __post_init__(self):
        if self.category is ChangeCategory.Renamed and (not self.old_path or self.old_path == self.path):
            raise ValueError("A rename needs an old path different from {}.".format(self.path))

    def paths(self):
        return (self.old_path, self.path) if self.old_path else (self.path,)

    def to_dict(self):
        return {
            "category": self.category.value,
            "path": self.path,
            "old_path": self.old_path,
            "before": self.before.to_dict() if self.before else None,
            "after": self.after.to_dict() if self.after else None,
        }


@dataclass
class ChangeSet:
    from_state: str
    to_state: str
    records: List[ChangeRecord] = field(default_factory=list)
    filter_applied: Optional[str] = None
    original_count: Optional[int] = None
    label: Optional[ActionLabel] = None

    @property
    def filtered_count(self):
        if self.original_count is None:
            return 0
        return self.original_count - len(self.records)

    def by_category(self):
        out = {category: [] for category in ChangeCategory}
        for record in self.records:
            out[record.category].append(record)
        return out

    def to_dict(self):
        counts = {category.value: len(items) for category, items in self.by_category().items()}
        return {
            "schema": CHANGESET_SCHEMA,
            "hash_algorithm": HASH_ALGORITHM,
            "from_state": self.from_state,
            "to_state": self.to_state,
            "label": {"name": self.label.name, "index": self.label.index} if self.label else None,
            "filter_applied": self.filter_applied,
            "original_count": self.original_count if self.original_count is not None else len(self.records),
            "filtered_count": self.filtered_count,
            "counts": counts,
            "records": [record.to_dict() for record in self.records],
        }


def _record_key(record):
    return (record.path, record.category.value, record.old_path or "")


def diff_manifests(a, b):
    """
    The changes leading from snapshot `a` to snapshot `b`.

    A deleted and a created regular file with the same hash and size are a rename only
    when that (hash, size) pair is unique among both the deleted and the created files;
    otherwise they stay a Deleted and a Created record. Same-path entries are
    ContentModified when their content differs and TimestampUpdated when only mtime
    does. ctime never decides a category.
    """
    only_a = sorted(set(a.entries) - set(b.entries))
    only_b = sorted(set(b.entries) - set(a.entries))
    records = []

    def _groups(paths, snapshot):
        groups = {}
        for path in paths:
            entry = snapshot.entries[path]
            if entry.is_file and entry.content_hash is not None:
                groups.setdefault((entry.content_hash, entry.size), []).append(path)
        return groups

    deleted_groups = _groups(only_a, a)
    created_groups = _groups(only_b, b)
    renamed_from = set()
    renamed_to = set()
    for key in sorted(set(deleted_groups) & set(created_groups)):
        if len(deleted_groups[key]) == 1 and len(created_groups[key]) == 1:
            old, new = deleted_groups[key][0], created_groups[key][0]
            renamed_from.add(old)
            renamed_to.add(new)
            records.append(ChangeRecord(ChangeCategory.Renamed, new, old, a.entries[old], b.entries[new]))

    for path in only_a:
        if path not in renamed_from:
            records.append(ChangeRecord(ChangeCategory.Deleted, path, before=a.entries[path]))
    for path in only_b:
        if path not in renamed_to:
            records.append(ChangeRecord(ChangeCategory.Created, path, after=b.entries[path]))
    for path in sorted(set(a.entries) & set(b.entries)):
        before, after = a.entries[path], b.entries[path]
        if before.content_key() != after.content_key():
            records.append(ChangeRecord(ChangeCategory.ContentModified, path, before=before, after=after))
        elif before.mtime != after.mtime:
            records.append(ChangeRecord(ChangeCategory.TimestampUpdated, path, before=before, after=after))
    records.sort(key=_record_key)
    logger.debug("diff %s -> %s: %d records", a.state_id, b.state_id, len(records))
    return ChangeSet(a.state_id, b.state_id, records, label=b.label)


def filter_noise(cs, rules, rule_set_id=None):
    """
    Drops records touching a path matched by any exclude glob (`**` spans directories).

    Empty rules return the change set unchanged. Otherwise `filter_applied` names the
    rule set and `original_count` keeps the pre-filter size.
    """
    rules = tuple(rules or ())
    if not rules:
        return cs
    kept = [
        record
        for record in cs.records
        if not any(match_glob(rule, path) is not None for rule in rules for path in record.paths())
    ]
    dropped = len(cs.records) - len(kept)
    logger.info("noise filter removed %d of %d records", dropped, len(cs.records))
    return ChangeSet(
        cs.from_state,
        cs.to_state,
        kept,
        filter_applied=rule_set_id or "rules:" + short_hash(list(rules)),
        original_count=cs.original_count if cs.original_count is not None else len(cs.records),
        label=cs.label,
    )


def diff_sequence(snapshots, rules=()):
    """Change sets for each consecutive pair of states q0, q1, ..., qn."""
    return [filter_noise(diff_manifests(a, b), rules) for a, b in zip(snapshots, snapshots[1:])]


def save_changeset(cs, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(canonical_json(cs.to_dict()))
        handle.write("\n")


def changeset_paths(cs) -> Tuple[str, ...]:
    return tuple(sorted({p for record in cs.records for p in record.paths()}))
