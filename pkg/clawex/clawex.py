# -*- coding: utf-8 -*-
"""Main module for the clawex package.

Holds the pieces every other module leans on: the package version, the taxonomy
enumerations, the exception hierarchy and the location of a captured store.
"""
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

__version__ = "1.0.0dev1"

logger = logging.getLogger(__name__)


class Plane(Enum):
    """
    The five evidence planes.

    Format: member = (value, nickname).
    """

    ReasoningCognition = ("reasoning-cognition", "The Brain")
    IdentityConfiguration = ("identity-configuration", "The DNA")
    KnowledgeRecall = ("knowledge-recall", "The Memory")
    CommunicationIO = ("communication-io", "The Ears & Mouth")
    ActionsEffects = ("actions-effects", "The Hands")

    def __init__(self, slug, nickname):
        """Easy dot access like: Plane.ActionsEffects.slug ."""
        self.slug = slug
        self.nickname = nickname


class RelevanceLevel(Enum):
    NotRelevant = 0
    Secondary = 1
    Primary = 2

    def __lt__(self, other):
        if not isinstance(other, RelevanceLevel):
            return NotImplemented
        return self.value < other.value

    def __le__(self, other):
        if not isinstance(other, RelevanceLevel):
            return NotImplemented
        return self.value <= other.value

    def __gt__(self, other):
        if not isinstance(other, RelevanceLevel):
            return NotImplemented
        return self.value > other.value

    def __ge__(self, other):
        if not isinstance(other, RelevanceLevel):
            return NotImplemented
        return self.value >= other.value


class ArtifactKind(Enum):
    Config = "Config"
    ConfigBackup = "ConfigBackup"
    ChannelCredentials = "ChannelCredentials"
    AuthProfiles = "AuthProfiles"
    DeviceIdentity = "DeviceIdentity"
    WorkspaceIdentityFile = "WorkspaceIdentityFile"
    SkillDefinition = "SkillDefinition"
    DailyMemoryLog = "DailyMemoryLog"
    SemanticMemoryDb = "SemanticMemoryDb"
    SessionIndex = "SessionIndex"
    SessionTranscript = "SessionTranscript"
    DeletedSessionTranscript = "DeletedSessionTranscript"
    InboundMedia = "InboundMedia"
    CronJobs = "CronJobs"
    CronRunLog = "CronRunLog"
    SubagentRegistry = "SubagentRegistry"
    RuntimeLog = "RuntimeLog"


class Severity(Enum):
    Info = 0
    Noteworthy = 1
    Anomalous = 2


class ClawexError(Exception):
    """
    Main clawex Exception class
    """

    def __init__(self, message="", offset=None):
        super(ClawexError, self).__init__(message)
        # Byte offset into the offending input, when one is known.
        self.offset = offset


class UnreadableRoot(ClawexError):
    """The store root is missing, not a directory, or not readable."""


class MalformedIndex(ClawexError):
    """sessions.json is not a structured object."""


class MalformedConfig(ClawexError):
    """openclaw.json (or a backup) is not a structured object."""


class MalformedRegistry(ClawexError):
    pass


class NotMediaName(ClawexError):
    pass


class InputError(ClawexError):
    """Bad input handed to the CLI (missing file, unparseable timestamp, ...)."""


class UsageError(ClawexError):
    pass


@dataclass(frozen=True)
class ParseWarning:
    """A non-fatal problem met while reading evidence."""

    source: str
    reason: str
    line_no: Optional[int] = None

    def to_dict(self):
        return {"source": self.source, "line_no": self.line_no, "reason": self.reason}


# Where the runtime logs land relative to a capture directory, mirroring /tmp/openclaw/.
DEFAULT_LOG_SUBDIR = os.path.join("tmp", "openclaw")
STORE_DIRNAME = ".openclaw"


@dataclass(frozen=True)
class StoreRoot:
    """
    A captured `.openclaw` directory plus, optionally, the captured runtime-log directory.
    """

    base_path: str
    log_dir: Optional[str] = None
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not os.path.isdir(self.base_path):
            raise UnreadableRoot(
                "Store root {} does not exist or is not a directory.".format(self.base_path)
            )
        if not os.access(self.base_path, os.R_OK | os.X_OK):
            raise UnreadableRoot("Store root {} is not readable.".format(self.base_path))
        if self.log_dir is not None and not os.path.isdir(self.log_dir):
            raise UnreadableRoot(
                "Log directory {} does not exist or is not a directory.".format(self.log_dir)
            )

    @classmethod
    def resolve(cls, path, log_dir=None):
        """
        Build a StoreRoot from either the `.openclaw` directory itself or a capture
        directory that contains one.

        When `log_dir` is not given, a `tmp/openclaw` directory next to the store (or
        inside the capture directory) is used if present.
        """
        if path is None:
            raise UnreadableRoot("No store path given.")
        path = os.path.abspath(os.path.expanduser(path))
        notes = []
        base = path
        nested = os.path.join(path, STORE_DIRNAME)
        if os.path.isdir(nested):
            base = nested
            notes.append("store root resolved to {}".format(nested))
        if log_dir is None:
            for candidate in (
                os.path.join(os.path.dirname(base), DEFAULT_LOG_SUBDIR),
                os.path.join(path, DEFAULT_LOG_SUBDIR),
            ):
                if os.path.isdir(candidate):
                    log_dir = candidate
                    notes.append("runtime logs auto-detected at {}".format(candidate))
                    break
        else:
            log_dir = os.path.abspath(os.path.expanduser(log_dir))
        for note in notes:
            logger.info(note)
        return cls(base_path=base, log_dir=log_dir, notes=tuple(notes))
