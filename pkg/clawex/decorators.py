"""Decorator methods for the clawex package."""
import logging
from functools import wraps

from clawex.clawex import ClawexError, ParseWarning

logger = logging.getLogger(__name__)


def salvage_file(fallback=None):
    """
    Decorator that keeps one bad file from aborting a whole load.

    The wrapped method takes the file's display path as its first argument. An
    `OSError` or `ClawexError` raised while reading or parsing that file is recorded on
    `self.warnings` as a ParseWarning and `fallback` is returned instead
    (called first when it is callable, so mutable defaults are not shared).
    """

    def _decorator(read_func):
        @wraps(read_func)
        def _wrapped_func(self, path, *args, **kwargs):
            try:
                return read_func(self, path, *args, **kwargs)
            except (OSError, ClawexError) as exc:
                reason = "{}: {}".format(type(exc).__name__, exc)
                if getattr(exc, "offset", None) is not None:
                    reason += " (byte offset {})".format(exc.offset)
                logger.debug("salvaged %s: %s", path, reason)
                self.warnings.append(ParseWarning(path, reason))
                return fallback() if callable(fallback) else fallback

        return _wrapped_func

    return _decorator
