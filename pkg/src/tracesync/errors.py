class TraceSyncError(Exception):
    """Base class for errors raised by tracesync."""


class InputError(TraceSyncError, ValueError):
    """Invalid arguments or malformed input."""


class ResourceError(TraceSyncError, RuntimeError):
    """A work, length or rejection budget was exceeded."""


class StateError(TraceSyncError, RuntimeError):
    """An operation was applied to an object in the wrong state."""


class InconclusiveError(TraceSyncError, RuntimeError):
    """Too many samples could not be decided from their prefixes."""
