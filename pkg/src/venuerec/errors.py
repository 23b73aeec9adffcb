"""Exception types shared across the package."""


class VenuerecError(Exception):
    """Base class for everything raised deliberately by this package."""


class FormatError(VenuerecError):
    """A data file violates its declared format.

    Carries the offending path and 1-based line (or byte offset for
    binary files) when known, and prefixes them onto the message.
    """

    def __init__(self, message, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append("line %d" % line)
        if offset is not None:
            parts.append("offset %d" % offset)
        if parts:
            message = "%s: %s" % (": ".join(parts), message)
        super().__init__(message)


class ConfigError(VenuerecError):
    """Bad key, value, or flag in a run configuration."""
