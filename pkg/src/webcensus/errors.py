"""Exception hierarchy shared across the census pipeline."""


class CensusError(Exception):
    """Base class for every error raised by webcensus."""


class MalformedUri(CensusError, ValueError):
    def __init__(self, raw, reason="cannot delimit scheme/host"):
        super().__init__(f"malformed URI {raw!r}: {reason}")
        self.raw = raw
        self.reason = reason


class HostIsPublicSuffix(CensusError, ValueError):
    def __init__(self, host):
        super().__init__(f"host {host!r} is itself a public suffix")
        self.host = host


class SchemaError(CensusError, ValueError):
    pass


class DuplicateDomain(CensusError, ValueError):
    def __init__(self, domain, owner_a, owner_b):
        super().__init__(f"domain {domain!r} claimed by both {owner_a!r} and {owner_b!r}")
        self.domain = domain
        self.owner_a = owner_a
        self.owner_b = owner_b


class EmptyCorpus(CensusError, ValueError):
    pass


class VersionMismatch(CensusError, ValueError):
    pass


class SchemaVersionMismatch(VersionMismatch):
    pass


class CorruptLine(CensusError, ValueError):
    def __init__(self, line_number, reason):
        super().__init__(f"corrupt record at line {line_number}: {reason}")
        self.line_number = line_number


class ConfigError(CensusError, ValueError):
    pass


class MissingInput(CensusError, FileNotFoundError):
    pass


class CaptureError(CensusError):
    """Live capture failed before any page could be loaded (e.g. endpoint down)."""

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class PageNotLoaded(CensusError, ValueError):
    """Timeout/Error pages carry no classification; callers exclude them."""
