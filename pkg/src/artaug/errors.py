"""Error taxonomy for the whole toolkit.

Every failure the library raises deliberately derives from :class:`ArtaugError`,
so the CLI can map "expected" failures to exit codes without enumerating
modules.
"""

from __future__ import annotations


class ArtaugError(Exception):
    """Base class for all toolkit errors."""


class UsageError(ArtaugError):
    """Bad command line or config file (CLI exit code 64)."""


# ---------------------------------------------------------------- manifests


class ManifestError(ArtaugError):
    pass


class MalformedLine(ManifestError):
    def __init__(self, line_no: int, reason: str = "malformed record"):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class MissingField(ManifestError):
    def __init__(self, field: str, line_no: int):
        self.field = field
        self.line_no = line_no
        super().__init__(f"line {line_no}: missing required field {field!r}")


class UnknownField(ManifestError):
    def __init__(self, field: str, line_no: int):
        self.field = field
        self.line_no = line_no
        super().__init__(f"line {line_no}: unknown field {field!r} (use lax mode to ignore)")


class DuplicateId(ManifestError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"duplicate id {record_id!r}")


class EmptyCaptionSet(ManifestError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"record {record_id!r} has no usable caption sentences")


class EmptyDataset(ArtaugError):
    pass


# --------------------------------------------------------------- generation


class BackendUnavailable(ArtaugError):
    """Generator endpoint unreachable, or still failing after retries."""


class ProtocolError(ArtaugError):
    """Generator endpoint answered with a malformed response."""


class RemoteError(ArtaugError):
    """Generator endpoint answered with an error status."""

    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(f"backend error {status}: {message}")


# ------------------------------------------------------------------ sampler


class OrphanVariation(ArtaugError):
    def __init__(self, parent_id: str):
        self.parent_id = parent_id
        super().__init__(f"variation references unknown parent {parent_id!r}")


# --------------------------------------------------------------- embeddings


class BadMagic(ArtaugError):
    pass


class CorruptRow(ArtaugError):
    def __init__(self, offset: int, reason: str = "corrupt row"):
        self.offset = offset
        super().__init__(f"{reason} at byte offset {offset}")


class DimensionMismatch(ArtaugError):
    pass


class ZeroVector(ArtaugError):
    pass


class MissingEmbedding(ArtaugError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no embedding for id {key!r}")


# ------------------------------------------------------------------ metrics


class EmptyCandidate(ArtaugError):
    def __init__(self, item_id: str | None = None):
        self.item_id = item_id
        where = f" for item {item_id!r}" if item_id else ""
        super().__init__(f"candidate tokenizes to nothing{where}")


class EmptyCorpus(ArtaugError):
    pass


class EmptyInput(ArtaugError):
    pass


# ---------------------------------------------------------------- retrieval


class NonSquare(ArtaugError):
    pass


class PoolTooLarge(ArtaugError):
    pass


class PoolSmallerThanK(ArtaugError):
    pass
