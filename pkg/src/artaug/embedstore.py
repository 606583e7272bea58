"""Embedding tables and the augmentation-quality cosine report.

Embeddings are computed elsewhere and consumed here from EMB1 files, a small
little-endian binary format:

    magic "EMB1" | u32 dim | u32 count | count rows of
    [u16 id_byte_len][id utf-8 bytes][dim x f32]
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .augment import SyntheticDataset, variation_key
from .corpus import Dataset
from .errors import (
    BadMagic,
    CorruptRow,
    DimensionMismatch,
    DuplicateId,
    MissingEmbedding,
    ZeroVector,
)

MAGIC = b"EMB1"


@dataclass
class EmbeddingTable:
    """Id-keyed vectors of one common dimension."""

    dim: int
    entries: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str) -> np.ndarray:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingEmbedding(key) from None


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read an EMB1 file into a table, validating structure row by row."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise BadMagic(f"{path}: not an EMB1 file")
    if len(data) < 12:
        raise CorruptRow(len(data), "truncated header")
    dim, count = struct.unpack_from("<II", data, 4)
    if dim < 1:
        raise CorruptRow(4, "dimension must be >= 1")
    entries: dict[str, np.ndarray] = {}
    offset = 12
    row_bytes = dim * 4
    for _ in range(count):
        if offset + 2 > len(data):
            raise CorruptRow(offset, "truncated row header")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if id_len == 0 or offset + id_len > len(data):
            raise CorruptRow(offset, "truncated or empty id")
        try:
            key = data[offset : offset + id_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptRow(offset, "id is not valid UTF-8") from exc
        offset += id_len
        if offset + row_bytes > len(data):
            raise DimensionMismatch(
                f"row for id {key!r} holds fewer than {dim} components"
            )
        vector = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(
            np.float64
        )
        offset += row_bytes
        if not np.all(np.isfinite(vector)):
            raise CorruptRow(offset - row_bytes, f"non-finite component in row {key!r}")
        if key in entries:
            raise DuplicateId(key)
        entries[key] = vector
    if offset != len(data):
        raise CorruptRow(offset, "trailing bytes after last row")
    return EmbeddingTable(dim=dim, entries=entries)


def save_embeddings(
    path: str | Path, dim: int, items: Iterable[tuple[str, Sequence[float]]]
) -> None:
    """Write rows to an EMB1 file; mostly used to build fixtures and exports."""
    rows = list(items)
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", dim, len(rows)))
        for key, vector in rows:
            raw = key.encode("utf-8")
            arr = np.asarray(vector, dtype="<f4")
            if arr.shape != (dim,):
                raise DimensionMismatch(f"row {key!r} has shape {arr.shape}, want ({dim},)")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(arr.tobytes())


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine is undefined for a zero vector")
    value = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, value))


@dataclass
class PairStats:
    mean: float
    stddev: float
    count: int


@dataclass
class SimilarityReport:
    real_vs_caption: PairStats
    synthetic_vs_caption: PairStats
    real_vs_variation: PairStats


def _stats(values: list[float]) -> PairStats:
    # math.fsum keeps the aggregate order-stable to the last bit
    n = len(values)
    if n == 0:
        return PairStats(mean=0.0, stddev=0.0, count=0)
    mean = math.fsum(values) / n
    var = math.fsum((x - mean) ** 2 for x in values) / n
    return PairStats(mean=mean, stddev=math.sqrt(max(0.0, var)), count=n)


def similarity_report(
    dataset: Dataset,
    synthetic: SyntheticDataset,
    images: EmbeddingTable,
    texts: EmbeddingTable,
) -> SimilarityReport:
    """Aggregate cosine similarity over three pair families.

    (a) each real image against its caption embedding, (b) each synthetic
    variation against its parent's caption embedding, (c) each variation
    against its parent image. Image embeddings of variations are keyed
    ``{parent_id}_{variation_index}`` in the image table; caption embeddings
    are keyed by artwork id.
    """
    real_caption: list[float] = []
    for record in dataset.records:
        real_caption.append(cosine(images.get(record.id), texts.get(record.id)))

    synth_caption: list[float] = []
    real_variation: list[float] = []
    for var in synthetic.variations:
        key = variation_key(var.parent_id, var.variation_index)
        vec = images.get(key)
        synth_caption.append(cosine(vec, texts.get(var.parent_id)))
        real_variation.append(cosine(images.get(var.parent_id), vec))

    return SimilarityReport(
        real_vs_caption=_stats(real_caption),
        synthetic_vs_caption=_stats(synth_caption),
        real_vs_variation=_stats(real_variation),
    )
