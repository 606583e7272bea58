"""Cross-modal retrieval scoring: Recall@K, full-gallery and fixed-pool.

The protocol is square: row i and column i of the similarity matrix are a
ground-truth pair. Multi-caption datasets fit by listing every (image, text)
pair as its own query row; image ids may repeat. Ranking ties break by
ascending index, which matters with quantized embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embedstore import EmbeddingTable
from .errors import NonSquare, PoolSmallerThanK, PoolTooLarge, ZeroVector
from .seeds import stable_u64


@dataclass
class SimilarityMatrix:
    rows: list[str]  # image ids
    cols: list[str]  # text ids
    values: np.ndarray  # rows x cols cosine similarities


@dataclass
class RecallReport:
    direction: str  # "im2t" | "t2im"
    ks: tuple[int, ...]
    recalls: dict[int, float]
    pool_size: int | None = None
    trials: int | None = None


def _unit_rows(table: EmbeddingTable, keys: Sequence[str]) -> np.ndarray:
    matrix = np.stack([table.get(k) for k in keys]).astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0):
        bad = keys[int(np.argmax(norms == 0))]
        raise ZeroVector(f"embedding {bad!r} is all zeros")
    return matrix / norms[:, None]


def similarity_matrix(
    images: EmbeddingTable,
    texts: EmbeddingTable,
    pairs: Sequence[tuple[str, str]],
) -> SimilarityMatrix:
    """All pairwise cosines for the listed ground-truth pairs.

    pairs[i] = (image_id, text_id) aligns row i with column i; the diagonal
    holds the ground-truth similarities.
    """
    if not pairs:
        raise ValueError("pairs must be non-empty")
    row_ids = [p[0] for p in pairs]
    col_ids = [p[1] for p in pairs]
    image_matrix = _unit_rows(images, row_ids)
    text_matrix = _unit_rows(texts, col_ids)
    values = np.clip(image_matrix @ text_matrix.T, -1.0, 1.0)
    return SimilarityMatrix(rows=row_ids, cols=col_ids, values=values)


def _oriented(matrix: SimilarityMatrix, direction: str) -> np.ndarray:
    if direction not in ("im2t", "t2im"):
        raise ValueError("direction must be 'im2t' or 't2im'")
    values = np.asarray(matrix.values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {values.shape}")
    return values if direction == "im2t" else values.T


def _beats_truth(values: np.ndarray) -> np.ndarray:
    """Boolean matrix: does item j outrank row i's ground truth (index i)?

    Ties break by ascending index, so j beats the truth when its similarity
    is strictly larger, or equal with j < i.
    """
    n = values.shape[0]
    diagonal = np.diag(values)
    index = np.arange(n)
    beats = (values > diagonal[:, None]) | (
        (values == diagonal[:, None]) & (index[None, :] < index[:, None])
    )
    beats[index, index] = False
    return beats


def recall_at_k(
    matrix: SimilarityMatrix, ks: Sequence[int], direction: str
) -> RecallReport:
    """Fraction of queries whose ground truth ranks within the top k."""
    values = _oriented(matrix, direction)
    ks = _checked_ks(ks)
    ranks = 1 + _beats_truth(values).sum(axis=1)
    recalls = {k: float(np.mean(ranks <= k)) for k in ks}
    return RecallReport(direction=direction, ks=ks, recalls=recalls)


def pooled_recall(
    matrix: SimilarityMatrix,
    pool_size: int,
    trials: int,
    seed: int,
    ks: Sequence[int],
    direction: str,
) -> RecallReport:
    """Recall@K against pools of the ground truth plus pool_size-1 distractors.

    Distractors are drawn uniformly without replacement, resampled per query
    and per trial from a stream keyed by the seed; recalls average over
    queries and trials. With pool_size equal to the gallery size this reduces
    exactly to recall_at_k.
    """
    values = _oriented(matrix, direction)
    n = values.shape[0]
    ks = _checked_ks(ks)
    if not 1 <= pool_size <= n:
        raise PoolTooLarge(f"pool size {pool_size} not in [1, {n}]")
    if pool_size < max(ks):
        raise PoolSmallerThanK(f"pool size {pool_size} < max k {max(ks)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    beats = _beats_truth(values)
    hits = {k: 0 for k in ks}
    for trial in range(trials):
        rng = np.random.default_rng(stable_u64("retrieval-pool", seed, trial))
        if pool_size == n:
            in_pool_beats = beats.sum(axis=1)
        elif pool_size == 1:
            in_pool_beats = np.zeros(n, dtype=np.int64)
        else:
            keys = rng.random((n, n))
            np.fill_diagonal(keys, np.inf)
            distractors = np.argpartition(keys, pool_size - 1, axis=1)[
                :, : pool_size - 1
            ]
            in_pool_beats = np.take_along_axis(beats, distractors, axis=1).sum(axis=1)
        ranks = 1 + in_pool_beats
        for k in ks:
            hits[k] += int(np.sum(ranks <= k))
    total = n * trials
    recalls = {k: hits[k] / total for k in ks}
    return RecallReport(
        direction=direction,
        ks=ks,
        recalls=recalls,
        pool_size=pool_size,
        trials=trials,
    )


def _checked_ks(ks: Sequence[int]) -> tuple[int, ...]:
    if not ks:
        raise ValueError("ks must be non-empty")
    if any(k < 1 for k in ks):
        raise ValueError("every k must be >= 1")
    return tuple(sorted(set(int(k) for k in ks)))
