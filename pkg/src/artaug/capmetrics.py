"""Caption evaluation metrics.

Implements the full scoring suite used for captioning runs: BLEU-1..4 with
brevity penalty and no smoothing, ROUGE-L (LCS F-measure, max over
references), an exact-match METEOR variant, CIDEr (TF-IDF n-gram consensus,
no rescaling), and BERTScore over externally supplied token embeddings.

All n-gram metrics share one tokenizer, defined here and frozen: lowercase,
whitespace split, punctuation stripped from token edges, interior punctuation
(hyphens, apostrophes) kept.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyCandidate,
    EmptyCorpus,
    EmptyInput,
    MissingEmbedding,
    ZeroVector,
)

#: Metric identifiers accepted by :func:`evaluate_captions`.
ALL_METRICS = ("bleu", "rouge", "meteor", "cider", "bertscore")

#: Report column order for rendered tables.
METRIC_COLUMNS = ("B@1", "B@2", "B@3", "B@4", "METEOR", "ROUGE", "CIDEr", "BERTScore")

_STRIP_CHARS = string.punctuation + "“”‘’«»…–—"


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation off token edges.

    Tokens that are punctuation-only disappear; an empty result is allowed.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_STRIP_CHARS)
        if tok:
            tokens.append(tok)
    return tokens


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    """Counter of the n-grams (as tuples) of a token sequence."""
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


@dataclass
class CaptionPair:
    """One scored item: a candidate sentence plus its reference set."""

    item_id: str
    candidate: str
    references: list[str]

    def __post_init__(self) -> None:
        if not self.references:
            raise ValueError(f"item {self.item_id!r}: references must be non-empty")


# --------------------------------------------------------------------- BLEU


@dataclass
class BleuScore:
    """Per-order precisions and the combined BLEU-k geometric means."""

    precisions: tuple[float, ...]
    scores: dict[int, float]
    brevity_penalty: float
    candidate_len: int
    reference_len: int
    clipped: tuple[int, ...]
    totals: tuple[int, ...]


def _closest_ref_len(candidate_len: int, ref_lens: Sequence[int]) -> int:
    # ties go to the shorter reference
    return min(ref_lens, key=lambda r: (abs(r - candidate_len), r))


def _clipped_stats(
    cand_tokens: Sequence[str], refs_tokens: Sequence[Sequence[str]], max_n: int
) -> tuple[list[int], list[int]]:
    clipped: list[int] = []
    totals: list[int] = []
    for n in range(1, max_n + 1):
        cand_counts = ngram_counts(cand_tokens, n)
        max_ref: Counter = Counter()
        for ref in refs_tokens:
            for gram, count in ngram_counts(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        clipped.append(sum(min(c, max_ref[g]) for g, c in cand_counts.items()))
        totals.append(sum(cand_counts.values()))
    return clipped, totals


def _combine_bleu(
    clipped: Sequence[int],
    totals: Sequence[int],
    candidate_len: int,
    reference_len: int,
) -> BleuScore:
    max_n = len(clipped)
    precisions = tuple(
        (clipped[i] / totals[i]) if totals[i] else 0.0 for i in range(max_n)
    )
    if candidate_len > reference_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - reference_len / candidate_len)
    scores: dict[int, float] = {}
    for k in range(1, max_n + 1):
        if any(precisions[i] == 0.0 for i in range(k)):
            scores[k] = 0.0
        else:
            scores[k] = bp * math.exp(sum(math.log(p) for p in precisions[:k]) / k)
    return BleuScore(
        precisions=precisions,
        scores=scores,
        brevity_penalty=bp,
        candidate_len=candidate_len,
        reference_len=reference_len,
        clipped=tuple(clipped),
        totals=tuple(totals),
    )


def bleu(candidate: str, references: Sequence[str], max_n: int = 4) -> BleuScore:
    """Sentence BLEU with clipped precisions and closest-length brevity penalty.

    No smoothing: if any precision up to order k is zero, BLEU-k is zero.
    """
    if not references:
        raise ValueError("references must be non-empty")
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        raise EmptyCandidate()
    refs_tokens = [tokenize(r) for r in references]
    clipped, totals = _clipped_stats(cand_tokens, refs_tokens, max_n)
    ref_len = _closest_ref_len(len(cand_tokens), [len(r) for r in refs_tokens])
    return _combine_bleu(clipped, totals, len(cand_tokens), ref_len)


# ------------------------------------------------------------------- ROUGE-L


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, rolling two-row table."""
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, references: Sequence[str]) -> float:
    """LCS F-measure (harmonic mean of LCS precision and recall), max over refs."""
    if not references:
        raise ValueError("references must be non-empty")
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        raise EmptyCandidate()
    best = 0.0
    for ref in references:
        ref_tokens = tokenize(ref)
        if not ref_tokens:
            continue
        lcs = lcs_length(cand_tokens, ref_tokens)
        p = lcs / len(cand_tokens)
        r = lcs / len(ref_tokens)
        f = (2 * p * r / (p + r)) if (p + r) > 0 else 0.0
        best = max(best, f)
    return best


# -------------------------------------------------------------- METEOR-lite


def _align(
    cand: Sequence[str], ref: Sequence[str], node_budget: int = 200_000
) -> tuple[int, int]:
    """Exact-match unigram alignment: maximum matches, then fewest chunks.

    Returns (matches, chunks). Chunk minimisation is equivalent to minimal
    common string partition, which has no exact polynomial algorithm, so this
    is branch-and-bound with a node budget: small inputs are solved exactly,
    and once the budget is exhausted the best complete alignment found so far
    wins. The reported chunk count always comes from a realizable alignment.
    """
    ref_positions: dict[str, list[int]] = {}
    for j, w in enumerate(ref):
        ref_positions.setdefault(w, []).append(j)
    cand_counts = Counter(cand)
    ref_counts = Counter(ref)
    need = {w: min(c, ref_counts[w]) for w, c in cand_counts.items() if w in ref_counts}
    matches = sum(need.values())
    if matches == 0:
        return 0, 0

    remaining = Counter(cand)  # candidate occurrences not yet passed
    used = [False] * len(ref)
    best = matches + 1
    nodes = 0

    def dfs(i: int, prev_i: int, prev_j: int, chunks: int) -> None:
        nonlocal best, nodes
        if chunks >= best:
            return
        if i == len(cand):
            best = chunks
            return
        nodes += 1
        over_budget = nodes > node_budget
        w = cand[i]
        remaining[w] -= 1
        took_match = False
        if need.get(w, 0) > 0:
            positions = ref_positions[w]
            # try the chunk-extending position first
            ordered = positions
            if prev_i == i - 1 and prev_j + 1 < len(ref) and ref[prev_j + 1] == w:
                ordered = [prev_j + 1] + [j for j in positions if j != prev_j + 1]
            for j in ordered:
                if used[j]:
                    continue
                extends = prev_i == i - 1 and j == prev_j + 1
                if not extends and chunks + 1 >= best:
                    continue
                used[j] = True
                need[w] -= 1
                took_match = True
                dfs(i + 1, i, j, chunks if extends else chunks + 1)
                need[w] += 1
                used[j] = False
                if over_budget:
                    break
        # skip this candidate token if its quota can still be met later;
        # once over budget each node follows a single branch so the search
        # degenerates to a greedy descent instead of exploding
        if remaining[w] >= need.get(w, 0) and not (over_budget and took_match):
            dfs(i + 1, prev_i, prev_j, chunks)
        remaining[w] += 1

    dfs(0, -2, -2, 0)
    return matches, best


def meteor_lite(
    candidate: str,
    references: Sequence[str],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """Exact-match METEOR: weighted unigram F-mean times a fragmentation penalty.

    F = P*R / (alpha*P + (1-alpha)*R), penalty = gamma * (chunks/matches)**beta,
    score = F * (1 - penalty), maximised over references. Stemming and synonym
    matching are deliberately absent.
    """
    if not references:
        raise ValueError("references must be non-empty")
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        raise EmptyCandidate()
    best = 0.0
    for ref in references:
        ref_tokens = tokenize(ref)
        if not ref_tokens:
            continue
        m, chunks = _align(cand_tokens, ref_tokens)
        if m == 0:
            continue
        p = m / len(cand_tokens)
        r = m / len(ref_tokens)
        f_mean = p * r / (alpha * p + (1 - alpha) * r)
        penalty = gamma * (chunks / m) ** beta
        best = max(best, f_mean * (1.0 - penalty))
    return best


# -------------------------------------------------------------------- CIDEr


@dataclass
class CiderScores:
    per_item: dict[str, float]
    mean: float


def _tfidf_vector(counts: Counter, idf: Mapping[tuple, float]) -> dict[tuple, float]:
    return {g: c * idf[g] for g, c in counts.items()}


def _sparse_cosine(u: Mapping[tuple, float], v: Mapping[tuple, float]) -> float:
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if len(u) > len(v):
        u, v = v, u
    dot = sum(x * v[g] for g, x in u.items() if g in v)
    return dot / (nu * nv)


def cider(corpus: Sequence[CaptionPair], max_n: int = 4) -> CiderScores:
    """TF-IDF n-gram consensus between each candidate and its references.

    Document frequency of an n-gram counts the items whose reference set
    contains it; IDF is ln(corpus size / max(1, DF)). Per order n the score is
    the mean over references of the cosine between TF-IDF vectors (zero when
    either vector is zero), and the item score averages the orders. Term
    frequency uses raw counts: cosine is invariant to per-vector scaling, so
    length normalisation would not change any score. No x10 rescaling.
    """
    if not corpus:
        raise EmptyCorpus("cider needs at least one item")
    seen: set[str] = set()
    for pair in corpus:
        if pair.item_id in seen:
            raise DuplicateId(pair.item_id)
        seen.add(pair.item_id)

    cand_tokens: dict[str, list[str]] = {}
    refs_tokens: dict[str, list[list[str]]] = {}
    for pair in corpus:
        tokens = tokenize(pair.candidate)
        if not tokens:
            raise EmptyCandidate(pair.item_id)
        cand_tokens[pair.item_id] = tokens
        refs_tokens[pair.item_id] = [tokenize(r) for r in pair.references]

    num_items = len(corpus)
    idf_by_n: list[dict[tuple, float]] = []
    for n in range(1, max_n + 1):
        df: Counter = Counter()
        for pair in corpus:
            grams: set[tuple] = set()
            for ref in refs_tokens[pair.item_id]:
                grams.update(ngram_counts(ref, n))
            df.update(grams)
        log_n = math.log(num_items)
        idf = {g: log_n - math.log(max(1, c)) for g, c in df.items()}
        idf_by_n.append(idf)

    per_item: dict[str, float] = {}
    for pair in corpus:
        order_scores = []
        for n in range(1, max_n + 1):
            idf = idf_by_n[n - 1]
            log_n = math.log(num_items)
            cand_counts = ngram_counts(cand_tokens[pair.item_id], n)
            cand_vec = {g: c * idf.get(g, log_n) for g, c in cand_counts.items()}
            ref_cosines = []
            for ref in refs_tokens[pair.item_id]:
                ref_counts = ngram_counts(ref, n)
                ref_vec = {g: c * idf[g] for g, c in ref_counts.items()}
                ref_cosines.append(_sparse_cosine(cand_vec, ref_vec))
            order_scores.append(sum(ref_cosines) / len(ref_cosines))
        per_item[pair.item_id] = sum(order_scores) / max_n

    mean = math.fsum(per_item.values()) / num_items
    return CiderScores(per_item=per_item, mean=mean)


# ---------------------------------------------------------------- BERTScore


@dataclass
class BertScore:
    precision: float
    recall: float
    f1: float


def bertscore(
    candidate_embeddings: np.ndarray, reference_embeddings: np.ndarray
) -> BertScore:
    """Greedy token-embedding matching: P, R and F1 over cosine similarities.

    No IDF weighting and no baseline rescaling; callers supply the per-token
    embedding matrices (tokens x dim).
    """
    cand = np.asarray(candidate_embeddings, dtype=np.float64)
    ref = np.asarray(reference_embeddings, dtype=np.float64)
    if cand.ndim != 2 or ref.ndim != 2 or cand.shape[0] == 0 or ref.shape[0] == 0:
        raise EmptyInput("token embedding matrices must be non-empty and 2-D")
    if cand.shape[1] != ref.shape[1]:
        raise DimensionMismatch(
            f"embedding dims differ: {cand.shape[1]} vs {ref.shape[1]}"
        )
    cand_norms = np.linalg.norm(cand, axis=1)
    ref_norms = np.linalg.norm(ref, axis=1)
    if np.any(cand_norms == 0) or np.any(ref_norms == 0):
        raise ZeroVector("token embeddings must be non-zero")
    sim = (cand / cand_norms[:, None]) @ (ref / ref_norms[:, None]).T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    denom = precision + recall
    f1 = (2 * precision * recall / denom) if denom != 0 else 0.0
    return BertScore(precision=precision, recall=recall, f1=f1)


# ----------------------------------------------------------------- reports


@dataclass
class MetricReport:
    per_item: dict[str, dict[str, float]]
    corpus: dict[str, float]


def _item_token_matrix(table, item_id: str) -> np.ndarray:
    """Collect `{item_id}#{k}` rows, k = 0.. , into a token matrix."""
    rows = []
    k = 0
    while f"{item_id}#{k}" in table:
        rows.append(table.get(f"{item_id}#{k}"))
        k += 1
    if not rows:
        raise MissingEmbedding(f"{item_id}#0")
    return np.stack(rows)


def evaluate_captions(
    pairs: Sequence[CaptionPair],
    metrics: Sequence[str] | None = None,
    *,
    candidate_token_table=None,
    reference_token_table=None,
    max_n: int = 4,
) -> MetricReport:
    """Score every pair with the requested metrics.

    Corpus values are arithmetic means of the per-item scores, except corpus
    BLEU, which pools the clipped n-gram statistics and lengths over the whole
    corpus before combining (standard corpus BLEU).
    """
    if not pairs:
        raise EmptyCorpus("no caption pairs to evaluate")
    if metrics is None:
        metrics = list(ALL_METRICS[:4])
        if candidate_token_table is not None and reference_token_table is not None:
            metrics.append("bertscore")
    unknown = [m for m in metrics if m not in ALL_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics: {unknown} (choose from {ALL_METRICS})")
    if "bertscore" in metrics and (
        candidate_token_table is None or reference_token_table is None
    ):
        raise ValueError("bertscore requires candidate and reference token tables")

    per_item: dict[str, dict[str, float]] = {p.item_id: {} for p in pairs}
    if len(per_item) != len(pairs):
        dupes = Counter(p.item_id for p in pairs)
        raise DuplicateId(next(i for i, c in dupes.items() if c > 1))
    corpus_scores: dict[str, float] = {}

    if "bleu" in metrics:
        agg_clipped = [0] * max_n
        agg_totals = [0] * max_n
        agg_cand_len = 0
        agg_ref_len = 0
        for pair in pairs:
            try:
                score = bleu(pair.candidate, pair.references, max_n=max_n)
            except EmptyCandidate:
                raise EmptyCandidate(pair.item_id) from None
            for k in range(1, max_n + 1):
                per_item[pair.item_id][f"B@{k}"] = score.scores[k]
            for i in range(max_n):
                agg_clipped[i] += score.clipped[i]
                agg_totals[i] += score.totals[i]
            agg_cand_len += score.candidate_len
            agg_ref_len += score.reference_len
        corpus_bleu = _combine_bleu(agg_clipped, agg_totals, agg_cand_len, agg_ref_len)
        for k in range(1, max_n + 1):
            corpus_scores[f"B@{k}"] = corpus_bleu.scores[k]

    def _mean_metric(name: str, fn) -> None:
        values = []
        for pair in pairs:
            try:
                value = fn(pair.candidate, pair.references)
            except EmptyCandidate:
                raise EmptyCandidate(pair.item_id) from None
            per_item[pair.item_id][name] = value
            values.append(value)
        corpus_scores[name] = math.fsum(values) / len(values)

    if "rouge" in metrics:
        _mean_metric("ROUGE", rouge_l)
    if "meteor" in metrics:
        _mean_metric("METEOR", meteor_lite)

    if "cider" in metrics:
        scores = cider(pairs, max_n=max_n)
        for item_id, value in scores.per_item.items():
            per_item[item_id]["CIDEr"] = value
        corpus_scores["CIDEr"] = scores.mean

    if "bertscore" in metrics:
        values = []
        for pair in pairs:
            cand_matrix = _item_token_matrix(candidate_token_table, pair.item_id)
            ref_matrix = _item_token_matrix(reference_token_table, pair.item_id)
            value = bertscore(cand_matrix, ref_matrix).f1
            per_item[pair.item_id]["BERTScore"] = value
            values.append(value)
        corpus_scores["BERTScore"] = math.fsum(values) / len(values)

    return MetricReport(per_item=per_item, corpus=corpus_scores)
