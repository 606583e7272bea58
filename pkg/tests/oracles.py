"""Independent brute-force reference implementations used to check the fast paths.

Everything here is deliberately naive: explicit loops, full tables, direct
formula transcription. None of it shares code with the package.
"""

from __future__ import annotations

import math
from math import comb


def ngrams_list(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def clipped_counts(cand_tokens, refs_tokens, n):
    """(clipped, total) n-gram counts by direct scanning."""
    cand_grams = ngrams_list(cand_tokens, n)
    total = len(cand_grams)
    clipped = 0
    for gram in set(cand_grams):
        cand_count = cand_grams.count(gram)
        best_ref = 0
        for ref in refs_tokens:
            ref_count = ngrams_list(ref, n).count(gram)
            if ref_count > best_ref:
                best_ref = ref_count
        clipped += min(cand_count, best_ref)
    return clipped, total


def sentence_bleu(cand_tokens, refs_tokens, max_n=4):
    """BLEU-1..max_n from first principles (closest-ref BP, no smoothing)."""
    c = len(cand_tokens)
    ref_lens = sorted(len(r) for r in refs_tokens)
    r = min(ref_lens, key=lambda length: (abs(length - c), length))
    bp = 1.0 if c > r else math.exp(1 - r / c)
    precisions = []
    for n in range(1, max_n + 1):
        clipped, total = clipped_counts(cand_tokens, refs_tokens, n)
        precisions.append(clipped / total if total else 0.0)
    scores = {}
    for k in range(1, max_n + 1):
        if any(p == 0.0 for p in precisions[:k]):
            scores[k] = 0.0
        else:
            scores[k] = bp * math.exp(sum(math.log(p) for p in precisions[:k]) / k)
    return precisions, scores, bp


def lcs_table_length(a, b):
    """Classic full-table LCS dynamic program."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[m][n]


def rouge_l_score(cand_tokens, refs_tokens):
    best = 0.0
    for ref in refs_tokens:
        if not ref:
            continue
        lcs = lcs_table_length(cand_tokens, ref)
        p = lcs / len(cand_tokens)
        r = lcs / len(ref)
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        best = max(best, f)
    return best


def cider_scores(items, max_n=4):
    """Brute-force TF-IDF n-gram consensus.

    items: list of (item_id, cand_tokens, [ref_tokens, ...]).
    Returns {item_id: score}.
    """
    num_items = len(items)
    per_item = {}
    for item_id, cand, refs in items:
        order_values = []
        for n in range(1, max_n + 1):
            # document frequency over reference sets
            df = {}
            for _, _, other_refs in items:
                grams = set()
                for ref in other_refs:
                    grams.update(ngrams_list(ref, n))
                for gram in grams:
                    df[gram] = df.get(gram, 0) + 1

            def idf(gram):
                return math.log(num_items / max(1, df.get(gram, 0)))

            def vector(tokens):
                grams = ngrams_list(tokens, n)
                vec = {}
                for gram in grams:
                    vec[gram] = vec.get(gram, 0) + 1
                return {g: c * idf(g) for g, c in vec.items()}

            def cos(u, v):
                nu = math.sqrt(sum(x * x for x in u.values()))
                nv = math.sqrt(sum(x * x for x in v.values()))
                if nu == 0 or nv == 0:
                    return 0.0
                dot = 0.0
                for g, x in u.items():
                    if g in v:
                        dot += x * v[g]
                return dot / (nu * nv)

            cand_vec = vector(cand)
            ref_cos = [cos(cand_vec, vector(ref)) for ref in refs]
            order_values.append(sum(ref_cos) / len(ref_cos))
        per_item[item_id] = sum(order_values) / max_n
    return per_item


def meteor_exhaustive(cand, ref, alpha=0.9, beta=3.0, gamma=0.5):
    """Exhaustive-alignment METEOR for tiny inputs (exponential search)."""
    ref_positions = {}
    for j, w in enumerate(ref):
        ref_positions.setdefault(w, []).append(j)
    from collections import Counter

    cand_counts = Counter(cand)
    ref_counts = Counter(ref)
    matches = sum(min(c, ref_counts[w]) for w, c in cand_counts.items() if w in ref_counts)
    if matches == 0:
        return 0.0, 0, 0

    best_chunks = [matches + 1]

    def count_chunks(pairs):
        pairs = sorted(pairs)
        chunks = 0
        prev = None
        for i, j in pairs:
            if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
                chunks += 1
            prev = (i, j)
        return chunks

    def explore(i, used, pairs, need):
        if len(pairs) + (len(cand) - i) < matches:
            return  # cannot reach the required match count
        if i == len(cand):
            if len(pairs) == matches:
                best_chunks[0] = min(best_chunks[0], count_chunks(pairs))
            return
        w = cand[i]
        for j in ref_positions.get(w, []):
            if j not in used:
                explore(i + 1, used | {j}, pairs + [(i, j)], need)
        explore(i + 1, used, pairs, need)

    explore(0, frozenset(), [], None)
    chunks = best_chunks[0]
    p = matches / len(cand)
    r = matches / len(ref)
    f_mean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (chunks / matches) ** beta
    return f_mean * (1 - penalty), matches, chunks


def recall_by_sorting(values, ks, direction):
    """Recall@k by per-query sort-and-scan; ties break on ascending index."""
    grid = values if direction == "im2t" else [list(row) for row in zip(*values)]
    n = len(grid)
    hits = {k: 0 for k in ks}
    for i in range(n):
        order = sorted(range(n), key=lambda j: (-grid[i][j], j))
        rank = order.index(i) + 1
        for k in ks:
            if rank <= k:
                hits[k] += 1
    return {k: hits[k] / n for k in ks}


def pooled_recall_expectation(better, worse, pool_size, k):
    """P(ground truth ranks <= k in a pool of itself + pool_size-1 distractors).

    `better` items outrank the truth, `worse` do not; distractors are drawn
    without replacement from the better+worse others. The truth makes top-k
    exactly when at most k-1 better items land in the pool.
    """
    others = better + worse
    draws = pool_size - 1
    total = comb(others, draws)
    p = 0.0
    for b in range(0, k):
        if b > better or draws - b > worse:
            continue
        p += comb(better, b) * comb(worse, draws - b) / total
    return p
