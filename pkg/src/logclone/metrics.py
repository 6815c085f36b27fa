"""Sentence-level BLEU, ROUGE-N and ROUGE-L over token sequences."""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

BLEU_EPSILON = 1e-9


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """BLEU with clipped n-gram precisions, brevity penalty and epsilon smoothing.

    Orders longer than the candidate have no n-grams to judge and are left
    out, the remaining orders sharing the weight equally. Any other zero
    precision becomes ``BLEU_EPSILON``. No unigram in common, or an empty
    candidate, scores 0.
    """
    if not reference:
        raise ValueError("bleu: empty reference")
    if not candidate:
        return 0.0
    orders = min(max_n, len(candidate))
    log_sum = 0.0
    for n in range(1, orders + 1):
        cand = ngrams(candidate, n)
        ref = ngrams(reference, n)
        matched = sum(min(c, ref[g]) for g, c in cand.items())
        if matched == 0 and n == 1:
            return 0.0
        p = matched / sum(cand.values())
        log_sum += math.log(p if p > 0 else BLEU_EPSILON) / orders
    c, r = len(candidate), len(reference)
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return bp * math.exp(log_sum)


def _prf(overlap: int, cand_total: int, ref_total: int) -> tuple[float, float, float]:
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> tuple[float, float, float]:
    """(precision, recall, f1) of clipped n-gram overlap."""
    if n < 1:
        raise ValueError("rouge_n: n must be >= 1")
    if len(reference) < n:
        raise ValueError(f"rouge_n: reference shorter than n={n}")
    cand, ref = ngrams(candidate, n), ngrams(reference, n)
    overlap = sum((cand & ref).values())
    return _prf(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> tuple[float, float, float]:
    if not candidate or not reference:
        raise ValueError("rouge_l: empty sequence")
    return _prf(lcs_length(candidate, reference), len(candidate), len(reference))
