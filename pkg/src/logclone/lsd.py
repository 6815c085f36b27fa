"""Log description (LSD) suggestion.

Two suggesters: the clone-only baseline copies the evidence clone's
description verbatim; the hybrid walks the clone's description left to
right and lets an n-gram language model, trained on the project's own
training descriptions, replace tokens it is confident about.
"""

from __future__ import annotations

import heapq
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ingest import VAR_TOKEN, MethodDefinition

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPECIAL = (BOS, EOS, VAR_TOKEN, UNK)

MODEL_FORMAT = "logclone-lm/1"

CLONE_ONLY = "clone_only"
HYBRID = "hybrid"


@dataclass
class LsdLanguageModel:
    """Stupid-backoff n-gram model over LSD tokens with add-k unigram smoothing.

    ``counts`` maps a context tuple (length 0..order-1) to next-token counts.
    Contexts are stored verbatim and, when they contain singleton tokens,
    also with those tokens replaced by ``<unk>`` so unseen words in a query
    context still find statistics.
    """

    order: int = 3
    k: float = 0.01
    backoff_weight: float = 0.4
    counts: dict[tuple[str, ...], Counter] = field(default_factory=dict)
    vocabulary: frozenset[str] = frozenset(SPECIAL)
    singletons: frozenset[str] = frozenset()
    empty: bool = False

    def __post_init__(self):
        self._vocab_sorted = sorted(self.vocabulary)
        self._totals = {ctx: sum(c.values()) for ctx, c in self.counts.items()}
        self._cache: dict[tuple[str, ...], dict[str, float]] = {}

    def _context_key(self, context: Sequence[str]) -> tuple[str, ...]:
        ctx = list(context)[-(self.order - 1) :] if self.order > 1 else []
        ctx = [t if t in self.vocabulary else UNK for t in ctx]
        key = tuple(ctx)
        while key and key not in self.counts:
            key = key[1:]
        return key

    def distribution(self, context: Sequence[str]) -> dict[str, float]:
        """Normalized next-token distribution over the full vocabulary."""
        key = self._context_key(context)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self.empty:
            dist = {w: 0.0 for w in self._vocab_sorted}
            dist[EOS] = 1.0
            self._cache[key] = dist
            return dist
        chain = [key[j:] for j in range(len(key))]  # longest first, excludes ()
        alpha = self.backoff_weight
        unigram = self.counts.get((), Counter())
        n_total = self._totals.get((), 0)
        denom = n_total + self.k * len(self._vocab_sorted)
        floor = alpha ** len(chain)
        scores = {w: floor * (unigram.get(w, 0) + self.k) / denom for w in self._vocab_sorted}
        for depth in range(len(chain) - 1, -1, -1):
            ctx = chain[depth]
            total = self._totals[ctx]
            weight = alpha**depth
            for w, c in self.counts[ctx].items():
                scores[w] = weight * c / total
        z = sum(scores.values())
        dist = {w: s / z for w, s in scores.items()}
        self._cache[key] = dist
        return dist

    def prob(self, context: Sequence[str], token: str) -> float:
        return self.distribution(context).get(token, 0.0)

    def to_json(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "order": self.order,
            "k": self.k,
            "backoff_weight": self.backoff_weight,
            "empty": self.empty,
            "vocabulary": sorted(self.vocabulary),
            "singletons": sorted(self.singletons),
            "counts": [[list(ctx), dict(sorted(c.items()))] for ctx, c in sorted(self.counts.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LsdLanguageModel":
        if data.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {data.get('format')!r}")
        return cls(
            order=data["order"],
            k=data["k"],
            backoff_weight=data["backoff_weight"],
            counts={tuple(ctx): Counter(c) for ctx, c in data["counts"]},
            vocabulary=frozenset(data["vocabulary"]),
            singletons=frozenset(data["singletons"]),
            empty=data["empty"],
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "LsdLanguageModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def train_lsd_lm(
    train_lsds: Iterable[Sequence[str]], order: int = 3, k: float = 0.01, backoff_weight: float = 0.4
) -> LsdLanguageModel:
    """Count n-grams of orders 1..order over ``<s>``-padded description sequences."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if k <= 0:
        raise ValueError("add-k constant must be positive")
    seqs = [list(s) for s in train_lsds]
    if not seqs:
        return LsdLanguageModel(order=order, k=k, backoff_weight=backoff_weight, empty=True)

    freq = Counter(tok for s in seqs for tok in s)
    singletons = frozenset(t for t, c in freq.items() if c == 1)
    counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    for s in seqs:
        padded = [BOS] * (order - 1) + s + [EOS]
        for i in range(order - 1, len(padded)):
            w = padded[i]
            for n in range(order):
                ctx = tuple(padded[i - n : i])
                counts[ctx][w] += 1
                unk_ctx = tuple(UNK if t in singletons else t for t in ctx)
                if unk_ctx != ctx:
                    counts[unk_ctx][w] += 1
    return LsdLanguageModel(
        order=order,
        k=k,
        backoff_weight=backoff_weight,
        counts=dict(counts),
        vocabulary=frozenset(freq) | frozenset(SPECIAL),
        singletons=singletons,
    )


def next_token_distribution(model: LsdLanguageModel, context: Sequence[str], k: int = 5) -> list[tuple[str, float]]:
    """Top-``k`` (token, probability), most probable first, ties in lexicographic order."""
    dist = model.distribution(context)
    ranked = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[: max(0, k)]


# ---------------------------------------------------------------------------
# suggestions


@dataclass
class LsdSuggestion:
    target: str
    tokens: list[str]
    source: str
    seed_clone: str
    per_token_scores: list[float] = field(default_factory=list)
    seed_lps: str | None = None

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "tokens": self.tokens,
            "source": self.source,
            "seed_clone": self.seed_clone,
            "seed_lps": self.seed_lps,
            "per_token_scores": [round(s, 6) for s in self.per_token_scores],
        }


@dataclass(frozen=True)
class HybridParams:
    lam: float = 0.5
    k: int = 5
    tau: float = 0.0
    max_len: int = 32

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must be within [0, 1]")


def _clone_lsd(tokens: Sequence[str]) -> list[str]:
    return list(tokens) if tokens else [VAR_TOKEN]


def suggest_lsd_clone_only(clone: MethodDefinition) -> list[list[str]]:
    """One description per logging call of the evidence clone, in line order."""
    if not clone.is_logged:
        raise ValueError(f"{clone.method_id} has no logging statement to copy")
    return [_clone_lsd(p.lsd_tokens) for p in sorted(clone.lps_list, key=lambda p: (p.line, p.lps_id))]


def generate_hybrid(
    clone_tokens: Sequence[str], model: LsdLanguageModel, params: HybridParams | None = None
) -> tuple[list[str], list[float]]:
    """Blend a clone description with language-model continuations.

    At each position the candidates are the clone token at that position
    (``</s>`` once the clone description is used up) and the model's top-k
    continuations. A candidate scores ``lam * [is clone token] + (1 - lam) * P``;
    ties prefer the clone token, then the lexicographically smaller token.
    """
    params = params or HybridParams()
    clone = _clone_lsd(clone_tokens)
    context = [BOS] * max(0, model.order - 1)
    out: list[str] = []
    scores: list[float] = []
    lam = params.lam
    while len(out) < params.max_len:
        t = len(out)
        clone_tok = clone[t] if t < len(clone) else EOS
        dist = model.distribution(context)
        top = heapq.nsmallest(params.k + 2, dist.items(), key=lambda kv: (-kv[1], kv[0]))
        ranked = [(w, p) for w, p in top if w not in (BOS, UNK)][: params.k]
        if t >= len(clone) and (not ranked or ranked[0][1] < params.tau):
            break
        candidates = {clone_tok} | {w for w, _ in ranked}
        if not out:
            # a suggestion is never empty
            candidates.discard(EOS)

        def score(w: str) -> float:
            return lam * (w == clone_tok) + (1 - lam) * dist.get(w, 0.0)

        best = min(candidates, key=lambda w: (-score(w), w != clone_tok, w))
        if best == EOS:
            break
        out.append(best)
        scores.append(score(best))
        context.append(best)
    return out, scores


def suggest_lsd_hybrid(
    target_id: str,
    clone: MethodDefinition,
    model: LsdLanguageModel,
    params: HybridParams | None = None,
    lps_index: int = 0,
) -> LsdSuggestion:
    """Hybrid suggestion seeded by the ``lps_index``-th (in line order) logging call of ``clone``."""
    if not clone.is_logged:
        raise ValueError(f"{clone.method_id} has no logging statement to seed from")
    lps = sorted(clone.lps_list, key=lambda p: (p.line, p.lps_id))[lps_index]
    tokens, scores = generate_hybrid(lps.lsd_tokens, model, params)
    return LsdSuggestion(target_id, tokens, HYBRID, clone.method_id, scores, lps.lps_id)


def suggest_all(
    target_id: str, clone: MethodDefinition, model: LsdLanguageModel, params: HybridParams | None = None
) -> list[tuple[LsdSuggestion, LsdSuggestion]]:
    """(clone-only, hybrid) suggestion pairs, one per logging call of ``clone``."""
    ordered = sorted(clone.lps_list, key=lambda p: (p.line, p.lps_id))
    out = []
    for i, (lps, tokens) in enumerate(zip(ordered, suggest_lsd_clone_only(clone))):
        base = LsdSuggestion(target_id, tokens, CLONE_ONLY, clone.method_id, [1.0] * len(tokens), lps.lps_id)
        out.append((base, suggest_lsd_hybrid(target_id, clone, model, params, i)))
    return out
