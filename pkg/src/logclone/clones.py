"""Method-level clone detection over token bags with an inverted index.

In ``log_aware`` mode every token that belongs to a logging call is left out
of the bags, so log text neither makes two logged methods look alike nor
pushes a logged method away from its unlogged twin.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from .ingest import Corpus, MethodDefinition
from .lexer import CHAR, IDENT, NUMBER, STRING, is_literal, tokenize

LOG_AWARE = "log_aware"
LOG_UNAWARE = "log_unaware"
MODES = (LOG_AWARE, LOG_UNAWARE)

T1, T2, T34 = "T1", "T2", "T34"


class EmptyBagError(ValueError):
    """A method has no tokens to compare; it is undetectable and must be excluded."""


def normalize_mode(mode: str) -> str:
    mode = mode.replace("-", "_")
    if mode not in MODES:
        raise ValueError(f"unknown clone mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class CloneParams:
    theta: float = 0.7
    mode: str = LOG_AWARE
    min_bag_size: int = 10

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        if self.min_bag_size < 1:
            raise ValueError("min_bag_size must be positive")
        object.__setattr__(self, "mode", normalize_mode(self.mode))


@dataclass(frozen=True)
class ClonePair:
    left: str
    right: str
    similarity: float
    clone_type: str = T34

    @classmethod
    def make(cls, a: str, b: str, similarity: float, clone_type: str = T34) -> "ClonePair":
        if a == b:
            raise ValueError("a method is not its own clone")
        left, right = (a, b) if a < b else (b, a)
        return cls(left, right, similarity, clone_type)

    def other(self, method_id: str) -> str:
        return self.right if method_id == self.left else self.left

    def key(self) -> tuple[str, str]:
        return self.left, self.right

    def to_json(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "similarity": round(self.similarity, 6),
            "clone_type": self.clone_type,
        }


def bag_of(method: MethodDefinition, mode: str) -> Counter:
    if normalize_mode(mode) == LOG_AWARE:
        return method.log_aware_bag
    return method.full_bag


def similarity(bag_a: Mapping[str, int], bag_b: Mapping[str, int]) -> float:
    """Multiset overlap |A ∩ B| / max(|A|, |B|)."""
    size_a, size_b = sum(bag_a.values()), sum(bag_b.values())
    if size_a == 0 or size_b == 0:
        raise EmptyBagError("cannot compare an empty token bag")
    overlap = 0
    for tok in bag_a.keys() & bag_b.keys():
        ca, cb = bag_a[tok], bag_b[tok]
        overlap += ca if ca < cb else cb
    return overlap / max(size_a, size_b)


@dataclass
class CloneIndex:
    params: CloneParams
    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    bags: dict[str, Counter] = field(default_factory=dict)
    methods: dict[str, MethodDefinition] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.bags)

    def __contains__(self, method_id: str) -> bool:
        return method_id in self.bags

    @property
    def method_ids(self) -> list[str]:
        return sorted(self.bags)

    def to_json(self) -> dict:
        return {
            "params": {"theta": self.params.theta, "mode": self.params.mode, "min_bag_size": self.params.min_bag_size},
            "postings": {tok: [list(p) for p in plist] for tok, plist in sorted(self.postings.items())},
            "bags": {mid: dict(sorted(bag.items())) for mid, bag in sorted(self.bags.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def build_index(corpus: Corpus | Iterable[MethodDefinition], params: CloneParams | None = None) -> CloneIndex:
    """Index every method whose bag (in ``params.mode``) has at least ``min_bag_size`` tokens."""
    params = params or CloneParams()
    methods = corpus.methods if isinstance(corpus, Corpus) else list(corpus)
    index = CloneIndex(params)
    postings: dict[str, list[tuple[str, int]]] = defaultdict(list)
    for m in sorted(methods, key=lambda m: m.method_id):
        bag = bag_of(m, params.mode)
        size = sum(bag.values())
        if size < params.min_bag_size:
            continue
        index.bags[m.method_id] = bag
        index.methods[m.method_id] = m
        for tok in sorted(bag):
            postings[tok].append((m.method_id, size))
    index.postings = dict(postings)
    return index


def find_clones(
    target: MethodDefinition, index: CloneIndex, bag: Counter | None = None, classify: bool = True
) -> list[ClonePair] | None:
    """Clones of ``target`` among the indexed methods.

    Returns None (abstain) when the target bag is smaller than
    ``min_bag_size``. ``bag`` overrides the target's own bag, e.g. for a
    target whose logging calls have been stripped. The result equals an
    exhaustive comparison; posting lists only prune candidates that cannot
    reach ``theta``.
    """
    params = index.params
    bag = bag if bag is not None else bag_of(target, params.mode)
    size = sum(bag.values())
    if size < params.min_bag_size:
        return None
    theta = params.theta

    # Any candidate reaching theta shares at least `need` tokens with the
    # target, so it must hit one of the first size - need + 1 tokens when
    # those are taken rarest-first.
    need = max(1, math.floor(theta * size * (1 - 1e-12)))
    prefix_len = size - need + 1
    ordered = sorted(bag.items(), key=lambda kv: (len(index.postings.get(kv[0], ())), kv[0]))
    lo = theta * size * (1 - 1e-12)
    hi = size / theta * (1 + 1e-12)
    candidates: set[str] = set()
    taken = 0
    for tok, count in ordered:
        if taken >= prefix_len:
            break
        taken += count
        for mid, other_size in index.postings.get(tok, ()):
            if lo <= other_size <= hi:
                candidates.add(mid)
    candidates.discard(target.method_id)

    pairs = []
    for mid in candidates:
        sim = similarity(bag, index.bags[mid])
        if sim >= theta:
            band = _classify(target, index.methods[mid]) if classify else T34
            pairs.append((mid, ClonePair.make(target.method_id, mid, sim, band)))
    pairs.sort(key=lambda p: (-p[1].similarity, p[0]))
    return [p for _, p in pairs]


def brute_force_clone_pairs(corpus: Corpus | Iterable[MethodDefinition], params: CloneParams | None = None) -> set[ClonePair]:
    """All-pairs exhaustive clone detection; the ground truth for ``find_clones``."""
    params = params or CloneParams()
    methods = corpus.methods if isinstance(corpus, Corpus) else list(corpus)
    eligible = []
    for m in methods:
        bag = bag_of(m, params.mode)
        if sum(bag.values()) >= params.min_bag_size:
            eligible.append((m, bag))
    found = set()
    for i, (a, bag_a) in enumerate(eligible):
        for b, bag_b in eligible[i + 1 :]:
            sim = similarity(bag_a, bag_b)
            if sim >= params.theta:
                found.add(ClonePair.make(a.method_id, b.method_id, sim, _classify(a, b)))
    return found


def all_clone_pairs(index: CloneIndex) -> set[ClonePair]:
    """Union of ``find_clones`` over every indexed method."""
    pairs: set[ClonePair] = set()
    for mid in index.method_ids:
        pairs.update(find_clones(index.methods[mid], index, bag=index.bags[mid]) or ())
    return pairs


# ---------------------------------------------------------------------------
# clone types


@lru_cache(maxsize=8192)
def _forms(source: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """(type-1 form, type-2 form) of a declaration's lexemes."""
    exact, blind = [], []
    for t in tokenize(source):
        exact.append(t.text)
        if t.kind in (STRING, CHAR, NUMBER) or is_literal(t.text):
            blind.append("LIT")
        elif t.kind == IDENT:
            blind.append("ID")
        else:
            blind.append(t.text)
    return tuple(exact), tuple(blind)


def _classify(a: MethodDefinition, b: MethodDefinition) -> str:
    if not a.source and not b.source:
        return T34
    fa, fb = _forms(a.source), _forms(b.source)
    if fa[0] == fb[0]:
        return T1
    if fa[1] == fb[1]:
        return T2
    return T34


def classify_clone_type(pair: ClonePair, corpus: Mapping[str, MethodDefinition] | Corpus) -> str:
    """T1 when equal modulo whitespace and comments, T2 when equal after
    mapping identifiers to ID and literals to LIT, otherwise T34."""
    return _classify(corpus[pair.left], corpus[pair.right])
