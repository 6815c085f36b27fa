"""Where-to-log prediction from clone pairs, its evaluation, and clone/log consistency statistics."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .clones import T1, T2, T34, CloneIndex, ClonePair, CloneParams, build_index, find_clones
from .ingest import Corpus, MethodDefinition

NEEDS_LOG = "needs_log"
NO_LOG = "no_log"
ABSTAIN = "abstain"

ANY_LOGGED = "any"
MAJORITY = "majority"


@dataclass
class LocationVerdict:
    target: str
    verdict: str
    evidence: tuple[str, float] | None = None
    logged_clone_count: int = 0
    unlogged_clone_count: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        if self.evidence is not None:
            d["evidence"] = {"method_id": self.evidence[0], "similarity": round(self.evidence[1], 6)}
        return d


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, actual: bool, predicted: bool) -> None:
        if actual and predicted:
            self.tp += 1
        elif actual:
            self.fn += 1
        elif predicted:
            self.fp += 1
        else:
            self.tn += 1

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def location_metrics(c: ConfusionCounts) -> dict[str, float | None]:
    """Precision, recall, F1 and balanced accuracy; None marks an undefined value."""
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    specificity = _ratio(c.tn, c.tn + c.fp)
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    if recall is None or specificity is None:
        ba = None
    else:
        ba = (recall + specificity) / 2
    return {"precision": precision, "recall": recall, "f1": f1, "balanced_accuracy": ba}


def verdict_from_pairs(
    target_id: str, pairs: Sequence[ClonePair] | None, corpus, rule: str = ANY_LOGGED
) -> LocationVerdict:
    """Decide from an already computed clone list (sorted by similarity)."""
    if pairs is None:
        return LocationVerdict(target_id, ABSTAIN)
    logged = [p for p in pairs if corpus[p.other(target_id)].is_logged]
    unlogged = len(pairs) - len(logged)
    if rule == MAJORITY:
        positive = len(logged) > unlogged
    else:
        positive = bool(logged)
    if not positive:
        return LocationVerdict(target_id, NO_LOG, None, len(logged), unlogged)
    best = logged[0]
    return LocationVerdict(target_id, NEEDS_LOG, (best.other(target_id), best.similarity), len(logged), unlogged)


def predict_location(
    target: MethodDefinition, index: CloneIndex, train_corpus, rule: str = ANY_LOGGED
) -> LocationVerdict:
    """needs_log iff some clone of ``target`` (similarity >= theta) contains a logging call.

    The target is queried with the index's mode, so in log_aware mode its own
    logging calls are stripped and never help it find clones. Evidence is the
    most similar logged clone.
    """
    pairs = find_clones(target, index)
    return verdict_from_pairs(target.method_id, pairs, train_corpus, rule)


@dataclass
class LocationEvaluation:
    counts: ConfusionCounts
    metrics: dict[str, float | None]
    abstained: int
    verdicts: list[LocationVerdict]

    def to_json(self) -> dict:
        return {
            "confusion": asdict(self.counts),
            "metrics": self.metrics,
            "abstained": self.abstained,
            "evaluated": self.counts.total,
        }


class EvaluationError(Exception):
    """The requested evaluation cannot be carried out (e.g. empty test side)."""


def evaluate_verdicts(test: Sequence[MethodDefinition], index: CloneIndex, train, rule: str = ANY_LOGGED) -> LocationEvaluation:
    if not test:
        raise EvaluationError("empty test set")
    leaked = [m.method_id for m in test if m.method_id in index]
    if leaked:
        raise EvaluationError(f"test methods present in the index: {leaked[:3]}")
    counts = ConfusionCounts()
    verdicts = []
    abstained = 0
    for m in sorted(test, key=lambda m: m.method_id):
        v = predict_location(m, index, train, rule)
        verdicts.append(v)
        if v.verdict == ABSTAIN:
            abstained += 1
            continue
        counts.add(m.is_logged, v.verdict == NEEDS_LOG)
    return LocationEvaluation(counts, location_metrics(counts), abstained, verdicts)


def evaluate_location(corpus: Corpus, split, params: CloneParams | None = None, rule: str = ANY_LOGGED) -> LocationEvaluation:
    """Build the index on the train side of ``split`` and score every test method.

    ``split`` is either a ``SplitSpec`` or an explicit ``(train_ids, test_ids)`` pair.
    """
    from .experiment import SplitSpec, split_corpus

    params = params or CloneParams()
    if isinstance(split, SplitSpec):
        train, test = split_corpus(corpus, split)
    else:
        train_ids, test_ids = split
        train, test = [corpus[i] for i in train_ids], [corpus[i] for i in test_ids]
    index = build_index(train, params)
    return evaluate_verdicts(test, index, {m.method_id: m for m in train}, rule)


def consistency_report(corpus, pairs: Iterable[ClonePair]) -> dict:
    """Logging consistency across clone pairs.

    presence_consistency: share of pairs where both sides agree on having a
    logging call. level_match: among pairs where both sides are logged, the
    share whose sets of levels are equal. Values are None when undefined.
    """
    pairs = sorted(pairs, key=lambda p: p.key())
    bands = Counter({T1: 0, T2: 0, T34: 0})
    agree = both_logged = level_equal = 0
    for p in pairs:
        a, b = corpus[p.left], corpus[p.right]
        bands[p.clone_type] += 1
        if a.is_logged == b.is_logged:
            agree += 1
        if a.is_logged and b.is_logged:
            both_logged += 1
            if {x.level for x in a.lps_list} == {x.level for x in b.lps_list}:
                level_equal += 1
    n = len(pairs)
    return {
        "pairs": n,
        "empty": n == 0,
        "presence_consistency": _ratio(agree, n),
        "both_logged_pairs": both_logged,
        "level_match": _ratio(level_equal, both_logged),
        "clone_types": {band: bands[band] for band in (T1, T2, T34)},
        "clone_type_shares": {band: _ratio(bands[band], n) for band in (T1, T2, T34)},
    }
