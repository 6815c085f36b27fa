from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logclone.clones import LOG_UNAWARE, T1, T2, ClonePair, CloneParams, all_clone_pairs, build_index, find_clones
from logclone.experiment import SplitSpec
from logclone.location import (
    ABSTAIN,
    MAJORITY,
    NEEDS_LOG,
    NO_LOG,
    ConfusionCounts,
    EvaluationError,
    consistency_report,
    evaluate_location,
    evaluate_verdicts,
    location_metrics,
    predict_location,
    verdict_from_pairs,
)
from logclone.synth import planted_level_corpus, random_corpus



def fake(logged: bool, levels=()):
    return SimpleNamespace(is_logged=logged, lps_list=[SimpleNamespace(level=lvl) for lvl in levels])


def test_fibonacci_needs_log(fib_methods):
    fib, get = fib_methods["fibonacci"], fib_methods["getFibonacci"]
    index = build_index([fib], CloneParams(theta=0.3))
    v = predict_location(get, index, {fib.method_id: fib})
    assert v.verdict == NEEDS_LOG
    assert v.evidence[0] == fib.method_id
    assert v.evidence[1] == pytest.approx(21 / 68)


def test_zero_clones_is_no_log(fib_methods):
    fib, get = fib_methods["fibonacci"], fib_methods["getFibonacci"]
    index = build_index([fib], CloneParams(theta=0.9))
    assert predict_location(get, index, {fib.method_id: fib}).verdict == NO_LOG


def test_small_target_abstains(fib_methods):
    fib = fib_methods["fibonacci"]
    index = build_index([fib], CloneParams(theta=0.3, min_bag_size=100))
    assert predict_location(fib_methods["getFibonacci"], index, {}).verdict == ABSTAIN


def test_logged_clone_of_lower_similarity_wins():
    corpus = {"u": fake(False), "l": fake(True, ["info"])}
    pairs = [ClonePair.make("t", "u", 0.95), ClonePair.make("t", "l", 0.8)]
    v = verdict_from_pairs("t", pairs, corpus)
    assert v.verdict == NEEDS_LOG
    assert v.evidence == ("l", 0.8)
    assert (v.logged_clone_count, v.unlogged_clone_count) == (1, 1)
    assert verdict_from_pairs("t", pairs, corpus, MAJORITY).verdict == NO_LOG


def test_majority_rule():
    corpus = {"a": fake(True, ["info"]), "b": fake(True, ["warn"]), "c": fake(False)}
    pairs = [ClonePair.make("t", x, 0.9) for x in "abc"]
    assert verdict_from_pairs("t", pairs, corpus, MAJORITY).verdict == NEEDS_LOG


def test_metrics_perfect():
    m = location_metrics(ConfusionCounts(tp=1, fp=0, tn=1, fn=0))
    assert m == {"precision": 1.0, "recall": 1.0, "f1": 1.0, "balanced_accuracy": 1.0}


def test_metrics_ba_example():
    m = location_metrics(ConfusionCounts(tp=5, fp=10, tn=90, fn=5))
    assert m["balanced_accuracy"] == pytest.approx(0.7)
    assert m["precision"] == pytest.approx(1 / 3)
    assert m["recall"] == pytest.approx(0.5)
    assert m["f1"] == pytest.approx(0.4)


def test_metrics_undefined_precision():
    m = location_metrics(ConfusionCounts(tp=0, fp=0, tn=4, fn=3))
    assert m["recall"] == 0.0
    assert m["precision"] is None and m["f1"] is None


counts = st.builds(ConfusionCounts, *[st.integers(0, 50)] * 4)


@settings(max_examples=200)
@given(counts)
def test_metric_identities(c):
    m = location_metrics(c)
    pos, neg = c.tp + c.fn, c.tn + c.fp
    if pos and neg:
        assert m["balanced_accuracy"] == pytest.approx((c.tp / pos + c.tn / neg) / 2)
    else:
        assert m["balanced_accuracy"] is None
    if c.tp:
        p, r = c.tp / (c.tp + c.fp), c.tp / pos
        assert m["f1"] == pytest.approx(2 * c.tp / (2 * c.tp + c.fp + c.fn))
        assert m["f1"] == pytest.approx(2 * p * r / (p + r))


def test_confusion_add_and_total():
    c = ConfusionCounts()
    for actual, pred in [(True, True), (True, False), (False, True), (False, False), (False, False)]:
        c.add(actual, pred)
    assert (c.tp, c.fn, c.fp, c.tn, c.total) == (1, 1, 1, 2, 5)
    assert (c + c).total == 10


def test_consistency_examples():
    corpus = {"a": fake(True, ["info"]), "b": fake(True, ["info"]), "c": fake(False), "d": fake(False),
              "e": fake(True, ["warn"]), "f": fake(True, ["debug"])}  # fmt: skip
    r = consistency_report(corpus, [ClonePair.make("a", "b", 1.0, T1), ClonePair.make("c", "d", 0.8, T2)])
    assert r["presence_consistency"] == 1.0
    r = consistency_report(corpus, [ClonePair.make("a", "b", 1.0), ClonePair.make("e", "f", 0.8)])
    assert r["level_match"] == 0.5
    assert r["clone_type_shares"]["T34"] == 1.0


def test_consistency_empty():
    r = consistency_report({}, [])
    assert r["empty"] and r["presence_consistency"] is None and r["level_match"] is None


def test_consistency_planted():
    corpus, _ = planted_level_corpus(families=12)
    r = consistency_report(corpus, all_clone_pairs(build_index(corpus, CloneParams())))
    assert r["pairs"] > 0 and r["presence_consistency"] == 1.0 and r["level_match"] == 1.0


@pytest.fixture(scope="module")
def corpus():
    return random_corpus(120, seed=13)


def test_verdict_soundness(corpus):
    ev = evaluate_location(corpus, SplitSpec(0.7, seed=3))
    by_id = {m.method_id: m for m in corpus.methods}
    for v in ev.verdicts:
        if v.verdict == NEEDS_LOG:
            assert by_id[v.evidence[0]].is_logged
            assert v.logged_clone_count >= 1
        elif v.verdict == NO_LOG:
            assert v.logged_clone_count == 0
    assert ev.counts.total + ev.abstained == len(ev.verdicts)


def test_no_leak(corpus):
    train, test = corpus.methods[:80], corpus.methods[80:]
    index = build_index(train, CloneParams())
    assert not {m.method_id for m in test} & set(index.method_ids)
    with pytest.raises(EvaluationError):
        evaluate_verdicts(train[:5], index, {m.method_id: m for m in train})
    with pytest.raises(EvaluationError):
        evaluate_verdicts([], index, {})


def test_monotone_in_theta(corpus):
    train, test = corpus.methods[:80], corpus.methods[80:]
    train_map = {m.method_id: m for m in train}
    previous = None
    for theta in (0.9, 0.8, 0.7, 0.6, 0.5):
        index = build_index(train, CloneParams(theta=theta))
        logged = [predict_location(m, index, train_map).logged_clone_count for m in test]
        if previous is not None:
            assert all(a >= b for a, b in zip(logged, previous))
        previous = logged


def test_log_unaware_queries_with_full_bag(fib_methods):
    fib = fib_methods["fibonacci"]
    index = build_index([fib], CloneParams(theta=0.3, mode=LOG_UNAWARE))
    (pair,) = find_clones(fib_methods["getFibonacci"], index)
    # 22 shared tokens of max(38, 68)
    assert pair.similarity == pytest.approx(22 / 68)
