"""Train/test splitting and the end-to-end evaluation run."""

from __future__ import annotations

import math
import os
import random
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .clones import CloneParams, build_index, find_clones
from .ingest import VAR_TOKEN, Corpus, IngestConfig, MethodDefinition, read_corpus, scan_corpus
from .levels import predict_level, predict_variables
from .location import (
    ABSTAIN,
    ANY_LOGGED,
    NEEDS_LOG,
    ConfusionCounts,
    EvaluationError,
    location_metrics,
    verdict_from_pairs,
)
from .lsd import CLONE_ONLY, HYBRID, HybridParams, train_lsd_lm, suggest_all
from .metrics import bleu, rouge_l, rouge_n

REPORT_SCHEMA = "logclone-report/1"
MODES = (CLONE_ONLY, HYBRID)
SCORE_KEYS = (
    "bleu1", "bleu2", "bleu3", "bleu4",
    "rouge1_p", "rouge1_r", "rouge1_f",
    "rougeL_p", "rougeL_r", "rougeL_f",
)  # fmt: skip


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42
    unit: str = "method"

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if self.unit != "method":
            raise ValueError("only method-level splits are supported")


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[list[MethodDefinition], list[MethodDefinition]]:
    """Seeded shuffle of the corpus order; the first ceil(fraction * N) methods train."""
    methods = list(corpus.methods)
    if not methods:
        raise EvaluationError("cannot split an empty corpus")
    order = list(range(len(methods)))
    random.Random(spec.seed).shuffle(order)
    n_train = math.ceil(round(spec.train_fraction * len(methods), 9))
    if n_train <= 0 or n_train >= len(methods):
        raise EvaluationError(f"fraction {spec.train_fraction} leaves an empty side for N={len(methods)}")
    train_pos = sorted(order[:n_train])
    test_pos = sorted(order[n_train:])
    return [methods[i] for i in train_pos], [methods[i] for i in test_pos]


@dataclass
class PipelineConfig:
    corpus: str
    split: SplitSpec = field(default_factory=SplitSpec)
    clone: CloneParams = field(default_factory=CloneParams)
    hybrid: HybridParams = field(default_factory=HybridParams)
    lm_order: int = 3
    lm_k: float = 0.01
    lm_backoff: float = 0.4
    rule: str = ANY_LOGGED
    ingest: IngestConfig = field(default_factory=IngestConfig)

    def echo(self) -> dict:
        return {
            "corpus": str(self.corpus),
            "split": asdict(self.split),
            "clone": asdict(self.clone),
            "hybrid": asdict(self.hybrid),
            "lm": {"order": self.lm_order, "k": self.lm_k, "backoff_weight": self.lm_backoff},
            "rule": self.rule,
        }


@dataclass
class EvalReport:
    config: dict
    location: dict
    description: dict
    levels: dict
    location_items: list[dict]
    items: list[dict]
    schema: str = REPORT_SCHEMA
    timestamp: str = ""

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "timestamp": self.timestamp,
            "config": self.config,
            "location": self.location,
            "description": self.description,
            "levels": self.levels,
            "location_items": self.location_items,
            "items": self.items,
        }


def load_corpus(path: str | os.PathLike, ingest: IngestConfig | None = None) -> Corpus:
    """A corpus from a JSONL file, or by scanning a source directory."""
    path = Path(path)
    if path.is_dir():
        return scan_corpus(path, ingest)
    if not path.exists():
        from .ingest import CorpusError

        raise CorpusError(f"corpus not found: {path}")
    return read_corpus(path)


def score_pair(candidate: Sequence[str], reference: Sequence[str]) -> dict[str, float]:
    scores = {f"bleu{n}": bleu(candidate, reference, n) for n in range(1, 5)}
    r1 = rouge_n(candidate, reference, 1)
    rl = rouge_l(candidate, reference) if candidate else (0.0, 0.0, 0.0)
    scores.update(zip(("rouge1_p", "rouge1_r", "rouge1_f"), r1))
    scores.update(zip(("rougeL_p", "rougeL_r", "rougeL_f"), rl))
    return scores


def _reference(tokens: Sequence[str]) -> list[str]:
    return list(tokens) if tokens else [VAR_TOKEN]


def align_reference(candidate: Sequence[str], target: MethodDefinition) -> tuple[str, list[str]]:
    """The target logging call whose description gives the candidate its highest BLEU."""
    best = None
    for lps in sorted(target.lps_list, key=lambda p: (p.line, p.lps_id)):
        ref = _reference(lps.lsd_tokens)
        score = bleu(candidate, ref)
        if best is None or score > best[0]:
            best = (score, lps.lps_id, ref)
    return best[1], best[2]


def mean(values: Sequence[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate_items(items: Sequence[dict]) -> dict:
    if not items:
        return {"empty": True, "items": 0, CLONE_ONLY: None, HYBRID: None}
    out: dict = {"empty": False, "items": len(items)}
    for mode in MODES:
        out[mode] = {key: mean([it[mode]["scores"][key] for it in items]) for key in SCORE_KEYS}
    return out


def run_pipeline(
    config: PipelineConfig,
    corpus: Corpus | None = None,
    partition: tuple[Sequence[str], Sequence[str]] | None = None,
) -> EvalReport:
    """Split, index the train side, and evaluate location, description and level suggestions.

    ``partition`` gives explicit (train_ids, test_ids) in place of the seeded split.
    """
    corpus = corpus if corpus is not None else load_corpus(config.corpus, config.ingest)
    if partition is None:
        train, test = split_corpus(corpus, config.split)
    else:
        train, test = [corpus[i] for i in partition[0]], [corpus[i] for i in partition[1]]
        if not train or not test:
            raise EvaluationError("explicit partition leaves an empty side")
    train_map = {m.method_id: m for m in train}
    index = build_index(train, config.clone)
    leaked = [m.method_id for m in test if m.method_id in index]
    if leaked:
        raise EvaluationError(f"train/test leak: {leaked[:3]}")

    model = train_lsd_lm(
        (p.lsd_tokens for m in train for p in m.lps_list),
        order=config.lm_order,
        k=config.lm_k,
        backoff_weight=config.lm_backoff,
    )

    counts = ConfusionCounts()
    abstained = 0
    location_items: list[dict] = []
    items: list[dict] = []
    level_items: list[dict] = []
    for target in sorted(test, key=lambda m: m.method_id):
        pairs = find_clones(target, index, classify=False)
        verdict = verdict_from_pairs(target.method_id, pairs, train_map, config.rule)
        location_items.append({"actual": target.is_logged, **verdict.to_json()})
        if verdict.verdict == ABSTAIN:
            abstained += 1
            continue
        counts.add(target.is_logged, verdict.verdict == NEEDS_LOG)
        if not (target.is_logged and verdict.verdict == NEEDS_LOG):
            continue

        clone = train_map[verdict.evidence[0]]
        for base, hyb in suggest_all(target.method_id, clone, model, config.hybrid):
            item = {"target": target.method_id, "seed_clone": clone.method_id, "seed_lps": base.seed_lps}
            for mode, sugg in ((CLONE_ONLY, base), (HYBRID, hyb)):
                ref_id, ref = align_reference(sugg.tokens, target)
                item[mode] = {
                    "suggestion": sugg.tokens,
                    "reference_lps": ref_id,
                    "reference": ref,
                    "scores": score_pair(sugg.tokens, ref),
                }
            items.append(item)

        logged_pairs = [p for p in pairs if train_map[p.other(target.method_id)].is_logged]
        votes = [(p, lps) for p in logged_pairs for lps in train_map[p.other(target.method_id)].lps_list]
        level = predict_level(votes, target.method_id)
        actual = sorted({p.level for p in target.lps_list})
        evidence_lps = sorted(clone.lps_list, key=lambda p: (p.line, p.lps_id))[0]
        variables = predict_variables(target, evidence_lps)
        level_items.append(
            {
                "target": target.method_id,
                "predicted": level.level,
                "rule": level.rule,
                "support": level.support,
                "actual": actual,
                "match": level.level in actual,
                "variables": variables.to_json(),
            }
        )

    location = {
        "confusion": asdict(counts),
        "metrics": location_metrics(counts),
        "abstained": abstained,
        "evaluated": counts.total,
        "test_methods": len(test),
        "train_methods": len(train),
        "indexed_methods": len(index),
    }
    levels = {
        "items": level_items,
        "evaluated": len(level_items),
        "match_rate": mean([1.0 if it["match"] else 0.0 for it in level_items]),
    }
    return EvalReport(
        config=config.echo(),
        location=location,
        description=aggregate_items(items),
        levels=levels,
        location_items=location_items,
        items=items,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def macro_over_projects(reports: Sequence[EvalReport]) -> dict:
    """Unweighted mean of each project's aggregates; undefined values are skipped."""

    def avg(values):
        vals = [v for v in values if v is not None]
        return mean(vals)

    out = {
        "projects": len(reports),
        "balanced_accuracy": avg(r.location["metrics"]["balanced_accuracy"] for r in reports),
        "f1": avg(r.location["metrics"]["f1"] for r in reports),
        "level_match_rate": avg(r.levels["match_rate"] for r in reports),
    }
    for mode in MODES:
        sections = [r.description[mode] for r in reports if not r.description["empty"]]
        out[mode] = {key: avg(s[key] for s in sections) for key in SCORE_KEYS} if sections else None
    return out


def format_summary(report: EvalReport) -> str:
    """Plain-text table of the headline numbers."""

    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    loc = report.location
    m = loc["metrics"]
    c = loc["confusion"]
    lines = [
        "location",
        f"  tp={c['tp']} fp={c['fp']} tn={c['tn']} fn={c['fn']} abstained={loc['abstained']}",
        f"  precision={fmt(m['precision'])} recall={fmt(m['recall'])} f1={fmt(m['f1'])} ba={fmt(m['balanced_accuracy'])}",
        "description",
    ]
    desc = report.description
    if desc["empty"]:
        lines.append("  (no logged test method received a needs_log verdict)")
    else:
        lines.append(f"  {'mode':<11}" + "".join(f"{k:>10}" for k in SCORE_KEYS))
        for mode in MODES:
            lines.append(f"  {mode:<11}" + "".join(f"{fmt(desc[mode][k]):>10}" for k in SCORE_KEYS))
    lines.append(f"levels\n  match_rate={fmt(report.levels['match_rate'])} over {report.levels['evaluated']} methods")
    return "\n".join(lines)
