"""Verbosity level and variable suggestions for a logging statement."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .clones import ClonePair
from .ingest import LEVELS, LogPrintStatement, MethodDefinition
from .lexer import is_identifier

SEVERITY = {level: rank for rank, level in enumerate(LEVELS)}
EDIT_DISTANCE_LIMIT = 0.34

SINGLE_CLONE = "single_clone"
MAJORITY = "majority"
SEVERITY_TIEBREAK = "severity_tiebreak"

MATCHED = "matched_in_target"
CLONE_ONLY = "clone_only"


@dataclass
class LevelPrediction:
    target: str
    level: str
    rule: str
    support: float


@dataclass
class VariablePrediction:
    target: str
    variables: list[str] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)

    def to_json(self) -> list[dict]:
        return [{"name": v, "provenance": p} for v, p in zip(self.variables, self.provenance)]


def predict_level(logged_clones: Sequence[tuple[ClonePair, LogPrintStatement]], target: str = "") -> LevelPrediction:
    """Similarity-weighted vote over the levels of the clones' logging calls.

    Ties go to the more severe level.
    """
    if not logged_clones:
        raise ValueError("predict_level needs at least one logged clone")
    if len(logged_clones) == 1:
        return LevelPrediction(target, logged_clones[0][1].level, SINGLE_CLONE, 1.0)
    votes: dict[str, float] = {}
    for pair, lps in logged_clones:
        votes[lps.level] = votes.get(lps.level, 0.0) + pair.similarity
    total = sum(votes.values())
    best = max(votes.values())
    winners = [lvl for lvl, v in votes.items() if v == best]
    level = max(winners, key=SEVERITY.__getitem__)
    rule = SEVERITY_TIEBREAK if len(winners) > 1 else MAJORITY
    # all-zero similarities cannot happen for real pairs; fall back to plain counts
    support = best / total if total > 0 else 1.0 / len(votes)
    return LevelPrediction(target, level, rule, support)


def edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    return edit_distance(a, b) / longest if longest else 0.0


_BASE_RE = re.compile(r"(?:this\s*\.\s*)?([A-Za-z_$][A-Za-z0-9_$]*)")


def base_identifier(expression: str) -> str | None:
    """Leading identifier of a variable expression: ``this.blockId.get()`` -> ``blockId``."""
    m = _BASE_RE.match(expression.strip())
    return m.group(1) if m else None


def target_identifiers(target: MethodDefinition) -> list[str]:
    """Distinct identifiers of the target outside its logging calls, first-seen order."""
    seen: dict[str, None] = {}
    for tok in target.log_aware_tokens:
        if is_identifier(tok):
            seen.setdefault(tok)
    return list(seen)


def predict_variables(target: MethodDefinition, evidence_lps: LogPrintStatement) -> VariablePrediction:
    """Map each variable of the clone's logging call onto the target.

    Works on base identifiers (``req.getUrl()`` -> ``req``): exact occurrence
    in the target first, then the closest target identifier within normalized
    edit distance 0.34, else the clone's identifier flagged ``clone_only``.
    """
    idents = target_identifiers(target)
    present = set(idents)
    pred = VariablePrediction(target.method_id)
    for expr in evidence_lps.variables:
        base = base_identifier(expr)
        if base is not None and base in present:
            pred.variables.append(base)
            pred.provenance.append(MATCHED)
            continue
        if base is not None and idents:
            dist, name = min((normalized_edit_distance(base, ident), ident) for ident in idents)
            if dist <= EDIT_DISTANCE_LIMIT:
                pred.variables.append(name)
                pred.provenance.append(MATCHED)
                continue
        pred.variables.append(base or expr)
        pred.provenance.append(CLONE_ONLY)
    return pred
