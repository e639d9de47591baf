"""Head-containment matching of predicted against gold extractions, PR curves and AUC."""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .conversion import Extraction
from .qasrl import Span

logger = logging.getLogger(__name__)

ROOT = -1

# closed-class words skipped by the head fallback
STOP_WORDS = frozenset("""
a an the this that these those some any each every no
of in on at by for with from to into onto upon about above below over under after before
between through during without within among against along across around behind beyond
and or but nor so yet either neither both
is are was were be been being am do does did have has had having
will would shall should can could may might must 's '
""".split())


class NoGold(ValueError):
    pass


class DependencyHeads(dict):
    """sentence_id -> tuple of 0-based head indices, ROOT (-1) for the root."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.fallbacks = 0


def read_conllu(path) -> DependencyHeads:
    """Read HEAD columns from CoNLL-U; sentences are keyed by their `# sent_id`.

    Multiword-token lines (1-2) and empty nodes (1.1) are skipped.
    """
    heads = DependencyHeads()
    sid, rows = None, []

    def flush():
        if rows:
            if sid is None:
                raise ValueError(f"{path}: sentence without '# sent_id'")
            heads[sid] = tuple(h - 1 if h > 0 else ROOT for h in rows)

    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                flush()
                sid, rows = None, []
            elif line.startswith("#"):
                key, _, value = line[1:].partition("=")
                if key.strip() == "sent_id":
                    sid = value.strip()
            else:
                cols = line.split("\t")
                if "-" in cols[0] or "." in cols[0]:
                    continue
                rows.append(int(cols[6]))
    flush()
    for s, hs in heads.items():
        if any(not (h == ROOT or 0 <= h < len(hs)) for h in hs):
            raise ValueError(f"{path}: head index out of range in {s}")
    return heads


def argument_head(span: Span, heads: Sequence[int] | None, tokens: Sequence[str] | None = None) -> int:
    """Token of `span` whose head lies outside it (leftmost if several).

    Without a parse, falls back to the rightmost token not in STOP_WORDS.
    """
    if heads is not None:
        for t in range(span.start, span.end):
            h = heads[t]
            if h == ROOT or not span.contains(h):
                return t
    if tokens is not None:
        for t in range(span.end - 1, span.start - 1, -1):
            if tokens[t].lower() not in STOP_WORDS:
                return t
    return span.end - 1


@dataclass(frozen=True)
class MatchDecision:
    pred: Extraction
    gold: Extraction | None
    matched: bool
    arg_flags: tuple = ()
    predicate_equal: bool = False


def match(pred: Extraction, gold: Extraction, heads: Sequence[int] | None = None,
          tokens: Sequence[str] | None = None, lenient: bool = False) -> MatchDecision:
    """Same predicate index, and each gold argument's head inside the predicted
    argument of the same slot (any slot when `lenient`)."""
    same_pred = pred.sentence_id == gold.sentence_id and pred.predicate_index == gold.predicate_index
    flags = []
    for i, g in enumerate(gold.arguments):
        if g is None:
            continue
        h = argument_head(g, heads, tokens)
        if lenient:
            ok = any(a is not None and a.contains(h) for a in pred.arguments)
        else:
            ok = i < len(pred.arguments) and pred.arguments[i] is not None and pred.arguments[i].contains(h)
        flags.append(ok)
    return MatchDecision(pred, gold, same_pred and all(flags), tuple(flags), same_pred)


@dataclass
class MatchTable:
    """Per-prediction eligible gold indices, computed once and reused across thresholds."""
    confidences: list
    candidates: list  # candidates[p] = gold indices that prediction p matches
    n_gold: int
    order: list  # predictions, highest confidence first
    fallback_heads: int = 0


def build_match_table(predictions: Sequence[Extraction], gold: Sequence[Extraction],
                      heads: Mapping[str, Sequence[int]] | None = None,
                      tokens: Mapping[str, Sequence[str]] | None = None,
                      lenient: bool = False) -> MatchTable:
    heads = heads or {}
    tokens = tokens or {}
    by_group = defaultdict(list)
    for gi, g in enumerate(gold):
        by_group[(g.sentence_id, g.predicate_index)].append(gi)
    candidates = []
    fallbacks = 0
    for p in predictions:
        if p.confidence is None:
            raise ValueError(f"{p.sentence_id}: prediction without confidence")
        sent_heads = heads.get(p.sentence_id)
        cand = []
        for gi in by_group.get((p.sentence_id, p.predicate_index), ()):
            if sent_heads is None:
                fallbacks += 1
            if match(p, gold[gi], sent_heads, tokens.get(p.sentence_id), lenient).matched:
                cand.append(gi)
        candidates.append(cand)
    confidences = [p.confidence for p in predictions]
    # stable: equal confidences keep file order
    order = sorted(range(len(predictions)), key=lambda i: -confidences[i])
    return MatchTable(confidences, candidates, len(gold), order, fallbacks)


def _greedy_count(table: MatchTable, threshold: float) -> tuple[int, int]:
    used = set()
    kept = matched = 0
    for p in table.order:
        if table.confidences[p] < threshold:
            break
        kept += 1
        for gi in table.candidates[p]:
            if gi not in used:
                used.add(gi)
                matched += 1
                break
    return kept, matched


def _precision_recall(kept: int, matched: int, n_gold: int) -> tuple[float, float]:
    precision = matched / kept if kept else 1.0
    return precision, matched / n_gold


def score_at_threshold(predictions: Sequence[Extraction], gold: Sequence[Extraction],
                       heads: Mapping[str, Sequence[int]] | None = None, threshold: float = float("-inf"),
                       tokens: Mapping[str, Sequence[str]] | None = None,
                       lenient: bool = False) -> tuple[float, float]:
    """(precision, recall) keeping predictions with confidence >= threshold.

    Kept predictions claim gold extractions one-to-one, highest confidence
    first. An empty kept set has precision 1.
    """
    if not gold:
        raise NoGold("empty gold set")
    table = build_match_table(predictions, gold, heads, tokens, lenient)
    return _precision_recall(*_greedy_count(table, threshold), table.n_gold)


def f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


@dataclass
class PRCurve:
    points: list  # (threshold, precision, recall), ascending threshold
    max_f1: float
    auc: float
    f1_at_0: float  # F1 with every prediction kept
    counts: dict = field(default_factory=dict)


def pr_auc(points: Sequence[tuple[float, float, float]]) -> float:
    """Trapezoid area over recall; the curve is extended to recall 0 at the
    precision of the highest-threshold point."""
    pts = sorted(points, key=lambda p: -p[0])
    _, p_prev, r_prev = pts[0]
    area = r_prev * p_prev
    for _, p, r in pts[1:]:
        area += (r - r_prev) * (p + p_prev) / 2
        p_prev, r_prev = p, r
    return area


def pr_curve(predictions: Sequence[Extraction], gold: Sequence[Extraction],
             heads: Mapping[str, Sequence[int]] | None = None,
             tokens: Mapping[str, Sequence[str]] | None = None,
             lenient: bool = False) -> PRCurve:
    if not gold:
        raise NoGold("empty gold set")
    if not predictions:
        raise ValueError("no predictions")
    table = build_match_table(predictions, gold, heads, tokens, lenient)
    points = []
    for t in sorted(set(table.confidences)):
        p, r = _precision_recall(*_greedy_count(table, t), table.n_gold)
        points.append((t, p, r))
    kept, matched = _greedy_count(table, float("-inf"))
    counts = {"predictions": len(predictions), "gold": len(gold), "matched_all": matched,
              "head_fallbacks": table.fallback_heads}
    return PRCurve(
        points=points,
        max_f1=max(f1(p, r) for _, p, r in points),
        auc=pr_auc(points),
        f1_at_0=f1(*_precision_recall(kept, matched, table.n_gold)),
        counts=counts,
    )
