"""QA-SRL to ordered n-ary OIE tuples.

Two passes: `collect_position_stats` tallies, per abstract question, the
rank of its answer among the predicate's answers in sentence order; then
`convert_corpus` orders each predicate's questions into argument slots with
those statistics and expands the Cartesian product of their answer sets.
"""
from __future__ import annotations

import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .qasrl import AnswerJudgment, QuestionLabel, SentenceRecord, Span, VerbEntry

logger = logging.getLogger(__name__)

DEFAULT_PRODUCT_CAP = 64
MIN_JUDGMENTS = 3


class ConversionError(ValueError):
    pass


class EmptyAnswerPool(ConversionError):
    pass


class ProductOverflow(ConversionError):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"{size} extractions exceeds cap {cap}")


@dataclass(frozen=True)
class AbstractQuestion:
    """Question template without the verb lemma; the verb slot is already a form name."""
    slots: tuple
    tense: str

    @classmethod
    def of(cls, question: QuestionLabel) -> "AbstractQuestion":
        return cls(tuple(question.slots), question.tense_marker)

    def key(self) -> str:
        return " ".join(s or "_" for s in self.slots) + f" [{self.tense}]"


@dataclass(frozen=True)
class Extraction:
    sentence_id: str
    predicate_index: int
    predicate_text: str
    # slot i holds argument a_i; None marks a slot absent in a decoded tagging
    arguments: tuple = ()
    confidence: float | None = None

    def __post_init__(self):
        args = [a for a in self.arguments if a is not None]
        for a, b in itertools.combinations(args, 2):
            if a.overlaps(b):
                raise ValueError(f"{self.sentence_id}: overlapping arguments {a} and {b}")
        for a in args:
            if a.contains(self.predicate_index):
                raise ValueError(f"{self.sentence_id}: argument {a} contains predicate {self.predicate_index}")

    @property
    def has_a0(self) -> bool:
        return bool(self.arguments) and self.arguments[0] is not None

    def with_confidence(self, confidence: float | None) -> "Extraction":
        return Extraction(self.sentence_id, self.predicate_index, self.predicate_text, self.arguments, confidence)

    def key(self) -> tuple:
        return (self.sentence_id, self.predicate_index, self.arguments)


@dataclass
class PositionStats:
    counts: dict = field(default_factory=lambda: defaultdict(Counter))

    def add(self, question: AbstractQuestion, position: int, n: int = 1):
        self.counts[question][position] += n

    def __add__(self, other: "PositionStats") -> "PositionStats":
        merged = PositionStats()
        for src in (self, other):
            for q, c in src.counts.items():
                merged.counts[q].update(c)
        return merged

    def __contains__(self, question: AbstractQuestion) -> bool:
        return sum(self.counts.get(question, {}).values()) > 0

    def __len__(self):
        return sum(1 for q in self.counts if q in self)

    def prob(self, question: AbstractQuestion, position: int) -> float:
        c = self.counts.get(question)
        if not c:
            return 0.0
        total = sum(c.values())
        return c.get(position, 0) / total if total else 0.0

    def distribution(self, question: AbstractQuestion) -> dict:
        c = self.counts.get(question, {})
        total = sum(c.values())
        return {x: n / total for x, n in sorted(c.items())} if total else {}

    def to_json(self) -> list:
        return [
            {"slots": list(q.slots), "tense": q.tense, "counts": {str(x): n for x, n in sorted(c.items())}}
            for q, c in sorted(self.counts.items(), key=lambda kv: kv[0].key())
        ]

    @classmethod
    def from_json(cls, rows: list) -> "PositionStats":
        stats = cls()
        for row in rows:
            q = AbstractQuestion(tuple(row["slots"]), row["tense"])
            for x, n in row["counts"].items():
                stats.add(q, int(x), n)
        return stats


@dataclass(frozen=True)
class ConsolidatedQuestion:
    label: QuestionLabel
    answers: tuple  # sorted by start

    @property
    def abstract(self) -> AbstractQuestion:
        return AbstractQuestion.of(self.label)

    @property
    def first_start(self) -> int:
        return self.answers[0].start


@dataclass
class ConversionReport:
    counters: Counter = field(default_factory=Counter)

    def __getitem__(self, key):
        return self.counters[key]

    def __iadd__(self, other: "ConversionReport"):
        self.counters.update(other.counters)
        return self

    def to_json(self) -> dict:
        return dict(sorted(self.counters.items()))


def filter_questions(entry: VerbEntry) -> list[QuestionLabel]:
    """Questions judged valid by every annotator (and by at least three)."""
    return [
        q for q in entry.questions
        if len(q.judgments) >= MIN_JUDGMENTS and all(j.is_valid for j in q.judgments)
    ]


def consolidate_answers(judgments: Sequence[AnswerJudgment]) -> list[Span]:
    """Greedy longest-first selection of non-overlapping spans from all annotators.

    Equal lengths: the earlier start is drawn first.
    """
    pool = set()
    for j in judgments:
        pool.update(j.spans)
    if not pool:
        raise EmptyAnswerPool("valid question has no answer spans")
    chosen = []
    for span in sorted(pool, key=lambda s: (-len(s), s.start)):
        if not any(span.overlaps(c) for c in chosen):
            chosen.append(span)
    return sorted(chosen)


def consolidate_entry(entry: VerbEntry, report: ConversionReport | None = None) -> list[ConsolidatedQuestion]:
    report = report if report is not None else ConversionReport()
    out = []
    for q in entry.questions:
        if len(q.judgments) < MIN_JUDGMENTS:
            report.counters["questions_too_few_judgments"] += 1
    for q in filter_questions(entry):
        try:
            spans = consolidate_answers(q.judgments)
        except EmptyAnswerPool:
            report.counters["empty_answer_pool"] += 1
            continue
        kept = [s for s in spans if not s.contains(entry.predicate_index)]
        if len(kept) < len(spans):
            report.counters["answers_containing_predicate"] += len(spans) - len(kept)
        if kept:
            out.append(ConsolidatedQuestion(q, tuple(kept)))
    report.counters["questions_unanimous"] += len(out)
    return out


def natural_order(questions: Sequence[ConsolidatedQuestion]) -> list[ConsolidatedQuestion]:
    return sorted(questions, key=lambda cq: (cq.first_start, cq.answers[0].end, cq.label.question_text))


def collect_position_stats(corpus: Iterable[SentenceRecord]) -> PositionStats:
    stats = PositionStats()
    for record in corpus:
        for entry in record.verb_entries:
            for x, cq in enumerate(natural_order(consolidate_entry(entry))):
                stats.add(cq.abstract, x)
    return stats


def order_questions(questions: Sequence[ConsolidatedQuestion], stats: PositionStats,
                    report: ConversionReport | None = None) -> list[ConsolidatedQuestion]:
    """Fill slots 0, 1, ... with the unassigned question most likely to occupy that slot.

    Ties go to the earlier answer in the sentence. A question whose abstract
    form has no statistics is scored 1 at its own sentence-order rank and 0
    elsewhere.
    """
    natural = natural_order(questions)
    rank = {id(cq): x for x, cq in enumerate(natural)}
    unseen = {id(cq) for cq in natural if cq.abstract not in stats}
    if report is not None and unseen:
        report.counters["unseen_abstract_questions"] += len(unseen)

    def score(cq, x):
        if id(cq) in unseen:
            return 1.0 if rank[id(cq)] == x else 0.0
        return stats.prob(cq.abstract, x)

    remaining = list(natural)
    ordered = []
    for x in range(len(natural)):
        # natural order means max() keeps the earliest answer among equal scores
        best = max(remaining, key=lambda cq: score(cq, x))
        ordered.append(best)
        remaining.remove(best)
    return ordered


def generate_extractions(record: SentenceRecord, entry: VerbEntry, stats: PositionStats,
                         cap: int = DEFAULT_PRODUCT_CAP,
                         report: ConversionReport | None = None) -> list[Extraction]:
    report = report if report is not None else ConversionReport()
    questions = consolidate_entry(entry, report)
    if not questions:
        report.counters["entries_without_questions"] += 1
        return []
    ordered = order_questions(questions, stats, report)
    size = 1
    for cq in ordered:
        size *= len(cq.answers)
    if size > cap:
        raise ProductOverflow(size, cap)
    pred_text = record.tokens[entry.predicate_index]
    out = []
    for combo in itertools.product(*(cq.answers for cq in ordered)):
        args = []
        for span in combo:
            if any(span.overlaps(a) for a in args):
                report.counters["cross_question_overlap_dropped"] += 1
                continue
            args.append(span)
        out.append(Extraction(record.sentence_id, entry.predicate_index, pred_text, tuple(args)))
    return out


def convert_record(record: SentenceRecord, stats: PositionStats, cap: int = DEFAULT_PRODUCT_CAP,
                   report: ConversionReport | None = None) -> list[Extraction]:
    report = report if report is not None else ConversionReport()
    out = []
    for entry in record.verb_entries:
        try:
            out.extend(generate_extractions(record, entry, stats, cap, report))
        except ProductOverflow as e:
            report.counters["product_overflow_entries"] += 1
            logger.warning("%s verb %d skipped: %s", record.sentence_id, entry.predicate_index, e)
    return out


def convert_corpus(records: Iterable[SentenceRecord], stats: PositionStats, cap: int = DEFAULT_PRODUCT_CAP,
                   report: ConversionReport | None = None) -> list[Extraction]:
    report = report if report is not None else ConversionReport()
    out = []
    for record in records:
        report.counters["sentences_in"] += 1
        extractions = convert_record(record, stats, cap, report)
        if extractions:
            report.counters["sentences_out"] += 1
        out.extend(extractions)
    count_duplicates(out, report)
    report.counters["extractions"] += len(out)
    return out


def count_duplicates(extractions: Sequence[Extraction], report: ConversionReport):
    seen = Counter(e.key() for e in extractions)
    report.counters["duplicate_extractions"] += sum(n - 1 for n in seen.values())
