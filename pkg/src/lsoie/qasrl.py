"""Reader for QA-SRL Bank 2.0 JSON-lines files.

Each line of a release file holds one sentence::

    {"sentenceId": ..., "sentenceTokens": [...],
     "verbEntries": {"5": {"verbIndex": 5, "verbInflectedForms": {...},
                           "questionLabels": {"Who provides something?": {...}}}}}

Spans are token offsets, inclusive start and exclusive end. See FORMATS.md.
"""
from __future__ import annotations

import gzip
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

SLOT_NAMES = ("wh", "aux", "subj", "verb", "obj", "prep", "obj2")
PARTITIONS = ("train", "dev", "test")

# sentence-id prefixes used by the release
DOMAIN_PREFIXES = {
    "Wiki1k": "wiki",
    "Wikinews": "wiki",
    "TQA": "sci",
}


class QASRLFormatError(ValueError):
    pass


class MalformedLine(QASRLFormatError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}" if reason else f"line {line_no}")


class SpanOutOfBounds(QASRLFormatError):
    def __init__(self, sentence_id: str, detail: str = ""):
        self.sentence_id = sentence_id
        super().__init__(f"{sentence_id}: {detail}" if detail else sentence_id)


class DuplicateSentenceId(QASRLFormatError):
    def __init__(self, sentence_id: str):
        self.sentence_id = sentence_id
        super().__init__(sentence_id)


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"empty or inverted span [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def contains(self, index: int) -> bool:
        return self.start <= index < self.end

    def __str__(self):
        return f"{self.start}-{self.end}"


@dataclass(frozen=True)
class AnswerJudgment:
    annotator_id: str
    is_valid: bool
    spans: frozenset = frozenset()

    def __post_init__(self):
        if not self.is_valid and self.spans:
            raise ValueError(f"invalid judgment by {self.annotator_id} carries spans")


@dataclass(frozen=True)
class QuestionLabel:
    question_text: str
    slots: tuple  # 7 strings in SLOT_NAMES order, "" for an empty slot
    tense_marker: str
    judgments: tuple = ()
    sources: tuple = ()
    # isPerfect/isProgressive/isNegated/isPassive, kept for round-tripping
    flags: tuple = ()

    def __post_init__(self):
        if len(self.slots) != len(SLOT_NAMES):
            raise ValueError(f"{self.question_text!r}: expected 7 slots, got {len(self.slots)}")
        if not self.slots[3]:
            raise ValueError(f"{self.question_text!r}: empty verb slot")
        ids = [j.annotator_id for j in self.judgments]
        if len(ids) != len(set(ids)):
            raise ValueError(f"{self.question_text!r}: repeated annotator judgment")

    @property
    def slot_dict(self) -> dict:
        return dict(zip(SLOT_NAMES, self.slots))

    @property
    def is_crowdsourced(self) -> bool | None:
        """True/False from the question sources, None when no marker is present."""
        if not self.sources:
            return None
        return any(not s.startswith("model") for s in self.sources)


@dataclass(frozen=True)
class VerbEntry:
    predicate_index: int
    questions: tuple = ()
    verb_forms: tuple = ()  # sorted (form name, string) pairs

    def __post_init__(self):
        texts = [q.question_text for q in self.questions]
        if len(texts) != len(set(texts)):
            raise ValueError(f"verb {self.predicate_index}: duplicate question strings")


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: str
    tokens: tuple
    verb_entries: tuple = ()

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"{self.sentence_id}: no tokens")

    @property
    def domain(self) -> str | None:
        return domain_of(self.sentence_id)

    def span_text(self, span: Span) -> str:
        return " ".join(self.tokens[span.start:span.end])

    def check_bounds(self):
        n = len(self.tokens)
        for entry in self.verb_entries:
            if not 0 <= entry.predicate_index < n:
                raise SpanOutOfBounds(self.sentence_id, f"verb index {entry.predicate_index} >= {n}")
            for q in entry.questions:
                for j in q.judgments:
                    for s in j.spans:
                        if s.start < 0 or s.end > n:
                            raise SpanOutOfBounds(self.sentence_id, f"span {s} exceeds {n} tokens")


def domain_of(sentence_id: str) -> str | None:
    prefix = sentence_id.split(":", 1)[0]
    return DOMAIN_PREFIXES.get(prefix)


def _slot(value) -> str:
    return "" if value in (None, "_") else str(value)


def record_from_json(obj: dict) -> SentenceRecord:
    """Build a record from one decoded release line. Raises KeyError/TypeError/ValueError on bad shape."""
    sid = obj["sentenceId"]
    tokens = tuple(obj["sentenceTokens"])
    entries = []
    for key, ventry in obj.get("verbEntries", {}).items():
        index = int(ventry.get("verbIndex", key))
        questions = []
        for qtext, qlabel in ventry.get("questionLabels", {}).items():
            slots = qlabel["questionSlots"]
            judgments = []
            for ajudg in qlabel.get("answerJudgments", []):
                valid = bool(ajudg["isValid"])
                spans = frozenset(Span(int(s), int(e)) for s, e in ajudg.get("spans") or [])
                judgments.append(AnswerJudgment(ajudg["sourceId"], valid, spans))
            flags = tuple((k, bool(qlabel[k])) for k in ("isPerfect", "isProgressive", "isNegated", "isPassive") if k in qlabel)
            questions.append(QuestionLabel(
                question_text=qlabel.get("questionString", qtext),
                slots=tuple(_slot(slots.get(name)) for name in SLOT_NAMES),
                tense_marker=qlabel.get("tense", ""),
                judgments=tuple(judgments),
                sources=tuple(qlabel.get("questionSources", ())),
                flags=flags,
            ))
        forms = tuple(sorted((ventry.get("verbInflectedForms") or {}).items()))
        entries.append(VerbEntry(index, tuple(questions), forms))
    entries.sort(key=lambda e: e.predicate_index)
    return SentenceRecord(sid, tokens, tuple(entries))


def record_to_json(record: SentenceRecord) -> dict:
    """Canonical form; parses back to an equal record."""
    verb_entries = {}
    for entry in record.verb_entries:
        labels = {}
        for q in entry.questions:
            label = {
                "questionString": q.question_text,
                "questionSources": list(q.sources),
                "answerJudgments": [
                    {"sourceId": j.annotator_id, "isValid": j.is_valid,
                     **({"spans": [[s.start, s.end] for s in sorted(j.spans)]} if j.is_valid else {})}
                    for j in q.judgments
                ],
                "questionSlots": {name: (v or "_") for name, v in zip(SLOT_NAMES, q.slots)},
                "tense": q.tense_marker,
            }
            label.update(dict(q.flags))
            labels[q.question_text] = label
        verb_entries[str(entry.predicate_index)] = {
            "verbIndex": entry.predicate_index,
            "verbInflectedForms": dict(entry.verb_forms),
            "questionLabels": labels,
        }
    return {"sentenceId": record.sentence_id, "sentenceTokens": list(record.tokens), "verbEntries": verb_entries}


def open_text(path):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def parse_line(line: str, line_no: int) -> SentenceRecord:
    try:
        obj = json.loads(line)
        record = record_from_json(obj)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedLine(line_no, str(e)) from e
    record.check_bounds()
    return record


def iter_corpus(path) -> Iterator[SentenceRecord]:
    seen = set()
    with open_text(path) as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            record = parse_line(line, line_no)
            if record.sentence_id in seen:
                raise DuplicateSentenceId(record.sentence_id)
            seen.add(record.sentence_id)
            yield record


def parse_corpus(path, partition: str | None = None) -> list[SentenceRecord]:
    """Read every record of a release file, in file order.

    `partition` is informational (train/dev/test); when omitted it is guessed
    from the file name by `partition_of`.
    """
    if partition is not None and partition not in PARTITIONS:
        raise ValueError(f"unknown partition {partition!r}")
    records = list(iter_corpus(path))
    logger.info("read %d sentences from %s (%s)", len(records), path, partition or partition_of(path))
    return records


def partition_of(path) -> str | None:
    name = os.path.basename(os.fspath(path)).lower()
    for p in PARTITIONS:
        if name.startswith(p):
            return p
    return None


def write_corpus(records: Iterable[SentenceRecord], path):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record_to_json(record), ensure_ascii=False) + "\n")


def filter_crowdsourced(records: Sequence[SentenceRecord], counter: Counter | None = None) -> list[SentenceRecord]:
    """Keep only crowd-written questions; drop records left with no questions.

    A question without source markers counts as crowd-written, tallied under
    ``counter["provenance_defaulted"]``.
    """
    counter = counter if counter is not None else Counter()
    out = []
    for record in records:
        entries = []
        for entry in record.verb_entries:
            kept = []
            for q in entry.questions:
                crowd = q.is_crowdsourced
                if crowd is None:
                    counter["provenance_defaulted"] += 1
                    crowd = True
                if crowd:
                    kept.append(q)
                else:
                    counter["model_questions_dropped"] += 1
            if kept:
                entries.append(VerbEntry(entry.predicate_index, tuple(kept), entry.verb_forms))
        if entries:
            out.append(SentenceRecord(record.sentence_id, record.tokens, tuple(entries)))
        else:
            counter["records_dropped"] += 1
    if counter["provenance_defaulted"]:
        logger.warning("%d questions had no source marker; treated as crowd-written", counter["provenance_defaulted"])
    return out
