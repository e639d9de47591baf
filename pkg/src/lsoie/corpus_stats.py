"""Dataset-level metrics: sentences, extractions, vocabulary and tag mass."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bio import TAG_CLASSES, encode_bio, tag_class
from .conversion import Extraction
from .qasrl import SentenceRecord


class EmptyCorpus(ValueError):
    pass


@dataclass
class CorpusCounts:
    """Additive partial counts; merge with +."""
    sentences: set = field(default_factory=set)
    extractions: int = 0
    vocab: set = field(default_factory=set)
    tags: Counter = field(default_factory=Counter)

    def __add__(self, other: "CorpusCounts") -> "CorpusCounts":
        return CorpusCounts(self.sentences | other.sentences, self.extractions + other.extractions,
                            self.vocab | other.vocab, self.tags + other.tags)


@dataclass
class CorpusMetrics:
    sentence_count: int
    extraction_count: int
    extractions_per_sentence: float
    vocab_size: int
    vocab_size_lower: int
    tag_distribution: dict
    tag_counts: dict

    def to_json(self) -> dict:
        return {
            "sentences": self.sentence_count,
            "extractions": self.extraction_count,
            "extractions_per_sentence": round(self.extractions_per_sentence, 4),
            "vocab": self.vocab_size,
            "vocab_lowercased": self.vocab_size_lower,
            "tag_distribution": self.tag_distribution,
            "tag_counts": self.tag_counts,
        }

    def table(self) -> str:
        lines = [
            f"{'sentences':<26}{self.sentence_count:>10,}",
            f"{'extractions':<26}{self.extraction_count:>10,}",
            f"{'extractions / sentence':<26}{self.extractions_per_sentence:>10.1f}",
            f"{'vocab (case-sensitive)':<26}{self.vocab_size:>10,}",
            f"{'vocab (lowercased)':<26}{self.vocab_size_lower:>10,}",
            "",
            "tag distribution",
        ]
        for c in TAG_CLASSES:
            lines.append(f"  {c:<4}{self.tag_distribution[c]:>9.2%}")
        return "\n".join(lines) + "\n"


def count_corpus(records: Iterable[SentenceRecord], extractions: Iterable[Extraction]) -> CorpusCounts:
    """Only sentences yielding at least one extraction are counted (and contribute vocabulary)."""
    by_id = {r.sentence_id: r for r in records}
    counts = CorpusCounts()
    for e in extractions:
        record = by_id[e.sentence_id]
        counts.extractions += 1
        if e.sentence_id not in counts.sentences:
            counts.sentences.add(e.sentence_id)
            counts.vocab.update(record.tokens)
        counts.tags.update(tag_class(t) for t in encode_bio(record, e).tags)
    return counts


def metrics_from_counts(counts: CorpusCounts) -> CorpusMetrics:
    if not counts.sentences:
        raise EmptyCorpus("no sentence yielded an extraction")
    total = sum(counts.tags.values())
    dist = {c: counts.tags.get(c, 0) / total for c in TAG_CLASSES}
    return CorpusMetrics(
        sentence_count=len(counts.sentences),
        extraction_count=counts.extractions,
        extractions_per_sentence=counts.extractions / len(counts.sentences),
        vocab_size=len(counts.vocab),
        vocab_size_lower=len({w.lower() for w in counts.vocab}),
        tag_distribution=dist,
        tag_counts={c: counts.tags.get(c, 0) for c in TAG_CLASSES},
    )


def compute_metrics(records: Sequence[SentenceRecord], extractions: Sequence[Extraction]) -> CorpusMetrics:
    return metrics_from_counts(count_corpus(records, extractions))
