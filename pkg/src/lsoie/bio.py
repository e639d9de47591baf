"""BIO encoding of extractions, constrained Viterbi decoding and confidences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conversion import Extraction
from .qasrl import SentenceRecord, Span

MAX_ARGS = 6
ARG_CLASSES = tuple(f"A{i}" for i in range(MAX_ARGS))
TAG_CLASSES = ("P",) + ARG_CLASSES + ("O",)

# Predicates are single verb tokens, so I-P never occurs in converted data
# and the default vocabulary leaves it out. External vocabularies may list it.
DEFAULT_TAGS = ("O", "B-P") + tuple(f"B-{c}" for c in ARG_CLASSES) + tuple(f"I-{c}" for c in ARG_CLASSES)
KNOWN_TAGS = frozenset(DEFAULT_TAGS + ("I-P",))


class BIOError(ValueError):
    pass


class TooManyArguments(BIOError):
    pass


class InvalidBIO(BIOError):
    pass


class NoValidPath(BIOError):
    pass


class NoTaggedTokens(BIOError):
    pass


class VocabularyMismatch(BIOError):
    pass


def tag_class(tag: str) -> str:
    return "O" if tag == "O" else tag[2:]


def is_valid_bio(tags) -> bool:
    prev = "O"
    for tag in tags:
        if tag.startswith("I-") and prev not in (f"B-{tag[2:]}", tag):
            return False
        prev = tag
    return True


@dataclass(frozen=True)
class TagSequence:
    sentence_id: str
    predicate_index: int
    tags: tuple

    def __len__(self):
        return len(self.tags)

    @property
    def is_valid(self) -> bool:
        return is_valid_bio(self.tags) and sum(t == "B-P" for t in self.tags) == 1


@dataclass(frozen=True)
class EmissionMatrix:
    logprobs: np.ndarray  # (tokens, tags)
    vocab: tuple

    def __post_init__(self):
        lp = np.asarray(self.logprobs, dtype=float)
        object.__setattr__(self, "logprobs", lp)
        if lp.ndim != 2 or lp.shape[1] != len(self.vocab):
            raise VocabularyMismatch(f"emission shape {lp.shape} vs {len(self.vocab)} tags")
        unknown = set(self.vocab) - KNOWN_TAGS
        if unknown:
            raise VocabularyMismatch(f"unknown tags {sorted(unknown)}")
        if len(set(self.vocab)) != len(self.vocab):
            raise VocabularyMismatch("repeated tag in vocabulary")

    def __len__(self):
        return self.logprobs.shape[0]

    def check_normalized(self, tol: float = 1e-6):
        norms = np.logaddexp.reduce(self.logprobs, axis=1)
        bad = np.flatnonzero(np.abs(norms) > tol)
        if bad.size:
            raise ValueError(f"rows {bad.tolist()} do not sum to 1 (log-sum-exp {norms[bad].tolist()})")

    def score(self, tags) -> float:
        """Sum of the chosen emission log-probabilities, left to right."""
        col = {t: i for i, t in enumerate(self.vocab)}
        total = 0.0
        for t, tag in enumerate(tags):
            total += float(self.logprobs[t, col[tag]])
        return total


@dataclass(frozen=True)
class TransitionConstraints:
    vocab: tuple
    allowed: np.ndarray  # allowed[i, j]: tag i may be followed by tag j
    start: np.ndarray
    end: np.ndarray

    @classmethod
    def bio(cls, vocab=DEFAULT_TAGS) -> "TransitionConstraints":
        vocab = tuple(vocab)
        k = len(vocab)
        allowed = np.ones((k, k), dtype=bool)
        start = np.ones(k, dtype=bool)
        for j, tag in enumerate(vocab):
            if tag.startswith("I-"):
                cls_ = tag[2:]
                start[j] = False
                for i, prev in enumerate(vocab):
                    allowed[i, j] = prev in (f"B-{cls_}", tag)
        return cls(vocab, allowed, start, np.ones(k, dtype=bool))


def encode_bio(record: SentenceRecord, extraction: Extraction) -> TagSequence:
    if len(extraction.arguments) > MAX_ARGS:
        raise TooManyArguments(f"{extraction.sentence_id}: {len(extraction.arguments)} argument slots")
    tags = ["O"] * len(record.tokens)
    tags[extraction.predicate_index] = "B-P"
    for i, span in enumerate(extraction.arguments):
        if span is None:
            continue
        if span.end > len(tags):
            raise ValueError(f"{extraction.sentence_id}: span {span} out of bounds")
        tags[span.start] = f"B-A{i}"
        for t in range(span.start + 1, span.end):
            tags[t] = f"I-A{i}"
    return TagSequence(extraction.sentence_id, extraction.predicate_index, tuple(tags))


def tag_runs(tags) -> list[tuple[str, Span]]:
    """(class, span) for each B/I run; raises InvalidBIO on an orphan I tag."""
    runs = []
    prev = "O"
    for t, tag in enumerate(tags):
        if tag.startswith("B-"):
            runs.append([tag[2:], t, t + 1])
        elif tag.startswith("I-"):
            if prev not in (f"B-{tag[2:]}", tag):
                raise InvalidBIO(f"{tag} at {t} follows {prev}")
            runs[-1][2] = t + 1
        elif tag != "O":
            raise InvalidBIO(f"unknown tag {tag!r} at {t}")
        prev = tag
    return [(c, Span(s, e)) for c, s, e in runs]


def tags_to_extraction(tags: TagSequence, record: SentenceRecord) -> Extraction:
    if len(tags.tags) != len(record.tokens):
        raise InvalidBIO(f"{tags.sentence_id}: {len(tags.tags)} tags for {len(record.tokens)} tokens")
    slots = {}
    predicate = None
    for cls_, span in tag_runs(tags.tags):
        if cls_ == "P":
            if predicate is not None:
                raise InvalidBIO(f"{tags.sentence_id}: more than one predicate segment")
            predicate = span
            continue
        i = int(cls_[1:])
        if i in slots:
            raise InvalidBIO(f"{tags.sentence_id}: argument {cls_} split into several segments")
        slots[i] = span
    if predicate is None:
        raise InvalidBIO(f"{tags.sentence_id}: no predicate segment")
    if not predicate.contains(tags.predicate_index):
        raise InvalidBIO(f"{tags.sentence_id}: predicate segment {predicate} misses index {tags.predicate_index}")
    args = tuple(slots.get(i) for i in range(max(slots) + 1)) if slots else ()
    return Extraction(tags.sentence_id, tags.predicate_index, record.span_text(predicate), args)


def _expand_single_predicate(constraints: TransitionConstraints):
    # state (tag, seen B-P): index 2 * tag + seen
    vocab = constraints.vocab
    k = len(vocab)
    is_bp = np.array([t == "B-P" for t in vocab])
    allowed = np.zeros((2 * k, 2 * k), dtype=bool)
    for i in range(k):
        for seen in (0, 1):
            for j in range(k):
                nxt = seen + int(is_bp[j])
                if nxt <= 1 and constraints.allowed[i, j]:
                    allowed[2 * i + seen, 2 * j + nxt] = True
    start = np.zeros(2 * k, dtype=bool)
    end = np.zeros(2 * k, dtype=bool)
    for j in range(k):
        start[2 * j + int(is_bp[j])] = constraints.start[j]
        end[2 * j + 1] = constraints.end[j]
    return allowed, start, end


def _viterbi(scores: np.ndarray, allowed: np.ndarray, start: np.ndarray, end: np.ndarray) -> list[int]:
    """Best feasible path; among equal scores, the lexicographically smallest.

    Runs backwards (best score-to-go per state) then picks states left to
    right, so the first maximum at each step yields the smallest path.
    """
    n, k = scores.shape
    feasible = np.zeros((n, k), dtype=bool)
    togo = np.full((n, k), -np.inf)
    feasible[-1] = end
    togo[-1] = np.where(end, scores[-1], -np.inf)
    for t in range(n - 2, -1, -1):
        ok = allowed & feasible[t + 1][None, :]
        feasible[t] = ok.any(axis=1)
        nxt = np.where(ok, togo[t + 1][None, :], -np.inf).max(axis=1)
        togo[t] = np.where(feasible[t], scores[t] + nxt, -np.inf)

    cand = np.flatnonzero(start & feasible[0])
    if cand.size == 0:
        raise NoValidPath("constraints admit no tag sequence")
    state = int(cand[np.argmax(togo[0, cand])])
    path = [state]
    for t in range(1, n):
        cand = np.flatnonzero(allowed[state] & feasible[t])
        state = int(cand[np.argmax(togo[t, cand])])
        path.append(state)
    return path


def decode_viterbi(emissions: EmissionMatrix, constraints: TransitionConstraints | None = None,
                   sentence_id: str = "", predicate_index: int = -1,
                   single_predicate: bool = False) -> tuple[TagSequence, float]:
    """Most likely tagging allowed by `constraints`, with its log-probability.

    Transitions score 0 when allowed and -inf otherwise, so the path score is
    the sum of its emissions. With `single_predicate`, paths must also contain
    exactly one B-P.
    """
    constraints = constraints or TransitionConstraints.bio(emissions.vocab)
    if tuple(constraints.vocab) != tuple(emissions.vocab):
        raise VocabularyMismatch("constraint and emission vocabularies differ")
    if len(emissions) == 0:
        raise NoValidPath("empty sequence")
    lp = emissions.logprobs
    if single_predicate:
        allowed, start, end = _expand_single_predicate(constraints)
        path = [s // 2 for s in _viterbi(np.repeat(lp, 2, axis=1), allowed, start, end)]
    else:
        path = _viterbi(lp, constraints.allowed, constraints.start, constraints.end)
    tags = tuple(emissions.vocab[i] for i in path)
    return TagSequence(sentence_id, predicate_index, tags), emissions.score(tags)


def confidence_mean_logprob(tags: TagSequence, emissions: EmissionMatrix, include_o: bool = False) -> float:
    """Mean log-probability of the assigned tags over the extraction's tokens (non-O)."""
    if len(tags) != len(emissions):
        raise ValueError(f"{len(tags)} tags vs {len(emissions)} emission rows")
    col = {t: i for i, t in enumerate(emissions.vocab)}
    picked = [float(emissions.logprobs[t, col[tag]]) for t, tag in enumerate(tags.tags) if include_o or tag != "O"]
    if not picked:
        raise NoTaggedTokens(f"{tags.sentence_id}: all tokens tagged O")
    return sum(picked) / len(picked)


def confidence_sequence_logprob(path_logprob: float) -> float:
    """Whole-sequence log-probability, the confidence used for CRF-style taggers."""
    return float(path_logprob)
