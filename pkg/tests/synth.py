"""Seeded random QA-SRL records and emission matrices for property tests."""
from __future__ import annotations

import random

import numpy as np

from lsoie.qasrl import AnswerJudgment, QuestionLabel, SentenceRecord, Span, VerbEntry

WORDS = "the a cat dog saw ate river bank in on of quickly red blue house tree ran gave book to".split()
TEMPLATES = [
    (("who", "", "", "past", "something", "", ""), "past"),
    (("what", "did", "someone", "stem", "", "", ""), "past"),
    (("where", "did", "someone", "stem", "something", "", ""), "past"),
    (("when", "did", "someone", "stem", "something", "", ""), "past"),
    (("what", "was", "", "pastParticiple", "", "", ""), "past"),
    (("who", "", "", "presentSingular3rd", "something", "", ""), "present"),
    (("what", "does", "someone", "stem", "", "", ""), "present"),
    (("how", "does", "someone", "stem", "something", "", ""), "present"),
    (("to whom", "did", "someone", "stem", "something", "", ""), "past"),
]


def random_span(rng: random.Random, n: int, max_len: int = 4) -> Span:
    length = rng.randint(1, min(max_len, n))
    start = rng.randint(0, n - length)
    return Span(start, start + length)


def random_pool(rng: random.Random, n_tokens: int = 14, max_spans: int = 8) -> list[Span]:
    return [random_span(rng, n_tokens, 6) for _ in range(rng.randint(1, max_spans))]


def random_record(rng: random.Random, sid: str, p_invalid: float = 0.15, model_rate: float = 0.0) -> SentenceRecord:
    n = rng.randint(4, 18)
    tokens = tuple(rng.choice(WORDS) for _ in range(n))
    entries = []
    for v in sorted(rng.sample(range(n), rng.randint(1, min(3, n)))):
        questions = []
        for k, ti in enumerate(rng.sample(range(len(TEMPLATES)), rng.randint(1, 4))):
            slots, tense = TEMPLATES[ti]
            judgments = []
            for a in range(3):
                if rng.random() < p_invalid:
                    judgments.append(AnswerJudgment(f"w{a}", False))
                else:
                    spans = {random_span(rng, n, 4) for _ in range(rng.randint(1, 2))}
                    judgments.append(AnswerJudgment(f"w{a}", True, frozenset(spans)))
            src = "model-x" if rng.random() < model_rate else "turk-qasrl2.0-1"
            questions.append(QuestionLabel(f"q{ti}-{k}?", slots, tense, tuple(judgments), (src,)))
        entries.append(VerbEntry(v, tuple(questions), (("stem", tokens[v]),)))
    return SentenceRecord(sid, tokens, tuple(entries))


def random_corpus(seed: int, size: int, **kw) -> list[SentenceRecord]:
    rng = random.Random(seed)
    return [random_record(rng, f"Wiki1k:synth:{seed}:{i}", **kw) for i in range(size)]


def random_emissions(rng: np.random.Generator, n: int, k: int, sharpness: float = 2.0) -> np.ndarray:
    logits = rng.normal(scale=sharpness, size=(n, k))
    return logits - np.logaddexp.reduce(logits, axis=1, keepdims=True)
