"""Readers and writers for extraction, tag and emission files (see FORMATS.md)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .bio import EmissionMatrix, TagSequence
from .conversion import Extraction
from .qasrl import SentenceRecord, Span, open_text


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionRow:
    extraction: Extraction
    tokens: tuple


def format_arguments(arguments) -> str:
    return " ".join(f"A{i}:{a}" for i, a in enumerate(arguments) if a is not None)


def parse_arguments(field: str) -> tuple:
    slots = {}
    for item in field.split():
        tag, _, rng = item.partition(":")
        if not tag.startswith("A") or "-" not in rng:
            raise FormatError(f"bad argument {item!r}")
        i = int(tag[1:])
        s, e = rng.split("-")
        if i in slots:
            raise FormatError(f"slot {tag} given twice")
        slots[i] = Span(int(s), int(e))
    return tuple(slots.get(i) for i in range(max(slots) + 1)) if slots else ()


def extraction_to_tsv(e: Extraction, tokens: Sequence[str]) -> str:
    cols = [e.sentence_id, " ".join(tokens), str(e.predicate_index), format_arguments(e.arguments)]
    if e.confidence is not None:
        cols.append(repr(float(e.confidence)))
    return "\t".join(cols)


def extraction_to_json(e: Extraction, tokens: Sequence[str], domain: str | None = None) -> dict:
    obj = {
        "sentence_id": e.sentence_id,
        "tokens": list(tokens),
        "predicate_index": e.predicate_index,
        "predicate": e.predicate_text,
        "arguments": [
            {"slot": f"A{i}", "start": a.start, "end": a.end, "text": " ".join(tokens[a.start:a.end])}
            for i, a in enumerate(e.arguments) if a is not None
        ],
    }
    if e.confidence is not None:
        obj["confidence"] = e.confidence
    if domain is not None:
        obj["domain"] = domain
    return obj


def write_extractions_tsv(rows: Iterable[ExtractionRow], path):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(extraction_to_tsv(row.extraction, row.tokens) + "\n")


def write_extractions_jsonl(rows: Iterable[ExtractionRow], path, domains: dict | None = None):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            dom = (domains or {}).get(row.extraction.sentence_id)
            f.write(json.dumps(extraction_to_json(row.extraction, row.tokens, dom), ensure_ascii=False) + "\n")


def _row_from_json(obj: dict) -> ExtractionRow:
    tokens = tuple(obj["tokens"])
    slots = {int(a["slot"][1:]): Span(a["start"], a["end"]) for a in obj["arguments"]}
    args = tuple(slots.get(i) for i in range(max(slots) + 1)) if slots else ()
    pi = int(obj["predicate_index"])
    e = Extraction(obj["sentence_id"], pi, obj.get("predicate", tokens[pi]), args, obj.get("confidence"))
    return ExtractionRow(e, tokens)


def _row_from_tsv(line: str) -> ExtractionRow:
    cols = line.rstrip("\n").split("\t")
    if len(cols) not in (4, 5):
        raise FormatError(f"expected 4 or 5 columns, got {len(cols)}")
    tokens = tuple(cols[1].split(" "))
    pi = int(cols[2])
    if not 0 <= pi < len(tokens):
        raise FormatError(f"predicate index {pi} out of range")
    args = parse_arguments(cols[3])
    if any(a is not None and a.end > len(tokens) for a in args):
        raise FormatError("argument span out of range")
    conf = float(cols[4]) if len(cols) == 5 else None
    return ExtractionRow(Extraction(cols[0], pi, tokens[pi], args, conf), tokens)


def read_extractions(path) -> list[ExtractionRow]:
    """Read a .tsv or .jsonl extraction file (format picked by extension)."""
    is_json = str(path).endswith((".jsonl", ".jsonl.gz", ".json"))
    rows = []
    with open_text(path) as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append(_row_from_json(json.loads(line)) if is_json else _row_from_tsv(line))
            except (FormatError, KeyError, TypeError, ValueError) as e:
                raise FormatError(f"{path}:{line_no}: {e}") from e
    return rows


def write_tags(sequences: Iterable[tuple[TagSequence, Sequence[str]]], path):
    with open(path, "w", encoding="utf-8") as f:
        for seq, tokens in sequences:
            f.write(f"# sentence_id = {seq.sentence_id}\n# predicate_index = {seq.predicate_index}\n")
            for tok, tag in zip(tokens, seq.tags):
                f.write(f"{tok}\t{tag}\n")
            f.write("\n")


def read_tags(path) -> Iterator[tuple[TagSequence, tuple]]:
    meta, toks, tags = {}, [], []

    def flush():
        if "sentence_id" not in meta or "predicate_index" not in meta:
            raise FormatError(f"{path}: tag block without sentence_id/predicate_index header")
        return TagSequence(meta["sentence_id"], int(meta["predicate_index"]), tuple(tags)), tuple(toks)

    with open_text(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                if toks:
                    yield flush()
                meta, toks, tags = {}, [], []
            elif line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = value.strip()
            else:
                tok, tag = line.split("\t")
                toks.append(tok)
                tags.append(tag)
    if toks:
        yield flush()


@dataclass(frozen=True)
class EmissionRecord:
    sentence_id: str
    predicate_index: int
    tokens: tuple
    emissions: EmissionMatrix


def read_emissions(path) -> list[EmissionRecord]:
    """JSON-lines: sentence_id, predicate_index, tokens, tags (vocabulary), logprobs (rows)."""
    out = []
    with open_text(path) as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                em = EmissionMatrix(obj["logprobs"], tuple(obj["tags"]))
                tokens = tuple(obj.get("tokens") or [f"tok{i}" for i in range(len(em))])
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise FormatError(f"{path}:{line_no}: {e}") from e
            if len(tokens) != len(em):
                raise FormatError(f"{path}:{line_no}: {len(tokens)} tokens vs {len(em)} emission rows")
            out.append(EmissionRecord(obj["sentence_id"], int(obj["predicate_index"]), tokens, em))
    return out


def write_emissions(records: Iterable[EmissionRecord], path):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps({
                "sentence_id": r.sentence_id,
                "predicate_index": r.predicate_index,
                "tokens": list(r.tokens),
                "tags": list(r.emissions.vocab),
                "logprobs": r.emissions.logprobs.tolist(),
            }) + "\n")


def record_from_row(row: ExtractionRow) -> SentenceRecord:
    return SentenceRecord(row.extraction.sentence_id, row.tokens)
