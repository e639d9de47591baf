"""Command line: convert / stats / decode / eval.

Exit codes: 0 success, 1 fatal input error, 2 configuration error.
Relative input paths resolve under $LSOIE_INPUT_ROOT and output
directories under $LSOIE_OUTPUT_ROOT when those are set.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from collections import Counter, OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bio import (BIOError, TransitionConstraints, confidence_mean_logprob,
                  confidence_sequence_logprob, decode_viterbi, encode_bio, tags_to_extraction)
from .conversion import (DEFAULT_PRODUCT_CAP, ConversionReport, PositionStats, collect_position_stats,
                         convert_corpus)
from .corpus_stats import CorpusCounts, EmptyCorpus, count_corpus, metrics_from_counts
from .evaluation import NoGold, pr_curve, read_conllu
from .formats import (ExtractionRow, FormatError, read_emissions, read_extractions, record_from_row,
                      write_extractions_jsonl, write_extractions_tsv, write_tags)
from .qasrl import QASRLFormatError, SentenceRecord, filter_crowdsourced, parse_corpus, partition_of

logger = logging.getLogger("lsoie")

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list
    output_dir: str
    partition: str | None = None
    domain: str = "all"
    stats_mode: str = "per-partition"
    product_cap: int = DEFAULT_PRODUCT_CAP
    all_sources: bool = False
    match_mode: str = "positional"
    confidence: str = "mean"
    include_o: bool = False
    single_predicate: bool = True
    heads: str | None = None
    gold: str | None = None
    tag_figure: bool = False
    jobs: int = 1
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def write(self, out: Path):
        payload = {"toolkit": "lsoie", "version": __version__, **asdict(self)}
        (out / "config.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _resolve_input(p: str) -> str:
    root = os.environ.get("LSOIE_INPUT_ROOT")
    path = Path(p)
    if root and not path.is_absolute():
        path = Path(root) / path
    if not path.exists():
        raise ConfigError(f"input not found: {path}")
    return str(path)


def _resolve_output(p: str) -> Path:
    root = os.environ.get("LSOIE_OUTPUT_ROOT")
    path = Path(p)
    if root and not path.is_absolute():
        path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _chunks(seq, n):
    size = max(1, -(-len(seq) // n))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _convert_chunk(args):
    records, stats, cap = args
    report = ConversionReport()
    return convert_corpus(records, stats, cap, report), report


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --- convert

def cmd_convert(cfg: RunConfig) -> int:
    out = _resolve_output(cfg.output_dir)
    cfg.write(out)
    groups = OrderedDict()
    for path in cfg.inputs:
        name = cfg.partition or partition_of(path) or Path(path).name.split(".")[0]
        groups.setdefault(name, []).append(path)

    corpora = OrderedDict()
    ingest = Counter()
    for name, paths in groups.items():
        records = []
        for path in paths:
            records.extend(parse_corpus(path))
        ingest[f"{name}.records_read"] = len(records)
        if cfg.domain != "all":
            records = [r for r in records if r.domain == cfg.domain]
        if not cfg.all_sources:
            c = Counter()
            records = filter_crowdsourced(records, c)
            ingest.update({f"{name}.{k}": v for k, v in c.items()})
        corpora[name] = records

    def stats_for(records):
        parts = _map(collect_position_stats, _chunks(records, cfg.jobs), cfg.jobs)
        total = PositionStats()
        for p in parts:
            total = total + p
        return total

    global_stats = None
    if cfg.stats_mode == "global":
        global_stats = stats_for([r for rs in corpora.values() for r in rs])

    reports = OrderedDict()
    for name, records in corpora.items():
        stats = global_stats if global_stats is not None else stats_for(records)
        report = ConversionReport()
        extractions = []
        for part, rep in _map(_convert_chunk, [(c, stats, cfg.product_cap) for c in _chunks(records, cfg.jobs)], cfg.jobs):
            extractions.extend(part)
            report += rep
        report.counters["records"] = len(records)
        by_id = {r.sentence_id: r for r in records}
        rows = [ExtractionRow(e, by_id[e.sentence_id].tokens) for e in extractions]
        domains = {r.sentence_id: r.domain for r in records}
        write_extractions_tsv(rows, out / f"{name}.extractions.tsv")
        write_extractions_jsonl(rows, out / f"{name}.extractions.jsonl", domains)
        write_tags(((encode_bio(by_id[e.sentence_id], e), by_id[e.sentence_id].tokens) for e in extractions),
                   out / f"{name}.tags.conll")
        (out / f"{name}.position_stats.json").write_text(json.dumps(stats.to_json(), indent=1) + "\n")
        reports[name] = report.to_json()
        logger.info("%s: %d sentences -> %d extractions", name, len(records), len(extractions))

    (out / "conversion_report.json").write_text(
        json.dumps({"ingest": dict(sorted(ingest.items())), "partitions": reports,
                    "domain_mapping": "sentence-id prefix: Wiki1k/Wikinews -> wiki, TQA -> sci"},
                   indent=2) + "\n")
    return EXIT_OK


# --- stats

def cmd_stats(cfg: RunConfig) -> int:
    out = _resolve_output(cfg.output_dir)
    cfg.write(out)
    counts = CorpusCounts()
    for path in cfg.inputs:
        rows = read_extractions(path)
        records = {r.extraction.sentence_id: record_from_row(r) for r in rows}
        counts = counts + count_corpus(records.values(), [r.extraction for r in rows])
    metrics = metrics_from_counts(counts)
    (out / "metrics.json").write_text(json.dumps(metrics.to_json(), indent=2) + "\n")
    table = metrics.table()
    (out / "metrics.txt").write_text(table)
    sys.stdout.write(table)
    if cfg.tag_figure:
        with open(out / "tag_distribution.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["tag", "count", "proportion"])
            for tag, p in metrics.tag_distribution.items():
                w.writerow([tag, metrics.tag_counts[tag], f"{p:.6f}"])
        from .plotting import plot_tag_distribution
        plot_tag_distribution(metrics.tag_distribution, out / "tag_distribution.png")
    return EXIT_OK


# --- decode

def cmd_decode(cfg: RunConfig) -> int:
    out = _resolve_output(cfg.output_dir)
    cfg.write(out)
    report = Counter()
    decoded, predictions, confidences = [], [], []
    for path in cfg.inputs:
        for rec in read_emissions(path):
            rec.emissions.check_normalized()
            constraints = TransitionConstraints.bio(rec.emissions.vocab)
            tags, logprob = decode_viterbi(rec.emissions, constraints, rec.sentence_id, rec.predicate_index,
                                           single_predicate=cfg.single_predicate)
            decoded.append((tags, rec.tokens))
            report["sequences"] += 1
            try:
                mean = confidence_mean_logprob(tags, rec.emissions, include_o=cfg.include_o)
            except BIOError:
                mean = None
            seq = confidence_sequence_logprob(logprob)
            confidences.append({"sentence_id": rec.sentence_id, "predicate_index": rec.predicate_index,
                                "mean_logprob": mean, "sequence_logprob": seq})
            try:
                ext = tags_to_extraction(tags, SentenceRecord(rec.sentence_id, rec.tokens))
            except BIOError as e:
                report["rejected_invalid"] += 1
                logger.debug("%s/%d rejected: %s", rec.sentence_id, rec.predicate_index, e)
                continue
            if not ext.has_a0:
                report["rejected_no_a0"] += 1
                continue
            conf = mean if cfg.confidence == "mean" else seq
            predictions.append(ExtractionRow(ext.with_confidence(conf), rec.tokens))
    write_tags(decoded, out / "decoded.tags.conll")
    write_extractions_tsv(predictions, out / "predictions.tsv")
    with open(out / "confidences.jsonl", "w") as f:
        for c in confidences:
            f.write(json.dumps(c) + "\n")
    report["predictions"] = len(predictions)
    (out / "decode_report.json").write_text(json.dumps(dict(sorted(report.items())), indent=2) + "\n")
    return EXIT_OK


# --- eval

def cmd_eval(cfg: RunConfig) -> int:
    out = _resolve_output(cfg.output_dir)
    cfg.write(out)
    gold_rows = read_extractions(cfg.gold)
    if not gold_rows:
        raise NoGold(f"{cfg.gold}: no gold extractions")
    gold = [r.extraction for r in gold_rows]
    tokens = {r.extraction.sentence_id: r.tokens for r in gold_rows}
    heads = read_conllu(cfg.heads) if cfg.heads else None
    curves = OrderedDict()
    for path in cfg.inputs:
        name = Path(path).name.split(".")[0]
        preds = [r.extraction for r in read_extractions(path)]
        curve = pr_curve(preds, gold, heads, tokens, lenient=cfg.match_mode == "lenient")
        curves[name] = curve
        with open(out / f"{name}.pr_curve.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["threshold", "precision", "recall"])
            for t, p, r in curve.points:
                w.writerow([repr(t), repr(p), repr(r)])
        summary = {"max_f1": curve.max_f1, "f1_at_0": curve.f1_at_0, "auc": curve.auc,
                   "points": len(curve.points), "match_mode": cfg.match_mode, **curve.counts}
        (out / f"{name}.summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        print(f"{name}\tmax_f1={curve.max_f1:.4f}\tf1@0={curve.f1_at_0:.4f}\tauc={curve.auc:.4f}")
    from .plotting import plot_pr_curves
    plot_pr_curves(curves, out / "pr_curves.png")
    return EXIT_OK


COMMANDS = {"convert": cmd_convert, "stats": cmd_stats, "decode": cmd_decode, "eval": cmd_eval}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsoie", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lsoie {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--out", required=True, help="output directory")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convert", help="QA-SRL 2.0 jsonl -> ordered OIE extractions")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--partition", choices=["train", "dev", "test"])
    p.add_argument("--domain", choices=["wiki", "sci", "all"], default="all")
    p.add_argument("--stats-mode", choices=["per-partition", "global"], default="per-partition")
    p.add_argument("--cap", type=int, default=DEFAULT_PRODUCT_CAP, help="max extractions per predicate")
    p.add_argument("--all-sources", action="store_true", help="keep parser-generated questions too")
    common(p)

    p = sub.add_parser("stats", help="dataset metrics over extraction files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--figure3", "--tag-distribution", dest="tag_figure", action="store_true",
                   help="also write the tag distribution CSV and figure")
    common(p)

    p = sub.add_parser("decode", help="Viterbi-decode emission files into tagged extractions")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--confidence", choices=["mean", "sequence"], default="mean")
    p.add_argument("--include-o", action="store_true", help="average the mean confidence over O tokens too")
    p.add_argument("--any-predicates", action="store_true", help="do not require exactly one B-P per path")
    common(p)

    p = sub.add_parser("eval", help="PR curve, max F1 and AUC against gold")
    p.add_argument("inputs", nargs="+", help="prediction files (with confidence column)")
    p.add_argument("--gold", required=True)
    p.add_argument("--heads", help="CoNLL-U dependency parses keyed by # sent_id")
    p.add_argument("--lenient", action="store_true", help="gold heads may sit in any predicted slot")
    common(p)
    return parser


def config_from_args(args) -> RunConfig:
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    cfg = RunConfig(command=args.command, inputs=[_resolve_input(p) for p in args.inputs],
                    output_dir=args.out, jobs=args.jobs, seed=args.seed)
    if args.command == "convert":
        if args.cap < 1:
            raise ConfigError("--cap must be >= 1")
        cfg.partition, cfg.domain, cfg.stats_mode = args.partition, args.domain, args.stats_mode
        cfg.product_cap, cfg.all_sources = args.cap, args.all_sources
    elif args.command == "stats":
        cfg.tag_figure = args.tag_figure
    elif args.command == "decode":
        cfg.confidence, cfg.include_o = args.confidence, args.include_o
        cfg.single_predicate = not args.any_predicates
    elif args.command == "eval":
        cfg.gold = _resolve_input(args.gold)
        cfg.heads = _resolve_input(args.heads) if args.heads else None
        cfg.match_mode = "lenient" if args.lenient else "positional"
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as e:
        print(f"lsoie: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (QASRLFormatError, FormatError, BIOError, EmptyCorpus, NoGold, ValueError) as e:
        print(f"lsoie: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
