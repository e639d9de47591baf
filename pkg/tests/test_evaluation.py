import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from fixtures import PHYSICIANS, PHYSICIANS_CONLLU
from oracles import max_bipartite, trapezoid_oracle
from lsoie.conversion import Extraction
from lsoie.evaluation import (ROOT, NoGold, argument_head, build_match_table, match, pr_auc, pr_curve,
                              read_conllu, score_at_threshold)
from lsoie.qasrl import Span


def ext(sid, pred, *args, conf=None):
    return Extraction(sid, pred, "v", tuple(Span(*a) if a else None for a in args), conf)


@pytest.fixture
def physician_heads(tmp_path):
    path = tmp_path / "physicians.conllu"
    path.write_text(PHYSICIANS_CONLLU)
    return read_conllu(path)


# --- heads

def test_read_conllu(physician_heads):
    heads = physician_heads[PHYSICIANS.sentence_id]
    assert heads == (2, 2, 5, 5, 5, ROOT, 5, 5)


def test_read_conllu_skips_multiword_and_empty(tmp_path):
    path = tmp_path / "x.conllu"
    path.write_text("# sent_id = s\n1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n1\tdo\t_\t_\t_\t_\t0\troot\t_\t_\n"
                    "2\tn't\t_\t_\t_\t_\t1\tadvmod\t_\t_\n2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n\n")
    assert read_conllu(path)["s"] == (ROOT, 0)


def test_head_single_token():
    assert argument_head(Span(4, 5), (5, 5, 5, 5, 5, ROOT)) == 4


def test_head_physicians_locative(physician_heads):
    # "In Asian countries": In -> countries, Asian -> countries, countries -> provide
    assert argument_head(Span(0, 3), physician_heads[PHYSICIANS.sentence_id]) == 2


def test_head_one_external():
    heads = (1, 3, 1, ROOT)
    assert argument_head(Span(0, 3), heads) == 1


def test_head_leftmost_of_several():
    heads = (ROOT, 0, 0, 0)
    assert argument_head(Span(1, 4), heads) == 1


def test_head_fallback_skips_closed_class():
    tokens = ("in", "the", "desert", "of", "the")
    assert argument_head(Span(0, 5), None, tokens) == 2
    assert argument_head(Span(0, 2), None, tokens) == 1  # all stop words: rightmost


# --- match

def test_match_identity():
    g = ext("s", 2, (0, 2), (3, 5))
    assert match(g, g).matched


def test_match_swapped_arguments_fail():
    g = ext("s", 2, (0, 2), (3, 5))
    p = ext("s", 2, (3, 5), (0, 2))
    assert not match(p, g).matched
    assert match(p, g, lenient=True).matched


def test_match_longer_span_containing_head():
    heads = (1, 2, ROOT, 2, 3, 4)
    g = ext("s", 2, (0, 2), (3, 4))
    p = ext("s", 2, (0, 2), (3, 6))
    assert match(p, g, heads).matched


def test_match_extra_predicted_args_do_not_block():
    g = ext("s", 2, (0, 2))
    p = ext("s", 2, (0, 2), (3, 4), (5, 6))
    assert match(p, g).matched


def test_match_missing_slot_fails():
    g = ext("s", 2, (0, 2), (3, 4))
    p = ext("s", 2, (0, 2))
    assert not match(p, g).matched


def test_match_different_predicate():
    g = ext("s", 2, (0, 2))
    p = ext("s", 5, (0, 2))
    d = match(p, g)
    assert not d.matched and not d.predicate_equal


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5))
def test_predicate_test_symmetric(a, b):
    x, y = ext("s", a, None), ext("s", b, None)
    assert match(x, y).predicate_equal == match(y, x).predicate_equal


# --- thresholds

def test_score_predictions_equal_gold():
    gold = [ext("s", 2, (0, 2)), ext("t", 1, (0, 1))]
    preds = [e.with_confidence(-0.1 * i) for i, e in enumerate(gold)]
    assert score_at_threshold(preds, gold, threshold=-10) == (1.0, 1.0)


def test_score_threshold_above_all():
    gold = [ext("s", 2, (0, 2))]
    preds = [gold[0].with_confidence(-1.0)]
    assert score_at_threshold(preds, gold, threshold=0.5) == (1.0, 0.0)


def test_score_three_predictions_four_gold():
    gold = [ext("a", 1, (0, 1)), ext("b", 1, (0, 1)), ext("c", 1, (0, 1)), ext("d", 1, (0, 1))]
    preds = [ext("a", 1, (0, 1), conf=-0.1), ext("b", 1, (0, 1), conf=-0.2), ext("c", 2, (0, 1), conf=-0.3)]
    p, r = score_at_threshold(preds, gold, threshold=-1.0)
    table = build_match_table(preds, gold)
    best = max_bipartite(table.candidates, len(preds))
    assert best == 2
    assert (p, r) == (2 / 3, 2 / 4) == (best / 3, best / 4)


def test_no_gold():
    with pytest.raises(NoGold):
        score_at_threshold([ext("a", 1, (0, 1), conf=0.0)], [])
    with pytest.raises(NoGold):
        pr_curve([ext("a", 1, (0, 1), conf=0.0)], [])


def random_eval_set(seed, n_gold=30, n_pred=40):
    rng = random.Random(seed)
    gold = []
    for i in range(n_gold):
        sid = f"s{rng.randint(0, 8)}"
        p = rng.randint(3, 5)
        gold.append(ext(sid, p, (0, rng.randint(1, 3)), (6, rng.randint(7, 9))))
    preds = []
    for i in range(n_pred):
        if rng.random() < 0.6 and gold:
            g = rng.choice(gold)
            args = list(g.arguments)
            if rng.random() < 0.3:
                args = args[::-1]
            preds.append(Extraction(g.sentence_id, g.predicate_index, "v", tuple(args), rng.uniform(-3, 0)))
        else:
            preds.append(ext(f"s{rng.randint(0, 8)}", rng.randint(3, 5), (0, 1), conf=rng.uniform(-3, 0)))
    return preds, gold


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_threshold_sweep_monotone_and_one_to_one(seed):
    preds, gold = random_eval_set(seed)
    table = build_match_table(preds, gold)
    prev_kept, prev_recall = None, None
    for t in sorted({p.confidence for p in preds}):
        kept = sum(p.confidence >= t for p in preds)
        _, r = score_at_threshold(preds, gold, threshold=t)
        if prev_kept is not None:
            assert kept <= prev_kept and r <= prev_recall + 1e-12
        prev_kept, prev_recall = kept, r
        # greedy never credits more gold than a maximum one-to-one matching allows
        kept_idx = [i for i, p in enumerate(preds) if p.confidence >= t]
        bound = max_bipartite([table.candidates[i] for i in kept_idx], len(kept_idx))
        assert round(r * len(gold)) <= bound


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_pr_curve_invariant_under_increasing_transform(seed):
    preds, gold = random_eval_set(seed)
    curve = pr_curve(preds, gold)
    moved = [p.with_confidence(math.exp(p.confidence) * 3 + 7) for p in preds]
    curve2 = pr_curve(moved, gold)
    assert [(p, r) for _, p, r in curve.points] == [(p, r) for _, p, r in curve2.points]
    assert curve.auc == curve2.auc and curve.max_f1 == curve2.max_f1


def test_pr_curve_invariants_random():
    for seed in range(20):
        preds, gold = random_eval_set(seed)
        curve = pr_curve(preds, gold)
        recalls = [r for _, _, r in curve.points]
        assert all(a >= b for a, b in zip(recalls, recalls[1:]))
        assert all(0 <= p <= 1 and 0 <= r <= 1 for _, p, r in curve.points)
        assert 0 <= curve.auc <= 1
        assert curve.auc == pytest.approx(trapezoid_oracle(curve.points), abs=1e-9)


# --- PR curve and AUC

def test_perfect_system():
    gold = [ext(f"s{i}", 1, (0, 1)) for i in range(5)]
    preds = [g.with_confidence(-0.1 * i) for i, g in enumerate(gold)]
    curve = pr_curve(preds, gold)
    assert curve.auc == 1.0 and curve.max_f1 == 1.0


def test_constant_precision_area():
    pts = [(-i, 0.6, r) for i, r in enumerate([0.1, 0.4, 0.75, 1.0])]
    assert pr_auc(pts) == pytest.approx(0.6, abs=1e-9)


def test_three_point_curve():
    pts = [(3.0, 1.0, 0.2), (2.0, 0.8, 0.5), (1.0, 0.5, 1.0)]
    assert trapezoid_oracle(pts) == pytest.approx(0.795, abs=1e-12)
    assert pr_auc(pts) == pytest.approx(0.795, abs=1e-9)


def test_f1_at_zero_keeps_everything():
    gold = [ext("a", 1, (0, 1)), ext("b", 1, (0, 1))]
    preds = [ext("a", 1, (0, 1), conf=-0.1), ext("x", 1, (0, 1), conf=-0.2)]
    curve = pr_curve(preds, gold)
    assert curve.f1_at_0 == pytest.approx(0.5)
    assert curve.max_f1 == pytest.approx(2 * 1.0 * 0.5 / 1.5)
