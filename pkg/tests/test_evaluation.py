import numpy as np
import pytest

from angiotree import evaluation as ev
from angiotree.candidates import CandidateSegment, CandidateSet
from oracles import count_f1


def sq(y, x, n=10, shape=(40, 40)):
    m = np.zeros(shape, bool)
    m[y:y + n, x:x + n] = True
    return m


def cs(iid, *pairs, shape=(40, 40)):
    return CandidateSet(iid, shape[1], shape[0], tuple(CandidateSegment(lab, m) for lab, m in pairs))


def test_perfect_prediction():
    gt = cs(1, ("5", sq(0, 0)), ("6", sq(20, 20)))
    scores = ev.f1_image(gt, gt)
    assert {k: s.f1 for k, s in scores.items()} == {"5": 1.0, "6": 1.0}


def test_empty_prediction():
    scores = ev.f1_image(cs(1), cs(1, ("6", sq(0, 0))))
    assert scores["6"] == ev.ClassScore(0, 0, 100) and scores["6"].f1 == 0.0


def test_shifted_square():
    s = ev.f1_image(cs(1, ("6", sq(0, 5))), cs(1, ("6", sq(0, 0))))["6"]
    assert (s.tp, s.fp, s.fn, s.f1) == (50, 50, 50, 0.5)
    assert count_f1(sq(0, 5), sq(0, 0)) == (50, 50, 50)


def test_duplicate_class_masks_are_unioned():
    pred = cs(1, ("6", sq(0, 0)), ("6", sq(0, 5)))
    s = ev.f1_image(pred, cs(1, ("6", sq(0, 0))))["6"]
    assert (s.tp, s.fp, s.fn) == (100, 50, 0)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        ev.f1_image(cs(1), cs(1, shape=(20, 40)))


def test_aggregate_single_and_identical():
    img = ev.f1_image(cs(1, ("6", sq(0, 5))), cs(1, ("6", sq(0, 0))))
    rep = ev.aggregate({1: img})
    assert rep.per_class_f1 == {"6": 0.5} and rep.mean_f1 == 0.5 and rep.micro_f1 == 0.5
    rep = ev.aggregate({1: img, 2: img})
    assert rep.per_class_f1["6"] == 0.5


def test_aggregate_matches_recount():
    rng = np.random.default_rng(3)
    preds, gts = [], []
    for iid in range(3):
        p, g = [], []
        for lab in ("5", "6", "7"):
            if rng.random() < 0.8:
                p.append((lab, sq(*rng.integers(0, 25, 2), n=int(rng.integers(5, 15)))))
            if rng.random() < 0.8:
                g.append((lab, sq(*rng.integers(0, 25, 2), n=int(rng.integers(5, 15)))))
        preds.append(cs(iid, *p))
        gts.append(cs(iid, *g))
    rep = ev.evaluate(preds, gts)
    pooled = {}
    values = []
    for p, g in zip(preds, gts):
        for lab in ("5", "6", "7"):
            pm = next((m for l, m in ((c.label, c.mask) for c in p) if l == lab), np.zeros((40, 40), bool))
            gm = next((m for l, m in ((c.label, c.mask) for c in g) if l == lab), np.zeros((40, 40), bool))
            tp, fp, fn = count_f1(pm, gm)
            if tp + fp + fn == 0:
                continue
            acc = pooled.setdefault(lab, [0, 0, 0])
            acc[0] += tp; acc[1] += fp; acc[2] += fn
            values.append(2 * tp / (2 * tp + fp + fn))
    for lab, (tp, fp, fn) in pooled.items():
        assert rep.per_class_f1[lab] == pytest.approx(2 * tp / (2 * tp + fp + fn))
    assert rep.mean_f1 == pytest.approx(np.mean(values))
    tot = np.sum(list(pooled.values()), axis=0)
    assert rep.micro_f1 == pytest.approx(2 * tot[0] / (2 * tot[0] + tot[1] + tot[2]))


def test_nothing_to_score():
    rep = ev.evaluate([cs(1)], [cs(1)])
    assert rep.mean_f1 == 0.0 and rep.micro_f1 == 0.0


def test_image_mismatch_lists_offenders():
    with pytest.raises(ev.ImageMismatchError, match=r"only in predictions \[2\].*only in ground truth \[3\]"):
        ev.evaluate([cs(1), cs(2)], [cs(1), cs(3)])


def test_table_and_dict():
    rep = ev.evaluate([cs(1, ("6", sq(0, 5)))], [cs(1, ("6", sq(0, 0)))])
    table = ev.format_table(rep).splitlines()
    assert table[-2].split() == ["macro", "0.5000"] and table[-1].split() == ["micro", "0.5000"]
    d = rep.to_dict()
    assert d["per_image"]["1"]["6"] == {"tp": 50, "fp": 50, "fn": 50, "f1": 0.5}
