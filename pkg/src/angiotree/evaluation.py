"""Pixel-level per-class F1 for segment predictions."""
from dataclasses import dataclass, field

import numpy as np

from .candidates import SEGMENT_LABELS, label_key


@dataclass(frozen=True)
class ClassScore:
    tp: int
    fp: int
    fn: int

    @property
    def f1(self):
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0

    def __add__(self, other):
        return ClassScore(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class EvalReport:
    per_image: dict
    per_class_f1: dict
    mean_f1: float
    micro_f1: float
    pooled: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "per_image": {
                str(iid): {
                    label: {"tp": s.tp, "fp": s.fp, "fn": s.fn, "f1": s.f1}
                    for label, s in scores.items()
                }
                for iid, scores in self.per_image.items()
            },
            "per_class_f1": dict(self.per_class_f1),
            "mean_f1": self.mean_f1,
            "micro_f1": self.micro_f1,
        }


def _union_masks(cset):
    out = {}
    for c in cset:
        if c.label in out:
            out[c.label] = out[c.label] | c.mask
        else:
            out[c.label] = c.mask
    return out


def f1_image(pred, gt):
    """Per-class pixel counts over the union of each class's masks.

    Classes absent from both sets are left out.
    """
    if pred.shape != gt.shape:
        raise ValueError(f"prediction grid {pred.shape} != ground-truth grid {gt.shape}")
    p, g = _union_masks(pred), _union_masks(gt)
    scores = {}
    for label in sorted(set(p) | set(g), key=label_key):
        pm, gm = p.get(label), g.get(label)
        if pm is None:
            scores[label] = ClassScore(0, 0, int(np.count_nonzero(gm)))
        elif gm is None:
            scores[label] = ClassScore(0, int(np.count_nonzero(pm)), 0)
        else:
            tp = int(np.count_nonzero(pm & gm))
            scores[label] = ClassScore(tp, int(np.count_nonzero(pm)) - tp, int(np.count_nonzero(gm)) - tp)
    return scores


def aggregate(per_image):
    """Combine per-image scores ({image id: {class: ClassScore}}).

    ``per_class_f1`` pools counts across images (micro per class);
    ``mean_f1`` averages every per-image, per-present-class F1 (macro);
    ``micro_f1`` pools all counts. Scores with tp = fp = fn = 0 are skipped;
    with nothing to score both means are 0.
    """
    per_image = {iid: dict(scores) for iid, scores in per_image.items()}
    pooled = {}
    values = []
    for scores in per_image.values():
        for label, s in scores.items():
            if s.tp == s.fp == s.fn == 0:
                continue
            pooled[label] = pooled.get(label, ClassScore(0, 0, 0)) + s
            values.append(s.f1)
    pooled = {k: pooled[k] for k in sorted(pooled, key=label_key)}
    total = sum(pooled.values(), ClassScore(0, 0, 0))
    return EvalReport(
        per_image=per_image,
        per_class_f1={k: s.f1 for k, s in pooled.items()},
        mean_f1=float(np.mean(values)) if values else 0.0,
        micro_f1=total.f1,
        pooled=pooled,
    )


class ImageMismatchError(ValueError):
    pass


def evaluate(pred_sets, gt_sets):
    """Score prediction sets against ground truth, matched by image id."""
    preds = {s.image_id: s for s in pred_sets}
    gts = {s.image_id: s for s in gt_sets}
    if set(preds) != set(gts):
        only_pred = sorted(set(preds) - set(gts))
        only_gt = sorted(set(gts) - set(preds))
        raise ImageMismatchError(
            f"image ids differ: only in predictions {only_pred}, only in ground truth {only_gt}"
        )
    return aggregate({iid: f1_image(preds[iid], gts[iid]) for iid in sorted(gts)})


def format_table(report):
    lines = [f"{'class':>8}  {'tp':>9} {'fp':>9} {'fn':>9}  {'f1':>6}"]
    for label in SEGMENT_LABELS:
        s = report.pooled.get(label)
        if s is None:
            continue
        lines.append(f"{label:>8}  {s.tp:>9d} {s.fp:>9d} {s.fn:>9d}  {s.f1:6.4f}")
    lines.append(f"{'macro':>8}  {'':>9} {'':>9} {'':>9}  {report.mean_f1:6.4f}")
    lines.append(f"{'micro':>8}  {'':>9} {'':>9} {'':>9}  {report.micro_f1:6.4f}")
    return "\n".join(lines)
