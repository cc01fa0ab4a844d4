"""Deterministic synthetic fixtures: image phantoms and simulated detector output.

``python -m angiotree.synthetic OUTDIR`` writes the candidate-file fixtures
(a left tree with one intruding right segment, and the 20-image ablation
corpus) as JSON.
"""
import math
import sys
from pathlib import Path

import numpy as np

from .candidates import LABEL_ORDER, category_records, dump_json, parse_candidates
from .tree_logic import Side, default_anatomy_graph, mask_distance, resolve_confusables, validate_tree

# ---------------------------------------------------------------------------
# image phantoms


def vessel_phantom(size=64, seed=0, background=180.0, vessel=90.0, width=3.0, noise=2.0):
    """Dark sinuous vessel on a bright, slowly varying background.

    Returns (image, vessel mask, background mask); the background mask keeps
    pixels at least 8 px from the vessel centre line.
    """
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    centre = size / 2 + size / 6 * np.sin(2 * np.pi * x / size)
    dist = np.abs(y - centre)
    img = background + 10.0 * (x / size) - 8.0 * (y / size)
    profile = np.clip(1.0 - (dist - width / 2), 0.0, 1.0)
    img = img - (img - vessel) * profile
    img = img + rng.normal(0.0, noise, img.shape)
    return np.clip(img, 0, 255), dist <= width / 2, dist >= 8


def stripe_frequency(wedge, size=32, directions=8, radius=None):
    """An integer frequency (v, u) whose orientation lies strictly inside ``wedge``."""
    radius = radius or size // 4
    lo = wedge * np.pi / directions
    hi = (wedge + 1) * np.pi / directions
    best = None
    for v in range(-size // 2 + 1, size // 2):
        for u in range(-size // 2 + 1, size // 2):
            if u == 0 and v == 0:
                continue
            theta = math.atan2(v, u) % math.pi
            if not lo + 1e-6 < theta < hi - 1e-6:
                continue
            mid = abs(theta - (lo + hi) / 2)
            score = (abs(math.hypot(u, v) - radius), mid)
            if best is None or score < best[0]:
                best = (score, (v, u))
    return best[1]


def stripe_image(wedge, size=32, directions=8, amplitude=60.0):
    """Cosine grating whose wave vector falls in ``wedge``."""
    v, u = stripe_frequency(wedge, size, directions)
    y, x = np.mgrid[0:size, 0:size]
    return 128.0 + amplitude * np.cos(2 * np.pi * (u * x + v * y) / size)


def glare_image(size=32, period=4, amplitude=15.0):
    """Stripe pattern under a strong additive illumination ramp.

    Returns (image, stripe frequency (v, u)).
    """
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    ramp = 40.0 + 150.0 * np.sin(np.pi * x / size) * np.sin(np.pi * y / size)
    u = size // period
    return ramp + amplitude * (1 + np.cos(2 * np.pi * u * x / size)), (0, u)


# ---------------------------------------------------------------------------
# coronary tree layouts
#
# label -> (parent, angle offset from parent in degrees, length in px);
# children start where their parent ends.

TREE_TEMPLATE = {
    # right
    "1": (None, 10, 90), "2": ("1", 55, 85), "3": ("2", 35, 85), "4": ("3", 55, 70),
    "16": ("4", -70, 60), "16a": ("16", 35, 55), "16b": ("16", 0, 65), "16c": ("16", -35, 75),
    # left
    "5": (None, 100, 55), "6": ("5", -40, 85), "7": ("6", 5, 85), "8": ("7", 5, 80),
    "9": ("6", 50, 70), "9a": ("9", 15, 60), "10": ("7", 50, 65), "10a": ("10", 15, 55),
    "11": ("5", 55, 80), "13": ("11", 0, 80), "15": ("13", 20, 65),
    "14": ("13", -40, 65), "14a": ("14", 15, 55), "14b": ("14", -25, 60),
    "12": ("5", 15, 70), "12a": ("12", 20, 55), "12b": ("12", -20, 60),
}
TREE_START = {Side.RIGHT: (110.0, 90.0), Side.LEFT: (230.0, 50.0)}
BAR_WIDTH = 10.0


def bar_polygon(start, angle_deg, length, width=BAR_WIDTH):
    """Rotated rectangle from ``start`` (x, y) along ``angle_deg`` as a flat COCO polygon."""
    t = math.radians(angle_deg)
    dx, dy = math.cos(t), math.sin(t)
    nx, ny = -dy * width / 2, dx * width / 2
    x0, y0 = start
    x1, y1 = x0 + dx * length, y0 + dy * length
    pts = [(x0 + nx, y0 + ny), (x1 + nx, y1 + ny), (x1 - nx, y1 - ny), (x0 - nx, y0 - ny)]
    return [round(float(c), 3) for p in pts for c in p]


def tree_layout(side, labels, rng=None, jitter=True):
    """Bars (start, angle, length) for ``labels``; ancestors must be included."""
    graph = default_anatomy_graph()
    out = {}
    for root in (r for r in graph.roots if graph.side(r) == side):
        for label in graph.breadth_first(root):
            if label not in labels:
                continue
            parent, offset, length = TREE_TEMPLATE[label]
            if jitter and rng is not None:
                offset += rng.uniform(-8, 8)
                length *= rng.uniform(0.9, 1.1)
            if parent is None:
                start, base = TREE_START[side], 0.0
            else:
                p_start, p_angle, p_len = out[parent]
                t = math.radians(p_angle)
                start = (p_start[0] + math.cos(t) * p_len, p_start[1] + math.sin(t) * p_len)
                base = p_angle
            out[label] = (start, base + offset, length)
    return out


def _annotation(image_id, label, polygon, score=None, source=None):
    ann = {"image_id": image_id, "category_id": LABEL_ORDER[label] + 1, "segmentation": [polygon]}
    if score is not None:
        ann["score"] = round(float(score), 4)
    if source is not None:
        ann["source"] = source
    return ann


def _doc(images, annotations):
    for i, ann in enumerate(annotations, 1):
        ann["id"] = i
    return {"images": images, "annotations": annotations, "categories": category_records()}


# ---------------------------------------------------------------------------
# left anatomy {5, 6} with an intruding right-circulation segment 1


def intruder_docs(size=512):
    """(prediction doc, ground-truth doc) for one image."""
    layout = tree_layout(Side.LEFT, {"5", "6"}, jitter=False)
    image = [{"id": 1, "width": size, "height": size, "file_name": "intruder.png"}]
    gt = [_annotation(1, lab, bar_polygon(*layout[lab])) for lab in ("5", "6")]
    pred = [
        _annotation(1, "5", bar_polygon(*layout["5"]), 0.9, "fixture"),
        _annotation(1, "6", bar_polygon(*layout["6"]), 0.85, "fixture"),
        _annotation(1, "1", bar_polygon((330.0, 300.0), 20.0, 70.0), 0.6, "fixture"),
    ]
    return _doc(image, pred), _doc(image, gt)


# ---------------------------------------------------------------------------
# ablation corpus: ground-truth trees plus simulated detectors that add false
# positives the anatomy logic can recognise


def _sample_labels(side, rng, keep=0.8):
    graph = default_anatomy_graph()
    chosen = set()
    for root in (r for r in graph.roots if graph.side(r) == side):
        for label in graph.breadth_first(root):
            parent = graph.parent(label)
            if parent is None or (parent in chosen and rng.random() < keep):
                chosen.add(label)
    return chosen


def _is_fixed_point(doc, image_id):
    cset = next(s for s in parse_candidates(doc) if s.image_id == image_id)
    report = resolve_confusables(validate_tree(cset, mode="strict"))
    return not report.removed and not report.relabels


def _far_start(rng, gt_union, size, length, min_gap=80.0, tries=60):
    from .candidates import rasterize_polygons
    for _ in range(tries):
        start = (rng.uniform(20, size - 20), rng.uniform(20, size - 20))
        angle = rng.uniform(0, 360)
        poly = bar_polygon(start, angle, length)
        mask = rasterize_polygons([poly], size, size)
        if mask.sum() >= 450 and mask_distance(mask, gt_union) > min_gap:
            return poly
    return None


def _perturb(poly, rng, amount=2.0):
    return [round(c + rng.uniform(-amount, amount), 3) for c in poly]


def ablation_docs(n_images=20, seed=2023, sources=("orig", "equalize", "guided"), size=512):
    """(ground-truth doc, [prediction doc per simulated detector]).

    Every detector finds each true segment with probability 0.85 (jittered
    outline, confidence 0.6-0.95), and each segment is found by at least one
    detector. Each detector also independently adds false positives: a
    segment of the opposite circulation, a distal segment with no parent far
    from the tree and a low-confidence duplicate of a true class. When an
    image holds both 9 and 9a, half the time every detector swaps the two
    labels, as a systematically confused model would.
    """
    from .candidates import rasterize_polygons
    graph = default_anatomy_graph()
    rng = np.random.default_rng(seed)
    images, gt_anns = [], []
    layouts = {}
    for iid in range(1, n_images + 1):
        side = Side.LEFT if rng.random() < 0.6 else Side.RIGHT
        while True:
            labels = _sample_labels(side, rng)
            layout = tree_layout(side, labels, rng)
            polys = {lab: bar_polygon(*layout[lab]) for lab in layout}
            img = {"id": iid, "width": size, "height": size, "file_name": f"synthetic_{iid:03d}.png"}
            anns = [_annotation(iid, lab, polys[lab]) for lab in sorted(polys, key=LABEL_ORDER.get)]
            if _is_fixed_point(_doc([img], [dict(a) for a in anns]), iid):
                break
        images.append(img)
        gt_anns.extend(anns)
        layouts[iid] = (side, polys)

    pred_anns = {s: [] for s in sources}
    for iid, (side, polys) in layouts.items():
        gt_union = rasterize_polygons(list(polys.values()), size, size)
        other = Side.RIGHT if side is Side.LEFT else Side.LEFT
        same_side = [v for v in graph.vertices if graph.side(v) is side]
        swap = "9" in polys and "9a" in polys and rng.random() < 0.5
        hits = rng.random((len(sources), len(polys))) < 0.85
        # every true segment is seen by at least one detector
        for k in np.flatnonzero(~hits.any(axis=0)):
            hits[rng.integers(len(sources)), k] = True
        for j, src in enumerate(sources):
            anns = pred_anns[src]
            found = {}
            for k, (lab, poly) in enumerate(polys.items()):
                if hits[j, k]:
                    found[lab] = (_perturb(poly, rng), rng.uniform(0.6, 0.95))
            if swap:
                found = {{"9": "9a", "9a": "9"}.get(lab, lab): v for lab, v in found.items()}
            for lab, (poly, score) in found.items():
                anns.append(_annotation(iid, lab, poly, score, src))
            if rng.random() < 0.7:
                lab = str(rng.choice([v for v in graph.vertices if graph.side(v) is other]))
                start = (rng.uniform(60, size - 60), rng.uniform(60, size - 60))
                poly = bar_polygon(start, rng.uniform(0, 360), rng.uniform(55, 75))
                anns.append(_annotation(iid, lab, poly, rng.uniform(0.3, 0.55), src))
            orphans = [v for v in same_side if v not in polys and graph.parent(v) is not None
                       and graph.parent(v) not in polys]
            if orphans and rng.random() < 0.6:
                poly = _far_start(rng, gt_union, size, rng.uniform(55, 75))
                if poly is not None:
                    anns.append(_annotation(iid, str(rng.choice(orphans)), poly, rng.uniform(0.4, 0.7), src))
            if polys and rng.random() < 0.4:
                lab = str(rng.choice(sorted(polys, key=LABEL_ORDER.get)))
                poly = _far_start(rng, gt_union, size, rng.uniform(55, 75), min_gap=20.0)
                if poly is not None:
                    anns.append(_annotation(iid, lab, poly, rng.uniform(0.15, 0.35), src))

    gt_doc = _doc(images, gt_anns)
    pred_docs = [_doc([dict(i) for i in images], pred_anns[s]) for s in sources]
    return gt_doc, pred_docs


def random_candidate_set(rng, size=64, n_max=12):
    """Random labels and rectangle masks; no anatomical structure at all."""
    from .candidates import SEGMENT_LABELS, CandidateSegment, CandidateSet
    cands = []
    for _ in range(int(rng.integers(1, n_max + 1))):
        label = str(rng.choice(SEGMENT_LABELS))
        y0, x0 = rng.integers(0, size - 4, 2)
        h, w = rng.integers(2, 24, 2)
        mask = np.zeros((size, size), bool)
        mask[y0:y0 + h, x0:x0 + w] = True
        cands.append(CandidateSegment(label, mask, float(rng.uniform(0.05, 1.0)), f"s{int(rng.integers(3))}"))
    return CandidateSet(0, size, size, tuple(cands))


def fixture_path(name):
    """Path of a packaged fixture file (see ``write_fixtures``)."""
    from importlib.resources import files
    return Path(str(files("angiotree") / "data" / "fixtures" / name))


def write_fixtures(directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    pred, gt = intruder_docs()
    dump_json(pred, directory / "intruder_pred.json")
    dump_json(gt, directory / "intruder_gt.json")
    gt, preds = ablation_docs()
    dump_json(gt, directory / "ablation_gt.json")
    for doc in preds:
        src = doc["annotations"][0]["source"] if doc["annotations"] else "empty"
        dump_json(doc, directory / f"ablation_pred_{src}.json")


if __name__ == "__main__":
    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
