"""Candidate segments from external detectors: COCO-style I/O, filtering,
ensemble fusion and mask erosion."""
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

SEGMENT_LABELS = (
    "1", "2", "3", "4", "5", "6", "7", "8", "9", "9a", "10", "10a", "11",
    "12", "12a", "12b", "13", "14", "14a", "14b", "15", "16", "16a", "16b", "16c",
)
BACKGROUND = "background"
LABELS = SEGMENT_LABELS + (BACKGROUND,)
LABEL_ORDER = {label: i for i, label in enumerate(SEGMENT_LABELS)}

# classes with fewer than 25 training instances
DEFAULT_EXCLUDED = ("10", "10a", "14a", "15", "16", "16a", "16b", "16c", "12b")

DEFAULT_MIN_AREA = 450


class CandidateFileError(ValueError):
    """Malformed candidate / annotation file."""


def label_key(label):
    return LABEL_ORDER.get(label, len(LABEL_ORDER))


@dataclass(frozen=True, eq=False)
class CandidateSegment:
    label: str
    mask: np.ndarray
    confidence: float = 1.0
    source: str = "model"
    bbox: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.label not in SEGMENT_LABELS:
            raise ValueError(f"unknown segment class {self.label!r}")
        mask = np.array(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise ValueError("mask must be 2-D")
        rows = np.flatnonzero(mask.any(axis=1))
        if rows.size == 0:
            raise ValueError("candidate mask is empty")
        cols = np.flatnonzero(mask.any(axis=0))
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "confidence", float(self.confidence))
        object.__setattr__(self, "bbox", (int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1))

    @property
    def area(self):
        return int(np.count_nonzero(self.mask))

    @property
    def centroid(self):
        ys, xs = np.nonzero(self.mask)
        return float(ys.mean()), float(xs.mean())

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class CandidateSet:
    image_id: int
    width: int
    height: int
    candidates: tuple = ()
    file_name: str = ""

    def __post_init__(self):
        cands = tuple(self.candidates)
        for c in cands:
            if c.mask.shape != (self.height, self.width):
                raise ValueError(
                    f"image {self.image_id}: mask shape {c.mask.shape} does not match "
                    f"{self.height}x{self.width}"
                )
        object.__setattr__(self, "candidates", cands)

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)

    def with_candidates(self, candidates):
        return dataclasses.replace(self, candidates=tuple(candidates))

    @property
    def shape(self):
        return (self.height, self.width)


# ---------------------------------------------------------------------------
# parsing


def rasterize_polygons(polygons, height, width):
    """Union of even-odd fills of each flat [x0, y0, x1, y1, ...] polygon."""
    mask = np.zeros((height, width), dtype=bool)
    for poly in polygons:
        pts = np.asarray(poly, dtype=np.float64).reshape(-1, 2)
        mask |= kernels.fill_polygon(pts[:, 0], pts[:, 1], height, width)
    return mask


def _category_map(doc):
    cats = doc.get("categories")
    if not cats:
        return {i + 1: label for i, label in enumerate(SEGMENT_LABELS)}
    mapping = {}
    for i, cat in enumerate(cats):
        try:
            cid, name = int(cat["id"]), str(cat["name"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CandidateFileError(f"category record {i}: {exc!r}") from None
        if name not in SEGMENT_LABELS:
            raise CandidateFileError(f"category record {i}: unknown class code {name!r}")
        mapping[cid] = name
    return mapping


def _polygons(seg, index):
    if not isinstance(seg, list) or not seg:
        raise CandidateFileError(f"annotation record {index}: segmentation must be a non-empty polygon list")
    if all(isinstance(v, (int, float)) for v in seg):
        seg = [seg]
    polys = []
    for poly in seg:
        if not isinstance(poly, list) or len(poly) < 6 or len(poly) % 2:
            raise CandidateFileError(
                f"annotation record {index}: polygon needs an even number (>= 6) of coordinates"
            )
        try:
            vals = [float(v) for v in poly]
        except (TypeError, ValueError):
            raise CandidateFileError(f"annotation record {index}: non-numeric polygon coordinate") from None
        if not all(math.isfinite(v) for v in vals):
            raise CandidateFileError(f"annotation record {index}: non-finite polygon coordinate")
        polys.append(vals)
    return polys


def parse_candidates(src, source=None):
    """Read a COCO-style candidate or ground-truth file.

    ``src`` is a path or an already-loaded dict. Returns one CandidateSet per
    image, in file order. ``source`` tags candidates that carry no ``source``
    field of their own (default: the file stem, else "model"). Annotations
    without ``score`` get confidence 1.0.
    """
    if isinstance(src, dict):
        return _parse_doc(src, source or "model")
    path = Path(src)
    try:
        doc = json.loads(path.read_text())
        return _parse_doc(doc, source or path.stem)
    except json.JSONDecodeError as exc:
        raise CandidateFileError(f"{path}: invalid JSON ({exc})") from None
    except CandidateFileError as exc:
        raise CandidateFileError(f"{path}: {exc}") from None


def _parse_doc(doc, source):
    if not isinstance(doc, dict):
        raise CandidateFileError("top level must be a JSON object")

    categories = _category_map(doc)
    images = {}
    for i, img in enumerate(doc.get("images", [])):
        try:
            iid, w, h = int(img["id"]), int(img["width"]), int(img["height"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CandidateFileError(f"image record {i}: {exc!r}") from None
        if w <= 0 or h <= 0:
            raise CandidateFileError(f"image record {i}: non-positive size")
        if iid in images:
            raise CandidateFileError(f"image record {i}: duplicate image id {iid}")
        images[iid] = (w, h, str(img.get("file_name", "")), [])

    for i, ann in enumerate(doc.get("annotations", [])):
        if not isinstance(ann, dict):
            raise CandidateFileError(f"annotation record {i}: not an object")
        try:
            iid = int(ann["image_id"])
            cid = int(ann["category_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CandidateFileError(f"annotation record {i}: {exc!r}") from None
        if iid not in images:
            raise CandidateFileError(f"annotation record {i}: unknown image_id {iid}")
        if cid not in categories:
            raise CandidateFileError(f"annotation record {i}: unknown class code (category_id {cid})")
        score = ann.get("score", 1.0)
        if not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
            raise CandidateFileError(f"annotation record {i}: score {score!r} outside [0, 1]")
        w, h, _, bucket = images[iid]
        mask = rasterize_polygons(_polygons(ann.get("segmentation"), i), h, w)
        if not mask.any():
            log.warning("annotation record %d covers no pixel centres; dropped", i)
            continue
        bucket.append(CandidateSegment(categories[cid], mask, float(score), str(ann.get("source", source))))

    return [
        CandidateSet(iid, w, h, tuple(cands), name)
        for iid, (w, h, name, cands) in images.items()
    ]


# ---------------------------------------------------------------------------
# serialisation


def _row_runs(row):
    edges = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return list(zip(starts.tolist(), stops.tolist()))


def mask_to_polygons(mask):
    """Exact polygon cover of a mask: one rectangle per stack of identical row runs.

    Rasterising the result under the pixel-centre rule gives back ``mask``.
    """
    mask = np.asarray(mask, dtype=bool)
    polys = []
    open_runs = {}
    for y in range(mask.shape[0] + 1):
        runs = set(_row_runs(mask[y])) if y < mask.shape[0] else set()
        for run in sorted(open_runs):
            if run not in runs:
                y0 = open_runs.pop(run)
                x0, x1 = run
                polys.append([x0, y0, x1, y0, x1, y, x0, y])
        for run in sorted(runs):
            open_runs.setdefault(run, y)
    return polys


def to_coco(sets, scores=True):
    """Serialise candidate sets into a COCO-style dict (deterministic order)."""
    images, annotations = [], []
    ann_id = 1
    for cset in sets:
        images.append({
            "id": cset.image_id, "width": cset.width, "height": cset.height,
            "file_name": cset.file_name,
        })
        for cand in cset:
            y0, y1, x0, x1 = cand.bbox
            ann = {
                "id": ann_id,
                "image_id": cset.image_id,
                "category_id": LABEL_ORDER[cand.label] + 1,
                "segmentation": mask_to_polygons(cand.mask),
                "area": cand.area,
                "bbox": [x0, y0, x1 - x0, y1 - y0],
                "iscrowd": 0,
                "source": cand.source,
            }
            if scores:
                ann["score"] = round(cand.confidence, 6)
            annotations.append(ann)
            ann_id += 1
    return {
        "images": images,
        "annotations": annotations,
        "categories": category_records(),
    }


def category_records():
    return [{"id": i + 1, "name": label, "supercategory": "coronary"}
            for i, label in enumerate(SEGMENT_LABELS)]


def dump_json(doc, path):
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def write_candidates(path, sets, scores=True):
    dump_json(to_coco(sets, scores=scores), path)


# ---------------------------------------------------------------------------
# filters


def area_filter(cset, min_area=DEFAULT_MIN_AREA):
    """Drop candidates whose mask has fewer than ``min_area`` pixels."""
    return cset.with_candidates(c for c in cset if c.area >= min_area)


def class_filter(cset, excluded=DEFAULT_EXCLUDED):
    unknown = sorted(set(excluded) - set(LABELS))
    if unknown:
        raise ValueError(f"unknown class codes in exclusion list: {unknown}")
    excluded = set(excluded)
    return cset.with_candidates(c for c in cset if c.label not in excluded)


def mask_iou(a, b):
    """IoU of two candidates' masks, evaluated on their joint bounding box."""
    ay0, ay1, ax0, ax1 = a.bbox
    by0, by1, bx0, bx1 = b.bbox
    if ay1 <= by0 or by1 <= ay0 or ax1 <= bx0 or bx1 <= ax0:
        return 0.0
    y0, y1 = min(ay0, by0), max(ay1, by1)
    x0, x1 = min(ax0, bx0), max(ax1, bx1)
    ma = a.mask[y0:y1, x0:x1]
    mb = b.mask[y0:y1, x0:x1]
    union = np.count_nonzero(ma | mb)
    return np.count_nonzero(ma & mb) / union


def _fuse(a, b):
    sources = sorted(set(a.source.split("+")) | set(b.source.split("+")))
    return CandidateSegment(a.label, a.mask | b.mask, max(a.confidence, b.confidence), "+".join(sources))


def merge_ensemble(sets, iou_threshold=0.5):
    """Pool candidates from several detectors run on the same image.

    Same-class candidates overlapping with IoU >= ``iou_threshold`` are fused
    (mask union, max confidence, joined source tags) until no such pair is
    left. Overlapping candidates of different classes are all kept.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("merge_ensemble needs at least one candidate set")
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError("iou_threshold must lie in (0, 1]")
    first = sets[0]
    for s in sets[1:]:
        if s.image_id != first.image_id or s.shape != first.shape:
            raise ValueError(
                f"cannot merge image {s.image_id} ({s.height}x{s.width}) with "
                f"image {first.image_id} ({first.height}x{first.width})"
            )
    items = [c for s in sets for c in s]
    while True:
        merged = []
        for cand in items:
            for k, group in enumerate(merged):
                if group.label == cand.label and mask_iou(group, cand) >= iou_threshold:
                    merged[k] = _fuse(group, cand)
                    break
            else:
                merged.append(cand)
        if len(merged) == len(items):
            break
        items = merged
    return first.with_candidates(items)


# ---------------------------------------------------------------------------
# erosion


def _erode_cross(mask):
    out = mask.copy()
    out[1:] &= mask[:-1]
    out[:-1] &= mask[1:]
    out[:, 1:] &= mask[:, :-1]
    out[:, :-1] &= mask[:, 1:]
    out[0] = out[-1] = False
    out[:, 0] = out[:, -1] = False
    return out


def erode_mask(candidate, iterations=1):
    """Binary erosion with a 3x3 cross, repeated; never returns an empty mask.

    Pixels outside the image count as background.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    mask = candidate.mask
    for _ in range(iterations):
        nxt = _erode_cross(mask)
        if not nxt.any():
            break
        mask = nxt
    if mask is candidate.mask:
        return candidate
    return candidate.replace(mask=mask)


def erode_set(cset, iterations):
    if iterations == 0:
        return cset
    return cset.with_candidates(erode_mask(c, iterations) for c in cset)
