"""Anatomical consistency checks for candidate coronary segments.

The coronary tree is a forest of segment classes rooted at the aorta. A
candidate set is first assigned to the left or right circulation, then walked
from the roots outward; candidates that cannot hang off the tree are removed
with a recorded reason.
"""
import dataclasses
import enum
import functools
import math
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType

import numpy as np
import yaml
from scipy import ndimage

from .candidates import SEGMENT_LABELS, CandidateSet

ANCESTRY_MODES = ("strict", "bridging")
DEFAULT_BRIDGE_DISTANCE = 50.0


class AnatomyGraphError(ValueError):
    pass


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Reason(str, enum.Enum):
    LATERALITY_CONFLICT = "laterality_conflict"
    ORPHAN_PATH = "orphan_path"
    DUPLICATE_CLASS = "duplicate_class"
    RELABELED = "relabeled"


@dataclass(frozen=True)
class AnatomyGraph:
    parents: MappingProxyType
    roots: tuple
    laterality: MappingProxyType
    families: tuple = ()

    @classmethod
    def from_edges(cls, edges, roots, laterality, families=()):
        """Build and validate a graph.

        ``laterality`` maps "left"/"right" to label lists. Checks: every label
        is a known segment class, each non-root has exactly one parent, the
        edges are acyclic and reach every vertex from a root, laterality covers
        all 25 classes exactly once and never changes along an edge.
        """
        roots = tuple(str(r) for r in roots)
        parents = {r: None for r in roots}
        for edge in edges:
            if len(edge) != 2:
                raise AnatomyGraphError(f"edge {edge!r} is not a (parent, child) pair")
            parent, child = str(edge[0]), str(edge[1])
            if child in roots:
                raise AnatomyGraphError(f"root {child} cannot have a parent")
            if parents.get(child) is not None:
                raise AnatomyGraphError(f"segment {child} has two parents ({parents[child]}, {parent})")
            parents[child] = parent
            parents.setdefault(parent, parents.get(parent))
        unknown = sorted(set(parents) - set(SEGMENT_LABELS))
        if unknown:
            raise AnatomyGraphError(f"unknown segment classes: {unknown}")
        missing = sorted(set(SEGMENT_LABELS) - set(parents), key=SEGMENT_LABELS.index)
        if missing:
            raise AnatomyGraphError(f"segment classes missing from the graph: {missing}")
        for label, parent in parents.items():
            if parent is None and label not in roots:
                raise AnatomyGraphError(f"segment {label} has no parent and is not a root")
        for label in parents:
            seen = {label}
            node = parents[label]
            while node is not None:
                if node in seen:
                    raise AnatomyGraphError(f"cycle through segment {node}")
                seen.add(node)
                node = parents[node]

        sides = {}
        for key, members in dict(laterality).items():
            try:
                side = Side(str(key).lower())
            except ValueError:
                raise AnatomyGraphError(f"laterality key {key!r} is not left/right") from None
            for label in members:
                label = str(label)
                if label in sides:
                    raise AnatomyGraphError(f"segment {label} listed on both sides")
                sides[label] = side
        if set(sides) != set(parents):
            gap = sorted(set(parents) ^ set(sides))
            raise AnatomyGraphError(f"laterality must cover every segment exactly; mismatch: {gap}")
        for label, parent in parents.items():
            if parent is not None and sides[parent] != sides[label]:
                raise AnatomyGraphError(f"edge {parent}->{label} crosses circulations")

        fams = tuple(tuple(str(x) for x in fam) for fam in families)
        seen = set()
        for fam in fams:
            if len(fam) < 2 or len(set(fam)) != len(fam):
                raise AnatomyGraphError(f"confusable family {fam} needs >= 2 distinct labels")
            if seen & set(fam):
                raise AnatomyGraphError(f"confusable families overlap at {sorted(seen & set(fam))}")
            seen |= set(fam)
            if not set(fam) <= set(parents):
                raise AnatomyGraphError(f"confusable family {fam} has unknown labels")
            if parents[fam[0]] is None:
                raise AnatomyGraphError(f"confusable family {fam} has no anchoring parent")
        return cls(MappingProxyType(parents), roots, MappingProxyType(sides), fams)

    @property
    def vertices(self):
        return tuple(self.parents)

    @property
    def edges(self):
        return tuple((p, c) for c, p in self.parents.items() if p is not None)

    def parent(self, label):
        return self.parents[label]

    def children(self, label):
        return tuple(c for c, p in self.parents.items() if p == label)

    def ancestors(self, label):
        """Ancestors nearest first."""
        out = []
        node = self.parents[label]
        while node is not None:
            out.append(node)
            node = self.parents[node]
        return tuple(out)

    def root_of(self, label):
        anc = self.ancestors(label)
        return anc[-1] if anc else label

    def side(self, label):
        return self.laterality[label]

    def breadth_first(self, root):
        order, queue = [], deque([root])
        while queue:
            node = queue.popleft()
            order.append(node)
            queue.extend(self.children(node))
        return order


def graph_from_mapping(doc):
    if not isinstance(doc, dict):
        raise AnatomyGraphError("anatomy config must be a mapping")
    for key in ("roots", "edges", "laterality"):
        if key not in doc:
            raise AnatomyGraphError(f"anatomy config lacks '{key}'")
    return AnatomyGraph.from_edges(doc["edges"], doc["roots"], doc["laterality"], doc.get("confusables", ()))


def load_anatomy_graph(path=None):
    """Load a YAML anatomy config; ``None`` gives the packaged SYNTAX graph."""
    if path is None:
        text = resources.files("angiotree").joinpath("data/syntax_graph.yaml").read_text()
    else:
        text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise AnatomyGraphError(f"cannot parse anatomy config: {exc}") from None
    return graph_from_mapping(doc)


@functools.lru_cache(maxsize=1)
def default_anatomy_graph():
    return load_anatomy_graph()


@dataclass(frozen=True)
class ValidationReport:
    kept: tuple
    removed: tuple = ()
    laterality: Side = None
    relabels: tuple = ()

    def kept_set(self, like):
        return like.with_candidates(self.kept)


def _candidates(cands):
    return list(cands.candidates if isinstance(cands, CandidateSet) else cands)


def classify_laterality(cands, graph=None):
    """Left or right circulation, by total confidence x area per side.

    A tie goes to the side holding the single most confident candidate, then
    to the left.
    """
    graph = graph or default_anatomy_graph()
    cands = _candidates(cands)
    if not cands:
        raise ValueError("cannot classify laterality of an empty candidate set")
    weight = {Side.LEFT: 0.0, Side.RIGHT: 0.0}
    best = {Side.LEFT: -1.0, Side.RIGHT: -1.0}
    for c in cands:
        side = graph.side(c.label)
        weight[side] += c.confidence * c.area
        best[side] = max(best[side], c.confidence)
    if weight[Side.LEFT] != weight[Side.RIGHT]:
        return max(weight, key=weight.get)
    return Side.RIGHT if best[Side.RIGHT] > best[Side.LEFT] else Side.LEFT


def mask_distance(a, b):
    """Smallest Euclidean distance between the pixels of two masks."""
    if np.any(a & b):
        return 0.0
    dist = ndimage.distance_transform_edt(~b)
    return float(dist[a].min())


def validate_tree(cands, graph=None, mode="bridging", bridge_distance=DEFAULT_BRIDGE_DISTANCE):
    """Remove candidates that contradict the coronary anatomy.

    Steps: drop the losing circulation (``laterality_conflict``); keep one
    candidate per class, highest confidence then larger area then lower
    source tag (``duplicate_class``); walk the chosen tree from its root and
    keep a candidate only if its parent class was kept (``orphan_path``).
    In ``bridging`` mode a missing parent is tolerated when the mask lies
    within ``bridge_distance`` pixels of the nearest kept ancestor's mask.
    Kept and removed lists follow input order.
    """
    if mode not in ANCESTRY_MODES:
        raise ValueError(f"mode must be one of {ANCESTRY_MODES}")
    graph = graph or default_anatomy_graph()
    cands = _candidates(cands)
    if not cands:
        return ValidationReport(kept=())
    side = classify_laterality(cands, graph)
    verdict = {}

    same = []
    for i, c in enumerate(cands):
        if graph.side(c.label) != side:
            verdict[i] = Reason.LATERALITY_CONFLICT
        else:
            same.append(i)

    winner = {}
    for i in same:
        c = cands[i]
        key = (-c.confidence, -c.area, c.source, i)
        if c.label not in winner or key < winner[c.label][0]:
            winner[c.label] = (key, i)
    for i in same:
        if winner[cands[i].label][1] != i:
            verdict[i] = Reason.DUPLICATE_CLASS

    kept_labels = {}
    for root in (r for r in graph.roots if graph.side(r) == side):
        for label in graph.breadth_first(root):
            if label not in winner:
                continue
            i = winner[label][1]
            parent = graph.parent(label)
            ok = parent is None or parent in kept_labels
            if not ok and mode == "bridging":
                anchor = next((a for a in graph.ancestors(label) if a in kept_labels), None)
                if anchor is not None:
                    d = mask_distance(cands[i].mask, cands[kept_labels[anchor]].mask)
                    ok = d <= bridge_distance
            if ok:
                kept_labels[label] = i
            else:
                verdict[i] = Reason.ORPHAN_PATH

    kept_idx = set(kept_labels.values())
    return ValidationReport(
        kept=tuple(cands[i] for i in range(len(cands)) if i in kept_idx),
        removed=tuple((cands[i], verdict[i]) for i in range(len(cands)) if i in verdict),
        laterality=side,
    )


def resolve_confusables(report, graph=None):
    """Reorder labels inside each confusable family by distance from its anchor.

    The candidates of a family present in ``report.kept`` are sorted by the
    Euclidean distance of their mask centroid from the centroid of the
    family's anchoring parent segment; the labels present are handed out in
    proximal-to-distal family order. Families without a kept anchor, or with
    fewer than two members present, are left alone.
    """
    graph = graph or default_anatomy_graph()
    kept = list(report.kept)
    relabels = list(report.relabels)
    for family in graph.families:
        members = [i for i, c in enumerate(kept) if c.label in family]
        if len(members) < 2:
            continue
        anchor_label = graph.parent(family[0])
        anchor = next((c for c in kept if c.label == anchor_label), None)
        if anchor is None:
            continue
        ay, ax = anchor.centroid

        def distance(i):
            cy, cx = kept[i].centroid
            return math.hypot(cy - ay, cx - ax)

        order = sorted(members, key=lambda i: (distance(i), family.index(kept[i].label)))
        labels = sorted((kept[i].label for i in members), key=family.index)
        for i, label in zip(order, labels):
            if kept[i].label != label:
                relabels.append((kept[i].label, label))
                kept[i] = kept[i].replace(label=label)
    return dataclasses.replace(report, kept=tuple(kept), relabels=tuple(relabels))


def apply_logic(cset, graph=None, mode="bridging", bridge_distance=DEFAULT_BRIDGE_DISTANCE):
    """validate_tree followed by resolve_confusables; returns (CandidateSet, report)."""
    report = resolve_confusables(validate_tree(cset, graph, mode, bridge_distance), graph)
    return report.kept_set(cset), report
