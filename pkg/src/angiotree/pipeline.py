"""Batch runners behind the CLI: filter recipes, candidate post-processing and scoring."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import candidates as cand
from .config import ORIGINAL
from .evaluation import evaluate
from .imageio import IMAGE_SUFFIXES, read_image, write_image
from .tree_logic import load_anatomy_graph, resolve_confusables, validate_tree

log = logging.getLogger(__name__)


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# prep


def run_stages(img, stages, only=None):
    """Run a recipe on one image; returns {stage name: output}.

    With ``only`` set, just that stage and the stages it reads from are run.
    """
    wanted = None
    if only is not None:
        by_name = {s.name: s for s in stages}
        if only not in by_name:
            raise KeyError(f"stage {only!r} is not in the recipe")
        wanted = set()
        name = only
        while name != ORIGINAL:
            wanted.add(name)
            name = by_name[name].source
    outputs = {ORIGINAL: img}
    for spec in stages:
        if wanted is not None and spec.name not in wanted:
            continue
        outputs[spec.name] = spec.run(outputs[spec.source])
    del outputs[ORIGINAL]
    if only is not None:
        return {only: outputs[only]}
    return outputs


@dataclass
class PrepSummary:
    written: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def list_images(input_dir):
    return sorted(p for p in Path(input_dir).iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def run_prep(config, input_dir, output_dir, stage=None, jobs=1):
    """Write ``<output>/<stage>/<stem>.<stage>.png`` for every image and stage."""
    output_dir = Path(output_dir)
    paths = list_images(input_dir)
    summary = PrepSummary()
    if not paths:
        log.warning("no images found in %s", input_dir)
        return summary
    names = [stage] if stage else [s.name for s in config.stages]
    for name in names:
        (output_dir / name).mkdir(parents=True, exist_ok=True)

    def one(path):
        try:
            img = read_image(path)
        except Exception as exc:  # any decoder failure means skip
            log.warning("skipping unreadable image %s: %s", path, exc)
            return path, None
        written = []
        for name, out in run_stages(img, config.stages, only=stage).items():
            target = output_dir / name / f"{path.stem}.{name}.png"
            write_image(target, out)
            written.append(target)
        return path, written

    for path, written in _map(one, paths, jobs):
        if written is None:
            summary.skipped.append(path)
        else:
            summary.written.extend(written)
    return summary


# ---------------------------------------------------------------------------
# post


def _event(stage, c, reason):
    return {"stage": stage, "class": c.label, "source": c.source,
            "confidence": round(c.confidence, 6), "area": c.area, "reason": reason}


def postprocess_image(sets, config, graph):
    """Fixed chain merge -> area -> class -> erode -> validate -> resolve for one image.

    Returns (final CandidateSet, log record). Stages missing from
    ``config.post_stages`` are skipped.
    """
    stages = config.post_stages
    events = []
    if "merge" in stages:
        current = cand.merge_ensemble(sets, config.iou)
    else:
        current = sets[0].with_candidates(c for s in sets for c in s)
    n_pooled = sum(len(s) for s in sets)
    if "area" in stages:
        kept = cand.area_filter(current, config.min_area)
        events += [_event("area", c, "area_filter") for c in current if c not in kept.candidates]
        current = kept
    if "class" in stages:
        kept = cand.class_filter(current, config.exclude)
        events += [_event("class", c, "class_excluded") for c in current if c not in kept.candidates]
        current = kept
    if "erode" in stages and config.erosion_iterations:
        current = cand.erode_set(current, config.erosion_iterations)
    record = {"image_id": current.image_id, "pooled": n_pooled, "merged": len(current)}
    if "validate" in stages:
        report = validate_tree(current, graph, config.ancestry, config.bridge_distance)
        if "resolve" in stages:
            report = resolve_confusables(report, graph)
        events += [_event("validate", c, reason.value) for c, reason in report.removed]
        record["laterality"] = report.laterality.value if report.laterality else None
        record["relabels"] = [list(r) for r in report.relabels]
        current = report.kept_set(current)
    record["events"] = events
    record["kept"] = [c.label for c in current]
    return current, record


def _group_by_image(files):
    per_image = {}
    for path in files:
        for cset in cand.parse_candidates(path):
            per_image.setdefault(cset.image_id, []).append(cset)
    return per_image


def run_post(config, prediction_files, output_file, log_file=None, jobs=1):
    """Post-process one or more detector outputs into a final candidate file.

    Each prediction file is one ensemble member; its stem tags candidates
    lacking an explicit ``source``. The log (default ``<output>.log.json``)
    lists every removal with its reason.
    """
    graph = load_anatomy_graph(config.graph)
    per_image = _group_by_image(prediction_files)
    ids = sorted(per_image)
    results = _map(lambda iid: postprocess_image(per_image[iid], config, graph), ids, jobs)
    final = [r[0] for r in results]
    records = [r[1] for r in results]
    cand.write_candidates(output_file, final)
    log_file = Path(log_file) if log_file else Path(str(output_file) + ".log.json")
    cand.dump_json({"images": records}, log_file)
    return final, records


# ---------------------------------------------------------------------------
# eval


def run_eval(prediction_file, truth_file, report_file=None):
    preds = cand.parse_candidates(prediction_file)
    truth = cand.parse_candidates(truth_file)
    report = evaluate(preds, truth)
    if report_file is not None:
        doc = report.to_dict()
        doc["images"] = [{"id": s.image_id, "width": s.width, "height": s.height,
                          "file_name": s.file_name} for s in truth]
        doc["categories"] = cand.category_records()
        cand.dump_json(doc, report_file)
    return report
