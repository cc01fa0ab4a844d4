"""Pipeline configuration (YAML).

Layout::

    prep:
      stages:
        - {name: homomorphic, source: original, params: {d0: 12, n: 2}}
        ...
    post:
      min_area: 450
      exclude: ["10", "10a", ...]
      iou: 0.5
      ancestry: bridging        # or strict
      bridge_distance: 50
      graph: null               # anatomy YAML, null = packaged SYNTAX graph
      erosion_iterations: 0
      stages: [merge, area, class, erode, validate, resolve]
"""
import dataclasses
import inspect
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import guided, image_core, morphology, spectral
from .candidates import DEFAULT_EXCLUDED, DEFAULT_MIN_AREA, LABELS
from .tree_logic import ANCESTRY_MODES, DEFAULT_BRIDGE_DISTANCE


class ConfigError(ValueError):
    pass


ORIGINAL = "original"

# name -> (operation, default parameters, default source)
STAGE_TABLE = {
    "homomorphic": (spectral.homomorphic_enhance, {"d0": 12.0, "n": 2, "kind": "highpass"}, ORIGINAL),
    "normalize": (image_core.normalize, {"m0": 128.0, "var0": 100.0}, "homomorphic"),
    "tophat": (morphology.multiscale_tophat_enhance, {"radii": list(morphology.DEFAULT_RADII)}, "homomorphic"),
    "equalize": (image_core.adaptive_equalize, {"tile": 64, "clip_limit": 0.01}, ORIGINAL),
    "smooth": (image_core.gaussian_smooth, {"sigma": 2.0}, ORIGINAL),
    "guided": (guided.guided_filter, {"radius": 8, "eps": 0.2, "subsample": 2}, ORIGINAL),
    "dfb": (spectral.directional_filter_bank,
            {"directions": 8, "cutoff": math.pi / 16, "stopband_db": 40.0}, ORIGINAL),
}

POST_STAGES = ("merge", "area", "class", "erode", "validate", "resolve")


@dataclass(frozen=True)
class StageSpec:
    name: str
    source: str = ORIGINAL
    params: dict = field(default_factory=dict)

    def run(self, img):
        op = STAGE_TABLE[self.name][0]
        return op(img, **self.params)


def default_stages():
    return tuple(StageSpec(name, src, dict(params)) for name, (_, params, src) in STAGE_TABLE.items())


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple = field(default_factory=default_stages)
    exclude: tuple = DEFAULT_EXCLUDED
    min_area: int = DEFAULT_MIN_AREA
    iou: float = 0.5
    ancestry: str = "bridging"
    bridge_distance: float = DEFAULT_BRIDGE_DISTANCE
    graph: str = None
    erosion_iterations: int = 0
    post_stages: tuple = POST_STAGES

    def stage(self, name):
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def replace(self, **changes):
        cfg = dataclasses.replace(self, **changes)
        validate_config(cfg)
        return cfg


def _check_stage(spec, earlier):
    if spec.name not in STAGE_TABLE:
        raise ConfigError(f"unknown prep stage {spec.name!r}; known: {sorted(STAGE_TABLE)}")
    if spec.source != ORIGINAL and spec.source not in earlier:
        raise ConfigError(f"stage {spec.name!r}: source {spec.source!r} is neither 'original' nor an earlier stage")
    op = STAGE_TABLE[spec.name][0]
    try:
        inspect.signature(op).bind(None, **spec.params)
    except TypeError as exc:
        raise ConfigError(f"stage {spec.name!r}: {exc}") from None
    # preconditions are enforced by the operations themselves; a dry run on a
    # small ramp surfaces them at load time
    probe = np.add.outer(np.arange(16.0), np.arange(16.0)) * 8.0
    try:
        spec.run(probe)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"stage {spec.name!r}: {exc}") from None


def validate_config(cfg):
    names = []
    for spec in cfg.stages:
        if spec.name in names:
            raise ConfigError(f"stage {spec.name!r} listed twice")
        _check_stage(spec, names)
        names.append(spec.name)
    bad = sorted(set(cfg.exclude) - set(LABELS))
    if bad:
        raise ConfigError(f"unknown class codes in exclude: {bad}")
    if cfg.min_area < 0:
        raise ConfigError("min_area must be >= 0")
    if not 0.0 < cfg.iou <= 1.0:
        raise ConfigError("iou must lie in (0, 1]")
    if cfg.ancestry not in ANCESTRY_MODES:
        raise ConfigError(f"ancestry must be one of {ANCESTRY_MODES}")
    if cfg.bridge_distance < 0:
        raise ConfigError("bridge_distance must be >= 0")
    if cfg.erosion_iterations < 0:
        raise ConfigError("erosion_iterations must be >= 0")
    order = [POST_STAGES.index(s) if s in POST_STAGES else -1 for s in cfg.post_stages]
    if -1 in order:
        raise ConfigError(f"unknown post stage in {list(cfg.post_stages)}; known: {list(POST_STAGES)}")
    if order != sorted(set(order)):
        raise ConfigError(f"post stages must keep the order {list(POST_STAGES)}")
    if "resolve" in cfg.post_stages and "validate" not in cfg.post_stages:
        raise ConfigError("post stage 'resolve' requires 'validate'")
    return cfg


def config_from_mapping(doc):
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - {"prep", "post"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    prep = doc.get("prep") or {}
    if "stages" in prep:
        stages = []
        for i, entry in enumerate(prep["stages"]):
            if isinstance(entry, str):
                entry = {"name": entry}
            if not isinstance(entry, dict) or "name" not in entry:
                raise ConfigError(f"prep stage {i}: needs a 'name'")
            name = entry["name"]
            if name not in STAGE_TABLE:
                raise ConfigError(f"unknown prep stage {name!r}; known: {sorted(STAGE_TABLE)}")
            _, defaults, default_src = STAGE_TABLE[name]
            params = dict(defaults)
            params.update(entry.get("params") or {})
            stages.append(StageSpec(name, entry.get("source", default_src), params))
        kwargs["stages"] = tuple(stages)
    post = doc.get("post") or {}
    fields = {"exclude", "min_area", "iou", "ancestry", "bridge_distance", "graph",
              "erosion_iterations", "stages"}
    unknown = set(post) - fields
    if unknown:
        raise ConfigError(f"unknown post options: {sorted(unknown)}")
    for key in fields - {"stages"}:
        if key in post:
            kwargs[key] = post[key]
    if "exclude" in kwargs:
        kwargs["exclude"] = tuple(str(x) for x in kwargs["exclude"])
    if "stages" in post:
        kwargs["post_stages"] = tuple(post["stages"])
    try:
        cfg = PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return validate_config(cfg)


def load_config(path=None):
    if path is None:
        return validate_config(PipelineConfig())
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = config_from_mapping(doc)
    if cfg.graph is not None:
        graph = Path(cfg.graph)
        if not graph.is_absolute():
            cfg = dataclasses.replace(cfg, graph=str(Path(path).parent / graph))
    return cfg
