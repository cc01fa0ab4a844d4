"""Classical stages of a coronary angiogram segmentation pipeline.

Enhancement filters (spectral, morphological, guided, histogram) and the
post-processing that turns detector candidates into an anatomically
consistent labelling, plus pixel F1 scoring.
"""
from ._backend import active as active_backend, set_backend, use_backend
from .candidates import (
    CandidateFileError, CandidateSegment, CandidateSet, area_filter, class_filter,
    merge_ensemble, parse_candidates, write_candidates,
)
from .evaluation import ClassScore, EvalReport, evaluate, f1_image
from .guided import GuidedFilterParams, fast_guided_filter, guided_filter
from .image_core import adaptive_equalize, gaussian_smooth, image_stats, normalize, rescale
from .morphology import StructuringElement, black_hat, multiscale_tophat_enhance, top_hat
from .spectral import butterworth_mask, dft2, directional_filter_bank, homomorphic_enhance, idft2
from .tree_logic import (
    AnatomyGraph, Reason, Side, apply_logic, classify_laterality, default_anatomy_graph,
    load_anatomy_graph, resolve_confusables, validate_tree,
)

__version__ = "0.1.0"
