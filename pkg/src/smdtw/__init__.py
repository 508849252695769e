"""Online signature verification with stability-modulated DTW."""

__version__ = "0.1.0"

from .config import Config
from .dtwcore import WeightParams, dtw, smdtw, weight
from .evalharness import ExperimentSpec, ScorePool, det_points, eer, report_table, run_experiment
from .features import FeatureSet, build_features
from .segmentation import Segmentation, segment
from .shapesim import rasterize, stroke_similarity
from .sigmodel import Signature, SamplePoint, parse_canonical, parse_svc2004, synth_signature
from .stability import relevance_profile, stability_regions
from .verifier import ReferenceSet, decide, enroll, score_s1, score_s2

__all__ = [
    "Config", "ExperimentSpec", "FeatureSet", "ReferenceSet", "SamplePoint", "ScorePool",
    "Segmentation", "Signature", "WeightParams", "build_features", "decide", "det_points",
    "dtw", "eer", "enroll", "parse_canonical", "parse_svc2004", "rasterize",
    "relevance_profile", "report_table", "run_experiment", "score_s1", "score_s2",
    "segment", "smdtw", "stability_regions", "stroke_similarity", "synth_signature", "weight",
]
