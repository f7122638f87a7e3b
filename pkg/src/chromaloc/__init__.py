"""Content-based image retrieval with 47-bin HSV histograms and color locations."""

from .colorspace import (
    BIN_COUNT,
    bin_count,
    delta_e,
    describe_bin,
    quantize,
    rgb_to_hsv,
    rgb_to_lab,
)
from .evaluation import (
    EvalReport,
    QueryEval,
    evaluate,
    load_ground_truth,
    precision,
    recall,
    save_ground_truth,
)
from .index import (
    IncompatibleIndexError,
    Index,
    IndexFormatError,
    UnsupportedVersionError,
    build_index,
    load_image,
    load_index,
    query,
    save_index,
)
from .matching import (
    DegenerateGeometryError,
    DistanceParams,
    SimilarityTransform,
    combined_distance,
    compare_locations,
    fit_transform,
    hist_distance,
    location_distance,
    location_term,
    match_locations,
)
from .signature import (
    ColorLocation,
    Signature,
    SignatureParams,
    compute_histogram,
    compute_locations,
    extract_signature,
    preprocess,
)
from .synth import SynthSpec, generate_collection

__version__ = "0.1.0"

__all__ = [
    "BIN_COUNT",
    "ColorLocation",
    "DegenerateGeometryError",
    "DistanceParams",
    "EvalReport",
    "IncompatibleIndexError",
    "Index",
    "IndexFormatError",
    "QueryEval",
    "Signature",
    "SignatureParams",
    "SimilarityTransform",
    "SynthSpec",
    "UnsupportedVersionError",
    "bin_count",
    "build_index",
    "combined_distance",
    "compare_locations",
    "compute_histogram",
    "compute_locations",
    "delta_e",
    "describe_bin",
    "evaluate",
    "extract_signature",
    "fit_transform",
    "generate_collection",
    "hist_distance",
    "load_ground_truth",
    "load_image",
    "load_index",
    "location_distance",
    "location_term",
    "match_locations",
    "precision",
    "preprocess",
    "quantize",
    "query",
    "recall",
    "rgb_to_hsv",
    "rgb_to_lab",
    "save_ground_truth",
    "save_index",
]
