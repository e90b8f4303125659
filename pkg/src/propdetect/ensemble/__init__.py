from .manifest import Manifest, Source, ingest_fragments, ingest_predictions, read_manifest, threshold_column
from .merge import merge_fragments
from .postprocess import postprocess_corpus, repetition_postprocess
from .voting import (
    RELAX_GRID,
    EnsembleConfig,
    PredictionMatrix,
    build_matrix,
    column_id,
    ensemble_plus,
    majority_vote,
    relax_vote,
    vote,
)

__all__ = [
    "RELAX_GRID", "EnsembleConfig", "Manifest", "PredictionMatrix", "Source", "build_matrix",
    "column_id", "ensemble_plus", "ingest_fragments", "ingest_predictions", "majority_vote",
    "merge_fragments", "postprocess_corpus", "read_manifest", "relax_vote",
    "repetition_postprocess", "threshold_column", "vote",
]
