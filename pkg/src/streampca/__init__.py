"""Streaming PCA layouts: stable 2D embeddings of evolving data streams.

The package keeps a 2D scatter of a multidimensional stream current in
real time: an incremental PCA model absorbs completed points batch by
batch, each refreshed layout is aligned onto the previous frame so the
display stays recognizable, and points whose features are still arriving
are placed early from the distances their known features already imply,
annotated with how uncertain that placement is.
"""

from .alignment import PointCorrespondence, SimilarityTransform, fit as fit_alignment
from .ipca import Batch, PcaModel, effective_history, pc_loadings, project, update
from .placement import (
    DistanceProfile,
    EstimatedPlacement,
    SubLayout,
    build_sub_layout,
    estimate,
)
from .pipeline import (
    EventRejected,
    LayoutSnapshot,
    Pipeline,
    PipelineConfig,
    StreamEvent,
)
from .uncertainty import (
    CompletionProfile,
    UncertaintyRecord,
    UncertaintyState,
    combined_uncertainty,
    loading_uncertainty,
    observed_error,
    strain_uncertainty,
    update_beta,
)

__version__ = "0.1.0"

__all__ = [
    "Batch",
    "CompletionProfile",
    "DistanceProfile",
    "EstimatedPlacement",
    "EventRejected",
    "LayoutSnapshot",
    "PcaModel",
    "Pipeline",
    "PipelineConfig",
    "PointCorrespondence",
    "SimilarityTransform",
    "StreamEvent",
    "SubLayout",
    "UncertaintyRecord",
    "UncertaintyState",
    "build_sub_layout",
    "combined_uncertainty",
    "effective_history",
    "estimate",
    "fit_alignment",
    "loading_uncertainty",
    "observed_error",
    "pc_loadings",
    "project",
    "strain_uncertainty",
    "update",
    "update_beta",
]
