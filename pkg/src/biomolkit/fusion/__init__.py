"""Motif-guided multimodal feature fusion (forward pass only)."""

from .featurize import (
    FEATURE_DIMS,
    KINDS,
    MOL2D,
    MOL3D,
    PROT1D,
    PROT3D,
    MissingCoordinates,
    ModalityEmbedding,
    featurize,
)
from .model import MultimodalFeatures, extract_features, fuse, gelu, layer_norm, project_concat
from .weights import (
    ArchiveError,
    FusionConfig,
    FusionWeights,
    NonFiniteWeights,
    parameter_shapes,
    read_archive,
    write_archive,
)

__all__ = [
    "FEATURE_DIMS", "KINDS", "MOL2D", "MOL3D", "PROT1D", "PROT3D",
    "MissingCoordinates", "ModalityEmbedding", "featurize",
    "MultimodalFeatures", "extract_features", "fuse", "gelu", "layer_norm", "project_concat",
    "ArchiveError", "FusionConfig", "FusionWeights", "NonFiniteWeights",
    "parameter_shapes", "read_archive", "write_archive",
]
