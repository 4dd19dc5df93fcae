"""Evaluation engine for frozen video-model embeddings.

Everything operates on serialized embedding sets (see `vembench.store`);
no video decoding or model inference happens here.
"""

__version__ = "0.1.0"

from vembench.store import (
    EmbeddingRecord,
    EmbeddingSet,
    FrameLabelSeq,
    SegmentSet,
    StoreError,
    load_embedding_set,
    load_frame_labels,
    load_segment_annotations,
    pool_tokens,
    write_embedding_set,
)

__all__ = [
    "EmbeddingRecord",
    "EmbeddingSet",
    "FrameLabelSeq",
    "SegmentSet",
    "StoreError",
    "load_embedding_set",
    "load_frame_labels",
    "load_segment_annotations",
    "pool_tokens",
    "write_embedding_set",
    "__version__",
]
