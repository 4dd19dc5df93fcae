"""Bit-exact on-disk formats for embedding sets and temporal annotations.

An embedding set directory holds three files:

- ``meta.json``   {"dataset": str, "dim": int, "level": "clip"|"patch",
                   "dtype": "f32le", "classes": [str, ...]}
- ``index.jsonl`` one record per line: {"id": str, "label": int (optional),
                  "clips": int, "tokens": int, "offset": int}; the offset
                  counts scalars (not bytes) from the start of the buffer and
                  blocks are stored row-major [clips][tokens][dim]
- ``data.bin``    raw concatenated 32-bit little-endian IEEE-754 scalars

Sets are immutable after load and safe to share across readers. Loading is
total: every malformed input raises StoreError, never a partial set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

_DTYPE = np.dtype("<f4")


class StoreError(ValueError):
    """Malformed or inconsistent on-disk data."""


@dataclass
class EmbeddingRecord:
    id: str
    label: Optional[int]
    clips: int
    tokens: int
    offset: int  # in scalars from buffer start

    @property
    def size(self) -> int:
        return self.clips * self.tokens


@dataclass
class EmbeddingSet:
    """A dataset of per-video embeddings over one contiguous float32 buffer."""

    dataset_name: str
    dim: int
    level: str  # "clip" | "patch"
    class_names: list[str]
    records: list[EmbeddingRecord]
    data: np.ndarray = field(repr=False)  # flat float32, read-only

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32).reshape(-1)
        self.data.flags.writeable = False
        validate_embedding_set(self)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def block(self, record: EmbeddingRecord) -> np.ndarray:
        """Read-only [clips, tokens, dim] view of one record's embeddings."""
        start = record.offset * self.dim
        stop = start + record.size * self.dim
        return self.data[start:stop].reshape(record.clips, record.tokens, self.dim)

    def block_by_id(self, video_id: str) -> np.ndarray:
        for rec in self.records:
            if rec.id == video_id:
                return self.block(rec)
        raise KeyError(video_id)

    def labels(self) -> np.ndarray:
        """Label vector; raises if any record is unlabeled."""
        out = np.empty(len(self.records), dtype=np.int64)
        for i, rec in enumerate(self.records):
            if rec.label is None:
                raise StoreError(f"record {rec.id!r} has no label")
            out[i] = rec.label
        return out


def validate_embedding_set(es: EmbeddingSet) -> None:
    if es.dim < 1:
        raise StoreError(f"dim must be positive, got {es.dim}")
    if es.level not in ("clip", "patch"):
        raise StoreError(f"level must be 'clip' or 'patch', got {es.level!r}")
    seen: set[str] = set()
    expected_offset = 0
    for lineno, rec in enumerate(es.records, start=1):
        where = f"record {rec.id!r} (line {lineno})"
        if rec.id in seen:
            raise StoreError(f"{where}: duplicate id")
        seen.add(rec.id)
        if rec.clips < 1 or rec.tokens < 1:
            raise StoreError(f"{where}: clips and tokens must be >= 1")
        if es.level == "clip" and rec.tokens != 1:
            raise StoreError(f"{where}: clip-level set requires tokens=1")
        if rec.label is not None and not 0 <= rec.label < len(es.class_names):
            raise StoreError(
                f"{where}: label {rec.label} out of range for "
                f"{len(es.class_names)} classes"
            )
        if rec.offset != expected_offset:
            raise StoreError(
                f"{where}: offset {rec.offset} overlaps or leaves a gap "
                f"(expected {expected_offset})"
            )
        expected_offset += rec.size
        if expected_offset * es.dim > es.data.size:
            raise StoreError(f"{where}: block extends past end of buffer")
    if expected_offset * es.dim != es.data.size:
        raise StoreError(
            f"buffer holds {es.data.size} scalars but records account for "
            f"{expected_offset * es.dim}"
        )


class EmbeddingSetBuilder:
    """Incremental construction of an EmbeddingSet from per-record blocks."""

    def __init__(self, dataset_name: str, dim: int, level: str, class_names: list[str]):
        self.dataset_name = dataset_name
        self.dim = dim
        self.level = level
        self.class_names = list(class_names)
        self._records: list[EmbeddingRecord] = []
        self._blocks: list[np.ndarray] = []
        self._offset = 0

    def add(self, video_id: str, block: np.ndarray, label: Optional[int] = None) -> None:
        block = np.asarray(block, dtype=np.float32)
        if block.ndim == 2:  # [clips, dim] shorthand for single-token records
            block = block[:, None, :]
        if block.ndim != 3:
            raise StoreError(f"record {video_id!r}: block must be [clips, tokens, dim]")
        if block.shape[2] != self.dim:
            raise StoreError(
                f"record {video_id!r}: dim mismatch "
                f"(block has {block.shape[2]}, set has {self.dim})"
            )
        clips, tokens, _ = block.shape
        self._records.append(EmbeddingRecord(video_id, label, clips, tokens, self._offset))
        self._blocks.append(np.ascontiguousarray(block).reshape(-1))
        self._offset += clips * tokens

    def build(self) -> EmbeddingSet:
        data = (
            np.concatenate(self._blocks)
            if self._blocks
            else np.zeros(0, dtype=np.float32)
        )
        return EmbeddingSet(
            dataset_name=self.dataset_name,
            dim=self.dim,
            level=self.level,
            class_names=self.class_names,
            records=self._records,
            data=data,
        )


# ---------------------------------------------------------------------------
# Load / save
# ---------------------------------------------------------------------------

def load_embedding_set(root_path) -> EmbeddingSet:
    """Load and fully validate an embedding set directory."""
    root = Path(root_path)
    for name in ("meta.json", "index.jsonl", "data.bin"):
        if not (root / name).is_file():
            raise StoreError(f"missing file {root / name}")

    try:
        meta = json.loads((root / "meta.json").read_text())
    except json.JSONDecodeError as exc:
        raise StoreError(f"malformed meta.json: {exc}") from exc
    for key in ("dataset", "dim", "level", "dtype", "classes"):
        if key not in meta:
            raise StoreError(f"meta.json missing key {key!r}")
    if meta["dtype"] != "f32le":
        raise StoreError(f"unsupported dtype {meta['dtype']!r} (expected 'f32le')")

    records: list[EmbeddingRecord] = []
    with open(root / "index.jsonl") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreError(f"index.jsonl line {lineno}: malformed JSON: {exc}") from exc
            try:
                records.append(
                    EmbeddingRecord(
                        id=row["id"],
                        label=row.get("label"),
                        clips=int(row["clips"]),
                        tokens=int(row["tokens"]),
                        offset=int(row["offset"]),
                    )
                )
            except KeyError as exc:
                raise StoreError(f"index.jsonl line {lineno}: missing field {exc}") from exc

    data = np.fromfile(root / "data.bin", dtype=_DTYPE).astype(np.float32, copy=False)
    return EmbeddingSet(
        dataset_name=meta["dataset"],
        dim=int(meta["dim"]),
        level=meta["level"],
        class_names=list(meta["classes"]),
        records=records,
        data=data,
    )


def write_embedding_set(es: EmbeddingSet, root_path) -> None:
    """Write a set so that load_embedding_set round-trips bit-exactly."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "dataset": es.dataset_name,
        "dim": es.dim,
        "level": es.level,
        "dtype": "f32le",
        "classes": es.class_names,
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    with open(root / "index.jsonl", "w") as fh:
        for rec in es.records:
            row = {"id": rec.id, "clips": rec.clips, "tokens": rec.tokens, "offset": rec.offset}
            if rec.label is not None:
                row["label"] = int(rec.label)
            fh.write(json.dumps(row) + "\n")
    es.data.astype(_DTYPE, copy=False).tofile(root / "data.bin")


# ---------------------------------------------------------------------------
# Token pooling
# ---------------------------------------------------------------------------

def pool_tokens(record_block: np.ndarray, mode: str = "mean") -> np.ndarray:
    """Pool the token axis of a [clips, tokens, dim] block down to [clips, dim].

    Accumulates in float64, rounds the result back to float32.
    """
    if mode != "mean":
        raise ValueError(f"unsupported pooling mode {mode!r}")
    block = np.asarray(record_block)
    if block.ndim != 3:
        raise ValueError("record block must be [clips, tokens, dim]")
    return block.astype(np.float64).mean(axis=1).astype(np.float32)


# ---------------------------------------------------------------------------
# Temporal annotations
# ---------------------------------------------------------------------------

@dataclass
class SegmentSet:
    """Action instances of one video: (start_sec, end_sec, label, score?)."""

    video_id: str
    duration_sec: float
    segments: list[tuple]  # (start, end, label) or (start, end, label, score)


@dataclass
class FrameLabelSeq:
    """Per-frame class labels of one video at a fixed frame rate."""

    video_id: str
    fps: float
    labels: np.ndarray

    @property
    def duration_sec(self) -> float:
        return len(self.labels) / self.fps


def load_segment_annotations(path, n_classes: Optional[int] = None) -> list[SegmentSet]:
    """Load segment annotations: {"videos": [{"id", "duration_sec", "segments":
    [{"start", "end", "label", "score"?}]}]}."""
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise StoreError(f"missing file {path}") from exc
    except json.JSONDecodeError as exc:
        raise StoreError(f"malformed JSON in {path}: {exc}") from exc
    if "videos" not in doc:
        raise StoreError(f"{path}: missing 'videos' key")

    out = []
    for vid in doc["videos"]:
        video_id = vid.get("id")
        duration = float(vid.get("duration_sec", -1))
        if video_id is None or duration < 0:
            raise StoreError(f"{path}: video entry needs 'id' and nonnegative 'duration_sec'")
        segs = []
        for seg in vid.get("segments", []):
            start, end, label = float(seg["start"]), float(seg["end"]), int(seg["label"])
            where = f"video {video_id!r} segment [{start}, {end})"
            if not 0 <= start < end:
                raise StoreError(f"{where}: requires 0 <= start < end")
            if end > duration:
                raise StoreError(f"{where}: end exceeds duration {duration}")
            if label < 0 or (n_classes is not None and label >= n_classes):
                raise StoreError(f"{where}: label {label} out of range")
            if "score" in seg:
                score = float(seg["score"])
                if not 0.0 <= score <= 1.0:
                    raise StoreError(f"{where}: score {score} outside [0, 1]")
                segs.append((start, end, label, score))
            else:
                segs.append((start, end, label))
        out.append(SegmentSet(video_id=video_id, duration_sec=duration, segments=segs))
    return out


def load_frame_labels(path, n_classes: Optional[int] = None) -> list[FrameLabelSeq]:
    """Load frame labels: {"videos": [{"id", "fps", "labels": [int, ...]}]}."""
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise StoreError(f"missing file {path}") from exc
    except json.JSONDecodeError as exc:
        raise StoreError(f"malformed JSON in {path}: {exc}") from exc
    if "videos" not in doc:
        raise StoreError(f"{path}: missing 'videos' key")

    out = []
    for vid in doc["videos"]:
        video_id = vid.get("id")
        fps = float(vid.get("fps", 0))
        labels = vid.get("labels", [])
        if video_id is None:
            raise StoreError(f"{path}: video entry needs 'id'")
        if fps <= 0:
            raise StoreError(f"video {video_id!r}: fps must be positive")
        if len(labels) == 0:
            raise StoreError(f"video {video_id!r}: empty label list")
        arr = np.asarray(labels, dtype=np.int64)
        if arr.min() < 0 or (n_classes is not None and arr.max() >= n_classes):
            raise StoreError(f"video {video_id!r}: label out of range")
        out.append(FrameLabelSeq(video_id=video_id, fps=fps, labels=arr))
    return out
