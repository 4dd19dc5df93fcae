"""Frame-index and crop schedules for all sampling regimes.

A planner never touches pixels: it emits the frame indices and spatial
offsets an extractor should realize. Two temporal regimes exist: uniform
sampling of N frames over the whole video, and division into fixed-duration
clips (optionally overlapping when the stride is shorter than the clip).
Every operation here is a pure function, safe to call concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class ClipPlan:
    clip_index: int
    start_sec: float
    frame_indices: list[int]


@dataclass
class ViewPlan:
    spatial_offset: int  # pixels along the long side
    temporal_clip: ClipPlan
    view_id: tuple[int, int]  # (spatial i < m, temporal j < n)


@dataclass
class FeatureSequence:
    video_id: str
    stride_sec: float
    features: np.ndarray = field(repr=False)  # [length, dim]

    def __post_init__(self):
        self.features = np.asarray(self.features)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValueError("features must be a nonempty [length, dim] array")
        if self.stride_sec <= 0:
            raise ValueError("stride_sec must be positive")


def _round_half_away(x) -> np.ndarray:
    """Round half away from zero; deterministic across platforms
    (np.round rounds half to even)."""
    x = np.asarray(x, dtype=np.float64)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def plan_uniform(source_frames: int, n_frames: int) -> list[int]:
    """Indices of n_frames sampled at a uniform stride over a video of
    source_frames frames. Duplicates appear when n_frames > source_frames."""
    if source_frames < 1:
        raise ValueError("source_frames must be >= 1")
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    positions = np.linspace(0.0, source_frames - 1.0, n_frames)
    return _round_half_away(positions).tolist()


def plan_strided_clip(
    start_frame: int, n_frames: int, stride: int, source_frames: int
) -> list[int]:
    """Indices [start, start+stride, ...], each clamped to source_frames-1."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if start_frame >= source_frames:
        raise ValueError(
            f"start_frame {start_frame} outside video of {source_frames} frames"
        )
    idx = start_frame + stride * np.arange(n_frames, dtype=np.int64)
    return np.minimum(idx, source_frames - 1).tolist()


def _clip_frames(start_sec: float, clip_sec: float, fps: float, total_frames: int,
                 n_frames: int) -> list[int]:
    """Uniformly sample n_frames from the frame span covered by one clip."""
    first = int(_round_half_away(start_sec * fps))
    first = min(max(first, 0), total_frames - 1)
    last_ex = int(_round_half_away((start_sec + clip_sec) * fps))
    last_ex = min(max(last_ex, first + 1), total_frames)
    span = last_ex - first
    return [first + i for i in plan_uniform(span, n_frames)]


def plan_multiclip(
    duration_sec: float,
    fps: float,
    clip_sec: float,
    stride_sec: Optional[float] = None,
    n_frames: int = 16,
) -> list[ClipPlan]:
    """Divide a video into fixed-duration clips with stride stride_sec.

    Clips start at 0, stride, 2*stride, ... while start + clip_sec fits the
    video. A stride shorter than the clip length yields overlap for dense
    extraction. Videos shorter than one clip produce a single clip at 0; if
    the last regular clip stops short of the video end, one extra clip is
    anchored at duration - clip_sec so every instant is covered.
    """
    if fps <= 0:
        raise ValueError("fps must be positive")
    if clip_sec <= 0:
        raise ValueError("clip_sec must be positive")
    if stride_sec is None:
        stride_sec = clip_sec
    if not 0 < stride_sec <= clip_sec:
        raise ValueError("stride must satisfy 0 < stride <= clip length")

    total_frames = max(1, int(_round_half_away(duration_sec * fps)))
    eps = 1e-9 * max(1.0, duration_sec)

    starts: list[float] = []
    k = 0
    while k * stride_sec + clip_sec <= duration_sec + eps:
        starts.append(k * stride_sec)
        k += 1
    if not starts:
        starts = [0.0]
    elif starts[-1] + clip_sec < duration_sec - eps:
        starts.append(max(0.0, duration_sec - clip_sec))

    return [
        ClipPlan(
            clip_index=i,
            start_sec=s,
            frame_indices=_clip_frames(s, clip_sec, fps, total_frames, n_frames),
        )
        for i, s in enumerate(starts)
    ]


def plan_views(
    duration_sec: float,
    fps: float,
    short_side: int,
    long_side: int,
    m: int,
    n: int,
    n_frames: int = 16,
    temporal_stride: Optional[int] = None,
    clip_sec: Optional[float] = None,
) -> list[ViewPlan]:
    """m spatial crops along the long side x n temporal clips = m*n views.

    Exactly one of temporal_stride (frame-strided clips) or clip_sec
    (fixed-duration clips) selects the temporal regime.
    """
    if long_side < short_side:
        raise ValueError("long_side must be >= short_side")
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    if (temporal_stride is None) == (clip_sec is None):
        raise ValueError("give exactly one of temporal_stride or clip_sec")
    if fps <= 0:
        raise ValueError("fps must be positive")

    total_frames = max(1, int(_round_half_away(duration_sec * fps)))
    offsets = _round_half_away(np.linspace(0.0, long_side - short_side, m)).tolist()

    clips: list[ClipPlan] = []
    if temporal_stride is not None:
        span = (n_frames - 1) * temporal_stride + 1
        max_start = max(0, total_frames - span)
        starts = _round_half_away(np.linspace(0.0, max_start, n)).tolist()
        for j, sf in enumerate(starts):
            clips.append(
                ClipPlan(
                    clip_index=j,
                    start_sec=sf / fps,
                    frame_indices=plan_strided_clip(sf, n_frames, temporal_stride, total_frames),
                )
            )
    else:
        max_start = max(0.0, duration_sec - clip_sec)
        starts = np.linspace(0.0, max_start, n)
        for j, s in enumerate(starts):
            clips.append(
                ClipPlan(
                    clip_index=j,
                    start_sec=float(s),
                    frame_indices=_clip_frames(s, clip_sec, fps, total_frames, n_frames),
                )
            )

    return [
        ViewPlan(spatial_offset=int(off), temporal_clip=clip, view_id=(i, j))
        for i, off in enumerate(offsets)
        for j, clip in enumerate(clips)
    ]


def aggregate_clip_embeddings(clips: np.ndarray, method: str = "mean") -> np.ndarray:
    """Collapse [M, dim] clip embeddings into one video embedding
    (float64 accumulation)."""
    if method != "mean":
        raise ValueError(f"unsupported aggregate method {method!r}")
    arr = np.asarray(clips, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("clips must be a nonempty [M, dim] array")
    return arr.mean(axis=0)


def postprocess_features(
    seq: FeatureSequence, mode: str, target_len: int
) -> FeatureSequence:
    """Post-process a temporal feature sequence for a localization head.

    crop: truncate to the first target_len rows when longer, else unchanged.
    resize: linear interpolation of rows at linspace(0, L-1, target_len);
    preserves the first and last rows exactly and rescales stride_sec by
    (L-1)/(target_len-1) so physical duration is kept.
    """
    feats = seq.features
    length = feats.shape[0]
    if mode == "crop":
        if length <= target_len:
            return seq
        return FeatureSequence(seq.video_id, seq.stride_sec, feats[:target_len].copy())
    if mode == "resize":
        if target_len < 2:
            raise ValueError("resize requires target_len >= 2")
        positions = np.linspace(0.0, length - 1.0, target_len)
        lo = np.floor(positions).astype(np.int64)
        hi = np.minimum(lo + 1, length - 1)
        w = (positions - lo)[:, None]
        out = (1.0 - w) * feats[lo].astype(np.float64) + w * feats[hi].astype(np.float64)
        stride = seq.stride_sec * (length - 1) / (target_len - 1) if length > 1 else seq.stride_sec
        return FeatureSequence(seq.video_id, stride, out)
    raise ValueError(f"unknown post-processing mode {mode!r}")


# ---------------------------------------------------------------------------
# Plan serialization (consumed by external extractors)
# ---------------------------------------------------------------------------

def clip_to_json(clip: ClipPlan) -> dict:
    return {
        "clip_index": clip.clip_index,
        "start_sec": clip.start_sec,
        "frames": list(clip.frame_indices),
    }


def view_to_json(view: ViewPlan) -> dict:
    return {
        "view_id": list(view.view_id),
        "spatial_offset": view.spatial_offset,
        "clip": clip_to_json(view.temporal_clip),
    }


def video_plan_to_json(video_id: str, clips: list[ClipPlan],
                       views: Optional[list[ViewPlan]] = None) -> dict:
    doc = {"video_id": video_id, "clips": [clip_to_json(c) for c in clips]}
    if views is not None:
        doc["views"] = [view_to_json(v) for v in views]
    return doc


def write_plan_file(path, video_plans: list[dict]) -> None:
    with open(path, "w") as fh:
        json.dump({"videos": video_plans}, fh, indent=2)
        fh.write("\n")


def read_plan_file(path) -> list[dict]:
    with open(path) as fh:
        doc = json.load(fh)
    return doc["videos"]
