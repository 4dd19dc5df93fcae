"""Frame-sampling schedules: uniform, multi-clip, and spatial/temporal views.

A planner never touches pixels. It decides which source frames an extractor
should read, and (for multi-view inference) which spatial crops to take.
Run: python3 demos/01_sampling_plans.py
"""

from vembench.plan import plan_multiclip, plan_uniform, plan_views, postprocess_features
from vembench.plan import FeatureSequence
import numpy as np

# A 10-second video at 30 fps has 300 frames. The simplest schedule samples
# 16 frames at a uniform stride over the whole thing:
frames = plan_uniform(300, 16)
print("uniform, 16 of 300 frames:", frames)

# For longer videos the uniform stride stretches and temporal coherence
# suffers, so instead we cut the video into fixed 2-second clips and sample
# within each clip. Every instant of the video is covered by some clip:
clips = plan_multiclip(duration_sec=10.0, fps=30.0, clip_sec=2.0, n_frames=8)
print(f"\nmulti-clip, T=2s: {len(clips)} clips")
for clip in clips:
    print(f"  clip {clip.clip_index} @ {clip.start_sec:4.1f}s -> {clip.frame_indices}")

# Dense extraction for temporal localization overlaps the clips by using a
# stride shorter than the clip length (here 0.5 s clips every 0.125 s):
dense = plan_multiclip(duration_sec=4.0, fps=30.0, clip_sec=0.5, stride_sec=0.125,
                       n_frames=4)
print(f"\ndense extraction, T=0.5s stride 0.125s over 4s: {len(dense)} clips")

# Multi-view inference averages probabilities over m spatial crops x n
# temporal clips. A 320x224 frame with m=3 slides the crop along the long side:
views = plan_views(duration_sec=10.0, fps=30.0, short_side=224, long_side=320,
                   m=3, n=4, n_frames=16, temporal_stride=4)
print(f"\nviews: {len(views)} (3 spatial x 4 temporal)")
for view in views[:4]:
    print(f"  view {view.view_id}: crop offset {view.spatial_offset}px, "
          f"frames {view.temporal_clip.frame_indices[:4]}...")

# Localization heads often want a fixed-length feature sequence. Crop
# truncates; resize interpolates rows linearly and keeps the endpoints:
seq = FeatureSequence("demo", stride_sec=0.125,
                      features=np.arange(10, dtype=np.float64)[:, None])
resized = postprocess_features(seq, "resize", 5)
print("\nresize 10 rows -> 5:", resized.features[:, 0].tolist())
print("crop 10 rows -> 4:",
      postprocess_features(seq, "crop", 4).features[:, 0].tolist())
