"""Temporal localization and segmentation metrics.

Detection quality is mean average precision over classes at temporal-IoU
thresholds; segmentation quality combines segmental F1, a normalized edit
score over the segment-label sequence, and per-frame accuracy.
Run: python3 demos/04_temporal_metrics.py
"""

import numpy as np

from vembench.metrics import detection_map_table, tas_evaluate
from vembench.store import FrameLabelSeq, SegmentSet

# --- detection: one video, two action classes --------------------------------
gts = [SegmentSet("video_a", 60.0, [
    (5.0, 15.0, 0),
    (20.0, 30.0, 1),
    (40.0, 52.0, 1),
])]
# Predictions carry confidence scores. The first is tight, the second sloppy,
# the third spurious.
preds = [SegmentSet("video_a", 60.0, [
    (5.5, 15.0, 0, 0.95),
    (21.0, 33.0, 1, 0.80),
    (1.0, 3.0, 1, 0.60),
])]

table = detection_map_table(preds, gts, (0.3, 0.5, 0.7))
for tiou, row in table["per_tiou"].items():
    print(f"mAP@{tiou:.1f} = {row['map']:.3f}   per-class "
          + str({c: round(ap, 3) for c, ap in row["per_class"].items()}))
print(f"average mAP = {table['average_map']:.3f}")

# --- segmentation: frame-label sequences -------------------------------------
# Ground truth: three actions over 60 frames. The prediction finds the right
# order but over-segments the middle action.
gt = FrameLabelSeq("video_b", 15.0, np.repeat([0, 1, 2], 20))
pred_labels = np.concatenate([
    np.repeat(0, 18),
    np.repeat(1, 10), np.repeat(2, 4), np.repeat(1, 8),
    np.repeat(2, 20),
])
pred = FrameLabelSeq("video_b", 15.0, pred_labels)

scores = tas_evaluate([pred], [gt])
print(f"\nsegmentation: acc {scores.acc:.1f}%  edit {scores.edit:.1f}%  "
      f"mF1 {scores.mf1:.1f}%")
for tau, f1 in sorted(scores.f1_at.items()):
    print(f"  F1@{int(tau * 100)} = {f1:.1f}%")
print("(the stray run inside action 1 costs edit score and F1, "
      "but few frame errors)")
