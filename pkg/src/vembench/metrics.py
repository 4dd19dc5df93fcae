"""Scalar evaluation metrics: top-k accuracy, temporal detection mAP, and
temporal segmentation scores (segmental F1 / edit / frame accuracy)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vembench.store import FrameLabelSeq, SegmentSet


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def topk_accuracy(probs, labels, k: int) -> float:
    """Percentage of samples whose true label is among the k most probable
    classes. Probability ties break toward the smaller class index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.shape[0] != labels.shape[0]:
        raise ValueError("probs and labels length mismatch")
    if probs.shape[0] == 0:
        return 0.0
    hits = 0
    for p, y in zip(probs, labels):
        order = np.argsort(-p, kind="stable")  # stable: equal probs keep class order
        if y in order[:k]:
            hits += 1
    return 100.0 * hits / len(labels)


# ---------------------------------------------------------------------------
# Temporal detection (mAP at tIoU thresholds)
# ---------------------------------------------------------------------------

def segment_iou(a, b) -> float:
    """Temporal intersection over union of two [start, end) intervals."""
    a0, a1 = a
    b0, b1 = b
    inter = min(a1, b1) - max(a0, b0)
    if inter <= 0:
        return 0.0
    union = max(a1, b1) - min(a0, b0)
    return inter / union


def _flatten_segments(sets: list[SegmentSet], need_score: bool):
    """(video_id, start, end, label[, score]) tuples in input order."""
    out = []
    for ss in sets:
        for seg in ss.segments:
            if need_score:
                if len(seg) < 4:
                    raise ValueError(
                        f"prediction in video {ss.video_id!r} has no score"
                    )
                out.append((ss.video_id, seg[0], seg[1], seg[2], seg[3]))
            else:
                out.append((ss.video_id, seg[0], seg[1], seg[2]))
    return out


def detection_ap(preds: list[SegmentSet], gts: list[SegmentSet], tiou: float) -> dict:
    """Per-class average precision and mAP at one tIoU threshold.

    Within a class, predictions are ranked by score (descending; ties keep
    input order). Each prediction greedily claims the unmatched ground-truth
    segment of the same video with the highest tIoU, provided tIoU >= the
    threshold; otherwise it is a false positive. AP integrates the monotone
    precision envelope over all recall change points. Classes without any
    ground-truth instance are excluded from the mean.
    """
    pred_rows = _flatten_segments(preds, need_score=True)
    gt_rows = _flatten_segments(gts, need_score=False)

    classes = sorted({r[3] for r in gt_rows})
    per_class: dict[int, float] = {}
    for cls in classes:
        cls_gt: dict[str, list[list]] = {}
        for vid, s, e, lab in gt_rows:
            if lab == cls:
                cls_gt.setdefault(vid, []).append([s, e, False])
        n_gt = sum(len(v) for v in cls_gt.values())

        cls_pred = [(vid, s, e, score) for vid, s, e, lab, score in pred_rows if lab == cls]
        order = np.argsort(-np.asarray([p[3] for p in cls_pred]), kind="stable")

        tp = np.zeros(len(cls_pred))
        fp = np.zeros(len(cls_pred))
        for rank, pi in enumerate(order):
            vid, s, e, _ = cls_pred[pi]
            best_iou, best_j = 0.0, -1
            for j, gt in enumerate(cls_gt.get(vid, [])):
                if gt[2]:
                    continue
                iou = segment_iou((s, e), (gt[0], gt[1]))
                if iou > best_iou:
                    best_iou, best_j = iou, j
            if best_j >= 0 and best_iou >= tiou:
                cls_gt[vid][best_j][2] = True
                tp[rank] = 1
            else:
                fp[rank] = 1

        per_class[cls] = _ap_from_matches(tp, fp, n_gt)

    m_ap = float(np.mean(list(per_class.values()))) if per_class else 0.0
    return {"per_class": per_class, "map": m_ap}


def _ap_from_matches(tp: np.ndarray, fp: np.ndarray, n_gt: int) -> float:
    """All-point interpolated AP from ranked match indicators."""
    if n_gt == 0 or len(tp) == 0:
        return 0.0
    ctp = np.cumsum(tp)
    cfp = np.cumsum(fp)
    recall = ctp / n_gt
    precision = ctp / (ctp + cfp)

    mrec = np.concatenate([[0.0], recall, [recall[-1]]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    for i in range(len(mpre) - 2, -1, -1):  # monotone envelope from the right
        mpre[i] = max(mpre[i], mpre[i + 1])
    idx = np.where(mrec[1:] != mrec[:-1])[0] + 1
    return float(np.sum((mrec[idx] - mrec[idx - 1]) * mpre[idx]))


def detection_map_table(preds, gts, tious) -> dict:
    """mAP at several tIoU thresholds plus their average."""
    rows = {float(t): detection_ap(preds, gts, float(t)) for t in tious}
    avg = float(np.mean([r["map"] for r in rows.values()])) if rows else 0.0
    return {"per_tiou": rows, "average_map": avg}


# ---------------------------------------------------------------------------
# Temporal segmentation
# ---------------------------------------------------------------------------

def tas_frame_accuracy(pred: FrameLabelSeq, gt: FrameLabelSeq) -> float:
    """Percentage of frames whose predicted label matches the ground truth."""
    if len(pred.labels) != len(gt.labels):
        raise ValueError(
            f"length mismatch: pred {len(pred.labels)} vs gt {len(gt.labels)}"
        )
    return 100.0 * float(np.mean(pred.labels == gt.labels))


def segment_sequence(seq: FrameLabelSeq) -> list[tuple[int, int, int]]:
    """Run-length segments (label, start_frame, end_frame), end-exclusive,
    covering the whole sequence."""
    labels = np.asarray(seq.labels)
    if len(labels) == 0:
        raise ValueError("empty label sequence")
    out = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            out.append((int(labels[start]), start, i))
            start = i
    return out


def _levenshtein(a: list[int], b: list[int]) -> int:
    m, n = len(a), len(b)
    dist = np.arange(n + 1, dtype=np.int64)
    for i in range(1, m + 1):
        prev_diag = dist[0]
        dist[0] = i
        for j in range(1, n + 1):
            cur = dist[j]
            if a[i - 1] == b[j - 1]:
                dist[j] = prev_diag
            else:
                dist[j] = 1 + min(prev_diag, dist[j], dist[j - 1])
            prev_diag = cur
    return int(dist[n])


def edit_score(pred_segs: list[int], gt_segs: list[int]) -> float:
    """Normalized Levenshtein similarity between two segment-label sequences,
    as a percentage. Two empty sequences score 100."""
    if not pred_segs and not gt_segs:
        return 100.0
    dist = _levenshtein(list(pred_segs), list(gt_segs))
    return 100.0 * (1.0 - dist / max(len(pred_segs), len(gt_segs)))


def _segment_matches(pred: FrameLabelSeq, gt: FrameLabelSeq, tau: float):
    """(tp, fp, fn) for segment matching at frame-IoU >= tau."""
    if len(pred.labels) != len(gt.labels):
        raise ValueError(
            f"length mismatch: pred {len(pred.labels)} vs gt {len(gt.labels)}"
        )
    pred_runs = segment_sequence(pred)
    gt_runs = segment_sequence(gt)
    matched = [False] * len(gt_runs)
    tp = fp = 0
    for lab, ps, pe in pred_runs:
        best_iou, best_j = 0.0, -1
        for j, (glab, gs, ge) in enumerate(gt_runs):
            if matched[j] or glab != lab:
                continue
            inter = min(pe, ge) - max(ps, gs)
            if inter <= 0:
                continue
            iou = inter / (max(pe, ge) - min(ps, gs))
            if iou > best_iou:
                best_iou, best_j = iou, j
        if best_j >= 0 and best_iou >= tau:
            matched[best_j] = True
            tp += 1
        else:
            fp += 1
    fn = matched.count(False)
    return tp, fp, fn


def segmental_f1(pred: FrameLabelSeq, gt: FrameLabelSeq, tau: float) -> float:
    """Segmental F1 at overlap threshold tau, as a percentage.

    Predicted segments greedily claim the unmatched same-label ground-truth
    segment with the highest frame IoU; a claim counts as a true positive
    when IoU >= tau (inclusive). F1 is 0 when precision + recall is 0.
    """
    tp, fp, fn = _segment_matches(pred, gt, tau)
    return _f1_pct(tp, fp, fn)


def _f1_pct(tp: int, fp: int, fn: int) -> float:
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 100.0 * 2 * precision * recall / (precision + recall)


@dataclass
class TasScores:
    mf1: float
    f1_at: dict[float, float]
    edit: float
    acc: float


def tas_evaluate(
    preds: list[FrameLabelSeq],
    gts: list[FrameLabelSeq],
    taus=(0.10, 0.25, 0.50),
) -> TasScores:
    """Dataset-level segmentation scores over paired (by id) sequences.

    F1 at each threshold accumulates tp/fp/fn across videos; the edit score
    is averaged per video; accuracy counts all frames of all videos. mF1 is
    the mean of the per-threshold F1 values.
    """
    gt_by_id = {g.video_id: g for g in gts}
    pairs = []
    for p in preds:
        if p.video_id not in gt_by_id:
            raise ValueError(f"no ground truth for video {p.video_id!r}")
        pairs.append((p, gt_by_id[p.video_id]))
    if not pairs:
        raise ValueError("nothing to evaluate")

    counts = {float(t): [0, 0, 0] for t in taus}
    edits = []
    correct = total = 0
    for p, g in pairs:
        for t in counts:
            tp, fp, fn = _segment_matches(p, g, t)
            counts[t][0] += tp
            counts[t][1] += fp
            counts[t][2] += fn
        edits.append(
            edit_score(
                [lab for lab, _, _ in segment_sequence(p)],
                [lab for lab, _, _ in segment_sequence(g)],
            )
        )
        correct += int(np.sum(p.labels == g.labels))
        total += len(g.labels)

    f1_at = {t: _f1_pct(*c) for t, c in counts.items()}
    return TasScores(
        mf1=float(np.mean(list(f1_at.values()))),
        f1_at=f1_at,
        edit=float(np.mean(edits)),
        acc=100.0 * correct / total,
    )
