import numpy as np
import pytest

from vembench.metrics import (
    detection_ap,
    detection_map_table,
    edit_score,
    segment_iou,
    segment_sequence,
    segmental_f1,
    tas_evaluate,
    tas_frame_accuracy,
    topk_accuracy,
)
from vembench.store import FrameLabelSeq, SegmentSet


def seq(labels, fps=15.0, vid="v"):
    return FrameLabelSeq(vid, fps, np.asarray(labels, dtype=np.int64))


# ---------------------------------------------------------------------------
# topk_accuracy
# ---------------------------------------------------------------------------

def test_topk_perfect_argmax():
    probs = np.eye(4)
    assert topk_accuracy(probs, [0, 1, 2, 3], 1) == 100.0


def test_topk_k_equals_c_is_always_100():
    rng = np.random.default_rng(0)
    probs = rng.dirichlet(np.ones(5), size=20)
    labels = rng.integers(0, 5, size=20)
    assert topk_accuracy(probs, labels, 5) == 100.0


def test_topk_hand_enumerated():
    probs = [
        [0.5, 0.3, 0.2],  # label 1: top-2 = {0, 1} -> hit
        [0.6, 0.3, 0.1],  # label 2: top-2 = {0, 1} -> miss
        [0.1, 0.2, 0.7],  # label 2: top-2 = {2, 1} -> hit
    ]
    assert topk_accuracy(probs, [1, 2, 2], 2) == pytest.approx(200.0 / 3)


def test_topk_tie_breaks_to_smaller_class():
    probs = [[0.4, 0.4, 0.2]]
    assert topk_accuracy(probs, [0], 1) == 100.0
    assert topk_accuracy(probs, [1], 1) == 0.0


def test_topk_rejects_bad_k():
    with pytest.raises(ValueError):
        topk_accuracy(np.eye(2), [0, 1], 0)


# ---------------------------------------------------------------------------
# segment_iou
# ---------------------------------------------------------------------------

def test_iou_identical():
    assert segment_iou((2.0, 7.0), (2.0, 7.0)) == 1.0


def test_iou_disjoint():
    assert segment_iou((0.0, 1.0), (2.0, 3.0)) == 0.0


def test_iou_partial_overlap():
    assert segment_iou((0.0, 10.0), (5.0, 15.0)) == pytest.approx(5.0 / 15.0)


# ---------------------------------------------------------------------------
# detection AP
# ---------------------------------------------------------------------------

def gt_sets(*videos):
    return [SegmentSet(vid, dur, segs) for vid, dur, segs in videos]


def test_ap_perfect_predictions():
    gts = gt_sets(("v0", 40.0, [(0.0, 10.0, 0), (20.0, 30.0, 1)]))
    preds = gt_sets(("v0", 40.0, [(0.0, 10.0, 0, 1.0), (20.0, 30.0, 1, 1.0)]))
    for t in (0.3, 0.5, 0.95):
        assert detection_ap(preds, gts, t)["map"] == 1.0


def test_ap_no_predictions():
    gts = gt_sets(("v0", 40.0, [(0.0, 10.0, 0)]))
    assert detection_ap([], gts, 0.5)["map"] == 0.0


def test_ap_hand_case_tp_ranked_first():
    # TP at rank 1, FP at rank 2: precision (1, 0.5), recall (1, 1) -> AP = 1
    gts = gt_sets(("v0", 40.0, [(0.0, 10.0, 0)]))
    preds = gt_sets(("v0", 40.0, [(0.0, 10.0, 0, 0.9), (20.0, 30.0, 0, 0.8)]))
    assert detection_ap(preds, gts, 0.5)["map"] == 1.0


def test_ap_fp_ranked_first():
    # ranks: FP (score .9), TP (score .8): precision (0, .5), recall (0, 1)
    # envelope at the recall step is 0.5 -> AP = 0.5
    gts = gt_sets(("v0", 40.0, [(0.0, 10.0, 0)]))
    preds = gt_sets(("v0", 40.0, [(20.0, 30.0, 0, 0.9), (0.0, 10.0, 0, 0.8)]))
    assert detection_ap(preds, gts, 0.5)["map"] == 0.5


def test_ap_class_without_gt_excluded():
    gts = gt_sets(("v0", 40.0, [(0.0, 10.0, 0)]))
    preds = gt_sets(("v0", 40.0, [(0.0, 10.0, 0, 0.9), (12.0, 14.0, 3, 0.8)]))
    res = detection_ap(preds, gts, 0.5)
    assert set(res["per_class"]) == {0}
    assert res["map"] == 1.0


def test_ap_score_monotone_invariance():
    rng = np.random.default_rng(1)
    gts, preds = _random_detection_case(rng)
    base = detection_ap(preds, gts, 0.4)["map"]
    warped = [
        SegmentSet(s.video_id, s.duration_sec,
                   [(a, b, lab, float(np.tanh(sc) * 0.5 + 0.5)) for a, b, lab, sc in s.segments])
        for s in preds
    ]
    assert detection_ap(warped, gts, 0.4)["map"] == pytest.approx(base)


def test_map_table_average():
    gts = gt_sets(("v0", 40.0, [(0.0, 10.0, 0)]))
    preds = gt_sets(("v0", 40.0, [(0.0, 9.0, 0, 0.9)]))
    table = detection_map_table(preds, gts, (0.5, 0.75, 0.95))
    maps = [table["per_tiou"][t]["map"] for t in (0.5, 0.75, 0.95)]
    assert maps == [1.0, 1.0, 0.0]  # IoU = 0.9
    assert table["average_map"] == pytest.approx(np.mean(maps))


# --- brute-force oracle -----------------------------------------------------

def _oracle_match(preds_sorted, gts, tiou):
    """Greedy matching, recomputed from scratch (independent of the
    production incremental path)."""
    taken = set()
    tp = 0
    for vid, s, e, _ in preds_sorted:
        best = (0.0, None)
        for j, (gvid, gs, ge) in enumerate(gts):
            if j in taken or gvid != vid:
                continue
            inter = min(e, ge) - max(s, gs)
            if inter <= 0:
                continue
            iou = inter / (max(e, ge) - min(s, gs))
            if iou > best[0]:
                best = (iou, j)
        if best[1] is not None and best[0] >= tiou:
            taken.add(best[1])
            tp += 1
    return tp


def _oracle_ap_one_class(preds, gts, tiou):
    """AP by enumerating every score threshold (one per prediction)."""
    if not gts:
        return None
    if not preds:
        return 0.0
    order = np.argsort(-np.asarray([p[3] for p in preds]), kind="stable")
    ranked = [preds[i] for i in order]
    points = []
    for k in range(1, len(ranked) + 1):
        tp = _oracle_match(ranked[:k], gts, tiou)
        points.append((tp / len(gts), tp / k))
    ap = 0.0
    prev_r = 0.0
    for k, (r, _) in enumerate(points):
        if r != prev_r:
            best_p = max(p for _, p in points[k:])
            ap += (r - prev_r) * best_p
            prev_r = r
    return ap


def oracle_map(preds, gts, tiou):
    classes = sorted({seg[2] for g in gts for seg in g.segments})
    aps = []
    for cls in classes:
        cls_preds = [
            (p.video_id, s, e, sc)
            for p in preds
            for s, e, lab, sc in p.segments
            if lab == cls
        ]
        cls_gts = [
            (g.video_id, s, e) for g in gts for s, e, lab in g.segments if lab == cls
        ]
        aps.append(_oracle_ap_one_class(cls_preds, cls_gts, tiou))
    return float(np.mean(aps)) if aps else 0.0


def _random_detection_case(rng, max_preds=6, max_gts=4):
    n_classes = int(rng.integers(1, 3))
    videos = ["v0", "v1"][: int(rng.integers(1, 3))]
    gts = []
    for vid in videos:
        segs = []
        for _ in range(int(rng.integers(1, max_gts + 1))):
            s = float(rng.uniform(0, 80))
            segs.append((s, s + float(rng.uniform(1, 20)), int(rng.integers(0, n_classes))))
        gts.append(SegmentSet(vid, 120.0, segs))
    scores = rng.permutation(np.linspace(0.05, 0.95, max_preds * len(videos)))
    preds = []
    si = 0
    for vid in videos:
        segs = []
        for _ in range(int(rng.integers(0, max_preds + 1))):
            s = float(rng.uniform(0, 80))
            segs.append(
                (s, s + float(rng.uniform(1, 20)), int(rng.integers(0, n_classes)),
                 float(scores[si % len(scores)]))
            )
            si += 1
        preds.append(SegmentSet(vid, 120.0, segs))
    return gts, preds


def test_ap_matches_threshold_enumeration_oracle():
    rng = np.random.default_rng(2)
    for tiou in (0.1, 0.3, 0.5, 0.7):
        for _ in range(300):
            gts, preds = _random_detection_case(rng)
            got = detection_ap(preds, gts, tiou)["map"]
            want = oracle_map(preds, gts, tiou)
            assert got == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------------------
# frame accuracy / segments
# ---------------------------------------------------------------------------

def test_frame_accuracy_identical():
    assert tas_frame_accuracy(seq([0, 1, 1]), seq([0, 1, 1])) == 100.0


def test_frame_accuracy_complement():
    assert tas_frame_accuracy(seq([0, 0, 0]), seq([1, 1, 1])) == 0.0


def test_frame_accuracy_three_of_four():
    assert tas_frame_accuracy(seq([0, 1, 1, 0]), seq([0, 1, 1, 1])) == 75.0


def test_frame_accuracy_length_mismatch():
    with pytest.raises(ValueError):
        tas_frame_accuracy(seq([0]), seq([0, 1]))


def test_segment_sequence_basic():
    assert segment_sequence(seq([0, 0, 1])) == [(0, 0, 2), (1, 2, 3)]


def test_segment_sequence_constant():
    assert segment_sequence(seq([3] * 7)) == [(3, 0, 7)]


def test_segment_sequence_alternating():
    assert len(segment_sequence(seq([0, 1, 0, 1]))) == 4


def test_segment_sequence_covers_everything():
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 3, size=40)
    runs = segment_sequence(seq(labels))
    assert runs[0][1] == 0 and runs[-1][2] == 40
    for (_, _, e1), (_, s2, _) in zip(runs, runs[1:]):
        assert e1 == s2


# ---------------------------------------------------------------------------
# edit score
# ---------------------------------------------------------------------------

EDIT_CASES = [
    (["a", "b", "c"], ["a", "b", "c"], 100.0),
    (["a"], ["a", "b"], 50.0),
    ([], ["a", "b", "c"], 0.0),
    (["a", "b"], ["b", "a"], 0.0),            # two substitutions / max 2
    (["a", "b", "a"], ["a", "a"], 200.0 / 3),  # one deletion / max 3
    ([], [], 100.0),
]


@pytest.mark.parametrize("pred,gt,want", EDIT_CASES)
def test_edit_score_cases(pred, gt, want):
    assert edit_score(pred, gt) == pytest.approx(want)


def test_edit_score_symmetric():
    rng = np.random.default_rng(4)
    for _ in range(30):
        a = rng.integers(0, 4, size=rng.integers(0, 8)).tolist()
        b = rng.integers(0, 4, size=rng.integers(0, 8)).tolist()
        assert edit_score(a, b) == pytest.approx(edit_score(b, a))


# ---------------------------------------------------------------------------
# segmental F1: hand-enumerated suite
# ---------------------------------------------------------------------------

# (pred, gt, tau, expected F1 pct) -- twelve cases worked out by hand.
F1_CASES = [
    # identical sequences: all runs match at IoU 1
    ([0, 0, 1, 1, 0], [0, 0, 1, 1, 0], 0.10, 100.0),
    ([0, 0, 1, 1, 0], [0, 0, 1, 1, 0], 0.25, 100.0),
    ([0, 0, 1, 1, 0], [0, 0, 1, 1, 0], 0.50, 100.0),
    # action shortened to 6/10 frames, background matching elsewhere:
    # IoU(action)=.6, IoU(background)=10/14; both TP at tau=.5
    ([1] * 6 + [0] * 14, [1] * 10 + [0] * 10, 0.50, 100.0),
    # same pair at tau just above .6: action run fails, background still TP
    # tp=1, fp=1, fn=1 -> P=R=.5 -> F1=50
    ([1] * 6 + [0] * 14, [1] * 10 + [0] * 10, 0.65, 50.0),
    # all-background prediction vs two pure action segments: nothing matches
    ([0] * 20, [1] * 10 + [2] * 10, 0.10, 0.0),
    ([0] * 20, [1] * 10 + [2] * 10, 0.50, 0.0),
    # inclusive threshold: IoU exactly .5 counts as TP
    ([1, 1, 0, 0, 0, 0, 0, 0], [1, 1, 1, 1, 0, 0, 0, 0], 0.50, 100.0),
    # one long run vs two same-label gt runs: first gt claimed (IoU 1/3),
    # other gt runs unmatched: tp=1, fp=0, fn=2 -> F1=50
    ([1] * 6, [1, 1, 0, 0, 1, 1], 0.25, 50.0),
    # same pair at tau=.5: the claim fails -> no TP
    ([1] * 6, [1, 1, 0, 0, 1, 1], 0.50, 0.0),
    # over-segmented prediction: tp=1 (first pred run at IoU .25), fp=4
    ([1, 1, 0, 1, 1, 0, 1, 1], [1] * 8, 0.25, 100.0 / 3),
    # complement labels, single runs: no same-label overlap at all
    ([0, 0, 0, 0], [1, 1, 1, 1], 0.10, 0.0),
]


@pytest.mark.parametrize("pred,gt,tau,want", F1_CASES)
def test_segmental_f1_hand_cases(pred, gt, tau, want):
    assert segmental_f1(seq(pred), seq(gt), tau) == pytest.approx(want)


def test_segmental_f1_length_mismatch():
    with pytest.raises(ValueError):
        segmental_f1(seq([0]), seq([0, 1]), 0.5)


def _jittered_copy(labels, rng):
    """Shift run boundaries by at most one frame, keeping run order."""
    runs = segment_sequence(seq(labels))
    bounds = [r[2] for r in runs[:-1]]
    new_bounds = []
    prev = 0
    for b in bounds:
        shift = int(rng.integers(-1, 2))
        nb = min(max(b + shift, prev + 1), len(labels) - 1)
        new_bounds.append(nb)
        prev = nb
    out = np.empty(len(labels), dtype=np.int64)
    prev = 0
    for (lab, _, _), nb in zip(runs, new_bounds + [len(labels)]):
        out[prev:nb] = lab
        prev = nb
    return out


def test_segmental_f1_tau_zero_is_multiset_comparison():
    # runs >= 3 frames, adjacent labels differ, boundaries jittered by <= 1:
    # every pred run overlaps exactly its own gt twin, so at tau -> 0 the tp
    # count equals the label-multiset intersection of the run sequences.
    rng = np.random.default_rng(5)
    for _ in range(30):
        runs = []
        label = 0
        for _ in range(int(rng.integers(2, 7))):
            nxt = int(rng.integers(0, 3))
            if nxt == label:
                nxt = (nxt + 1) % 3
            label = nxt
            runs.extend([label] * int(rng.integers(3, 7)))
        gt = np.asarray(runs)
        pred = _jittered_copy(gt, rng)
        n_runs = len(segment_sequence(seq(gt)))
        assert len(segment_sequence(seq(pred))) == n_runs
        got = segmental_f1(seq(pred), seq(gt), 1e-9)
        assert got == pytest.approx(100.0)  # tp = all runs on both sides


# ---------------------------------------------------------------------------
# dataset-level scores
# ---------------------------------------------------------------------------

def test_tas_evaluate_identical_everything():
    gts = [seq([0] * 5 + [1] * 5, vid="a"), seq([1, 1, 0, 0], vid="b")]
    scores = tas_evaluate(gts, gts)
    assert scores.acc == 100.0
    assert scores.edit == 100.0
    assert scores.mf1 == 100.0
    assert set(scores.f1_at) == {0.10, 0.25, 0.50}


def test_tas_mf1_is_mean_of_thresholds():
    gt = [seq([1] * 10 + [0] * 10)]
    pred = [seq([1] * 6 + [0] * 14)]
    scores = tas_evaluate(pred, gt, taus=(0.10, 0.50, 0.65))
    assert scores.mf1 == pytest.approx(np.mean(list(scores.f1_at.values())))
    assert scores.f1_at[0.65] == pytest.approx(50.0)
    assert scores.acc == pytest.approx(80.0)


def test_tas_evaluate_requires_matching_ids():
    with pytest.raises(ValueError):
        tas_evaluate([seq([0], vid="x")], [seq([0], vid="y")])
