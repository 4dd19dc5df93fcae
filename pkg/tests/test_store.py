import json

import numpy as np
import pytest

from vembench.store import (
    EmbeddingRecord,
    EmbeddingSet,
    EmbeddingSetBuilder,
    StoreError,
    load_embedding_set,
    load_frame_labels,
    load_segment_annotations,
    pool_tokens,
    write_embedding_set,
)


def make_set(records, dim=4, level="clip", classes=("a", "b")):
    builder = EmbeddingSetBuilder("test", dim, level, list(classes))
    for vid, block, label in records:
        builder.add(vid, block, label)
    return builder.build()


def write_raw(tmp_path, meta, index_lines, data: np.ndarray):
    (tmp_path / "meta.json").write_text(json.dumps(meta))
    (tmp_path / "index.jsonl").write_text("\n".join(json.dumps(r) for r in index_lines) + "\n")
    data.astype("<f4").tofile(tmp_path / "data.bin")
    return tmp_path


META = {"dataset": "t", "dim": 4, "level": "clip", "dtype": "f32le", "classes": ["a", "b"]}


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def test_load_empty_index_is_valid(tmp_path):
    meta = dict(META, dim=64)
    write_raw(tmp_path, meta, [], np.zeros(0, dtype=np.float32))
    es = load_embedding_set(tmp_path)
    assert len(es) == 0
    assert es.dim == 64


def test_load_single_record_block_size(tmp_path):
    # 2 clips x 1 token x dim 4 = 8 scalars = 32 bytes
    rows = [{"id": "v0", "label": 0, "clips": 2, "tokens": 1, "offset": 0}]
    write_raw(tmp_path, META, rows, np.arange(8, dtype=np.float32))
    es = load_embedding_set(tmp_path)
    assert (tmp_path / "data.bin").stat().st_size == 32
    assert es.records[0].size == 2
    assert es.block(es.records[0]).shape == (2, 1, 4)


def test_load_offset_past_buffer_names_record(tmp_path):
    rows = [{"id": "bad", "clips": 4, "tokens": 1, "offset": 0}]
    write_raw(tmp_path, META, rows, np.zeros(8, dtype=np.float32))
    with pytest.raises(StoreError, match="bad"):
        load_embedding_set(tmp_path)


def test_load_missing_file(tmp_path):
    with pytest.raises(StoreError, match="missing"):
        load_embedding_set(tmp_path)


def test_load_malformed_line_reports_lineno(tmp_path):
    (tmp_path / "meta.json").write_text(json.dumps(META))
    (tmp_path / "index.jsonl").write_text('{"id": "v0", "clips": 1\n')
    np.zeros(4, dtype="<f4").tofile(tmp_path / "data.bin")
    with pytest.raises(StoreError, match="line 1"):
        load_embedding_set(tmp_path)


def test_load_overlapping_offsets(tmp_path):
    rows = [
        {"id": "v0", "clips": 2, "tokens": 1, "offset": 0},
        {"id": "v1", "clips": 1, "tokens": 1, "offset": 1},
    ]
    write_raw(tmp_path, META, rows, np.zeros(12, dtype=np.float32))
    with pytest.raises(StoreError, match="overlap"):
        load_embedding_set(tmp_path)


def test_load_label_out_of_range(tmp_path):
    rows = [{"id": "v0", "label": 2, "clips": 1, "tokens": 1, "offset": 0}]
    write_raw(tmp_path, META, rows, np.zeros(4, dtype=np.float32))
    with pytest.raises(StoreError, match="label"):
        load_embedding_set(tmp_path)


def test_clip_level_requires_single_token(tmp_path):
    rows = [{"id": "v0", "clips": 1, "tokens": 2, "offset": 0}]
    write_raw(tmp_path, META, rows, np.zeros(8, dtype=np.float32))
    with pytest.raises(StoreError, match="tokens=1"):
        load_embedding_set(tmp_path)


def test_duplicate_ids_rejected():
    with pytest.raises(StoreError, match="duplicate"):
        make_set([
            ("v0", np.zeros((1, 1, 4), np.float32), 0),
            ("v0", np.zeros((1, 1, 4), np.float32), 0),
        ])


def test_builder_rejects_dim_mismatch():
    builder = EmbeddingSetBuilder("t", 4, "clip", ["a"])
    with pytest.raises(StoreError, match="dim mismatch"):
        builder.add("v0", np.zeros((1, 1, 5), np.float32))


# ---------------------------------------------------------------------------
# writing / round trip
# ---------------------------------------------------------------------------

def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    records = [
        (f"v{i}", rng.normal(size=(i + 1, 1, 4)).astype(np.float32), i % 2)
        for i in range(3)
    ]
    es = make_set(records)
    write_embedding_set(es, tmp_path)
    loaded = load_embedding_set(tmp_path)
    assert loaded.data.tobytes() == es.data.tobytes()
    assert loaded.records == es.records
    assert loaded.class_names == es.class_names

    # writing the loaded copy produces byte-identical files
    write_embedding_set(loaded, tmp_path / "again")
    assert (tmp_path / "again" / "data.bin").read_bytes() == (tmp_path / "data.bin").read_bytes()
    assert (tmp_path / "again" / "index.jsonl").read_bytes() == (tmp_path / "index.jsonl").read_bytes()


def test_index_has_one_line_per_record(tmp_path):
    es = make_set([
        (f"v{i}", np.zeros((1, 1, 4), np.float32), None) for i in range(3)
    ])
    write_embedding_set(es, tmp_path)
    lines = (tmp_path / "index.jsonl").read_text().strip().split("\n")
    assert len(lines) == 3


def test_written_size_dim_768(tmp_path):
    es = make_set([("v0", np.zeros((1, 1, 768), np.float32), None)], dim=768)
    write_embedding_set(es, tmp_path)
    assert (tmp_path / "data.bin").stat().st_size == 3072


def test_unlabeled_records_allowed(tmp_path):
    es = make_set([("v0", np.zeros((1, 1, 4), np.float32), None)])
    write_embedding_set(es, tmp_path)
    loaded = load_embedding_set(tmp_path)
    assert loaded.records[0].label is None
    with pytest.raises(StoreError):
        loaded.labels()


def test_loaded_buffer_is_immutable(tmp_path):
    es = make_set([("v0", np.ones((1, 1, 4), np.float32), 0)])
    with pytest.raises(ValueError):
        es.data[0] = 5.0


# ---------------------------------------------------------------------------
# pooling
# ---------------------------------------------------------------------------

def test_pool_constant_tokens():
    v = np.array([1.5, -2.0, 0.25, 3.0], dtype=np.float32)
    block = np.tile(v, (2, 5, 1))
    pooled = pool_tokens(block)
    assert np.array_equal(pooled, np.tile(v, (2, 1)))


def test_pool_symmetric_pair():
    block = np.array([[[1.0, 0.0], [0.0, 1.0]]], dtype=np.float32)
    assert np.allclose(pool_tokens(block), [[0.5, 0.5]])


def test_pool_matches_float64_oracle():
    rng = np.random.default_rng(1)
    block = rng.normal(size=(3, 7, 5)).astype(np.float32)
    got = pool_tokens(block)
    # brute-force 64-bit summation, token by token
    want = np.zeros((3, 5))
    for c in range(3):
        for t in range(7):
            want[c] += block[c, t].astype(np.float64)
    want /= 7
    assert np.allclose(got, want, rtol=1e-6)


def test_pool_permutation_invariant_and_linear():
    rng = np.random.default_rng(2)
    block = rng.normal(size=(2, 6, 3)).astype(np.float32)
    perm = rng.permutation(6)
    assert np.array_equal(pool_tokens(block), pool_tokens(block[:, perm]))
    assert np.allclose(pool_tokens(2.0 * block), 2.0 * pool_tokens(block), rtol=1e-6)


# ---------------------------------------------------------------------------
# annotations
# ---------------------------------------------------------------------------

def seg_doc(videos):
    return {"videos": videos}


def test_segments_single(tmp_path):
    path = tmp_path / "segs.json"
    path.write_text(json.dumps(seg_doc([
        {"id": "v0", "duration_sec": 20.0,
         "segments": [{"start": 0.0, "end": 10.0, "label": 0}]},
    ])))
    sets = load_segment_annotations(path)
    assert len(sets) == 1 and len(sets[0].segments) == 1


def test_segments_end_past_duration(tmp_path):
    path = tmp_path / "segs.json"
    path.write_text(json.dumps(seg_doc([
        {"id": "v0", "duration_sec": 10.0,
         "segments": [{"start": 2.0, "end": 12.0, "label": 0}]},
    ])))
    with pytest.raises(StoreError, match="duration"):
        load_segment_annotations(path)


def test_segments_counts(tmp_path):
    path = tmp_path / "segs.json"
    path.write_text(json.dumps(seg_doc([
        {"id": "v0", "duration_sec": 30.0, "segments": [
            {"start": 0, "end": 1, "label": 0},
            {"start": 2, "end": 3, "label": 1},
            {"start": 4, "end": 5, "label": 0},
        ]},
        {"id": "v1", "duration_sec": 30.0, "segments": [
            {"start": 0, "end": 1, "label": 1},
            {"start": 5, "end": 9, "label": 0},
        ]},
    ])))
    sets = load_segment_annotations(path, n_classes=2)
    assert len(sets) == 2
    assert sum(len(s.segments) for s in sets) == 5


def test_segments_start_not_before_end(tmp_path):
    path = tmp_path / "segs.json"
    path.write_text(json.dumps(seg_doc([
        {"id": "v0", "duration_sec": 10.0,
         "segments": [{"start": 5.0, "end": 5.0, "label": 0}]},
    ])))
    with pytest.raises(StoreError, match="start < end"):
        load_segment_annotations(path)


def test_frame_labels_duration(tmp_path):
    path = tmp_path / "frames.json"
    path.write_text(json.dumps({"videos": [{"id": "v0", "fps": 15, "labels": [0] * 30}]}))
    seqs = load_frame_labels(path, n_classes=1)
    assert seqs[0].duration_sec == pytest.approx(2.0)


def test_frame_labels_empty_rejected(tmp_path):
    path = tmp_path / "frames.json"
    path.write_text(json.dumps({"videos": [{"id": "v0", "fps": 15, "labels": []}]}))
    with pytest.raises(StoreError, match="empty"):
        load_frame_labels(path)


def test_frame_labels_out_of_range(tmp_path):
    path = tmp_path / "frames.json"
    path.write_text(json.dumps({"videos": [{"id": "v0", "fps": 15, "labels": [0, 2]}]}))
    with pytest.raises(StoreError, match="range"):
        load_frame_labels(path, n_classes=2)
