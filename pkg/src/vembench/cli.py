"""Command-line entry point.

Subcommands: synth, probe linear|attentive, knn, lda-reversal, viz tsne|pca,
metrics tal|tas, plan, report scatter. Every run writes `report.json` (byte
deterministic for a fixed seed and worker count), `report.txt`, and a
`timing.json` sidecar into the output directory.

Config precedence: built-in defaults < --preset < explicit flags. Exit
codes: 0 success, 2 usage error, 3 input validation failure, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from vembench import analyze, knn, metrics, plan, presets, probe, report, store, synth
from vembench.numkit import NumericError


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("VEMBENCH_OUT")
    if not out:
        raise UsageError("no output directory: pass --out or set VEMBENCH_OUT")
    return Path(out)


def _preset(name: str | None) -> dict:
    if name is None:
        return {}
    try:
        return presets.load_preset(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


_TRAIN_FIELDS = (
    "epochs", "batch_size", "warmup_epochs", "lr", "final_lr", "weight_decay",
    "momentum", "optimizer", "seed", "views", "n_frames", "temporal_stride",
    "flip_augment", "heads",
)


def _train_config(args, default_optimizer: str) -> tuple[probe.TrainConfig, dict]:
    cfg = asdict(probe.TrainConfig(optimizer=default_optimizer))
    merged = dict(cfg)
    merged.update(_preset(args.preset))
    merged["optimizer"] = default_optimizer
    for name in ("epochs", "batch_size", "warmup_epochs", "lr", "weight_decay", "seed", "heads"):
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    train_kwargs = {k: merged[k] for k in _TRAIN_FIELDS if k in merged}
    if isinstance(train_kwargs.get("views"), list):
        train_kwargs["views"] = tuple(train_kwargs["views"])
    return probe.TrainConfig(**train_kwargs), merged


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    if args.kind == "gaussians":
        spec = synth.SynthSpec(
            n_classes=args.classes, dim=args.dim, per_class=args.per_class,
            eval_per_class=args.eval_per_class, separation=args.sep,
            clips_per_video=args.clips, tokens=args.tokens, seed=args.seed,
        )
        train, eval_set = synth.gen_class_gaussians(spec)
        store.write_embedding_set(train, out / "train")
        store.write_embedding_set(eval_set, out / "eval")
        means = synth.simplex_means(spec.n_classes, spec.dim, spec.separation)
        synth.write_truth_file(out / "truth.json", spec, means)
        results = {"train_records": len(train), "eval_records": len(eval_set),
                   "bayes_accuracy": synth.bayes_accuracy_bound(spec)}
        config = asdict(spec)
    elif args.kind == "motion":
        fwd, rev = synth.gen_motion_pairs(args.n, args.dim, args.strength, args.seed)
        store.write_embedding_set(fwd, out / "forward")
        store.write_embedding_set(rev, out / "reversed")
        results = {"pairs": len(fwd)}
        config = {"n": args.n, "dim": args.dim, "strength": args.strength,
                  "seed": args.seed}
    else:  # token-signal
        es = synth.gen_token_signal_set(
            args.per_class, args.classes, args.tokens, args.dim, args.seed,
            signal_norm=args.signal_norm,
        )
        store.write_embedding_set(es, out / "train")
        results = {"records": len(es)}
        config = {"per_class": args.per_class, "classes": args.classes,
                  "tokens": args.tokens, "dim": args.dim, "seed": args.seed,
                  "signal_norm": args.signal_norm}
    config["workers"] = args.workers
    report.write_report(out, f"synth {args.kind}", config, {}, results,
                        time.perf_counter() - t0)
    return 0


def cmd_probe(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    train_set = store.load_embedding_set(args.train)
    eval_set = store.load_embedding_set(args.eval)
    cfg, merged = _train_config(
        args, "sgd_momentum" if args.kind == "linear" else "adamw"
    )
    if args.kind == "linear":
        head = probe.train_linear_probe(train_set, cfg)
    else:
        head = probe.train_attentive_probe(train_set, cfg)
    scores = probe.evaluate_probe(head, eval_set, cfg)
    merged.update({"preset": args.preset, "model": args.model,
                   "dataset": eval_set.dataset_name, "workers": args.workers})
    results = {
        "top1": scores["top1"],
        "top5": scores["top5"],
        "per_class": scores["per_class"],
        "final_train_loss": head.loss_trace[-1] if head.loss_trace else None,
    }
    if args.save_head:
        probe.save_head(head, _ensure_dir(out) / "head.json",
                        report.config_hash(merged), cfg.seed)
    report.write_report(out, f"probe {args.kind}", merged,
                        {"train": args.train, "eval": args.eval}, results,
                        time.perf_counter() - t0)
    return 0


def cmd_knn(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    preset = _preset(args.preset)
    cfg = knn.KnnConfig(
        k=args.k if args.k is not None else preset.get("k", 20),
        metric=args.metric or preset.get("metric", "cosine"),
        mode=args.mode if args.mode != "all" else "video",
        clip_length_sec=preset.get("clip_length_sec", 2.0),
    )
    train_set = store.load_embedding_set(args.train)
    eval_set = store.load_embedding_set(args.eval)
    if args.mode == "all":
        res = knn.knn_evaluate_all_modes(train_set, eval_set, cfg)
        results = {m: {"top1": r["top1"]} for m, r in res.items()}
    else:
        res = knn.knn_evaluate(train_set, eval_set, cfg)
        results = {args.mode: {"top1": res["top1"]}}
    config = {"k": cfg.k, "metric": cfg.metric, "mode": args.mode,
              "clip_length_sec": cfg.clip_length_sec, "preset": args.preset,
              "model": args.model, "dataset": eval_set.dataset_name,
              "workers": args.workers}
    report.write_report(out, "knn", config,
                        {"train": args.train, "eval": args.eval}, results,
                        time.perf_counter() - t0)
    return 0


def cmd_lda_reversal(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    fwd = store.load_embedding_set(args.forward)
    rev = store.load_embedding_set(args.reversed)
    ridge = None if args.ridge == "auto" else float(args.ridge)
    res = analyze.reversal_separability(fwd, rev, ridge=ridge, folds=args.folds)
    config = {"folds": args.folds, "ridge": args.ridge, "workers": args.workers}
    with open(_ensure_dir(out) / "projections.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "forward", "reversed"])
        for vid in sorted(res["projections"]["forward"]):
            writer.writerow([vid, repr(res["projections"]["forward"][vid]),
                             repr(res["projections"]["reversed"][vid])])
    results = {"accuracy": res["accuracy"], "folds": res["folds"],
               "ridge_used": res["ridge"]}
    report.write_report(out, "lda-reversal", config,
                        {"forward": args.forward, "reversed": args.reversed},
                        results, time.perf_counter() - t0)
    return 0


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _video_matrix(es) -> tuple[list[str], np.ndarray, list]:
    ids, rows, labels = [], [], []
    for rec in es.records:
        clips = store.pool_tokens(es.block(rec)).astype(np.float64)
        rows.append(plan.aggregate_clip_embeddings(clips))
        ids.append(rec.id)
        labels.append(rec.label if rec.label is not None else "")
    return ids, np.stack(rows), labels


def cmd_viz(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    es = store.load_embedding_set(args.input)
    ids, X, labels = _video_matrix(es)
    if args.kind == "tsne":
        cfg = analyze.TsneConfig(
            perplexity=args.perplexity, iterations=args.iterations,
            learning_rate=args.learning_rate, seed=args.seed,
        )
        coords, trace = analyze.tsne(X, cfg, return_trace=True)
        config = {"kind": "tsne", **asdict(cfg), "workers": args.workers}
        results = {"kl_initial": trace[0][1], "kl_final": trace[-1][1]}
    else:
        coords = analyze.pca_project(X, 2)
        config = {"kind": "pca", "workers": args.workers}
        results = {"variance_x": float(coords[:, 0].var()),
                   "variance_y": float(coords[:, 1].var())}
    all_labeled = all(label != "" for label in labels)
    if all_labeled and len(labels) > 10:
        results["purity_10nn"] = analyze.cluster_purity(
            coords, np.asarray(labels, dtype=np.int64), 10
        )
    analyze.write_coords_csv(_ensure_dir(out) / "coords.csv", ids, coords, labels)
    report.write_report(out, f"viz {args.kind}", config, {"input": args.input},
                        results, time.perf_counter() - t0)
    return 0


def cmd_metrics(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    if args.kind == "tal":
        gts = store.load_segment_annotations(args.gt)
        preds = store.load_segment_annotations(args.pred)
        tious = [float(t) for t in args.tiou.split(",")]
        table = metrics.detection_map_table(preds, gts, tious)
        results = {
            "map_at": {f"{t:g}": table["per_tiou"][t]["map"] for t in table["per_tiou"]},
            "average_map": table["average_map"],
        }
        config = {"tiou": tious, "workers": args.workers}
    else:
        gts = store.load_frame_labels(args.gt)
        preds = store.load_frame_labels(args.pred)
        taus = [float(t) for t in args.tau.split(",")]
        scores = metrics.tas_evaluate(preds, gts, taus)
        results = {
            "mf1": scores.mf1,
            "f1_at": {f"{t:g}": v for t, v in scores.f1_at.items()},
            "edit": scores.edit,
            "acc": scores.acc,
        }
        config = {"tau": taus, "workers": args.workers}
    report.write_report(out, f"metrics {args.kind}", config,
                        {"gt": args.gt, "pred": args.pred}, results,
                        time.perf_counter() - t0)
    return 0


def cmd_plan(args) -> int:
    t0 = time.perf_counter()
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    preset = _preset(args.preset)
    clip_sec = args.clip_sec if args.clip_sec is not None else preset.get("clip_sec")
    stride_sec = args.stride_sec if args.stride_sec is not None else preset.get("stride_sec")
    fps_default = preset.get("fps")
    if clip_sec is None:
        raise UsageError("plan requires --clip-sec or a preset that sets it")

    videos = []
    for vid in manifest["videos"]:
        fps = float(vid.get("fps", fps_default or 0))
        if fps <= 0:
            raise store.StoreError(f"video {vid.get('id')!r}: fps missing or nonpositive")
        clips = plan.plan_multiclip(
            float(vid["duration_sec"]), fps, clip_sec, stride_sec, args.n_frames
        )
        views = None
        if args.views:
            m, n = (int(v) for v in args.views.split(","))
            views = plan.plan_views(
                float(vid["duration_sec"]), fps, args.short_side, args.long_side,
                m, n, n_frames=args.n_frames, clip_sec=clip_sec,
            )
        videos.append(plan.video_plan_to_json(vid["id"], clips, views))
    plan.write_plan_file(args.out_file, videos)
    out = Path(args.out_file).parent
    config = {"clip_sec": clip_sec, "stride_sec": stride_sec,
              "n_frames": args.n_frames, "views": args.views,
              "preset": args.preset, "workers": args.workers}
    report.write_report(out, "plan", config, {"manifest": args.manifest},
                        {"videos": len(videos),
                         "clips": sum(len(v["clips"]) for v in videos)},
                        time.perf_counter() - t0)
    return 0


def cmd_report_scatter(args) -> int:
    out = _out_dir(args)
    t0 = time.perf_counter()
    appearance = set(args.appearance.split(","))
    motion = set(args.motion.split(","))
    by_model: dict[str, dict[str, list[float]]] = {}
    for path in args.reports:
        with open(path) as fh:
            doc = json.load(fh)
        model = doc["config"].get("model", "model")
        dataset = doc["config"].get("dataset", "")
        top1 = _extract_top1(doc["results"])
        if top1 is None:
            continue
        bucket = "appearance" if dataset in appearance else (
            "motion" if dataset in motion else None
        )
        if bucket is None:
            continue
        by_model.setdefault(model, {"appearance": [], "motion": []})[bucket].append(top1)

    rows = []
    for model in sorted(by_model):
        axes = by_model[model]
        rows.append({
            "model": model,
            "appearance_top1": float(np.mean(axes["appearance"])) if axes["appearance"] else None,
            "motion_top1": float(np.mean(axes["motion"])) if axes["motion"] else None,
        })
    with open(_ensure_dir(out) / "scatter.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["model", "appearance_top1", "motion_top1"])
        writer.writeheader()
        writer.writerows(rows)
    config = {"appearance": sorted(appearance), "motion": sorted(motion),
              "workers": args.workers}
    report.write_report(out, "report scatter", config,
                        {f"report_{i}": p for i, p in enumerate(args.reports)},
                        {"models": rows}, time.perf_counter() - t0)
    return 0


def _extract_top1(results: dict):
    if "top1" in results:
        return float(results["top1"])
    for value in results.values():  # knn reports nest per mode
        if isinstance(value, dict) and "top1" in value:
            return float(value["top1"])
    return None


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vembench",
        description="Evaluation engine for serialized video-model embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output directory (or $VEMBENCH_OUT)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=1,
                       help="declared worker count (results are worker-independent)")

    p = sub.add_parser("synth", help="generate synthetic oracle datasets")
    ss = p.add_subparsers(dest="kind", required=True)
    g = ss.add_parser("gaussians")
    g.add_argument("--classes", type=int, default=10)
    g.add_argument("--dim", type=int, default=64)
    g.add_argument("--per-class", type=int, default=200)
    g.add_argument("--eval-per-class", type=int, default=50)
    g.add_argument("--sep", type=float, default=5.0)
    g.add_argument("--clips", type=int, default=1)
    g.add_argument("--tokens", type=int, default=1)
    common(g)
    g.set_defaults(func=cmd_synth, seed=0)
    mo = ss.add_parser("motion")
    mo.add_argument("--n", type=int, default=200)
    mo.add_argument("--dim", type=int, default=32)
    mo.add_argument("--strength", type=float, default=5.0)
    common(mo)
    mo.set_defaults(func=cmd_synth, seed=0)
    ts = ss.add_parser("token-signal")
    ts.add_argument("--per-class", type=int, default=100)
    ts.add_argument("--classes", type=int, default=5)
    ts.add_argument("--tokens", type=int, default=8)
    ts.add_argument("--dim", type=int, default=32)
    ts.add_argument("--signal-norm", type=float, default=4.0)
    common(ts)
    ts.set_defaults(func=cmd_synth, seed=0)
    for sp, kind in ((g, "gaussians"), (mo, "motion"), (ts, "token-signal")):
        sp.set_defaults(kind=kind)

    p = sub.add_parser("probe", help="train and evaluate a probe")
    ps = p.add_subparsers(dest="kind", required=True)
    for kind in ("linear", "attentive"):
        q = ps.add_parser(kind)
        q.add_argument("--train", required=True)
        q.add_argument("--eval", required=True)
        q.add_argument("--preset", default=None)
        q.add_argument("--epochs", type=int, default=None)
        q.add_argument("--batch-size", dest="batch_size", type=int, default=None)
        q.add_argument("--warmup-epochs", dest="warmup_epochs", type=int, default=None)
        q.add_argument("--lr", type=float, default=None)
        q.add_argument("--weight-decay", dest="weight_decay", type=float, default=None)
        q.add_argument("--heads", type=int, default=None)
        q.add_argument("--model", default="model", help="model label for reports")
        q.add_argument("--save-head", action="store_true")
        common(q)
        q.set_defaults(func=cmd_probe, kind=kind)

    p = sub.add_parser("knn", help="k-nearest-neighbor evaluation")
    p.add_argument("--train", required=True)
    p.add_argument("--eval", required=True)
    p.add_argument("--preset", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--metric", choices=("cosine", "l2"), default=None)
    p.add_argument("--mode", choices=("uniform", "clip", "video", "all"), default="all")
    p.add_argument("--model", default="model")
    common(p)
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("lda-reversal", help="forward-vs-reversed separability")
    p.add_argument("--forward", required=True)
    p.add_argument("--reversed", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--ridge", default="auto", help="'auto' or a float (0 disables)")
    common(p)
    p.set_defaults(func=cmd_lda_reversal)

    p = sub.add_parser("viz", help="2-D embedding visualization")
    vs = p.add_subparsers(dest="kind", required=True)
    t = vs.add_parser("tsne")
    t.add_argument("--input", required=True)
    t.add_argument("--perplexity", type=float, default=30.0)
    t.add_argument("--iterations", type=int, default=1000)
    t.add_argument("--learning-rate", dest="learning_rate", type=float, default=200.0)
    common(t)
    t.set_defaults(func=cmd_viz, kind="tsne", seed=0)
    c = vs.add_parser("pca")
    c.add_argument("--input", required=True)
    common(c)
    c.set_defaults(func=cmd_viz, kind="pca")

    p = sub.add_parser("metrics", help="temporal localization/segmentation metrics")
    ms = p.add_subparsers(dest="kind", required=True)
    tal = ms.add_parser("tal")
    tal.add_argument("--gt", required=True)
    tal.add_argument("--pred", required=True)
    tal.add_argument("--tiou", default="0.3,0.5,0.7")
    common(tal)
    tal.set_defaults(func=cmd_metrics, kind="tal")
    tas = ms.add_parser("tas")
    tas.add_argument("--gt", required=True)
    tas.add_argument("--pred", required=True)
    tas.add_argument("--tau", default="0.1,0.25,0.5")
    common(tas)
    tas.set_defaults(func=cmd_metrics, kind="tas")

    p = sub.add_parser("plan", help="emit frame-sampling schedules")
    p.add_argument("--manifest", required=True)
    p.add_argument("--preset", default=None)
    p.add_argument("--clip-sec", dest="clip_sec", type=float, default=None)
    p.add_argument("--stride-sec", dest="stride_sec", type=float, default=None)
    p.add_argument("--n-frames", dest="n_frames", type=int, default=16)
    p.add_argument("--views", default=None, help="m,n view grid")
    p.add_argument("--short-side", dest="short_side", type=int, default=224)
    p.add_argument("--long-side", dest="long_side", type=int, default=224)
    p.add_argument("--out-file", dest="out_file", required=True)
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("report", help="merge and reshape result files")
    rs = p.add_subparsers(dest="kind", required=True)
    sc = rs.add_parser("scatter")
    sc.add_argument("--reports", nargs="+", required=True)
    sc.add_argument("--appearance", required=True, help="comma-separated dataset names")
    sc.add_argument("--motion", required=True, help="comma-separated dataset names")
    common(sc)
    sc.set_defaults(func=cmd_report_scatter)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (store.StoreError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
