"""Structured result emission.

Every command writes a `report.json` whose bytes are a pure function of the
effective config, the input files and the seed, so reruns are comparable
checksum-for-checksum. Wall-clock timing therefore goes to a sidecar file
(`timing.json`) instead of the report. A plain-text rendering sits next to
the JSON for humans.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

import vembench


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def config_hash(config: dict) -> str:
    canon = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def file_checksum(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def input_checksums(paths: dict[str, str]) -> dict[str, dict]:
    """Checksum every file under each named input path."""
    out = {}
    for name, path in paths.items():
        p = Path(path)
        if p.is_dir():
            files = sorted(q for q in p.rglob("*") if q.is_file())
            out[name] = {str(q.relative_to(p)): file_checksum(q) for q in files}
        elif p.is_file():
            out[name] = {p.name: file_checksum(p)}
        else:
            out[name] = {}
    return out


def write_report(out_dir, command: str, config: dict, inputs: dict[str, str],
                 results: dict, elapsed_sec: float) -> Path:
    """Write report.json (+ report.txt, timing.json); returns the JSON path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _jsonable(config)
    doc = {
        "tool": {"name": "vembench", "version": vembench.__version__},
        "command": command,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "inputs": input_checksums(inputs),
        "results": _jsonable(results),
    }
    path = out / "report.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    (out / "timing.json").write_text(
        json.dumps({"elapsed_sec": elapsed_sec}) + "\n"
    )
    (out / "report.txt").write_text(render_text(doc))
    return path


def render_text(doc: dict) -> str:
    """Aligned plain-text table of the scalar results."""
    lines = [
        f"vembench {doc['tool']['version']} :: {doc['command']}",
        f"config hash: {doc['config_hash'][:16]}",
        "",
    ]
    rows = _scalar_rows(doc["results"], prefix="")
    width = max((len(k) for k, _ in rows), default=0)
    for key, val in rows:
        lines.append(f"  {key.ljust(width)}  {val}")
    return "\n".join(lines) + "\n"


def _scalar_rows(obj, prefix: str) -> list[tuple[str, str]]:
    rows = []
    if isinstance(obj, dict):
        for key in obj:
            rows.extend(_scalar_rows(obj[key], f"{prefix}{key}."))
    elif isinstance(obj, (int, float, str, bool)) or obj is None:
        key = prefix.rstrip(".")
        val = f"{obj:.4f}" if isinstance(obj, float) else str(obj)
        rows.append((key, val))
    elif isinstance(obj, list) and len(obj) <= 16 and all(
        isinstance(v, (int, float)) for v in obj
    ):
        key = prefix.rstrip(".")
        rows.append((key, "[" + ", ".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in obj) + "]"))
    return rows
