"""End-to-end export pipeline: plan -> exporter -> evaluation engine.

The engine plans frame sampling, the (separate) exporter package realizes the
plan through a model adapter and writes a store directory, and the engine
loads it back for evaluation. The synthetic adapter needs no ML stack, so
the whole boundary runs hermetically. Requires the exporter to be built
(cd exporter && npm install && npm run build).
Run: python3 demos/06_export_pipeline.py
"""

import json
import subprocess
import tempfile
from pathlib import Path

from vembench.plan import plan_multiclip, video_plan_to_json, write_plan_file
from vembench.store import load_embedding_set

CLI = Path(__file__).resolve().parents[1] / "exporter" / "dist" / "cli.js"
if not CLI.is_file():
    raise SystemExit("build the exporter first: cd exporter && npm install && npm run build")

work = Path(tempfile.mkdtemp())

manifest = {
    "dataset": "pipeline-demo",
    "dim": 16,
    "level": "clip",
    "classes": ["walk", "run"],
    "videos": [
        {"id": f"vid{i:02d}", "fps": 25.0, "duration_sec": 6.0, "label": i % 2}
        for i in range(6)
    ],
}
(work / "manifest.json").write_text(json.dumps(manifest))

plans = [
    video_plan_to_json(v["id"], plan_multiclip(v["duration_sec"], v["fps"], 2.0,
                                               n_frames=8))
    for v in manifest["videos"]
]
write_plan_file(work / "plan.json", plans)
print(f"planned {len(plans)} videos, {len(plans[0]['clips'])} clips each")

# reversed twin of the same plan (for direction-sensitivity studies)
subprocess.run(["node", CLI, "reverse-plan", "--plan", work / "plan.json",
                "--out", work / "plan_rev.json"], check=True)

for name, plan_file in (("forward", "plan.json"), ("reversed", "plan_rev.json")):
    out = work / name
    res = subprocess.run(
        ["node", CLI, "export", "--adapter", "synthetic",
         "--manifest", work / "manifest.json", "--plan", work / plan_file,
         "--out", out, "--seed", "5"],
        check=True, capture_output=True, text=True,
    )
    summary = json.loads(res.stdout)
    es = load_embedding_set(out)
    print(f"{name}: exported {summary['records']} records "
          f"(sha256 {summary['data_sha256'][:12]}), engine loaded {len(es)} "
          f"records of dim {es.dim}")

fwd = load_embedding_set(work / "forward")
rev = load_embedding_set(work / "reversed")
same = fwd.data.tobytes() == rev.data.tobytes()
print(f"forward and reversed buffers identical: {same} "
      "(reversed frame order changes the synthetic embedding)")
