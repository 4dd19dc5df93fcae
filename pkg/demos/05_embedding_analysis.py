"""Embedding-space analyses: directional-motion separability and 2-D maps.

A video and its temporally reversed twin share appearance, so if a Fisher
discriminant can separate forward from reversed embeddings, the embedding
must encode motion direction. t-SNE (or the PCA fallback) gives a 2-D look
at class structure; 10-NN label purity quantifies it.
Run: python3 demos/05_embedding_analysis.py  (~10 s)
"""

import numpy as np

from vembench.analyze import (
    TsneConfig,
    cluster_purity,
    pca_project,
    reversal_separability,
    tsne,
)
from vembench.numkit import Rng
from vembench.synth import gen_motion_pairs

# --- forward vs reversed ------------------------------------------------------
# strength controls how much of the embedding moves with time direction.
for strength in (0.0, 1.0, 5.0):
    fwd, rev = gen_motion_pairs(150, 24, strength, seed=0)
    res = reversal_separability(fwd, rev, folds=5)
    print(f"direction strength {strength:3.1f}: "
          f"cross-validated accuracy {res['accuracy']:5.1f}%")
print("(~50% means the embedding is blind to playback direction)")

# --- 2-D visualization --------------------------------------------------------
rng = Rng(0, 0)
X = rng.normal(150 * 12).reshape(150, 12)
labels = np.repeat(np.arange(3), 50)
for c in range(3):
    X[labels == c, c] += 10.0

coords, trace = tsne(X, TsneConfig(seed=0), return_trace=True)
print(f"\nt-SNE: KL {trace[0][1]:.3f} -> {trace[-1][1]:.3f}, "
      f"10-NN purity {cluster_purity(coords, labels, 10):.3f}")

pca_coords = pca_project(X, 2)
print(f"PCA fallback: 10-NN purity {cluster_purity(pca_coords, labels, 10):.3f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, pts, title in ((axes[0], coords, "t-SNE"), (axes[1], pca_coords, "PCA")):
        ax.scatter(pts[:, 0], pts[:, 1], c=labels, cmap="tab10", s=12)
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig("embedding_map.png", dpi=120)
    print("wrote embedding_map.png")
except ImportError:
    pass
