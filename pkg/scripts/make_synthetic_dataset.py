#!/usr/bin/env python3
"""Generate the small bundled LIBSVM-format binary classification dataset.

240 samples, 8 features, labels in {0, 1} (exercising the 0 -> -1 mapping at
ingestion).  Deterministic; rerunning reproduces data/synth_binary.libsvm
byte for byte.
"""

from pathlib import Path

import numpy as np


def main():
    rng = np.random.default_rng(12345)
    m, d = 240, 8
    w_true = rng.normal(size=d)
    feats = rng.normal(size=(m, d))
    margins = feats @ w_true + 0.5 * rng.normal(size=m)
    labels = (margins > 0).astype(int)

    lines = []
    for y, row in zip(labels, feats):
        toks = [str(y)] + [f"{j + 1}:{v:.6f}" for j, v in enumerate(row)]
        lines.append(" ".join(toks))
    out = Path(__file__).resolve().parent.parent / "data" / "synth_binary.libsvm"
    out.parent.mkdir(exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({m} samples, d={d}, positives={labels.sum()})")


if __name__ == "__main__":
    main()
