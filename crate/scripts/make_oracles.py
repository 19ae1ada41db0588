#!/usr/bin/env python3
"""Computes frozen reference values for the test suites.

Writes:
  assets/testdata/similarity_oracle.tsv  cosine similarities of fixture pairs,
                                         computed in float64 from the raw text
  assets/testdata/synthetic_sum.tsv      500 rows, y = x1 + x2 + x3 plus two
                                         noise features, first 400 train
  assets/testdata/synthetic_sum.json     predict-mean baseline RMSE on the
                                         held-out 100 rows

Usage: python3 scripts/make_oracles.py
"""

import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "assets" / "fixture"
OUT = ROOT / "assets" / "testdata"

PAIRS = [
    ("kinetic", "warm"),
    ("kinetic", "calm"),
    ("warm", "cold"),
    ("playful", "youthful"),
    ("economical", "efficient"),
    ("economical", "thrifty"),
    ("effortless", "elegant"),
]

SYNTH_SEED = 7
SYNTH_ROWS = 500
SYNTH_TRAIN = 400


def load_embeddings(path):
    rows = {}
    with open(path) as f:
        first = f.readline().split()
        if len(first) != 2:
            rows[first[0]] = np.array([float(v) for v in first[1:]])
        for line in f:
            parts = line.split()
            rows[parts[0]] = np.array([float(v) for v in parts[1:]])
    return rows


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    emb = load_embeddings(FIXTURE / "embeddings.txt")
    with open(OUT / "similarity_oracle.tsv", "w") as f:
        f.write("# a\tb\tcosine (float64 from raw text)\n")
        for a, b in PAIRS:
            f.write(f"{a}\t{b}\t{cosine(emb[a], emb[b]):.9f}\n")

    rng = np.random.default_rng(SYNTH_SEED)
    x = rng.uniform(0.0, 1.0, size=(SYNTH_ROWS, 5))
    y = x[:, 0] + x[:, 1] + x[:, 2]
    with open(OUT / "synthetic_sum.tsv", "w") as f:
        f.write("# x1\tx2\tx3\tx4\tx5\ty\n")
        for row, target in zip(x, y):
            f.write("\t".join(repr(float(v)) for v in row) + f"\t{float(target)!r}\n")
    train_y, test_y = y[:SYNTH_TRAIN], y[SYNTH_TRAIN:]
    baseline = float(np.sqrt(np.mean((test_y - train_y.mean()) ** 2)))
    meta = {
        "seed": SYNTH_SEED,
        "rows": SYNTH_ROWS,
        "train_rows": SYNTH_TRAIN,
        "train_mean": float(train_y.mean()),
        "baseline_test_rmse": baseline,
    }
    (OUT / "synthetic_sum.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(json.dumps(meta))


if __name__ == "__main__":
    main()
