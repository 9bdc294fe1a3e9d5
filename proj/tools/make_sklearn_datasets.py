#!/usr/bin/env python3
"""Export scikit-learn's Wine, Breast Cancer and Digits sets in the cogsl
dataset layout (features.csv, labels.csv, edges.csv, splits.json).

The edge list is left empty: cogsl builds the initial KNN graph itself.
Splits are fixed per dataset: a class-balanced train set, a random
validation set, and every remaining node as test.
"""

import argparse
import json
from pathlib import Path

import numpy as np
from sklearn import datasets

SPLITS = {
    "wine": (datasets.load_wine, 10, 20),
    "cancer": (datasets.load_breast_cancer, 10, 20),
    "digits": (datasets.load_digits, 50, 100),
}


def balanced_train(labels, size, rng):
    classes = np.unique(labels)
    per = [size // len(classes) + (1 if i < size % len(classes) else 0) for i in range(len(classes))]
    picked = []
    for c, k in zip(classes, per):
        idx = np.flatnonzero(labels == c)
        picked.extend(rng.choice(idx, size=k, replace=False).tolist())
    return sorted(picked)


def export(name, out_root, seed):
    loader, n_train, n_val = SPLITS[name]
    data = loader()
    x, y = data.data.astype(float), data.target.astype(int)
    rng = np.random.default_rng(seed)
    train = balanced_train(y, n_train, rng)
    rest = np.setdiff1d(np.arange(len(y)), train)
    val = sorted(rng.choice(rest, size=n_val, replace=False).tolist())
    test = sorted(np.setdiff1d(rest, val).tolist())

    out = Path(out_root) / name
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "features.csv", x, delimiter=",", fmt="%.17g")
    np.savetxt(out / "labels.csv", y, fmt="%d")
    (out / "edges.csv").write_text("")
    (out / "splits.json").write_text(json.dumps({"train": train, "val": val, "test": [int(i) for i in test]}))
    print(f"{name}: {x.shape[0]} nodes, {x.shape[1]} features, {len(np.unique(y))} classes, "
          f"{len(train)}/{len(val)}/{len(test)} -> {out}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("names", nargs="*", default=["wine", "cancer"])
    args = ap.parse_args()
    for name in args.names:
        export(name, args.out, args.seed)


if __name__ == "__main__":
    main()
