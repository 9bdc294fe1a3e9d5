#!/usr/bin/env python3
"""Convert a Planetoid dataset (Cora / Citeseer / Pubmed raw files:
ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}) into the cogsl layout.

Uses the standard public split: 20 labelled nodes per class for training,
the next 500 nodes for validation and the 1000 listed test nodes.
Citeseer's isolated test ids that have no feature row get zero features
and label 0 and are left out of every split.
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_part(raw, name, part):
    with open(raw / f"ind.{name}.{part}", "rb") as fh:
        if sys.version_info > (3, 0):
            return pickle.load(fh, encoding="latin1")
        return pickle.load(fh)


def convert(raw, name, out):
    x, y, tx, ty, allx, ally, graph = (load_part(raw, name, p) for p in ("x", "y", "tx", "ty", "allx", "ally", "graph"))
    test_idx = [int(line) for line in (raw / f"ind.{name}.test.index").read_text().split()]
    test_sorted = np.sort(test_idx)

    if name == "citeseer":
        full = range(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx, :] = features[test_sorted, :]
    labels = np.vstack((ally, ty))
    labels[test_idx, :] = labels[test_sorted, :]
    labels = labels.argmax(axis=1)

    n = features.shape[0]
    edges = set()
    for i, nbrs in graph.items():
        for j in nbrs:
            if i != j and i < n and j < n:
                edges.add((min(i, j), max(i, j)))

    train = list(range(y.shape[0]))
    val = list(range(y.shape[0], y.shape[0] + 500))
    test = [int(i) for i in test_sorted.tolist() if i < n]

    out.mkdir(parents=True, exist_ok=True)
    dense = features.toarray()
    np.savetxt(out / "features.csv", dense, delimiter=",", fmt="%.17g")
    np.savetxt(out / "labels.csv", labels, fmt="%d")
    with open(out / "edges.csv", "w") as fh:
        for i, j in sorted(edges):
            fh.write(f"{i},{j}\n")
    (out / "splits.json").write_text(json.dumps({"train": train, "val": val, "test": test}))
    print(f"{name}: {n} nodes, {len(edges)} edges, {dense.shape[1]} features, "
          f"{labels.max() + 1} classes, split {len(train)}/{len(val)}/{len(test)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("raw", type=Path, help="directory holding the ind.<name>.* files")
    ap.add_argument("--name", default="citeseer")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default data/<name>)")
    args = ap.parse_args()
    out = args.out or Path(__file__).resolve().parent.parent / "data" / args.name
    convert(args.raw, args.name, out)


if __name__ == "__main__":
    main()
