#!/usr/bin/env python3
"""Convert a citation benchmark into a pmn dataset directory.

Two input layouts are understood:

* the Planetoid files ``ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index}``
  (``--planetoid DIR --name cora``), and
* a single ``.npz`` in the gnn-benchmark layout with ``adj_*``, ``attr_*``
  and ``labels`` arrays (``--npz FILE``).

Output: ``meta.json``, ``edges.tsv``, ``features.tsv``, ``labels.tsv``.
Self-loops and duplicate edges are dropped by the loader, so they are
written as found. ``num_edges`` is left out of ``meta.json`` unless
``--num-edges`` is given.

Needs numpy and scipy.
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_planetoid(root, name):
    objs = {}
    for key in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        with open(root / f"ind.{name}.{key}", "rb") as f:
            objs[key] = pickle.load(f, encoding="latin1")
    test_idx = [int(line) for line in open(root / f"ind.{name}.test.index")]
    test_sorted = np.sort(test_idx)

    tx, ty = objs["tx"], objs["ty"]
    if name == "citeseer":
        # Some test ids have no node in tx; pad with zero rows so that
        # indices line up.
        full = range(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((objs["allx"], tx)).tolil()
    features[test_idx, :] = features[test_sorted, :]
    onehot = np.vstack((objs["ally"], ty))
    onehot[test_idx, :] = onehot[test_sorted, :]
    # Padded citeseer rows have no label; argmax puts them in class 0.
    labels = onehot.argmax(axis=1)

    edges = []
    for u, nbrs in objs["graph"].items():
        for v in nbrs:
            edges.append((int(u), int(v)))
    return sp.csr_matrix(features), labels, edges


def load_npz(path):
    z = np.load(path, allow_pickle=True)
    adj = sp.csr_matrix(
        (z["adj_data"], z["adj_indices"], z["adj_indptr"]), shape=z["adj_shape"]
    )
    if "attr_data" in z:
        features = sp.csr_matrix(
            (z["attr_data"], z["attr_indices"], z["attr_indptr"]),
            shape=z["attr_shape"],
        )
    else:
        features = sp.csr_matrix(z["attr_matrix"])
    coo = adj.tocoo()
    edges = list(zip(coo.row.tolist(), coo.col.tolist()))
    return features, np.asarray(z["labels"]), edges


def write(out, features, labels, edges, num_edges=None):
    out.mkdir(parents=True, exist_ok=True)
    n, l = features.shape
    classes = int(labels.max()) + 1
    meta = {"n": int(n), "num_features": int(l), "num_classes": classes}
    if num_edges is not None:
        meta["num_edges"] = num_edges
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    with open(out / "edges.tsv", "w") as f:
        for u, v in edges:
            if u < n and v < n:
                f.write(f"{u}\t{v}\n")
    coo = features.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(out / "features.tsv", "w") as f:
        for i in order:
            if coo.data[i] != 0:
                f.write(f"{coo.row[i]}\t{coo.col[i]}\t{float(coo.data[i])!r}\n")
    with open(out / "labels.tsv", "w") as f:
        for u, c in enumerate(labels):
            f.write(f"{u}\t{int(c)}\n")
    print(f"{out}: n={n} features={l} classes={classes} edge lines={len(edges)}", file=sys.stderr)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--planetoid", type=Path, help="directory with ind.<name>.* files")
    src.add_argument("--npz", type=Path, help="gnn-benchmark style .npz file")
    ap.add_argument("--name", help="dataset name for --planetoid (cora, citeseer, pubmed)")
    ap.add_argument("--num-edges", type=int, help="expected undirected edge count to record")
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()

    if args.planetoid:
        if not args.name:
            ap.error("--planetoid needs --name")
        features, labels, edges = load_planetoid(args.planetoid, args.name)
    else:
        features, labels, edges = load_npz(args.npz)
    write(args.out, features, labels, edges, args.num_edges)


if __name__ == "__main__":
    main()
