#!/usr/bin/env python3
"""Convert the 10k-digit MNIST sample shipped in the `mnist` npm package to IDX.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/npm_mnist_to_idx.py package/src/digits data/mnist

Each class file holds row-major 28x28 images with pixels already divided by
255 and rounded to three decimals; round(v * 255) recovers the original byte.
The first 80% of every class goes to the train files, the rest to t10k, and
both splits are shuffled with a fixed seed.
"""
import gzip
import json
import struct
import sys
from pathlib import Path

import numpy as np


def write_images(path, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main(src, dst):
    src, dst = Path(src), Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    train_x, train_y, test_x, test_y = [], [], [], []
    for digit in range(10):
        data = np.array(json.loads((src / f"{digit}.json").read_text())["data"])
        imgs = np.round(data * 255).reshape(-1, 784)
        cut = int(round(0.8 * len(imgs)))
        train_x.append(imgs[:cut])
        train_y.append(np.full(cut, digit))
        test_x.append(imgs[cut:])
        test_y.append(np.full(len(imgs) - cut, digit))
    rng = np.random.default_rng(0)
    for name, xs, ys in (("train", train_x, train_y), ("t10k", test_x, test_y)):
        x, y = np.concatenate(xs), np.concatenate(ys)
        perm = rng.permutation(len(y))
        write_images(dst / f"{name}-images-idx3-ubyte.gz", x[perm])
        write_labels(dst / f"{name}-labels-idx1-ubyte.gz", y[perm])
        print(name, len(y))


if __name__ == "__main__":
    main(*sys.argv[1:3])
