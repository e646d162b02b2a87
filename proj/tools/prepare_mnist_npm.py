#!/usr/bin/env python3
"""Convert the digits bundled in the `mnist` npm package into IDX files.

The package ships ~1000 real MNIST samples per digit as JSON arrays of
pixel intensities in [0, 1] (three decimals). Those values map back to
the original bytes exactly via round(p * 255). Samples are split per digit
into train / test and interleaved by digit; the last samples of each digit form the test split.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/prepare_mnist_npm.py package/src/digits data/mnist
"""
import argparse
import json
import os
import struct


def write_idx_images(path, images, rows=28, cols=28):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), rows, cols))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--test-per-digit", type=int, default=101)
    args = ap.parse_args()

    per_digit = []
    for d in range(10):
        with open(os.path.join(args.digits_dir, f"{d}.json")) as f:
            flat = json.load(f)["data"]
        assert len(flat) % 784 == 0
        samples = []
        for i in range(0, len(flat), 784):
            px = [min(255, max(0, round(v * 255))) for v in flat[i:i + 784]]
            samples.append(px)
        per_digit.append(samples)

    train, test = [], []
    longest = max(len(s) for s in per_digit)
    for i in range(longest):
        for d in range(10):
            samples = per_digit[d]
            if i < len(samples):
                split = test if i >= len(samples) - args.test_per_digit else train
                split.append((samples[i], d))

    os.makedirs(args.out_dir, exist_ok=True)
    write_idx_images(os.path.join(args.out_dir, "train-images-idx3-ubyte"), [p for p, _ in train])
    write_idx_labels(os.path.join(args.out_dir, "train-labels-idx1-ubyte"), [l for _, l in train])
    write_idx_images(os.path.join(args.out_dir, "t10k-images-idx3-ubyte"), [p for p, _ in test])
    write_idx_labels(os.path.join(args.out_dir, "t10k-labels-idx1-ubyte"), [l for _, l in test])
    print(f"train={len(train)} test={len(test)}")


if __name__ == "__main__":
    main()
