#!/usr/bin/env python3
"""Write a seeded MNIST subset as IDX files.

Source: the `mnist` npm package, which ships 10000 MNIST digits as
per-class JSON arrays of 784 intensities rounded to 1/255 steps.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data --count 5000
"""
import argparse
import json
import pathlib
import random
import struct


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--count", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=2018)
    args = ap.parse_args()

    samples = []
    for label in range(10):
        data = json.loads((args.digits_dir / f"{label}.json").read_text())["data"]
        for start in range(0, len(data), 784):
            pixels = bytes(min(255, round(v * 255)) for v in data[start:start + 784])
            samples.append((pixels, label))

    rng = random.Random(args.seed)
    rng.shuffle(samples)
    samples = samples[:args.count]

    args.out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"mnist-{args.count}"
    with open(args.out_dir / f"{stem}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(pixels)
    with open(args.out_dir / f"{stem}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))


if __name__ == "__main__":
    main()
