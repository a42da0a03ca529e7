#!/usr/bin/env python3
"""Regenerate the 8x8 stripes classifier fixture and its source/reference images.

Trains a 64-16-2 relu network to tell horizontal from vertical gratings,
then writes:
    tests/fixtures/mlp_stripes_8x8.json   network weights
    tests/fixtures/source.pgm             horizontal grating (class 0)
    tests/fixtures/reference.pgm          vertical grating (class 1)
Deterministic; safe to re-run. The committed fixtures come from this script.
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hardlabel import ImageTensor, load_mlp, read_image, write_image

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SIDE = 8
HIDDEN = 16


def make_dataset(rng, count):
    """Gratings with random frequency/phase/noise; label = orientation."""
    coords = np.arange(SIDE, dtype=np.float64)
    xs = np.empty((count, SIDE * SIDE))
    ys = np.empty(count, dtype=np.int64)
    for i in range(count):
        orient = int(rng.integers(2))  # 0: varies along rows, 1: along columns
        freq = rng.uniform(0.6, 1.6)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        wave = 0.5 + 0.4 * np.sin(freq * coords + phase)
        img = np.tile(wave[:, None], (1, SIDE)) if orient == 0 else np.tile(wave[None, :], (SIDE, 1))
        img = np.clip(img + rng.normal(0.0, 0.08, (SIDE, SIDE)), 0.0, 1.0)
        xs[i] = img.reshape(-1)
        ys[i] = orient
    return xs, ys


def train(rng, xs, ys, steps=3000, lr=0.5):
    n, d = xs.shape
    w1 = rng.normal(0.0, 0.3, (HIDDEN, d))
    b1 = np.zeros(HIDDEN)
    w2 = rng.normal(0.0, 0.3, (2, HIDDEN))
    b2 = np.zeros(2)
    onehot = np.eye(2)[ys]
    for step in range(steps):
        h_pre = xs @ w1.T + b1
        h = np.maximum(h_pre, 0.0)
        logits = h @ w2.T + b2
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        grad_logits = (p - onehot) / n
        gw2 = grad_logits.T @ h
        gb2 = grad_logits.sum(axis=0)
        grad_h = grad_logits @ w2
        grad_h[h_pre <= 0.0] = 0.0
        gw1 = grad_h.T @ xs
        gb1 = grad_h.sum(axis=0)
        w1 -= lr * gw1
        b1 -= lr * gb1
        w2 -= lr * gw2
        b2 -= lr * gb2
        if step % 500 == 0:
            acc = float(np.mean(np.argmax(logits, axis=1) == ys))
            print(f"step {step:4d}  train acc {acc:.3f}")
    return w1, b1, w2, b2


def grating(orient, freq, phase):
    coords = np.arange(SIDE, dtype=np.float64)
    wave = 0.5 + 0.4 * np.sin(freq * coords + phase)
    img = np.tile(wave[:, None], (1, SIDE)) if orient == 0 else np.tile(wave[None, :], (SIDE, 1))
    return ImageTensor(img.reshape(SIDE, SIDE, 1))


def main():
    rng = np.random.default_rng(0)
    xs, ys = make_dataset(rng, 2048)
    w1, b1, w2, b2 = train(rng, xs, ys)

    FIXTURES.mkdir(parents=True, exist_ok=True)
    weights_path = FIXTURES / "mlp_stripes_8x8.json"
    with open(weights_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "num_classes": 2,
                "input_shape": [SIDE, SIDE, 1],
                "layers": [
                    {"rows": HIDDEN, "cols": SIDE * SIDE, "activation": "relu",
                     "weights": w1.reshape(-1).tolist(), "bias": b1.tolist()},
                    {"rows": 2, "cols": HIDDEN, "activation": "identity",
                     "weights": w2.reshape(-1).tolist(), "bias": b2.tolist()},
                ],
            },
            fh,
            indent=1,
        )
        fh.write("\n")
    oracle = load_mlp(weights_path)

    holdout_x, holdout_y = make_dataset(np.random.default_rng(99), 512)
    acc = np.mean(
        [np.argmax(oracle.logits(ImageTensor(x.reshape(SIDE, SIDE, 1)))) == y
         for x, y in zip(holdout_x, holdout_y)]
    )
    print(f"holdout acc {acc:.3f}")

    source = grating(0, 1.0, 0.7)
    reference = grating(1, 1.1, 2.3)
    write_image(FIXTURES / "source.pgm", source)
    write_image(FIXTURES / "reference.pgm", reference)
    # the attacks see the quantized files; labels and margins must hold there
    source_q = read_image(FIXTURES / "source.pgm")
    reference_q = read_image(FIXTURES / "reference.pgm")
    ls = oracle.logits(source_q)
    lr_ = oracle.logits(reference_q)
    print(f"source logits {ls}, reference logits {lr_}")
    assert np.argmax(ls) == 0 and ls[0] - ls[1] > 1.0, "source label/margin too weak"
    assert np.argmax(lr_) == 1 and lr_[1] - lr_[0] > 1.0, "reference label/margin too weak"
    print(f"wrote {weights_path.name}, source.pgm, reference.pgm")


if __name__ == "__main__":
    main()
