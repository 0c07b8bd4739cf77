#!/usr/bin/env python3
"""Brute-force check of the 3-frame windowed-weight example.

Standalone on purpose: no imports from the package, no numpy, everything
spelled out with plain arithmetic so the numbers can be audited by eye.
The sequence is one vertex over three frames, window radius 1, truncating
at the boundaries. Output is machine-parseable:

    raw <e1> <e2> <e3>
    weight <w1> <w2> <w3>
"""

import math

FRAMES = [
    (0.0, 0.0, 0.0),
    (1.0, 0.0, 0.0),
    (1.0, 0.0, 0.0),
]
SIGMA = 1


def step_norm_sq(a, b):
    return (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 + (b[2] - a[2]) ** 2


def main():
    num_frames = len(FRAMES)
    # steps[k] = squared step norm into 1-based frame k, defined for k = 2..T
    steps = {k: step_norm_sq(FRAMES[k - 2], FRAMES[k - 1]) for k in range(2, num_frames + 1)}

    raw = []
    for t in range(1, num_frames + 1):
        lo = min(max(t - SIGMA, 2), num_frames)
        hi = min(max(t + SIGMA, 2), num_frames)
        window = [steps[k] for k in range(lo, hi + 1)]
        raw.append(sum(window) / len(window))

    peak = max(raw)
    exps = [math.exp(e - peak) for e in raw]
    total = sum(exps)
    weights = [x / total for x in exps]

    print("raw " + " ".join(repr(e) for e in raw))
    print("weight " + " ".join(repr(w) for w in weights))


if __name__ == "__main__":
    main()
