#!/usr/bin/env python3
"""Regenerates core/src/brief_pattern.inc.

The pattern is pinned: changing the seed, the distribution or the clamp
produces descriptors incompatible with existing object bundles, so bump
the detector id (kBuiltinDetectorId) whenever this output changes.

Pairs are drawn i.i.d. from an isotropic Gaussian with sigma = 31/5 and
clamped to [-13, 13] so that a 5x5 box around every sample stays inside
the 31x31 patch.
"""
import random

SEED = 20200917
PAIRS = 256
SIGMA = 31.0 / 5.0
LIMIT = 13


def sample(rng):
    while True:
        v = int(round(rng.gauss(0.0, SIGMA)))
        if -LIMIT <= v <= LIMIT:
            return v


def main():
    rng = random.Random(SEED)
    pairs = []
    while len(pairs) < PAIRS:
        p = (sample(rng), sample(rng), sample(rng), sample(rng))
        if (p[0], p[1]) == (p[2], p[3]):
            continue
        pairs.append(p)
    print("// Generated by tools/scripts/gen_brief_pattern.py. Do not edit.")
    print("// {x1, y1, x2, y2} offsets from the keypoint, seed %d." % SEED)
    for i in range(0, PAIRS, 4):
        print(" ".join("{%d, %d, %d, %d}," % p for p in pairs[i:i + 4]))


if __name__ == "__main__":
    main()
