#!/usr/bin/env python3
"""Writes tests/fixtures/kernel_golden.json: numpy reference values for the
masked loss kernels, shared by the C++ tests and the trainer.

Usage: python3 tools/gen_kernel_fixtures.py [output.json]
"""
import json
import math
import os
import sys

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_OUT = os.path.join(HERE, "..", "tests", "fixtures", "kernel_golden.json")


def masked_mse(score, target, mask, w, h):
    r = (score - target) * mask
    return float(np.sum(r * r) / (w * h))


def downsample(mask, ow, oh):
    H, W = mask.shape
    out = np.zeros((oh, ow), dtype=np.uint8)
    for j in range(oh):
        y0, y1 = (j * H) // oh, -((-(j + 1) * H) // oh)
        for i in range(ow):
            x0, x1 = (i * W) // ow, -((-(i + 1) * W) // ow)
            out[j, i] = 1 if mask[y0:y1, x0:x1].any() else 0
    return out


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_OUT
    rng = np.random.default_rng(20240611)
    cases = []
    for k in range(12):
        sh, sw = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        w, h = sw * int(rng.integers(1, 5)), sh * int(rng.integers(1, 5))
        real = rng.random((sh, sw))
        fake = rng.random((sh, sw))
        target = rng.random((sh, sw))
        m_real = (rng.random((sh, sw)) < 0.5).astype(np.uint8)
        m_fake = (rng.random((sh, sw)) < 0.5).astype(np.uint8)
        ones, zeros = np.ones_like(real), np.zeros_like(real)
        cases.append({
            "width": sw, "height": sh, "norm_w": w, "norm_h": h,
            "score": real.ravel().tolist(),
            "fake_score": fake.ravel().tolist(),
            "target": target.ravel().tolist(),
            "mask": m_real.ravel().tolist(),
            "fake_mask": m_fake.ravel().tolist(),
            "masked_mse": masked_mse(real, target, m_real, w, h),
            "gradient": (2.0 * m_real * (real - target) / (w * h)).ravel().tolist(),
            "disc_standard": masked_mse(real, ones, m_real, w, h) + masked_mse(fake, zeros, m_fake, w, h),
            "disc_as_printed": masked_mse(real, zeros, m_real, w, h) + masked_mse(fake, ones, m_fake, w, h),
        })

    pools = []
    for k in range(8):
        H, W = int(rng.integers(4, 40)), int(rng.integers(4, 40))
        oh, ow = int(rng.integers(1, H + 1)), int(rng.integers(1, W + 1))
        m = (rng.random((H, W)) < 0.08).astype(np.uint8)
        pools.append({"width": W, "height": H, "out_w": ow, "out_h": oh,
                      "mask": m.ravel().tolist(), "pooled": downsample(m, ow, oh).ravel().tolist()})

    labels = rng.integers(0, 34, size=(6, 16, 12))
    person = int(np.sum(labels == 24))
    rest = int(labels.size - person)
    lam = {"labels": labels.reshape(6, -1).tolist(), "width": 12, "height": 16,
           "person_pixels": person, "rest_pixels": rest, "lambda": person / rest}

    terms = rng.random(5).tolist()
    objective = {"cycle_loss": terms[0], "real_person": terms[1], "real_rest": terms[2],
                 "augmented_person": terms[3], "augmented_rest": terms[4], "lambda_class": 0.2, "lambda_cyc": 10.0,
                 "total": math.fsum([10.0 * terms[0], terms[1], 0.2 * terms[2], terms[3], 0.2 * terms[4]])}

    doc = {"tolerance": 1e-12, "masked_mse": cases, "downsample": pools, "lambda": lam, "objective": objective}
    with open(out_path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
