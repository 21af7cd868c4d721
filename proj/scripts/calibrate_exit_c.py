#!/usr/bin/env python3
# Copyright 2026 The nbmimo Authors
# SPDX-License-Identifier: Apache-2.0
"""Calibrate the channel constant `c` in the variable-node EXIT function.

The variable-node transfer at I_A = 0 reduces to J(sqrt(c * gamma)).  We pin
`c` for q = 16 so that this value equals the detector-free AWGN symbol EXIT
of 16-QAM at gamma = 10 dB, where gamma is Es/N0 per receive antenna (the
convention used throughout the library: per-real-component noise variance
0.5 * Es / gamma_lin).

The symbol EXIT is the normalized mutual information 1 - E[H(posterior)]/4
of a Gray-labeled 16-QAM symbol, i.e. the average over its two independent
4-PAM rails.  Estimated by seeded Monte Carlo and cross-checked against
direct numerical integration.  Requires scripts/j_constants.json from
fit_j_function.py.
"""
import json
import os
import sys

import numpy as np

GAMMA_DB = 10.0
ES = 10.0                      # 16-QAM symbol energy with rails {+-1, +-3}
LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])


def load_j():
    path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "j_constants.json")
    with open(path) as fh:
        k = json.load(fh)

    def j(s):
        s = np.asarray(s, dtype=float)
        low = ((k["a1"] * s + k["b1"]) * s + k["c1"]) * s * s
        high = 1.0 - np.exp(((k["a2"] * s + k["b2"]) * s + k["c2"]) * s + k["d2"])
        return np.where(s <= k["split"], low, high)

    def j_inv(i):
        lo, hi = 0.0, 40.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if j(mid) < i:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    return j, j_inv


def rail_entropy(y, nv):
    """H(posterior over 4-PAM levels | y) in bits, vectorized over y."""
    d = -((y[:, None] - LEVELS[None, :]) ** 2) / (2.0 * nv)
    d -= d.max(axis=1, keepdims=True)
    p = np.exp(d)
    p /= p.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, p * np.log2(p), 0.0)
    return -t.sum(axis=1)


def main():
    gamma_lin = 10.0 ** (GAMMA_DB / 10.0)
    nv = 0.5 * ES / gamma_lin

    # Monte Carlo over rail uses (a 16-QAM symbol is two independent rails).
    rng = np.random.default_rng(20260814)
    n = 4_000_000
    s = LEVELS[rng.integers(0, 4, size=n)]
    y = s + rng.normal(0.0, np.sqrt(nv), size=n)
    i_mc = 1.0 - rail_entropy(y, nv).mean() / 2.0

    # Quadrature cross-check: E_y H(posterior) under the mixture density.
    grid = np.linspace(LEVELS[0] - 10 * np.sqrt(nv), LEVELS[-1] + 10 * np.sqrt(nv), 40001)
    dens = np.zeros_like(grid)
    for l in LEVELS:
        dens += np.exp(-((grid - l) ** 2) / (2.0 * nv)) / np.sqrt(2.0 * np.pi * nv) / 4.0
    h = rail_entropy(grid, nv)
    trapezoid = getattr(np, "trapezoid", np.trapz)
    i_quad = 1.0 - trapezoid(dens * h, grid) / 2.0

    j, j_inv = load_j()
    sigma = j_inv(i_quad)
    c = sigma * sigma / gamma_lin

    print("gamma                  : %.1f dB (linear %.4f)" % (GAMMA_DB, gamma_lin))
    print("per-real noise variance: %.6f" % nv)
    print("I_awgn (Monte Carlo)   : %.6f" % i_mc)
    print("I_awgn (quadrature)    : %.6f" % i_quad)
    print("|MC - quadrature|      : %.2e" % abs(i_mc - i_quad))
    print("sigma_A = J^-1(I)      : %.9f" % sigma)
    print("c (q=16)               : %r" % float(c))
    print("check J(sqrt(c*gamma)) : %.6f" % float(j(np.sqrt(c * gamma_lin))))
    if abs(i_mc - i_quad) > 2e-3:
        print("ERROR: Monte Carlo and quadrature disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
