"""Calibrate the frozen constants used by the kernel inequality scans.

The test suite asserts three families of bounds by randomized scan:

* growth: sigma(t, s, x)^2 <= dominating_kernel(t, s)
* state Lipschitz: |sigma(t,s,x) - sigma(t,s,y)|^2
      <= C_lip * dominating_kernel(t,s) * log(t-s)^2 * (x-y)^2
  with the fixed recipe C_lip = 4 * lip_x^2 * max(1, T^(2*(h_sup-h_star)))
* time regularity: |sigma(t,s,x) - sigma(t',s,x)|^2
      <= C_time * (t-t')^gamma * (t'-s)^(-1+h_star-gamma/2) * (1 + x^2)
  at gamma = h_star, with C_time calibrated here.

This script draws a coarse scan per built-in Hurst family, prints the
observed worst ratios, and proposes frozen constants with a 4x safety
margin.  The proposed values are copied into tests/test_kernels.py; the
tests then verify them on a 10x larger independent scan.

Run:  python scripts/calibrate_bounds.py
"""

from __future__ import annotations

import numpy as np

from semsim import builtin_dampening, builtin_hurst

HORIZON = 2.5
COARSE = 10_000
RNG_SEED = 913

HURSTS = {
    "constant": builtin_hurst("constant", [0.75]),
    "smooth_at_origin": builtin_hurst("smooth_at_origin"),
    "rough_at_origin": builtin_hurst("rough_at_origin"),
    "bell": builtin_hurst("bell"),
    "trig": builtin_hurst("trig", [0.6, 0.2, 1.0]),
}

DAMPS = {
    "none": None,
    "constant_1": builtin_dampening("constant", [1.0]),
    "bell": builtin_dampening("bell"),
}


def draw_times(rng, n, min_gap=1e-12):
    s = rng.uniform(0.0, HORIZON, n)
    t = rng.uniform(0.0, HORIZON, n)
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    keep = hi - lo > min_gap
    return lo[keep], hi[keep]


def sigma_vec(h, damp, t, s, x):
    hv = np.clip(h.evaluator(t, x), h.h_star, h.h_sup)
    out = (t - s) ** (hv - 0.5)
    if damp is not None:
        out = out * np.exp(-np.asarray(damp.evaluator(t, x), dtype=float) * (t - s))
    return out


def growth_ratio(h, rng):
    s, t = draw_times(rng, COARSE)
    x = rng.uniform(-10.0, 10.0, s.shape[0])
    spread = 2.0 * (h.h_sup - h.h_star)
    dom = HORIZON ** spread * (t - s) ** (2.0 * h.h_star - 1.0)
    return float(np.max(sigma_vec(h, None, t, s, x) ** 2 / dom))


def lipschitz_ratio(h, rng):
    s, t = draw_times(rng, COARSE)
    n = s.shape[0]
    x = rng.uniform(-10.0, 10.0, n)
    y = rng.uniform(-10.0, 10.0, n)
    keep = np.abs(x - y) > 1e-9
    s, t, x, y = s[keep], t[keep], x[keep], y[keep]
    lhs = (sigma_vec(h, None, t, s, x) - sigma_vec(h, None, t, s, y)) ** 2
    spread = 2.0 * (h.h_sup - h.h_star)
    c_lip = 4.0 * h.lip_x ** 2 * max(1.0, HORIZON ** spread)
    dom = HORIZON ** spread * (t - s) ** (2.0 * h.h_star - 1.0)
    rhs = c_lip * dom * np.log(t - s) ** 2 * (x - y) ** 2
    keep = rhs > 0.0
    return float(np.max(lhs[keep] / rhs[keep]))


def time_reg_ratio(h, damp, rng):
    n = COARSE
    s = rng.uniform(0.0, HORIZON, n)
    tp = rng.uniform(0.0, HORIZON, n)
    t = rng.uniform(0.0, HORIZON, n)
    order = np.sort(np.stack([s, tp, t]), axis=0)
    s, tp, t = order[0], order[1], order[2]
    keep = (tp - s > 1e-12) & (t - tp > 1e-12)
    s, tp, t = s[keep], tp[keep], t[keep]
    x = rng.uniform(-10.0, 10.0, s.shape[0])
    gamma = h.h_star
    lhs = (sigma_vec(h, damp, t, s, x) - sigma_vec(h, damp, tp, s, x)) ** 2
    lam = (t - tp) ** gamma * (tp - s) ** (-1.0 + h.h_star - gamma / 2.0)
    return float(np.max(lhs / (lam * (1.0 + x * x))))


def round_up(v):
    import math
    if v <= 0:
        return 1.0
    exp = math.floor(math.log10(v))
    lead = v / 10 ** exp
    return float(math.ceil(lead * 10) / 10 * 10 ** exp)


def main():
    rng = np.random.default_rng(RNG_SEED)
    print(f"horizon T = {HORIZON}, coarse scan n = {COARSE}\n")
    print("growth: worst sigma^2 / dominating ratio (must stay <= 1)")
    for name, h in HURSTS.items():
        print(f"  {name:18s} {growth_ratio(h, rng):.6f}")
    print("\nstate Lipschitz with recipe constant (ratio must stay <= 1)")
    for name, h in HURSTS.items():
        if h.lip_x == 0.0:
            print(f"  {name:18s} skipped (lip_x = 0, difference is identically 0)")
            continue
        print(f"  {name:18s} {lipschitz_ratio(h, rng):.6f}")
    print("\ntime regularity at gamma = h_star: worst ratio and proposed frozen C (4x margin)")
    for name, h in HURSTS.items():
        worst = 0.0
        for dname, damp in DAMPS.items():
            worst = max(worst, time_reg_ratio(h, damp, rng))
        print(f"  {name:18s} worst={worst:.4f}  frozen C_time = {round_up(4.0 * worst)}")


if __name__ == "__main__":
    main()
