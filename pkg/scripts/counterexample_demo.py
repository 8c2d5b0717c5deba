#!/usr/bin/env python3
"""Exact-arithmetic demonstration that the claimed sharp constant fails.

At rho=2, mu=1, p=0.1 (t = ln 10) the kernel row started from k=2 violates
G_2(1)^2 <= K G_2(2) G_2(0) with the claimed K, and the observable f =
indicator{2} violates the sharp semigroup bound at n=1. The weaker 1/12
bound still holds. Every number below is certified: the mass ratios are
exact rationals and the matrix-exponential cross-check is independent.
"""

import math
from fractions import Fraction

from mminf.bounds import glmrs_bound, sharp_bound
from mminf.kernel import QueueParams
from mminf.oracle import (
    exact_lemma_check,
    exact_rational_convolution,
    uniformized_kernel,
)


def run():
    rho, p = Fraction(2), Fraction(1, 10)
    b = rho * (1 - p)
    d2 = (rho * (1 - p) ** 2 + p) ** 2

    g = exact_rational_convolution(2, p, b, 2)
    ratio = g[2] * g[0] / g[1] ** 2          # exp(-b) factors cancel
    needed = Fraction(1, 2) * (1 - p * p / d2)  # K^-1 at n=1
    print("kernel inequality at k=2, n=1 (exact rationals):")
    print(f"  G(2)G(0)/G(1)^2 = {ratio} = {float(ratio):.9f}")
    print(f"  required >=       {needed} = {float(needed):.9f}")
    print(f"  violated: {ratio < needed}")

    params = QueueParams(lam=2.0, mu=1.0)
    t = params.t_for_p(0.1)
    mat = uniformized_kernel(params, t, 120, 1e-12)
    lap = math.log(mat[2, 2] * mat[0, 2] / mat[1, 2] ** 2)
    print("\nsemigroup bound for f = indicator{2} at n=1 (uniformization):")
    print(f"  discrete laplacian of log A_t f : {lap:.9f}")
    print(f"  sharp bound                     : {sharp_bound(2.0, 0.1):.9f}")
    print(f"  1/12 bound                      : {glmrs_bound(2.0, 0.1):.9f}")
    print(f"  sharp violated: {lap < sharp_bound(2.0, 0.1)}")
    print(f"  1/12 holds:     {lap >= glmrs_bound(2.0, 0.1)}")

    fails = exact_lemma_check(rho, p, 10, 20)
    print(f"\nexact-rational violations for k<=10, n<=20: {len(fails)}")
    print(f"  first few: {fails[:6]}")


if __name__ == "__main__":
    run()
