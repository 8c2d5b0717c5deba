#!/usr/bin/env python3
"""Long-time sharpness experiment: both sides of the sharp bound along t."""

import sys

from mminf.bounds import sharpness_decay
from mminf.kernel import Observable, QueueParams


def run():
    rho = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
    params = QueueParams(lam=rho, mu=1.0)
    f = Observable.indicator([0, 1])
    rows = sharpness_decay(params, f, 1, [2.0**i for i in range(6)])
    print(f"{'t':>6}  {'|laplacian|':>14}  {'|bound|':>14}")
    for t, lhs, rhs in rows:
        print(f"{t:6.1f}  {lhs:14.6e}  {rhs:14.6e}")


if __name__ == "__main__":
    run()
