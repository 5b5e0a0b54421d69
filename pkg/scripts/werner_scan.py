#!/usr/bin/env python3
"""Scan Werner weights: closed-form M(p) against the optimized CHSH value."""

import argparse
import math

import numpy as np

from nonlocality.bell import horodecki_max, maximize_quantum_chsh
from nonlocality.correlations import bloch_decompose
from nonlocality.states import werner


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--points", type=int, default=11)
    args = p.parse_args()
    print(f"{'p':>6} {'M(p)':>10} {'2+sqrt(M)':>12} {'optimized':>12} violates")
    for w in np.linspace(0, 1, args.points):
        m = horodecki_max(bloch_decompose(werner(w)))
        opt = maximize_quantum_chsh(werner(w), "sum").value
        print(f"{w:6.3f} {m:10.6f} {2 + math.sqrt(m):12.8f} {opt:12.8f} {'yes' if m > 1 else 'no'}")
    print(f"threshold 1/sqrt2 = {1 / math.sqrt(2):.10f}")


if __name__ == "__main__":
    main()
