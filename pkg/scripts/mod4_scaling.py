#!/usr/bin/env python3
"""Classical vs quantum fidelity for the modulo-4 task as the party count grows."""

import argparse

from nonlocality.commcc import (
    CLASSICAL_ENUM_MAX_N,
    classical_fidelity_ascent,
    classical_fidelity_max,
    ghz_mod4_protocol,
    make_mod4_task,
    mod4_classical_bound,
    quantum_fidelity,
)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=8)
    args = p.parse_args()
    print(f"{'N':>3} {'bound':>8} {'exhaustive':>11} {'ascent':>8} {'quantum':>8}")
    for n in range(2, args.max_n + 1):
        task = make_mod4_task(n)
        exact = classical_fidelity_max(task).value if n <= CLASSICAL_ENUM_MAX_N else float("nan")
        asc = classical_fidelity_ascent(task).value
        fq = quantum_fidelity(task, ghz_mod4_protocol(n))
        print(f"{n:3d} {mod4_classical_bound(n):8.4f} {exact:11.4f} {asc:8.4f} {fq:8.4f}")


if __name__ == "__main__":
    main()
