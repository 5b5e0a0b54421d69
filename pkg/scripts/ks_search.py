#!/usr/bin/env python3
"""Colouring search on the 33-ray set (or a JSON vector set) and the game's quantum win rate."""

import argparse

from nonlocality.kochen_specker import (
    all_rounds,
    complete_triples,
    ks_coloring_search,
    load_vector_set,
    peres33,
    quantum_win_probability,
)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--vectors", default=None, help="JSON file with 'vectors' and optional 'triples'")
    args = p.parse_args()
    vs = load_vector_set(args.vectors) if args.vectors else peres33()
    res = ks_coloring_search(vs)
    print(f"{vs.size} vectors, {len(vs.triples)} triples, {len(vs.pairs)} orthogonal pairs")
    print(f"search: {'SAT' if res.satisfiable else 'UNSAT'} after {res.nodes} nodes")
    game = complete_triples(vs)
    rounds = list(all_rounds(game))
    worst = min(quantum_win_probability(game, t, v) for t, v in rounds)
    print(f"game set: {game.size} vectors, {len(game.triples)} triples, {len(rounds)} rounds")
    print(f"minimum quantum win probability {worst:.12f}")


if __name__ == "__main__":
    main()
