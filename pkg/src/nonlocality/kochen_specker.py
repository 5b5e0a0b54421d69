"""Kochen-Specker vector sets, colouring search and the spin-1 KS game.

Marking convention: a vector is *marked* when the spin-1 component along it
has S^2 = 0. Within an orthogonal triple exactly one direction has S^2 = 0,
so a non-contextual marking must mark exactly one vector per triple and never
both vectors of an orthogonal pair.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correlations import sample_indices
from .linalg import TOL_ALG, kron
from .states import spin1_singlet_vector

ORTHO_TOL = 1e-9


def _canonical(v: np.ndarray) -> np.ndarray:
    """Unit vector with the first nonzero component positive."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    for c in v:
        if abs(c) > ORTHO_TOL:
            return v if c > 0 else -v
    raise ValueError("zero vector")


@dataclass(frozen=True, eq=False)
class KsVectorSet:
    vectors: np.ndarray  # (m, 3), unit rows
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        v = np.array([_canonical(r) for r in np.asarray(self.vectors, dtype=float)])
        trip = tuple(tuple(sorted(int(i) for i in t)) for t in self.triples)
        for t in trip:
            if len(set(t)) != 3 or not all(0 <= i < len(v) for i in t):
                raise ValueError(f"bad triple {t}")
            for i, j in itertools.combinations(t, 2):
                if abs(v[i] @ v[j]) > ORTHO_TOL:
                    raise ValueError(f"triple {t} is not orthogonal ({i}, {j})")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "triples", trip)

    @property
    def size(self) -> int:
        return len(self.vectors)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Every orthogonal index pair, listed or not."""
        g = np.abs(self.vectors @ self.vectors.T)
        return tuple((i, j) for i, j in itertools.combinations(range(self.size), 2)
                     if g[i, j] <= ORTHO_TOL)

    def to_dict(self) -> dict:
        return {"vectors": self.vectors.tolist(), "triples": [list(t) for t in self.triples]}


def peres33() -> KsVectorSet:
    """The 33 rays built from coordinates 0, +-1 and sqrt2, with all 16 orthogonal triads."""
    r2 = np.sqrt(2)
    raw = set()
    seeds = [(0, 0, 1), (0, 1, 1), (0, 1, -1), (0, 1, r2), (0, 1, -r2), (0, -1, r2)]
    seeds += [(sa, sb, r2) for sa in (1, -1) for sb in (1, -1)]
    for seed in seeds:
        for perm in itertools.permutations(seed):
            raw.add(tuple(np.round(_canonical(perm), 12)))
    vectors = np.array(sorted(raw, reverse=True))
    if len(vectors) != 33:  # pragma: no cover - fixture sanity
        raise AssertionError(f"expected 33 rays, built {len(vectors)}")
    return KsVectorSet(vectors, _find_triads(vectors))


def _find_triads(vectors: np.ndarray) -> tuple:
    g = np.abs(vectors @ vectors.T) <= ORTHO_TOL
    return tuple(t for t in itertools.combinations(range(len(vectors)), 3)
                 if g[t[0], t[1]] and g[t[0], t[2]] and g[t[1], t[2]])


def complete_triples(vs: KsVectorSet) -> KsVectorSet:
    """Add the third direction for every orthogonal pair not yet in a triple.

    Needed for the game: Alice can only measure complete bases, so every pair
    the colouring rules talk about has to sit inside some triple.
    """
    vectors = [v for v in vs.vectors]
    triples = set(vs.triples)
    covered = {p for t in triples for p in itertools.combinations(t, 2)}

    def index_of(v):
        for k, w in enumerate(vectors):
            if abs(abs(w @ v) - 1) <= ORTHO_TOL:
                return k
        vectors.append(_canonical(v))
        return len(vectors) - 1

    for i, j in vs.pairs:
        if (i, j) in covered:
            continue
        k = index_of(np.cross(vs.vectors[i], vs.vectors[j]))
        t = tuple(sorted((i, j, k)))
        triples.add(t)
        covered.update(itertools.combinations(t, 2))
    return KsVectorSet(np.array(vectors), tuple(sorted(triples)))


def load_vector_set(path: str | Path) -> KsVectorSet:
    data = json.loads(Path(path).read_text())
    if "vectors" not in data:
        raise ValueError("vector-set file needs a 'vectors' entry")
    vectors = np.array(data["vectors"], dtype=float)
    if vectors.ndim != 2 or vectors.shape[1] != 3:
        raise ValueError("vectors must be a list of 3-vectors")
    triples = data.get("triples")
    if triples is None:
        triples = _find_triads(np.array([_canonical(v) for v in vectors]))
    return KsVectorSet(vectors, tuple(tuple(t) for t in triples))


# -------------------------------------------------------------------- colouring

@dataclass(frozen=True)
class Coloring:
    marked: frozenset

    def violations(self, vs: KsVectorSet) -> list:
        bad = [("pair", p) for p in vs.pairs if p[0] in self.marked and p[1] in self.marked]
        bad += [("triple", t) for t in vs.triples if not any(i in self.marked for i in t)]
        return bad

    def is_valid(self, vs: KsVectorSet) -> bool:
        return not self.violations(vs)


@dataclass(frozen=True)
class SearchResult:
    coloring: Coloring | None
    nodes: int

    @property
    def satisfiable(self) -> bool:
        return self.coloring is not None


def _search_order(vs: KsVectorSet) -> list[int]:
    """Vectors sorted by how many triples use them, then by index."""
    counts = [0] * vs.size
    for t in vs.triples:
        for i in t:
            counts[i] += 1
    return sorted(range(vs.size), key=lambda i: (-counts[i], i))


def ks_coloring_search(vs: KsVectorSet) -> SearchResult:
    """Plain depth-first backtracking, marked branch first.

    A node is one tentative assignment of one vector; a branch is cut as soon
    as a pair is doubly marked or a triple is fully unmarked. The node count
    is a deterministic function of the input.
    """
    order = _search_order(vs)
    pos = {v: k for k, v in enumerate(order)}
    neighbours = [[] for _ in range(vs.size)]
    for i, j in vs.pairs:
        neighbours[i].append(j)
        neighbours[j].append(i)
    # a triple can be checked once its last vector (in search order) is assigned
    closing = [[] for _ in range(vs.size)]
    for t in vs.triples:
        closing[max(t, key=lambda i: pos[i])].append(t)
    state = [None] * vs.size
    nodes = 0

    def consistent(v):
        if state[v]:
            if any(state[u] for u in neighbours[v]):
                return False
        else:
            for t in closing[v]:
                if not any(state[i] for i in t):
                    return False
        return True

    def dfs(k):
        nonlocal nodes
        if k == len(order):
            return True
        v = order[k]
        for value in (True, False):
            nodes += 1
            state[v] = value
            if consistent(v) and dfs(k + 1):
                return True
        state[v] = None
        return False

    found = dfs(0)
    if not found:
        return SearchResult(None, nodes)
    coloring = Coloring(frozenset(i for i in range(vs.size) if state[i]))
    if not coloring.is_valid(vs):  # pragma: no cover - soundness guard
        raise AssertionError("search returned an invalid colouring")
    return SearchResult(coloring, nodes)


# ------------------------------------------------------------------------ game

def s2_zero_projector(n) -> np.ndarray:
    """|n,0><n,0|; in the Cartesian basis the m=0 state along n is n itself."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    return np.outer(n, n).astype(complex)


def spin1_joint_probability(directions, outcomes) -> float:
    """Probability of S^2 outcomes (0 or 1) along two directions on the spin-1 singlet."""
    if len(directions) != 2 or len(outcomes) != 2:
        raise ValueError("need one direction and one outcome per particle")
    ops = []
    for n, o in zip(directions, outcomes):
        if o not in (0, 1):
            raise ValueError("S^2 outcomes are 0 or 1")
        if abs(np.linalg.norm(n) - 1) > TOL_ALG:
            raise ValueError("direction is not a unit vector")
        p0 = s2_zero_projector(n)
        ops.append(p0 if o == 0 else np.eye(3) - p0)
    psi = spin1_singlet_vector()
    return float(np.real(np.vdot(psi, kron(*ops) @ psi)))


def quantum_round_distribution(vs: KsVectorSet, triple: int, vector: int) -> np.ndarray:
    """``p[i, bit]``: Alice reports triple member i, Bob reports ``bit`` (1 = marked)."""
    t = vs.triples[triple]
    if vector not in t:
        raise ValueError(f"vector {vector} is not in triple {t}")
    psi = spin1_singlet_vector()
    pb = s2_zero_projector(vs.vectors[vector])
    p = np.zeros((3, 2))
    for i, a in enumerate(t):
        pa = s2_zero_projector(vs.vectors[a])
        p[i, 1] = np.real(np.vdot(psi, kron(pa, pb) @ psi))
        p[i, 0] = np.real(np.vdot(psi, kron(pa, np.eye(3) - pb) @ psi))
    return p


def quantum_win_probability(vs: KsVectorSet, triple: int, vector: int) -> float:
    t = vs.triples[triple]
    p = quantum_round_distribution(vs, triple, vector)
    return float(sum(p[i, int(a == vector)] for i, a in enumerate(t)))


@dataclass(frozen=True)
class RoundResult:
    alice_mark: int  # vector index Alice marks within her triple
    bob_bit: int
    win: bool


def _classical_mark(t, coloring: Coloring) -> int:
    """Alice marks the first marked member of her triple, else the first member."""
    for i in t:
        if i in coloring.marked:
            return i
    return t[0]


def ks_game_round(vs: KsVectorSet, triple: int, vector: int, strategy="quantum",
                  rng: np.random.Generator | None = None) -> RoundResult:
    """``strategy`` is "quantum" or a :class:`Coloring` for the classical players."""
    t = vs.triples[triple]
    if vector not in t:
        raise ValueError(f"vector {vector} is not in triple {t}")
    if isinstance(strategy, Coloring):
        mark = _classical_mark(t, strategy)
        bit = int(vector in strategy.marked)
    elif strategy == "quantum":
        if rng is None:
            raise ValueError("the quantum strategy needs an rng")
        p = quantum_round_distribution(vs, triple, vector).reshape(-1)
        k = int(sample_indices(p, rng, 1)[0])
        mark, bit = t[k // 2], k % 2
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return RoundResult(mark, bit, (mark == vector) == bool(bit))


def all_rounds(vs: KsVectorSet):
    for ti, t in enumerate(vs.triples):
        for v in t:
            yield ti, v


def losing_rounds(vs: KsVectorSet, coloring: Coloring) -> list:
    """Every (triple, vector) pair that the classical strategy loses."""
    return [(ti, v) for ti, v in all_rounds(vs) if not ks_game_round(vs, ti, v, coloring).win]
