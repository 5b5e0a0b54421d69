"""Bloch decompositions, correlation tensors and local-measurement statistics.

Pauli convention: index 0 is the identity, 1..3 are sigma_x, sigma_y, sigma_z.
Correlation matrices are stored as ``T[party-1 axis, party-2 axis]``, i.e.
``T[n, m] = Tr rho (sigma_n x sigma_m)``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .linalg import PAULI, TOL_ALG, dagger, kron, pauli_dot
from .states import DensityOperator, PureState, as_density

RNG_NAME = "numpy.random.Generator(PCG64)"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


@dataclass(frozen=True, eq=False)
class BlochDecomposition:
    r: np.ndarray
    s: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(3)
        s = np.asarray(self.s, dtype=float).reshape(3)
        t = np.asarray(self.T, dtype=float).reshape(3, 3)
        for name, arr in (("r", r), ("s", s), ("T", t)):
            if np.max(np.abs(arr)) > 1 + TOL_ALG:
                raise ValueError(f"{name} has a component outside [-1, 1]")
        if r @ r + s @ s + np.sum(t * t) > 3 + TOL_ALG:
            raise ValueError("|r|^2 + |s|^2 + ||T||^2 exceeds 3")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "T", t)

    def density_matrix(self) -> np.ndarray:
        rho = kron(PAULI[0], PAULI[0]).copy()
        for i in range(3):
            rho += self.r[i] * kron(PAULI[i + 1], PAULI[0])
            rho += self.s[i] * kron(PAULI[0], PAULI[i + 1])
            for j in range(3):
                rho += self.T[i, j] * kron(PAULI[i + 1], PAULI[j + 1])
        return rho / 4

    def correlation_part(self) -> np.ndarray:
        """T - r s^T, the part not explained by the two marginals."""
        return self.T - np.outer(self.r, self.s)


@dataclass(frozen=True, eq=False)
class CorrelationTensorN:
    """Full Pauli expansion ``full[mu_1..mu_N] = Tr rho (x_i sigma_mu_i)``."""

    full: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.full, dtype=float)
        if f.shape != (4,) * f.ndim:
            raise ValueError(f"full tensor must have shape (4,)*N, got {f.shape}")
        if abs(f[(0,) * f.ndim] - 1) > TOL_ALG:
            raise ValueError("full[0,...,0] must equal 1")
        if np.max(np.abs(f)) > 1 + TOL_ALG:
            raise ValueError("tensor component outside [-1, 1]")
        object.__setattr__(self, "full", f)

    @classmethod
    def from_components(cls, components) -> CorrelationTensorN:
        """Wrap a bare correlation block (indices 1..3 only); other entries are 0."""
        comp = np.asarray(components, dtype=float)
        n = comp.ndim
        full = np.zeros((4,) * n)
        full[(slice(1, 4),) * n] = comp
        full[(0,) * n] = 1.0
        return cls(full)

    @property
    def N(self) -> int:
        return self.full.ndim

    @property
    def components(self) -> np.ndarray:
        """The pure-correlation block, indices k_i in {x, y, z}."""
        return self.full[(slice(1, 4),) * self.N]

    def density_matrix(self) -> np.ndarray:
        n = self.N
        rho = np.zeros((2**n, 2**n), dtype=complex)
        for mu in itertools.product(range(4), repeat=n):
            c = self.full[mu]
            if c != 0:
                rho += c * kron(*(PAULI[m] for m in mu))
        return rho / 2**n


def _require_qubits(rho: DensityOperator, n: int | None = None):
    if any(d != 2 for d in rho.dims):
        raise ValueError(f"expected qubit subsystems, got dims {rho.dims}")
    if n is not None and rho.n_parties != n:
        raise ValueError(f"expected {n} qubits, got {rho.n_parties}")


def bloch_decompose(rho: DensityOperator | PureState) -> BlochDecomposition:
    rho = as_density(rho)
    _require_qubits(rho, 2)
    m = rho.matrix
    r = [np.trace(m @ kron(PAULI[i], PAULI[0])).real for i in (1, 2, 3)]
    s = [np.trace(m @ kron(PAULI[0], PAULI[i])).real for i in (1, 2, 3)]
    t = [[np.trace(m @ kron(PAULI[i], PAULI[j])).real for j in (1, 2, 3)] for i in (1, 2, 3)]
    return BlochDecomposition(np.array(r), np.array(s), np.array(t))


def correlation_tensor_n(rho: DensityOperator | PureState) -> CorrelationTensorN:
    """All 4^N Pauli expectation values, contracted one party at a time."""
    rho = as_density(rho)
    _require_qubits(rho)
    n = rho.n_parties
    # view rho as (row_1, col_1, row_2, col_2, ...) and contract each pair with
    # sigma_mu^T so that sum_{ab} rho[a, b] sigma[b, a] = Tr(rho sigma)
    t = rho.matrix.reshape((2,) * (2 * n))
    t = np.transpose(t, [ax for k in range(n) for ax in (k, k + n)])
    paulis = np.stack(PAULI)  # (4, 2, 2)
    for _ in range(n):
        # consume the leading (row, col) pair, append the new mu axis at the end
        t = np.tensordot(t, paulis, axes=([0, 1], [2, 1]))
    return CorrelationTensorN(np.real_if_close(t, tol=1e6).real)


def _check_settings(settings, n: int) -> list[np.ndarray]:
    if len(settings) != n:
        raise ValueError(f"need {n} settings, got {len(settings)}")
    out = []
    for a in settings:
        a = np.asarray(a, dtype=float).reshape(3)
        if abs(np.linalg.norm(a) - 1) > TOL_ALG:
            raise ValueError(f"setting {a} is not a unit vector")
        out.append(a)
    return out


def projector(a, outcome: int) -> np.ndarray:
    """(1 + l a.sigma)/2 for outcome l = +-1."""
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    return 0.5 * (np.eye(2) + outcome * pauli_dot(a))


def joint_probability(rho, settings, outcomes) -> float:
    rho = as_density(rho)
    _require_qubits(rho)
    settings = _check_settings(settings, rho.n_parties)
    if len(outcomes) != rho.n_parties:
        raise ValueError("need one outcome per qubit")
    op = kron(*(projector(a, l) for a, l in zip(settings, outcomes)))
    return float(np.real(np.trace(rho.matrix @ op)))


def outcome_distribution(rho, settings) -> dict[tuple[int, ...], float]:
    """Probabilities for every outcome tuple, in lexicographic (+1 first) order."""
    rho = as_density(rho)
    tuples = itertools.product((1, -1), repeat=rho.n_parties)
    return {t: joint_probability(rho, settings, t) for t in tuples}


def quantum_correlation(T: CorrelationTensorN | BlochDecomposition | np.ndarray, settings) -> float:
    """E = T . (n_1 x ... x n_N) over the pure-correlation block."""
    if isinstance(T, BlochDecomposition):
        comp = T.T
    elif isinstance(T, CorrelationTensorN):
        comp = T.components
    else:
        comp = np.asarray(T, dtype=float)
    vecs = _check_settings(settings, comp.ndim)
    return float(reduce(lambda acc, v: np.tensordot(acc, v, axes=([0], [0])), vecs, comp))


@dataclass(frozen=True, eq=False)
class Rotation:
    O: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.O, dtype=float).reshape(3, 3)
        if np.max(np.abs(o.T @ o - np.eye(3))) > TOL_ALG or abs(np.linalg.det(o) - 1) > TOL_ALG:
            raise ValueError("not a proper rotation matrix")
        object.__setattr__(self, "O", o)

    @classmethod
    def axis_angle(cls, axis, angle: float) -> Rotation:
        k = np.asarray(axis, dtype=float)
        k = k / np.linalg.norm(k)
        kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        return cls(np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * kx @ kx)

    @classmethod
    def random(cls, rng: np.random.Generator) -> Rotation:
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return cls(q)


def rz(theta: float) -> Rotation:
    return Rotation.axis_angle((0, 0, 1), theta)


def rotate_frames(d: BlochDecomposition, O1: Rotation, O2: Rotation) -> BlochDecomposition:
    return BlochDecomposition(O1.O @ d.r, O2.O @ d.s, O1.O @ d.T @ O2.O.T)


def unitary_from_rotation(O: Rotation) -> np.ndarray:
    """SU(2) element with U (w.sigma) U^dag = (O w).sigma.

    Built from the unit quaternion of O; the global phase is then fixed so
    the first nonzero entry is real positive.
    """
    o = O.O
    # quaternion (w, x, y, z) by Shepperd's method: pivot on the largest component
    tr = np.trace(o)
    cands = [1 + tr, 1 + o[0, 0] - o[1, 1] - o[2, 2], 1 - o[0, 0] + o[1, 1] - o[2, 2],
             1 - o[0, 0] - o[1, 1] + o[2, 2]]
    k = int(np.argmax(cands))
    big = np.sqrt(cands[k]) / 2
    f = 1 / (4 * big)
    if k == 0:
        q = (big, (o[2, 1] - o[1, 2]) * f, (o[0, 2] - o[2, 0]) * f, (o[1, 0] - o[0, 1]) * f)
    elif k == 1:
        q = ((o[2, 1] - o[1, 2]) * f, big, (o[0, 1] + o[1, 0]) * f, (o[0, 2] + o[2, 0]) * f)
    elif k == 2:
        q = ((o[0, 2] - o[2, 0]) * f, (o[0, 1] + o[1, 0]) * f, big, (o[1, 2] + o[2, 1]) * f)
    else:
        q = ((o[1, 0] - o[0, 1]) * f, (o[0, 2] + o[2, 0]) * f, (o[1, 2] + o[2, 1]) * f, big)
    u = q[0] * np.eye(2) - 1j * pauli_dot(q[1:])
    for c in u.reshape(-1):
        if abs(c) > TOL_ALG:
            u = u * (abs(c) / c)
            break
    for w in np.eye(3):
        lhs = u @ pauli_dot(w) @ dagger(u)
        if np.max(np.abs(lhs - pauli_dot(o @ w))) > TOL_ALG:
            raise ArithmeticError("conjugation identity failed")  # pragma: no cover
    return u


def sample_outcomes(rho, settings, rng: np.random.Generator, runs: int) -> Counter:
    """Tally of ``runs`` i.i.d. outcome tuples, drawn by inverse CDF."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    dist = outcome_distribution(rho, settings)
    keys = list(dist)
    probs = np.clip(np.array([dist[k] for k in keys]), 0.0, None)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(runs), side="right")
    counts = np.bincount(idx, minlength=len(keys))
    return Counter({keys[i]: int(c) for i, c in enumerate(counts) if c})


def sample_indices(probs, rng: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-CDF sampling of indices from a probability vector."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), p.size - 1)
