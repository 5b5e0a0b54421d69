"""Conditional boxes p(a, b | x, y) with binary outcomes.

Outcome bit 0 stands for the measurement result +1 and bit 1 for -1, so
``a xor b = 0`` means "equal results".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .correlations import _check_settings, joint_probability
from .linalg import TOL_ALG
from .states import as_density

# Success probability of the best quantum approximation of a PR box.
QUANTUM_PR_SUCCESS = np.cos(np.pi / 8) ** 2
# Known threshold above which noisy PR boxes collapse communication
# complexity; kept only as a comparison value.
NLB_COLLAPSE_THRESHOLD = (3 + np.sqrt(6)) / 6


@dataclass(frozen=True, eq=False)
class ConditionalBox:
    """``table[a, b, x, y] = p(a, b | x, y)``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 4:
            raise ValueError("box table must be indexed [a, b, x, y]")
        if np.min(t) < -TOL_ALG:
            raise ValueError("negative probability in box")
        norm = np.max(np.abs(t.sum(axis=(0, 1)) - 1))
        if norm > TOL_ALG:
            raise ValueError(f"box not normalised (residual {norm:.2e})")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def n_settings(self) -> tuple[int, int]:
        return self.table.shape[2], self.table.shape[3]

    @property
    def n_outcomes(self) -> tuple[int, int]:
        return self.table.shape[0], self.table.shape[1]

    def alice_marginal(self) -> np.ndarray:
        """``[a, x, y]`` marginal of Alice's outcome."""
        return self.table.sum(axis=1)

    def bob_marginal(self) -> np.ndarray:
        """``[b, x, y]`` marginal of Bob's outcome."""
        return self.table.sum(axis=0)

    def signaling_residual(self) -> float:
        """Largest change in one side's marginal when the other side's setting changes."""
        pa, pb = self.alice_marginal(), self.bob_marginal()
        ra = np.max(np.abs(pa - pa[:, :, :1])) if pa.shape[2] > 1 else 0.0
        rb = np.max(np.abs(pb - pb[:, :1, :])) if pb.shape[1] > 1 else 0.0
        return float(max(ra, rb))

    def is_non_signaling(self, tol: float = TOL_ALG) -> bool:
        return self.signaling_residual() <= tol

    def p_equal(self) -> np.ndarray:
        """``[x, y]`` probability that the two outcome bits agree."""
        return np.einsum("aaxy->xy", self.table)

    def correlator(self) -> np.ndarray:
        """``E[x, y]`` with outcome bits mapped 0 -> +1, 1 -> -1."""
        pe = self.p_equal()
        return 2 * pe - 1


def _check_binary(box: ConditionalBox):
    if box.n_outcomes != (2, 2) or box.n_settings != (2, 2):
        raise ValueError("CHSH needs two settings and two outcomes per side")


def pr_box() -> ConditionalBox:
    """The Popescu-Rohrlich box: a xor b = x.y, uniform marginals."""
    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        for a in (0, 1):
            t[a, a ^ (x & y), x, y] = 0.5
    return ConditionalBox(t)


def noisy_pr_box(p: float) -> ConditionalBox:
    """PR box whose parity is correct with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        for a in (0, 1):
            t[a, a ^ (x & y), x, y] = 0.5 * p
            t[a, 1 ^ a ^ (x & y), x, y] = 0.5 * (1 - p)
    return ConditionalBox(t)


def noise_box(n_settings: int = 2) -> ConditionalBox:
    return ConditionalBox(np.full((2, 2, n_settings, n_settings), 0.25))


def deterministic_box(alice, bob) -> ConditionalBox:
    """Box for local deterministic functions ``a = alice[x]``, ``b = bob[y]``."""
    nx, ny = len(alice), len(bob)
    t = np.zeros((2, 2, nx, ny))
    for x in range(nx):
        for y in range(ny):
            t[alice[x], bob[y], x, y] = 1.0
    return ConditionalBox(t)


def deterministic_strategies(n_settings: int = 2):
    """All pairs of local deterministic response functions (16 for two settings)."""
    funcs = list(itertools.product((0, 1), repeat=n_settings))
    for alice in funcs:
        for bob in funcs:
            yield alice, bob


def quantum_box(rho, alice_settings, bob_settings) -> ConditionalBox:
    """Box produced by projective spin measurements on a two-qubit state."""
    rho = as_density(rho)
    alice_settings = _check_settings(alice_settings, len(alice_settings))
    bob_settings = _check_settings(bob_settings, len(bob_settings))
    t = np.zeros((2, 2, len(alice_settings), len(bob_settings)))
    for x, a_vec in enumerate(alice_settings):
        for y, b_vec in enumerate(bob_settings):
            for a, b in itertools.product((0, 1), repeat=2):
                t[a, b, x, y] = joint_probability(rho, [a_vec, b_vec], [1 - 2 * a, 1 - 2 * b])
    return ConditionalBox(np.clip(t, 0.0, None))


def box_sample(box: ConditionalBox, x: int, y: int, rng: np.random.Generator,
               runs: int | None = None):
    """Draw ``(a, b)`` from p(., . | x, y); with ``runs`` returns two arrays."""
    nx, ny = box.n_settings
    if not (0 <= x < nx and 0 <= y < ny):
        raise ValueError(f"setting ({x}, {y}) out of range for a {nx}x{ny} box")
    probs = np.clip(box.table[:, :, x, y].reshape(-1), 0.0, None)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    size = 1 if runs is None else runs
    idx = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), probs.size - 1)
    nb = box.n_outcomes[1]
    a, b = idx // nb, idx % nb
    if runs is None:
        return int(a[0]), int(b[0])
    return a, b


def chsh_prob_lhs(box: ConditionalBox) -> float:
    """P(A1=B2) - P(A1=B1) - P(A2=B1) - P(A2=B2); at most 0 for local boxes."""
    _check_binary(box)
    pe = box.p_equal()
    return float(pe[0, 1] - pe[0, 0] - pe[1, 0] - pe[1, 1])


def chsh_sum_form(box: ConditionalBox) -> float:
    """sum_{x,y} p(a xor b = x.y); local bound 3, quantum 2+sqrt2, PR box 4."""
    _check_binary(box)
    pe = box.p_equal()
    return float(pe[0, 0] + pe[0, 1] + pe[1, 0] + (1 - pe[1, 1]))


def box_sample_batch(box: ConditionalBox, xs, ys, rng: np.random.Generator):
    """One draw per entry of the setting arrays ``xs``, ``ys``."""
    xs, ys = np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)
    nx, ny = box.n_settings
    if xs.shape != ys.shape or np.any((xs < 0) | (xs >= nx)) or np.any((ys < 0) | (ys >= ny)):
        raise ValueError("setting indices out of range")
    na, nb = box.n_outcomes
    probs = np.clip(box.table, 0.0, None).reshape(na * nb, nx, ny)[:, xs, ys].T  # (draws, outcomes)
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random(xs.shape)[..., None]
    idx = np.minimum(np.sum(cdf <= u, axis=-1), na * nb - 1)
    return idx // nb, idx % nb
