"""One-bit evaluation of any two-party Boolean function with PR boxes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import QUANTUM_PR_SUCCESS, ConditionalBox, box_sample, box_sample_batch, noisy_pr_box, pr_box

VANDAM_MAX_N = 6


def monomial(i: int, y: int) -> int:
    """Q_i(y) = prod of y_j over the bits j set in ``i``."""
    return int(y & i == i)


def monomial_matrix(n: int) -> np.ndarray:
    """``Q[i, y] = Q_i(y)``."""
    size = 2**n
    return np.array([[monomial(i, y) for y in range(size)] for i in range(size)], dtype=int)


@dataclass(frozen=True, eq=False)
class MultilinearForm:
    """f(x, y) = sum_i P_i(x) Q_i(y) mod 2.

    ``P[i, x]`` is the truth table of the coefficient of monomial ``i``.
    """

    n: int
    P: np.ndarray

    def evaluate(self, x: int, y: int) -> int:
        total = 0
        for i in range(2**self.n):
            total ^= int(self.P[i, x]) & monomial(i, y)
        return total

    def table(self) -> np.ndarray:
        """Reconstructed truth table ``[x, y]``."""
        q = monomial_matrix(self.n)
        return (self.P.T.astype(int) @ q) % 2

    def support(self) -> list[int]:
        """Monomials whose coefficient is not identically zero."""
        return [i for i in range(2**self.n) if self.P[i].any()]


def _truth_table(f, n: int) -> np.ndarray:
    if callable(f):
        size = 2**n
        return np.array([[f(x, y) & 1 for y in range(size)] for x in range(size)], dtype=np.uint8)
    t = np.asarray(f, dtype=np.uint8)
    if t.shape != (2**n, 2**n):
        raise ValueError(f"truth table must have shape ({2**n}, {2**n})")
    if np.any(t > 1):
        raise ValueError("truth table entries must be 0 or 1")
    return t


def monomial_expansion(f, n: int) -> MultilinearForm:
    """GF(2) Moebius transform over y, one row of x at a time."""
    if not 0 <= n <= VANDAM_MAX_N:
        raise ValueError(f"n must lie in [0, {VANDAM_MAX_N}]")
    table = _truth_table(f, n)
    coef = table.T.copy()  # coef[y, x] -> becomes P[i, x]
    for j in range(n):
        bit = 1 << j
        for i in range(2**n):
            if i & bit:
                coef[i] ^= coef[i ^ bit]
    form = MultilinearForm(n, coef)
    if np.any(form.table() != table):  # pragma: no cover - identity
        raise ArithmeticError("monomial expansion failed to reproduce f")
    return form


class CountingChannel:
    """One-way classical channel that counts every bit pushed through it."""

    def __init__(self, capacity: int | None = None):
        self.capacity = capacity
        self.bits_sent = 0
        self._queue: list[int] = []

    def send(self, bit: int):
        if bit not in (0, 1):
            raise ValueError("channel carries single bits")
        if self.capacity is not None and self.bits_sent >= self.capacity:
            raise RuntimeError(f"channel capacity of {self.capacity} bit(s) exceeded")
        self.bits_sent += 1
        self._queue.append(bit)

    def receive(self) -> int:
        return self._queue.pop(0)


@dataclass(frozen=True)
class VanDamResult:
    value: int
    bits_communicated: int


def vandam_protocol(form: MultilinearForm, x: int, y: int, boxes, rng: np.random.Generator,
                    channel: CountingChannel | None = None) -> VanDamResult:
    """Box i gets P_i(x) from Alice and Q_i(y) from Bob; Bob sends the parity of his outputs."""
    size = 2**form.n
    if len(boxes) != size:
        raise ValueError(f"need {size} boxes, got {len(boxes)}")
    channel = CountingChannel(capacity=1) if channel is None else channel
    alice_parity = bob_parity = 0
    for i, box in enumerate(boxes):
        a, b = box_sample(box, int(form.P[i, x]), monomial(i, y), rng)
        alice_parity ^= a
        bob_parity ^= b
    channel.send(bob_parity)
    return VanDamResult(alice_parity ^ channel.receive(), channel.bits_sent)


def perfect_boxes(n: int) -> list[ConditionalBox]:
    return [pr_box()] * 2**n


def noisy_boxes(n: int, p: float = QUANTUM_PR_SUCCESS) -> list[ConditionalBox]:
    return [noisy_pr_box(p)] * 2**n


@dataclass(frozen=True)
class VanDamSweep:
    n: int
    pairs: int
    correct: int
    max_bits: int

    @property
    def success(self) -> float:
        return self.correct / self.pairs


def vandam_batch(form: MultilinearForm, xs, ys, boxes, rng: np.random.Generator):
    """The same protocol for many input pairs at once.

    Returns ``(values, bits)`` where ``bits[r]`` counts what round r put on
    its own one-bit channel.
    """
    xs, ys = np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)
    size = 2**form.n
    if len(boxes) != size:
        raise ValueError(f"need {size} boxes, got {len(boxes)}")
    q = monomial_matrix(form.n)
    alice = np.zeros(xs.shape, dtype=int)
    bob = np.zeros(xs.shape, dtype=int)
    for i, box in enumerate(boxes):
        a, b = box_sample_batch(box, form.P[i, xs], q[i, ys], rng)
        alice ^= a
        bob ^= b
    channels = [CountingChannel(capacity=1) for _ in range(len(xs))]
    values = np.empty(xs.shape, dtype=int)
    for r, ch in enumerate(channels):
        ch.send(int(bob[r]))
        values[r] = alice[r] ^ ch.receive()
    return values, np.array([ch.bits_sent for ch in channels])


def vandam_sweep(f, n: int, rng: np.random.Generator, p: float | None = None,
                 repeats: int = 1) -> VanDamSweep:
    """Run the protocol on every input pair ``repeats`` times."""
    table = _truth_table(f, n)
    form = monomial_expansion(table, n)
    boxes = perfect_boxes(n) if p is None else noisy_boxes(n, p)
    xs, ys = np.meshgrid(np.arange(2**n), np.arange(2**n), indexing="ij")
    xs, ys = np.tile(xs.reshape(-1), repeats), np.tile(ys.reshape(-1), repeats)
    values, bits = vandam_batch(form, xs, ys, boxes, rng)
    correct = int(np.sum(values == table[xs, ys]))
    return VanDamSweep(n, len(xs), correct, int(bits.max()))


def inner_product(n: int):
    return lambda x, y: bin(x & y).count("1") & 1
