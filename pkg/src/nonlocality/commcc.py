"""Communication-complexity tasks built from Bell inequalities.

Every party P_k gets two bits (z_k, x_k). The last party must announce
T = f(x) * prod_k y_k with y_k = (-1)^z_k, using at most N-1 bits from the
others. The z_k are uniform; x follows the promise p'(x) = |g(x)|.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bell import correlation_table, maximize_bilinear, maximize_correlation_functional
from .boxes import ConditionalBox, box_sample, deterministic_box, deterministic_strategies, quantum_box
from .correlations import bloch_decompose, correlation_tensor_n, make_rng, outcome_distribution, sample_indices
from .linalg import TOL_ALG
from .states import DensityOperator, PureState, as_density, ghz, singlet

CLASSICAL_ENUM_MAX_N = 10
# per-party response functions (c(0), c(1)) in enumeration order
RESPONSES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True, eq=False)
class TaskFunctionSpec:
    """``g[x_1, ..., x_N]`` with sum |g| = 1; f = sign(g), p' = |g|."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.shape != (2,) * g.ndim or g.ndim < 1:
            raise ValueError(f"g must have shape (2,)*N, got {g.shape}")
        if abs(np.sum(np.abs(g)) - 1) > TOL_ALG:
            raise ValueError("sum |g| must equal 1")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def N(self) -> int:
        return self.g.ndim

    @property
    def f(self) -> np.ndarray:
        return np.where(self.g < 0, -1, 1)

    @property
    def promise(self) -> np.ndarray:
        return np.abs(self.g)

    def to_dict(self) -> dict:
        return {"n": self.N, "g": self.g.reshape(-1).tolist()}


def bell_to_task(g_raw) -> TaskFunctionSpec:
    g = np.asarray(g_raw, dtype=float)
    total = np.sum(np.abs(g))
    if total == 0:
        raise ValueError("g must not vanish identically")
    return TaskFunctionSpec(g / total)


def make_mod4_task(n: int) -> TaskFunctionSpec:
    """g(x) = cos((pi/2) sum x) / 2^(N-1): only even sums carry weight."""
    if n < 2:
        raise ValueError("the modulo-4 task needs N >= 2")
    g = np.zeros((2,) * n)
    for x in itertools.product((0, 1), repeat=n):
        s = sum(x)
        if s % 2 == 0:
            g[x] = (-1) ** (s // 2)
    return TaskFunctionSpec(g / 2 ** (n - 1))


def chsh_task() -> TaskFunctionSpec:
    return bell_to_task([[1, 1], [1, -1]])


def load_task(path: str | Path) -> TaskFunctionSpec:
    data = json.loads(Path(path).read_text())
    n = int(data["n"])
    g = np.asarray(data["g"], dtype=float)
    if g.size != 2**n:
        raise ValueError(f"task with n={n} needs {2**n} g-values")
    return bell_to_task(g.reshape((2,) * n))


def mod4_classical_bound(n: int) -> float:
    k = n // 2 if n % 2 == 0 else (n + 1) // 2
    return 2.0 ** (-k + 1)


# ------------------------------------------------------------------- classical

@dataclass(frozen=True)
class ClassicalStrategy:
    """``c[k] = (c_k(0), c_k(1))`` for every party."""

    c: tuple

    def __post_init__(self):
        c = tuple(tuple(int(v) for v in pair) for pair in self.c)
        if any(len(p) != 2 or any(v not in (1, -1) for v in p) for p in c):
            raise ValueError("classical responses must be pairs of +-1")
        object.__setattr__(self, "c", c)

    @property
    def N(self) -> int:
        return len(self.c)


def classical_fidelity(task: TaskFunctionSpec, strategy: ClassicalStrategy) -> float:
    """Reduced form: sum_x g(x) prod_n c_n(x_n)."""
    if strategy.N != task.N:
        raise ValueError("strategy and task disagree on N")
    total = 0.0
    for x in itertools.product((0, 1), repeat=task.N):
        total += task.g[x] * np.prod([strategy.c[k][x[k]] for k in range(task.N)])
    return float(total)


def classical_fidelity_direct(task: TaskFunctionSpec, strategy: ClassicalStrategy) -> float:
    """Full sum over x and y of p(X) T A for the one-bit-per-party protocol."""
    n = task.N
    total = 0.0
    for x in itertools.product((0, 1), repeat=n):
        for y in itertools.product((1, -1), repeat=n):
            e = [y[k] * strategy.c[k][x[k]] for k in range(n - 1)]
            answer = y[-1] * strategy.c[-1][x[-1]] * np.prod(e)
            total += task.g[x] * np.prod(y) * answer
    return float(total / 2**n)


@dataclass(frozen=True)
class ClassicalOptimum:
    value: float
    strategy: ClassicalStrategy
    exact: bool  # False when only a local-search lower bound was possible
    n_strategies: int


def classical_fidelity_max(task: TaskFunctionSpec) -> ClassicalOptimum:
    """Exhaustive for N <= 10 (last party answered analytically), else local search."""
    n = task.N
    if n > CLASSICAL_ENUM_MAX_N:
        return classical_fidelity_ascent(task)
    c = np.array(RESPONSES, dtype=float)  # (4, 2)
    m = task.g.reshape(1, -1)
    for _ in range(n - 1):
        s, rest = m.shape[0], m.shape[1] // 2
        m = np.einsum("sxr,cx->scr", m.reshape(s, 2, rest), c).reshape(s * 4, rest)
    values = np.abs(m).sum(axis=1)
    best = int(np.argmax(values))
    digits = []
    idx = best
    for _ in range(n - 1):
        idx, d = divmod(idx, 4)
        digits.append(d)
    pairs = [RESPONSES[d] for d in reversed(digits)]
    pairs.append(tuple(1 if v >= 0 else -1 for v in m[best]))
    strategy = ClassicalStrategy(tuple(pairs))
    return ClassicalOptimum(classical_fidelity(task, strategy), strategy, True, 4**n)


def classical_fidelity_ascent(task: TaskFunctionSpec, n_starts: int = 64, seed: int = 0,
                              max_iter: int = 200) -> ClassicalOptimum:
    """Party-by-party sign updates from deterministic random starts; a lower bound."""
    n = task.N
    rng = make_rng(seed)
    best = None
    for start in range(n_starts):
        c = np.ones((n, 2)) if start == 0 else rng.choice((-1.0, 1.0), size=(n, 2))
        val = _reduced_value(task.g, c)
        for _ in range(max_iter):
            for k in range(n):
                h = task.g
                for j in range(n - 1, -1, -1):  # contract from the back so axis numbers stay put
                    if j != k:
                        h = np.tensordot(h, c[j], axes=([j], [0]))
                c[k] = np.where(h >= 0, 1.0, -1.0)
            new = _reduced_value(task.g, c)
            if new - val <= 1e-15:
                val = max(val, new)
                break
            val = new
        if best is None or val > best[0] + 1e-15:
            best = (val, c.copy())
    strategy = ClassicalStrategy(tuple(tuple(int(v) for v in row) for row in best[1]))
    return ClassicalOptimum(classical_fidelity(task, strategy), strategy, False, n_starts)


def _reduced_value(g: np.ndarray, c: np.ndarray) -> float:
    t = g
    for j in range(g.ndim):
        t = np.tensordot(t, c[j], axes=([0], [0]))
    return float(t)


# --------------------------------------------------------------------- quantum

@dataclass(frozen=True, eq=False)
class QuantumProtocolSpec:
    state: DensityOperator | PureState
    settings: tuple  # settings[k] = (n_k(0), n_k(1))

    def __post_init__(self):
        rho = as_density(self.state)
        if len(self.settings) != rho.n_parties:
            raise ValueError("need one pair of settings per qubit")
        pairs = []
        for pair in self.settings:
            vecs = tuple(np.asarray(v, dtype=float).reshape(3) for v in pair)
            if len(vecs) != 2 or any(abs(np.linalg.norm(v) - 1) > TOL_ALG for v in vecs):
                raise ValueError("each party needs two unit settings")
            pairs.append(vecs)
        object.__setattr__(self, "settings", tuple(pairs))

    @property
    def N(self) -> int:
        return as_density(self.state).n_parties


def quantum_fidelity(task: TaskFunctionSpec, proto: QuantumProtocolSpec) -> float:
    """sum_x g(x) <prod_k n_k(x_k).sigma_k>."""
    if proto.N != task.N:
        raise ValueError("protocol and task disagree on N")
    table = correlation_table(correlation_tensor_n(proto.state), proto.settings)
    return float(np.sum(task.g * table.E))


def ghz_mod4_protocol(n: int) -> QuantumProtocolSpec:
    """GHZ state; x_k = 0 measures sigma_x, x_k = 1 measures sigma_y."""
    ex, ey = np.eye(3)[0], np.eye(3)[1]
    return QuantumProtocolSpec(ghz(n), tuple((ex, ey) for _ in range(n)))


def maximize_quantum_fidelity(task: TaskFunctionSpec, state, n_starts: int = 32,
                              seed: int = 0) -> tuple[float, QuantumProtocolSpec]:
    rho = as_density(state)
    _, settings = maximize_correlation_functional(rho, task.g, n_starts=n_starts, seed=seed)
    proto = QuantumProtocolSpec(rho, settings)
    return quantum_fidelity(task, proto), proto


# ------------------------------------------------------------------ simulation

class BitBudgetExceeded(RuntimeError):
    pass


class MessageHarness:
    """Carries one bit per round from each of P_1..P_{N-1} to P_N.

    Messages are sent as whole batches (one entry per round); a second batch
    from the same party, or a non-bit value, is refused.
    """

    def __init__(self, n_parties: int, runs: int):
        self.n = n_parties
        self.runs = runs
        self._inbox: dict[int, np.ndarray] = {}
        self.bits = 0

    def send(self, sender: int, bits) -> None:
        if not 0 <= sender < self.n - 1:
            raise ValueError(f"party {sender} may not send to the last party")
        if sender in self._inbox:
            raise BitBudgetExceeded(f"party {sender} tried to send a second bit")
        bits = np.asarray(bits)
        if bits.shape != (self.runs,) or not np.all((bits == 0) | (bits == 1)):
            raise ValueError("messages must be one bit per round")
        self._inbox[sender] = bits.astype(np.int8)
        self.bits += self.runs

    def messages(self) -> dict[int, np.ndarray]:
        return dict(self._inbox)


@dataclass(frozen=True)
class SimulationReport:
    mode: str
    runs: int
    fidelity: float
    fidelity_sigma: float
    analytic_fidelity: float
    success: float
    success_sigma: float
    bits_per_run: float
    qubit_passes_per_run: int
    announcements_per_run: int

    @property
    def deviation_sigmas(self) -> float:
        if self.fidelity_sigma == 0:
            return 0.0 if abs(self.fidelity - self.analytic_fidelity) <= TOL_ALG else float("inf")
        return abs(self.fidelity - self.analytic_fidelity) / self.fidelity_sigma


def _draw_inputs(task: TaskFunctionSpec, rng: np.random.Generator, runs: int):
    n = task.N
    flat = sample_indices(task.promise.reshape(-1), rng, runs)
    x = np.array([(flat >> (n - 1 - k)) & 1 for k in range(n)]).T  # x_1 is the top bit
    z = rng.integers(0, 2, size=(runs, n))
    return flat, x, z


def _bit_to_sign(b):
    return 1 - 2 * np.asarray(b)


def _sign_to_bit(s):
    return (1 - np.asarray(s)) // 2


def simulate_protocol(task: TaskFunctionSpec, strategy, rng: np.random.Generator,
                      runs: int) -> SimulationReport:
    """``strategy``: a ClassicalStrategy, a QuantumProtocolSpec or "qubit-relay"."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    n = task.N
    flat, x, z = _draw_inputs(task, rng, runs)
    y = _bit_to_sign(z)
    target = task.f.reshape(-1)[flat] * np.prod(y, axis=1)
    passes = announcements = 0
    if strategy == "qubit-relay":
        answer = _relay(x, z, rng)
        mode, analytic = "qubit-relay", _relay_fidelity(task)
        passes, announcements, bits = n - 1, 1, 0
    else:
        if isinstance(strategy, ClassicalStrategy):
            if strategy.N != n:
                raise ValueError("strategy and task disagree on N")
            resp = np.array(strategy.c)  # (n, 2)
            gamma = resp[np.arange(n)[None, :], x]
            mode, analytic = "classical", classical_fidelity(task, strategy)
        elif isinstance(strategy, QuantumProtocolSpec):
            gamma = _measure(strategy, flat, x, rng)
            mode, analytic = "quantum", quantum_fidelity(task, strategy)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        harness = MessageHarness(n, runs)
        for k in range(n - 1):
            harness.send(k, _sign_to_bit(y[:, k] * gamma[:, k]))
        received = harness.messages()
        answer = y[:, -1] * gamma[:, -1]
        for k in range(n - 1):
            answer = answer * _bit_to_sign(received[k])
        bits = harness.bits / runs
    prod = target * answer
    fid = float(np.mean(prod))
    fid_sigma = float(np.std(prod) / np.sqrt(runs))
    succ = float(np.mean(prod == 1))
    succ_sigma = float(np.sqrt(succ * (1 - succ) / runs))
    return SimulationReport(mode, runs, fid, fid_sigma, analytic, succ, succ_sigma,
                            float(bits), passes, announcements)


def _measure(proto: QuantumProtocolSpec, flat, x, rng) -> np.ndarray:
    """Outcome tuples gamma (runs, N), sampled per distinct input x."""
    n = proto.N
    rho = as_density(proto.state)
    gamma = np.zeros(x.shape, dtype=int)
    for key in np.unique(flat):
        rows = np.flatnonzero(flat == key)
        xs = x[rows[0]]
        dist = outcome_distribution(rho, [proto.settings[k][xs[k]] for k in range(n)])
        outcomes = np.array(list(dist))
        picks = sample_indices(np.array(list(dist.values())), rng, len(rows))
        gamma[rows] = outcomes[picks]
    return gamma


def relay_phases(x, z) -> np.ndarray:
    """theta_k = pi z_k + (pi/2) x_k, the phase gate each party applies."""
    return np.pi * np.asarray(z) + 0.5 * np.pi * np.asarray(x)


def _relay(x, z, rng) -> np.ndarray:
    """Qubit starts in |+>, picks up diag(1, e^{i theta_k}) at every party, last party measures sigma_x."""
    runs = x.shape[0]
    amp = np.full((runs, 2), 1 / np.sqrt(2), dtype=complex)
    for theta in relay_phases(x, z).T:
        amp[:, 1] *= np.exp(1j * theta)
    p_plus = np.abs(amp[:, 0] + amp[:, 1]) ** 2 / 2
    return np.where(rng.random(runs) < p_plus, 1, -1)


def _relay_fidelity(task: TaskFunctionSpec) -> float:
    """<sigma_x> = cos(sum theta) averaged against T; the z-parts cancel the y product."""
    total = 0.0
    for x in itertools.product((0, 1), repeat=task.N):
        total += task.g[x] * np.cos(0.5 * np.pi * sum(x))
    return float(total)


# --------------------------------------------------------------- referee game

# coefficients on P(I_1 = I_2 | x_1, x_2) in the programmers' game
REFEREE_COEFFS = np.array([[-1.0, -1.0], [-1.0, 1.0]])


def referee_value(box: ConditionalBox) -> float:
    return float(np.sum(REFEREE_COEFFS * box.p_equal()))


def referee_quantum_box() -> ConditionalBox:
    """Singlet box at the settings that maximise the referee combination."""
    rho = as_density(singlet())
    t = bloch_decompose(rho).T
    _, a, b = maximize_bilinear(t, REFEREE_COEFFS / 2, float(REFEREE_COEFFS.sum() / 2))
    return quantum_box(rho, a, b)


def referee_classical_box() -> ConditionalBox:
    """Best deterministic pair of programs (first one found in enumeration order)."""
    return max((deterministic_box(a, b) for a, b in deterministic_strategies()), key=referee_value)


@dataclass(frozen=True)
class RefereeReport:
    strategy: str
    n_pairs: int
    p_equal: tuple
    value: float
    sigma: float
    analytic: float


def chsh_game_referee(n_pairs: int, strategy: str | ConditionalBox, rng: np.random.Generator) -> RefereeReport:
    """Referee draws x_1, x_2 uniformly and compares the two returned bits."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if isinstance(strategy, ConditionalBox):
        box, name = strategy, "box"
    elif strategy == "quantum":
        box, name = referee_quantum_box(), strategy
    elif strategy == "classical":
        box, name = referee_classical_box(), strategy
    elif strategy == "random":
        box, name = ConditionalBox(np.full((2, 2, 2, 2), 0.25)), strategy
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    xs = rng.integers(0, 2, size=(n_pairs, 2))
    equal = np.zeros((2, 2))
    count = np.zeros((2, 2))
    for x1, x2 in itertools.product((0, 1), repeat=2):
        rows = np.flatnonzero((xs[:, 0] == x1) & (xs[:, 1] == x2))
        if len(rows) == 0:
            continue
        a, b = box_sample(box, x1, x2, rng, runs=len(rows))
        equal[x1, x2] = np.sum(a == b)
        count[x1, x2] = len(rows)
    p_hat = np.divide(equal, count, out=np.zeros_like(equal), where=count > 0)
    var = np.divide(p_hat * (1 - p_hat), count, out=np.zeros_like(equal), where=count > 0)
    return RefereeReport(
        name, n_pairs, tuple(p_hat.reshape(-1).tolist()),
        float(np.sum(REFEREE_COEFFS * p_hat)),
        float(np.sqrt(np.sum(REFEREE_COEFFS**2 * var))),
        referee_value(box),
    )
