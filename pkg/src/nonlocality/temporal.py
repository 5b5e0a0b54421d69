"""Sequential measurements on one qubit and the 2 -> 1 random access code."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .bell import maximize_bilinear
from .correlations import projector
from .linalg import TOL_ALG
from .states import DensityOperator, as_density, bloch_ket, maximally_mixed

QRAC_QUANTUM = np.cos(np.pi / 8) ** 2
QRAC_CLASSICAL = 0.75

# coefficients of the temporal inequality: value = 2 + sum_ij w[i, j] E(a_i, b_j)
TEMPORAL_WEIGHTS = 0.5 * np.array([[1.0, -1.0], [1.0, 1.0]])
TEMPORAL_SIGNS = np.array([[1, -1], [1, 1]])


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1) > TOL_ALG:
        raise ValueError(f"setting {v} is not a unit vector")
    return v


def _qubit(rho) -> DensityOperator:
    rho = as_density(rho)
    if rho.dims != (2,):
        raise ValueError("temporal correlations need a single qubit")
    return rho


def temporal_correlation(rho, a, b) -> float:
    """E = sum_{k,l} k l Tr(rho pi_{a,k}) Tr(pi_{a,k} pi_{b,l})."""
    m = _qubit(rho).matrix
    a, b = _unit(a), _unit(b)
    total = 0.0
    for k in (1, -1):
        pa = projector(a, k)
        pk = np.trace(m @ pa).real
        for l in (1, -1):
            total += k * l * pk * np.trace(pa @ projector(b, l)).real
    return float(total)


@dataclass(frozen=True, eq=False)
class TemporalExperiment:
    rho: DensityOperator
    a: tuple  # settings at t0
    b: tuple  # settings at t1

    def __post_init__(self):
        object.__setattr__(self, "rho", _qubit(self.rho))
        if len(self.a) != 2 or len(self.b) != 2:
            raise ValueError("two settings per time")
        object.__setattr__(self, "a", tuple(_unit(v) for v in self.a))
        object.__setattr__(self, "b", tuple(_unit(v) for v in self.b))

    def correlations(self) -> np.ndarray:
        return np.array([[temporal_correlation(self.rho, ai, bj) for bj in self.b] for ai in self.a])


def simulate_temporal(rho, a, b, rng: np.random.Generator, runs: int) -> tuple[float, float]:
    """Measure a, collapse, measure b; returns the mean product and its standard error."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    m = _qubit(rho).matrix
    a, b = _unit(a), _unit(b)
    p_first = float(np.trace(m @ projector(a, 1)).real)
    k = np.where(rng.random(runs) < p_first, 1, -1)
    p_second = {s: float(np.trace(projector(a, s) @ projector(b, 1)).real) for s in (1, -1)}
    thresholds = np.where(k == 1, p_second[1], p_second[-1])
    l = np.where(rng.random(runs) < thresholds, 1, -1)
    prod = k * l
    return float(prod.mean()), float(prod.std() / np.sqrt(runs))


def temporal_chsh_from_correlations(e) -> float:
    """p(A0A0=1) + p(A0A1=-1) + p(A1A0=1) + p(A1A1=1) with p(AB=+-1) = (1 +- E)/2."""
    e = np.asarray(e, dtype=float)
    return float(np.sum((1 + TEMPORAL_SIGNS * e) / 2))


def temporal_chsh(exp: TemporalExperiment) -> float:
    return temporal_chsh_from_correlations(exp.correlations())


def optimal_temporal_settings(b1, b2) -> tuple:
    """a_1 = (b_1 - b_2)/sqrt2, a_2 = (b_1 + b_2)/sqrt2 for orthogonal b's."""
    b1, b2 = _unit(b1), _unit(b2)
    return (b1 - b2) / np.sqrt(2), (b1 + b2) / np.sqrt(2)


def maximize_temporal_chsh():
    """Grid + refine over the four settings; E = a.b so the kernel is the identity."""
    val, a, b = maximize_bilinear(np.eye(3), TEMPORAL_WEIGHTS, 2.0)
    return val, tuple(a), tuple(b)


def deterministic_temporal_sweep() -> tuple[float, list]:
    """All 16 assignments of A_1, A_2 at t0 and t1; returns the max and its arg list."""
    best, args = -np.inf, []
    for a0, a1, b0, b1 in itertools.product((1, -1), repeat=4):
        v = temporal_chsh_from_correlations(np.outer((a0, a1), (b0, b1)))
        if v > best + TOL_ALG:
            best, args = v, [(a0, a1, b0, b1)]
        elif abs(v - best) <= TOL_ALG:
            args.append((a0, a1, b0, b1))
    return float(best), args


# ------------------------------------------------------------------------ QRAC

QRAC_PHASES = {(0, 0): np.pi / 4, (0, 1): 7 * np.pi / 4, (1, 0): 3 * np.pi / 4, (1, 1): 5 * np.pi / 4}


def _default_states() -> dict:
    return {bits: bloch_ket(np.pi / 2, phi) for bits, phi in QRAC_PHASES.items()}


@dataclass(frozen=True, eq=False)
class QracProtocol:
    states: dict = field(default_factory=_default_states)
    axes: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))  # decode b0 along x, b1 along y

    def __post_init__(self):
        states = {}
        for bits in itertools.product((0, 1), repeat=2):
            v = np.asarray(self.states[bits], dtype=complex).reshape(2)
            if abs(np.linalg.norm(v) - 1) > TOL_ALG:
                raise ValueError(f"encoding state for {bits} is not normalised")
            states[bits] = v
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "axes", tuple(_unit(a) for a in self.axes))


def _decode_probability(psi: np.ndarray, axis, bit: int) -> float:
    """Probability that decoding along ``axis`` returns ``bit`` (0 <-> + direction)."""
    return float(np.real(np.vdot(psi, projector(axis, 1 - 2 * bit) @ psi)))


def qrac_quantum_success(proto: QracProtocol, b0: int, b1: int, which: int) -> float:
    if b0 not in (0, 1) or b1 not in (0, 1) or which not in (0, 1):
        raise ValueError("bits and query must be 0 or 1")
    target = (b0, b1)[which]
    return _decode_probability(proto.states[(b0, b1)], proto.axes[which], target)


@dataclass(frozen=True)
class ClassicalQrac:
    encoding: tuple  # message bit for inputs 00, 01, 10, 11
    decoders: tuple  # decoders[j][m] = Bob's guess for bit j after message m

    def success(self) -> float:
        total = 0
        for k, (b0, b1) in enumerate(itertools.product((0, 1), repeat=2)):
            m = self.encoding[k]
            total += (self.decoders[0][m] == b0) + (self.decoders[1][m] == b1)
        return total / 8


def qrac_classical_max() -> tuple[float, list[ClassicalQrac]]:
    """16 encodings x 4 decoders per queried bit, exhaustively."""
    maps = list(itertools.product((0, 1), repeat=2))
    best, winners = -1.0, []
    for enc in itertools.product((0, 1), repeat=4):
        for d0 in maps:
            for d1 in maps:
                proto = ClassicalQrac(enc, (d0, d1))
                s = proto.success()
                if s > best + TOL_ALG:
                    best, winners = s, [proto]
                elif abs(s - best) <= TOL_ALG:
                    winners.append(proto)
    return best, winners


# ------------------------------------------------------ hidden-variable preparation

# parity 0 prepares along the pi/4 axis, parity 1 along the 3pi/4 axis
PARITY_PHASES = {0: np.pi / 4, 1: 3 * np.pi / 4}
PARITY_AXES = {p: np.array([np.cos(phi), np.sin(phi), 0.0]) for p, phi in PARITY_PHASES.items()}
# c[p, q]: Bob's outcome along decoding axis q equals c * Alice's parity-basis outcome
QRAC_SIGNS = np.array([[1, 1], [-1, 1]])
RZ_PI = np.diag([1.0, -1.0]).astype(complex)  # rotation by pi about z, up to phase


def _encoded_bits(psi: np.ndarray, proto: QracProtocol) -> tuple[int, int]:
    """Which encoding state ``psi`` equals (up to phase)."""
    for bits, phi in proto.states.items():
        if abs(abs(np.vdot(phi, psi)) - 1) <= 1e-9:
            return bits
    raise ArithmeticError("state is not one of the encoding states")  # pragma: no cover


def hv_prepare(b0: int, b1: int, outcome: int, flip: bool = True,
               proto: QracProtocol | None = None) -> np.ndarray:
    """State sent to Bob after Alice's parity-basis measurement gave ``outcome``."""
    proto = proto or QracProtocol()
    if outcome not in (1, -1):
        raise ValueError("outcome must be +1 or -1")
    phi = PARITY_PHASES[b0 ^ b1] + (0.0 if outcome == 1 else np.pi)
    psi = bloch_ket(np.pi / 2, phi)
    if flip and _encoded_bits(psi, proto)[1] != b1:
        psi = RZ_PI @ psi
    return psi


@dataclass(frozen=True)
class HvSimulation:
    runs: int
    successes: int
    flip: bool

    @property
    def success(self) -> float:
        return self.successes / self.runs

    @property
    def sigma(self) -> float:
        p = self.success
        return float(np.sqrt(p * (1 - p) / self.runs))


def qrac_hv_simulate(b0: int, b1: int, rng: np.random.Generator, runs: int,
                     flip: bool = True, which: int | None = None) -> HvSimulation:
    """Preparation by measurement of I/2, optional flip, then Bob decodes.

    ``which`` fixes Bob's query; by default it is drawn uniformly per run.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    proto = QracProtocol()
    mixed = maximally_mixed(2).matrix
    axis = PARITY_AXES[b0 ^ b1]
    p_plus = float(np.trace(mixed @ projector(axis, 1)).real)
    outcomes = np.where(rng.random(runs) < p_plus, 1, -1)
    queries = rng.integers(0, 2, size=runs) if which is None else np.full(runs, which)
    u = rng.random(runs)
    prepared = {k: hv_prepare(b0, b1, k, flip, proto) for k in (1, -1)}
    success = 0
    for k in (1, -1):
        for q in (0, 1):
            rows = (outcomes == k) & (queries == q)
            target = (b0, b1)[q]
            p_ok = _decode_probability(prepared[k], proto.axes[q], target)
            success += int(np.sum(u[rows] < p_ok))
    return HvSimulation(runs, success, flip)


def qrac_hv_deterministic_sweep() -> tuple[float, list]:
    """Best success over deterministic values A_p(t0), A_q(t1) at both times.

    Round (p, q) succeeds when A_p(t0) A_q(t1) = c[p, q]; p and q uniform.
    """
    best, args = -1.0, []
    for a0, a1, bx, by in itertools.product((1, -1), repeat=4):
        a, b = (a0, a1), (bx, by)
        s = sum(a[p] * b[q] == QRAC_SIGNS[p, q] for p in (0, 1) for q in (0, 1)) / 4
        if s > best + TOL_ALG:
            best, args = s, [(a0, a1, bx, by)]
        elif abs(s - best) <= TOL_ALG:
            args.append((a0, a1, bx, by))
    return float(best), args
