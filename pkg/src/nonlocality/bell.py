"""Two-setting Bell inequalities, local models and violation criteria."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .boxes import chsh_prob_lhs, chsh_sum_form, deterministic_box, deterministic_strategies, quantum_box
from .correlations import (
    BlochDecomposition,
    CorrelationTensorN,
    bloch_decompose,
    correlation_tensor_n,
    make_rng,
)
from .grids import fibonacci_hemisphere, fibonacci_sphere, unit
from .linalg import TOL_ALG, jacobi_eigh, kron, singular_values
from .states import DensityOperator, PureState, as_density, ghz

TOL_OPT = 1e-6
ENUMERATION_MAX_N = 4
SINGLE_MAX_N = 15
NS_MAX_N = 6
CHSH_GRID_POINTS = 578
GHZ_PARADOX_PHASE = -1.0

# order of the +-1 values along every axis of a sign table / coefficient tensor
S_VALUES = (-1, 1)
# _H[s_index, k_index] = s^(k-1) for k in {1, 2}
_H = np.array([[1.0, -1.0], [1.0, 1.0]])


class LhvRefusal(ValueError):
    """Raised when the correlations violate the complete inequality."""

    def __init__(self, value: float, bound: float):
        super().__init__(f"no local model: wwzb_single = {value:.12g} > {bound}")
        self.value = value
        self.bound = bound


# --------------------------------------------------------------------------- tables

@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """``E[k_1-1, ..., k_N-1]`` for the 2^N setting combinations."""

    E: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.E, dtype=float)
        if e.shape != (2,) * e.ndim or e.ndim < 1:
            raise ValueError(f"correlation table must have shape (2,)*N, got {e.shape}")
        if np.max(np.abs(e)) > 1 + TOL_ALG:
            raise ValueError("correlation outside [-1, 1]")
        e.setflags(write=False)
        object.__setattr__(self, "E", e)

    @property
    def N(self) -> int:
        return self.E.ndim

    def to_dict(self) -> dict:
        return {"N": self.N, "E": self.E.reshape(-1).tolist()}


def _as_table(E) -> CorrelationTable:
    return E if isinstance(E, CorrelationTable) else CorrelationTable(E)


def _components(T) -> np.ndarray:
    if isinstance(T, BlochDecomposition):
        return T.T
    if isinstance(T, CorrelationTensorN):
        return T.components
    if isinstance(T, (DensityOperator, PureState)):
        return correlation_tensor_n(T).components
    return np.asarray(T, dtype=float)


def _contract(comp: np.ndarray, vecs) -> float:
    return float(reduce(lambda acc, v: np.tensordot(acc, v, axes=([0], [0])), vecs, comp))


def correlation_table(T, settings) -> CorrelationTable:
    """Quantum correlation table; ``settings[j] = (n1, n2)`` for party j."""
    comp = _components(T)
    if len(settings) != comp.ndim:
        raise ValueError(f"need settings for {comp.ndim} parties")
    pairs = [[unit(np.asarray(v, dtype=float)) for v in pair] for pair in settings]
    e = np.zeros((2,) * comp.ndim)
    for k in itertools.product((0, 1), repeat=comp.ndim):
        e[k] = _contract(comp, [pairs[j][k[j]] for j in range(comp.ndim)])
    return CorrelationTable(np.clip(e, -1.0, 1.0))


def deterministic_table(values) -> CorrelationTable:
    """``values[j] = (a_j(1), a_j(2))`` in {+-1}; E_k = prod_j a_j(k_j)."""
    n = len(values)
    e = np.zeros((2,) * n)
    for k in itertools.product((0, 1), repeat=n):
        e[k] = np.prod([values[j][k[j]] for j in range(n)])
    return CorrelationTable(e)


# ------------------------------------------------------------------ sign functions

@dataclass(frozen=True, eq=False)
class SignFunction:
    """S: {-1,1}^N -> {-1,1}, stored as ``table[s_1, ..., s_N]`` with index 0 for -1.

    The integer id reads the table in lexicographic order of s (with -1 before
    +1 on every axis); entry i contributes bit ``2^(2^N - 1 - i)`` when it is -1.
    Hence the constant function +1 has id 0.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table)
        if t.shape != (2,) * t.ndim or t.ndim < 1:
            raise ValueError("sign table must have shape (2,)*N")
        if not np.all(np.isin(t, (-1, 1))):
            raise ValueError("sign function values must be +-1")
        t = t.astype(np.int8)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def N(self) -> int:
        return self.table.ndim

    @property
    def id(self) -> int:
        bits = (1 - self.table.reshape(-1)) // 2
        return int("".join(str(int(b)) for b in bits), 2)

    @classmethod
    def from_id(cls, n: int, ident: int) -> SignFunction:
        size = 2**n
        if not 0 <= ident < 2**size:
            raise ValueError(f"id out of range for N={n}")
        bits = np.array([(ident >> (size - 1 - i)) & 1 for i in range(size)])
        return cls((1 - 2 * bits).reshape((2,) * n))

    @classmethod
    def from_callable(cls, n: int, f) -> SignFunction:
        t = np.zeros((2,) * n, dtype=int)
        for idx in itertools.product((0, 1), repeat=n):
            t[idx] = f(*(S_VALUES[i] for i in idx))
        return cls(t)

    def __call__(self, *s) -> int:
        return int(self.table[tuple(S_VALUES.index(v) for v in s)])


def wwzb_coefficients(E) -> np.ndarray:
    """c[s] = sum_k prod_j s_j^(k_j - 1) E_k, indexed like a sign table."""
    e = _as_table(E).E
    c = e
    for _ in range(e.ndim):
        # contract the leading k axis, append the matching s axis at the end
        c = np.tensordot(c, _H, axes=([0], [1]))
    return c


def wwzb_lhs(E, S: SignFunction) -> float:
    e = _as_table(E)
    if S.N != e.N:
        raise ValueError(f"sign function has N={S.N}, table has N={e.N}")
    return float(abs(np.sum(S.table * wwzb_coefficients(e))))


def wwzb_single(E) -> float:
    e = _as_table(E)
    if e.N > SINGLE_MAX_N:
        raise ValueError(f"wwzb_single supports N <= {SINGLE_MAX_N}")
    return float(np.sum(np.abs(wwzb_coefficients(e))))


def all_sign_tables(n: int) -> np.ndarray:
    """Every sign table as a row, row index = id."""
    if n > ENUMERATION_MAX_N:
        raise ValueError(f"sign-function enumeration supports N <= {ENUMERATION_MAX_N}")
    size = 2**n
    ids = np.arange(2**size, dtype=np.int64)
    shifts = np.arange(size - 1, -1, -1, dtype=np.int64)
    bits = (ids[:, None] >> shifts[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


@dataclass(frozen=True)
class EnumerationResult:
    n_inequalities: int
    max_lhs: float
    argmax_id: int
    bound: float

    @property
    def violated(self) -> bool:
        return self.max_lhs > self.bound + TOL_ALG


def wwzb_enumerate(E) -> EnumerationResult:
    """Evaluate all 2^(2^N) inequalities; ties resolve to the smallest id."""
    e = _as_table(E)
    tables = all_sign_tables(e.N)
    c = wwzb_coefficients(e)
    vals = np.abs(tables @ c.reshape(-1))
    # near-ties are re-scored with the same reduction wwzb_lhs uses, so the
    # winner agrees bit-for-bit with wwzb_single
    cands = np.flatnonzero(vals >= vals.max() - 1e-12)
    scores = [float(abs(np.sum(tables[i].reshape(c.shape) * c))) for i in cands]
    k = int(np.argmax(scores))
    return EnumerationResult(len(tables), scores[k], int(cands[k]), float(2**e.N))


# ------------------------------------------------------------------------ LHV model

@dataclass(frozen=True, eq=False)
class LhvModel:
    """Local model for a two-party table.

    ``probabilities[s1, s2]`` and ``signs[s1, s2]`` use the sign-table index
    convention; ``mixture`` lists ``(weight, (A1, A2, B1, B2))``.
    """

    probabilities: np.ndarray
    signs: np.ndarray
    tail_weight: float
    mixture: tuple = field(repr=False)

    def predicted(self) -> CorrelationTable:
        e = np.zeros((2, 2))
        for w, (a1, a2, b1, b2) in self.mixture:
            e += w * np.outer((a1, a2), (b1, b2))
        return CorrelationTable(np.clip(e, -1, 1))

    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.mixture))

    def to_dict(self) -> dict:
        return {
            "probabilities": self.probabilities.reshape(-1).tolist(),
            "signs": self.signs.reshape(-1).tolist(),
            "tail_weight": self.tail_weight,
        }


def lhv_construct(E) -> LhvModel:
    e = _as_table(E)
    if e.N != 2:
        raise ValueError("lhv_construct handles two parties")
    value = wwzb_single(e)
    if value > 4 + TOL_ALG:
        raise LhvRefusal(value, 4.0)
    c = wwzb_coefficients(e)
    probs = np.abs(c) / 4
    signs = np.where(c >= 0, 1, -1)
    tail = max(0.0, 1.0 - float(probs.sum()))
    mixture = []
    for i, j in itertools.product((0, 1), repeat=2):
        s1, s2, sig = S_VALUES[i], S_VALUES[j], int(signs[i, j])
        mixture.append((float(probs[i, j]), (sig, sig * s1, 1, s2)))
    for strat in itertools.product((1, -1), repeat=4):
        mixture.append((tail / 16, strat))
    model = LhvModel(probs, signs, tail, tuple(mixture))
    resid = np.max(np.abs(model.predicted().E - e.E))
    if resid > TOL_ALG:  # pragma: no cover - algebraic identity
        raise ArithmeticError(f"local model misses the table by {resid:.2e}")
    return model


# ----------------------------------------------------------------------- criteria

def horodecki_max(T) -> float:
    """Sum of the two largest squared singular values of the correlation matrix."""
    s = singular_values(_components(T).reshape(3, 3))
    return float(s[0] ** 2 + s[1] ** 2)


@dataclass(frozen=True, eq=False)
class NsResult:
    value: float
    normals: np.ndarray  # per party, the direction excluded from the plane
    lower_bound: bool = True


def _plane_objective(comp: np.ndarray, projs) -> float:
    t = comp
    for p in projs:
        t = np.tensordot(t, p, axes=([0], [0]))
    return float(np.sum(t * t))


def _ns_ascent(comp: np.ndarray, normals: list[np.ndarray], max_iter: int = 200):
    n = comp.ndim
    projs = [np.eye(3) - np.outer(v, v) for v in normals]
    val = _plane_objective(comp, projs)
    for _ in range(max_iter):
        for j in range(n):
            # contract every other party's projector, leave party j open
            t = np.moveaxis(comp, j, 0)
            others = [projs[i] for i in range(n) if i != j]
            for p in others:
                t = np.tensordot(t, p, axes=([1], [0]))
            m = t.reshape(3, -1)
            _, vecs = jacobi_eigh(m @ m.T)
            normals[j] = vecs[:, 0].real
            projs[j] = np.eye(3) - np.outer(normals[j], normals[j])
        new = _plane_objective(comp, projs)
        if new - val <= 1e-14:
            val = max(val, new)
            break
        val = new
    return val, normals


def ns_condition_max(T, n_extra_starts: int = 32) -> NsResult:
    """Max over local planes of the sum of squared in-plane correlations.

    Multi-start alternating ascent: each party's best plane for fixed others is
    the one orthogonal to the smallest eigenvector of its Gram matrix. Starts
    are all axis-aligned normal combinations (capped) plus lattice points, so
    the value is a certified lower bound only.
    """
    comp = _components(T)
    n = comp.ndim
    if n > NS_MAX_N:
        raise ValueError(f"ns_condition_max supports N <= {NS_MAX_N}")
    if not np.any(comp):
        return NsResult(0.0, np.tile([0.0, 0.0, 1.0], (n, 1)))
    axes = np.eye(3)
    starts = [list(c) for c in itertools.islice(itertools.product(axes, repeat=n), 243)]
    pts = fibonacci_hemisphere(97)
    for i in range(n_extra_starts):
        starts.append([pts[(7 * i + 31 * j * (i + 1)) % len(pts)] for j in range(n)])
    best_val, best_normals = -1.0, None
    for s in starts:
        val, normals = _ns_ascent(comp, [np.array(v, dtype=float) for v in s])
        if val > best_val + 1e-13:
            best_val, best_normals = val, np.array(normals)
    return NsResult(best_val, best_normals)


# --------------------------------------------------------------------------- GHZ

def _ghz_observable(phi: float) -> np.ndarray:
    x, xp = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    plus = (1j * xp + np.exp(1j * phi) * x) / np.sqrt(2)
    minus = (-1j * xp + np.exp(1j * phi) * x) / np.sqrt(2)
    return np.outer(plus, plus.conj()) - np.outer(minus, minus.conj())


def ghz_paradox_state() -> PureState:
    return ghz(3, relative_phase=GHZ_PARADOX_PHASE)


def ghz_correlation(phis) -> float:
    if len(phis) != 3:
        raise ValueError("need three angles")
    psi = ghz_paradox_state().amplitudes
    op = kron(*(_ghz_observable(p) for p in phis))
    return float(np.real(np.vdot(psi, op @ psi)))


GHZ_CONSTRAINTS = (
    ((np.pi / 2, 0.0, 0.0), 1),
    ((0.0, np.pi / 2, 0.0), 1),
    ((0.0, 0.0, np.pi / 2), 1),
    ((np.pi / 2, np.pi / 2, np.pi / 2), -1),
)


@dataclass(frozen=True)
class GhzParadoxReport:
    quantum_values: tuple
    quantum_ok: bool
    n_assignments: int
    n_satisfying: int
    n_satisfying_without_last: int


def _count_assignments(constraints) -> int:
    count = 0
    # assignment[party][0] is the value at angle 0, [1] at angle pi/2
    for vals in itertools.product((1, -1), repeat=6):
        table = (vals[0:2], vals[2:4], vals[4:6])
        if all(np.prod([table[p][int(a > 0)] for p, a in enumerate(angles)]) == target
               for angles, target in constraints):
            count += 1
    return count


def ghz_paradox_check() -> GhzParadoxReport:
    qvals = tuple(ghz_correlation(angles) for angles, _ in GHZ_CONSTRAINTS)
    ok = all(abs(v - t) <= TOL_ALG for v, (_, t) in zip(qvals, GHZ_CONSTRAINTS))
    return GhzParadoxReport(
        quantum_values=qvals,
        quantum_ok=ok,
        n_assignments=64,
        n_satisfying=_count_assignments(GHZ_CONSTRAINTS),
        n_satisfying_without_last=_count_assignments(GHZ_CONSTRAINTS[:3]),
    )


# ------------------------------------------------------------------ optimisation

CHSH_FORMS = ("prob-difference", "sum")


def chsh_form_coefficients(form: str) -> tuple[float, np.ndarray]:
    """(const, w) with value = const + sum_xy w[x, y] E[x, y]."""
    if form == "prob-difference":
        c = np.array([[-1.0, 1.0], [-1.0, -1.0]])
        return float(c.sum() / 2), c / 2
    if form == "sum":
        return 2.0, np.array([[0.5, 0.5], [0.5, -0.5]])
    raise ValueError(f"unknown CHSH form {form!r}; choose from {CHSH_FORMS}")


def evaluate_chsh(box, form: str) -> float:
    if form == "prob-difference":
        return chsh_prob_lhs(box)
    if form == "sum":
        return chsh_sum_form(box)
    raise ValueError(f"unknown CHSH form {form!r}")


def classical_chsh_max(form: str) -> float:
    return max(evaluate_chsh(deterministic_box(a, b), form) for a, b in deterministic_strategies())


@dataclass(frozen=True, eq=False)
class ChshOptimum:
    value: float
    settings: tuple  # (a_1, a_2, b_1, b_2)
    form: str


def _bilinear_value(T, w, const, a, b) -> float:
    return const + float(sum(w[x, y] * a[x] @ T @ b[y] for x in (0, 1) for y in (0, 1)))


def _refine(T, w, const, a, max_iter: int = 2000):
    a = [unit(v) for v in a]
    b = [unit(sum(w[x, y] * T.T @ a[x] for x in (0, 1))) for y in (0, 1)]
    val = _bilinear_value(T, w, const, a, b)
    for _ in range(max_iter):
        a = [unit(sum(w[x, y] * T @ b[y] for y in (0, 1)), a[x]) for x in (0, 1)]
        b = [unit(sum(w[x, y] * T.T @ a[x] for x in (0, 1)), b[y]) for y in (0, 1)]
        new = _bilinear_value(T, w, const, a, b)
        if new - val <= 1e-15:
            val = max(val, new)
            break
        val = new
    return val, a, b


def maximize_bilinear(T, w, const: float = 0.0, n_grid: int = CHSH_GRID_POINTS, n_refine: int = 8):
    """Max of const + sum w[x,y] a_x.T b_y over unit vectors.

    Alice's pair runs over a Fibonacci lattice; Bob's reply is exact
    (b_y parallel to sum_x w[x,y] T^T a_x). The best grid cells are then
    polished by alternating exact best responses.
    """
    T = np.asarray(T, dtype=float).reshape(3, 3)
    w = np.asarray(w, dtype=float)
    pts = fibonacci_sphere(n_grid)
    u = pts @ T  # row i: T^T a_i
    total = np.full((n_grid, n_grid), const)
    for y in (0, 1):
        v = w[0, y] * u[:, None, :] + w[1, y] * u[None, :, :]
        total += np.linalg.norm(v, axis=2)
    flat = np.argsort(-total, axis=None, kind="stable")[:n_refine]
    best = None
    for f in flat:
        i, j = divmod(int(f), n_grid)
        val, a, b = _refine(T, w, const, [pts[i], pts[j]])
        if best is None or val > best[0] + 1e-15:
            best = (val, a, b)
    return best


def maximize_quantum_chsh(state, form: str = "sum") -> ChshOptimum:
    const, w = chsh_form_coefficients(form)
    rho = as_density(state)
    T = bloch_decompose(rho).T
    _, a, b = maximize_bilinear(T, w, const)
    box = quantum_box(rho, a, b)
    return ChshOptimum(evaluate_chsh(box, form), (a[0], a[1], b[0], b[1]), form)


@dataclass(frozen=True, eq=False)
class WwzbOptimum:
    value: float
    table: CorrelationTable
    settings: tuple
    sign_function: SignFunction


def _party_response(comp: np.ndarray, settings, w: np.ndarray, j: int) -> np.ndarray:
    """G[k_j] such that sum_k w[k] E_k = sum_{k_j} G[k_j] . n_j(k_j) for fixed others."""
    n = comp.ndim
    x = comp
    for i in range(n):
        m = np.eye(3) if i == j else np.stack(settings[i])
        x = np.tensordot(x, m, axes=([0], [1]))
    xj = np.moveaxis(x, j, 0)
    wj = np.moveaxis(w, j, 0)
    rest = list(range(1, n))
    return np.tensordot(wj, xj, axes=(rest, rest))


def _functional(comp, settings, w) -> float:
    return float(np.sum(w * correlation_table(comp, settings).E))


def _start_settings(n: int, n_starts: int, seed: int):
    ex, ey, ez = np.eye(3)
    starts = [[(ex, ey)] * n, [(ez, ex)] * n, [(ex, ez)] * n]
    rng = make_rng(seed)
    for _ in range(n_starts):
        starts.append([tuple(unit(rng.normal(size=3)) for _ in (0, 1)) for _ in range(n)])
    return starts


def _ascend(comp, settings, weights_of, max_iter: int):
    """Alternate exact per-party best responses; ``weights_of`` may depend on the table."""
    n = comp.ndim
    settings = [list(p) for p in settings]
    w = weights_of(settings)
    val = _functional(comp, settings, w)
    for _ in range(max_iter):
        for j in range(n):
            g = _party_response(comp, settings, w, j)
            settings[j] = [unit(g[k], settings[j][k]) for k in (0, 1)]
        w = weights_of(settings)
        new = _functional(comp, settings, w)
        if new - val <= 1e-14:
            val = max(val, new)
            break
        val = new
    return val, [tuple(p) for p in settings]


def maximize_correlation_functional(T, w, n_starts: int = 32, max_iter: int = 1000, seed: int = 0):
    """Max over settings of sum_k w[k] E_k; returns (value, settings)."""
    comp = _components(T)
    w = np.asarray(w, dtype=float)
    if w.shape != (2,) * comp.ndim:
        raise ValueError("weights must have shape (2,)*N")
    best = None
    for start in _start_settings(comp.ndim, n_starts, seed):
        val, settings = _ascend(comp, start, lambda s: w, max_iter)
        if best is None or val > best[0] + 1e-12:
            best = (val, settings)
    return best


def sign_weights(S) -> np.ndarray:
    """w[k] = sum_s S(s) prod_j s_j^(k_j-1), so that wwzb_lhs = |sum_k w[k] E_k|."""
    w = np.asarray(S, dtype=float)
    for _ in range(w.ndim):
        w = np.tensordot(w, _H, axes=([0], [0]))
    return w


def maximize_wwzb(T, n_starts: int = 48, max_iter: int = 500, seed: int = 0) -> WwzbOptimum:
    """Local search for settings maximising wwzb_single.

    Ascends jointly in the sign function (S = sign of the coefficients) and in
    each party's pair of settings.
    """
    comp = _components(T)

    def weights_of(settings):
        c = wwzb_coefficients(correlation_table(comp, settings))
        return sign_weights(np.where(c >= 0, 1.0, -1.0))

    best = None
    for start in _start_settings(comp.ndim, n_starts, seed):
        val, settings = _ascend(comp, start, weights_of, max_iter)
        if best is None or val > best[0] + 1e-12:
            best = (val, settings)
    _, settings = best
    table = correlation_table(comp, settings)
    c = wwzb_coefficients(table)
    return WwzbOptimum(wwzb_single(table), table, tuple(settings), SignFunction(np.where(c >= 0, 1, -1)))
