"""Validated pure states and density operators over qubits and spin-1 systems."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import TOL_ALG, as_matrix, dagger, jacobi_eigh, jacobi_svd, kron

# Above this dimension the Jacobi sweeps get slow in pure Python; LAPACK takes over.
JACOBI_MAX_DIM = 64


class StateValidationError(ValueError):
    """A matrix or vector failed one or more state invariants.

    ``violations`` maps an invariant name (``"hermiticity"``, ``"trace"``,
    ``"positivity"``, ``"norm"``, ``"shape"``) to the measured residual.
    """

    def __init__(self, violations: dict[str, float]):
        self.violations = dict(violations)
        detail = ", ".join(f"{k} (residual {v:.3e})" for k, v in self.violations.items())
        super().__init__(f"invalid state: {detail}")


def _dims_tuple(dims) -> tuple[int, ...]:
    d = tuple(int(x) for x in dims)
    if not d or any(x < 1 for x in d):
        raise ValueError(f"bad subsystem dimensions {dims!r}")
    return d


def eigvalsh(m: np.ndarray) -> np.ndarray:
    if m.shape[0] <= JACOBI_MAX_DIM:
        return jacobi_eigh(m)[0]
    return np.linalg.eigvalsh(0.5 * (m + dagger(m)))


@dataclass(frozen=True, eq=False)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _dims_tuple(self.dims)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise StateValidationError({"shape": float(abs(amps.size - math.prod(dims)))})
        resid = abs(np.linalg.norm(amps) - 1.0)
        if not np.all(np.isfinite(amps)) or resid > TOL_ALG:
            raise StateValidationError({"norm": float(resid)})
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityOperator:
        return DensityOperator(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        dims = _dims_tuple(self.dims)
        m = as_matrix(self.matrix).copy()
        problems = density_violations(m, dims)
        if problems:
            raise StateValidationError(problems)
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))


def density_violations(m: np.ndarray, dims) -> dict[str, float]:
    """Residuals of every density-operator invariant that ``m`` breaks."""
    d = math.prod(dims)
    if m.shape != (d, d):
        return {"shape": float(abs(m.shape[0] - d) + abs(m.shape[1] - d))}
    out = {}
    herm = float(np.max(np.abs(m - dagger(m)))) if d else 0.0
    if herm > TOL_ALG:
        out["hermiticity"] = herm
    tr = float(abs(np.trace(m) - 1.0))
    if tr > TOL_ALG:
        out["trace"] = tr
    lam_min = float(eigvalsh(0.5 * (m + dagger(m)))[0])
    if lam_min < -TOL_ALG:
        out["positivity"] = -lam_min
    return out


def validate_density(m, dims) -> DensityOperator:
    """Return a typed operator or raise :class:`StateValidationError`."""
    return DensityOperator(tuple(dims), as_matrix(m))


def as_density(state: DensityOperator | PureState) -> DensityOperator:
    return state.density() if isinstance(state, PureState) else state


def partial_trace(rho: DensityOperator | PureState, keep) -> DensityOperator:
    """Reduced operator on the subsystems listed in ``keep`` (0-based, party 1 = 0)."""
    rho = as_density(rho)
    keep = sorted(set(int(k) for k in keep))
    n = rho.n_parties
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid subsystem set {keep} for {n} parties")
    dims = rho.dims
    t = rho.matrix.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace out from the highest index down so axis numbers stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        m = n - count
        t = np.trace(t, axis1=i, axis2=i + m)
    dk = math.prod(dims[i] for i in keep)
    return DensityOperator(tuple(dims[i] for i in keep), t.reshape(dk, dk))


def purity(rho: DensityOperator | PureState) -> float:
    rho = as_density(rho)
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    coefficients: np.ndarray
    basis_a: np.ndarray  # columns are |a_i>
    basis_b: np.ndarray  # columns are |b_i>

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coefficients, self.basis_a, self.basis_b).reshape(-1)

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > TOL_ALG))


def _first_nonzero(v: np.ndarray) -> complex:
    for c in v:
        if abs(c) > TOL_ALG:
            return c
    return 1.0


def schmidt_decompose(psi: PureState) -> SchmidtForm:
    """Schmidt form of a bipartite pure state via the SVD of its amplitude matrix.

    Coefficients are real, nonnegative and descending. Each ``|a_i>`` has its
    first nonzero component made real positive (the phase moves onto
    ``|b_i>``); equal coefficients are ordered lexicographically by ``|a_i>``.
    """
    if len(psi.dims) != 2:
        raise ValueError("Schmidt decomposition needs exactly two subsystems")
    da, db = psi.dims
    u, s, vh = jacobi_svd(psi.amplitudes.reshape(da, db))
    k = min(da, db)
    a = u[:, :k].copy()
    b = vh[:k, :].T.copy()
    for i in range(k):
        ph = _first_nonzero(a[:, i])
        ph = ph / abs(ph)
        a[:, i] /= ph
        b[:, i] *= ph
    keys = []
    for i in range(k):
        key = [round(-s[i] / TOL_ALG)]
        for c in a[:, i]:
            key += [-round(c.real / TOL_ALG), -round(c.imag / TOL_ALG)]
        keys.append(tuple(key))
    order = sorted(range(k), key=keys.__getitem__)
    return SchmidtForm(s[order], a[:, order], b[:, order])


# --- spin-1 ------------------------------------------------------------------
#
# Cartesian basis {|x>, |y>, |z>}: |x> is the m = 0 state along x, etc., so the
# m = 0 state along a unit vector n is sum_i n_i |i>.  In this basis the spin
# operators are (S_k)_{ij} = -i eps_{kij}.

_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI[_i, _j, _k] = 1.0
    _LEVI[_i, _k, _j] = -1.0

SPIN1_OPS = tuple(-1j * _LEVI[k] for k in range(3))

# Relative to the m-basis form (|1>|-1> + |-1>|1> - |0>|0>)/sqrt(3) with
# Condon-Shortley phases, the Cartesian form carries an overall factor -1.
SPIN1_SINGLET_SIGN = -1.0


def spin1_m_basis(n) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvectors ``|+1>, |0>, |-1>`` of n.S in the Cartesian basis.

    ``|0>`` is the real vector n; ``|+-1> = S_pm |0> / sqrt(2)`` with the
    ladder operators built from a right-handed frame (u, v, n).
    """
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = trial - n * (trial @ n)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    su = sum(u[k] * SPIN1_OPS[k] for k in range(3))
    sv = sum(v[k] * SPIN1_OPS[k] for k in range(3))
    zero = n.astype(complex)
    plus = (su + 1j * sv) @ zero / np.sqrt(2)
    minus = (su - 1j * sv) @ zero / np.sqrt(2)
    return plus, zero, minus


def spin1_singlet_m_form(n=(0.0, 0.0, 1.0)) -> np.ndarray:
    """The total-spin-zero state written with m-eigenstates along ``n``."""
    p, z, m = spin1_m_basis(n)
    return (np.kron(p, m) + np.kron(m, p) - np.kron(z, z)) / np.sqrt(3)


def spin1_singlet_vector() -> np.ndarray:
    return SPIN1_SINGLET_SIGN * np.eye(3).reshape(-1).astype(complex) / np.sqrt(3)


# --- presets -----------------------------------------------------------------

def singlet() -> PureState:
    return PureState((2, 2), np.array([0, 1, -1, 0]) / np.sqrt(2))


def ghz(n: int, relative_phase: complex = 1.0) -> PureState:
    if n < 2:
        raise ValueError("GHZ needs at least two qubits")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[-1] = relative_phase / np.sqrt(2)
    return PureState((2,) * n, amps)


def pure_alpha(alpha: float) -> PureState:
    """cos(alpha/2)|++> + sin(alpha/2)|-->.

    The Schmidt kets are |+> = |0> and |-> = i|1>, which gives the diagonal
    correlation matrix diag(-sin alpha, sin alpha, 1).
    """
    return PureState((2, 2), [np.cos(alpha / 2), 0, 0, -np.sin(alpha / 2)])


def werner(p: float) -> DensityOperator:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight p={p} outside [0, 1]")
    psi = singlet().amplitudes
    return DensityOperator((2, 2), p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4)


def maximally_mixed(d: int | tuple[int, ...]) -> DensityOperator:
    dims = (d,) if isinstance(d, int) else tuple(d)
    dim = math.prod(dims)
    return DensityOperator(dims, np.eye(dim) / dim)


def spin1_singlet() -> PureState:
    return PureState((3, 3), spin1_singlet_vector())


def product_state(*kets) -> PureState:
    vecs = [np.asarray(k, dtype=complex) for k in kets]
    return PureState(tuple(v.size for v in vecs), kron(*[v.reshape(-1, 1) for v in vecs]).reshape(-1))


def bloch_ket(theta: float, phi: float) -> np.ndarray:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def qubit_density(r) -> DensityOperator:
    from .linalg import pauli_dot

    return DensityOperator((2,), 0.5 * (np.eye(2) + pauli_dot(r)))


def random_density(dims, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Random mixed state from a Ginibre matrix (rank defaults to full)."""
    dims = tuple(dims)
    d = math.prod(dims)
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ dagger(g)
    return DensityOperator(dims, m / np.trace(m))


def random_pure(dims, rng: np.random.Generator) -> PureState:
    dims = tuple(dims)
    v = rng.normal(size=math.prod(dims)) + 1j * rng.normal(size=math.prod(dims))
    return PureState(dims, v / np.linalg.norm(v))


def load_state(path: str | Path) -> DensityOperator | PureState:
    """Read a custom state file.

    Format: ``{"dims": [...], "matrix": [[re, im], ...]}`` (row-major) or
    ``{"dims": [...], "vector": [[re, im], ...]}``.
    """
    data = json.loads(Path(path).read_text())
    return state_from_dict(data)


def _complex_list(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StateValidationError({"shape": float(arr.size)})
    return arr[:, 0] + 1j * arr[:, 1]


def state_from_dict(data: dict) -> DensityOperator | PureState:
    if "dims" not in data:
        raise StateValidationError({"shape": 1.0})
    dims = _dims_tuple(data["dims"])
    d = math.prod(dims)
    if "matrix" in data:
        flat = _complex_list(data["matrix"])
        if flat.size != d * d:
            raise StateValidationError({"shape": float(abs(flat.size - d * d))})
        return DensityOperator(dims, flat.reshape(d, d))
    if "vector" in data:
        return PureState(dims, _complex_list(data["vector"]))
    raise StateValidationError({"shape": 1.0})


def state_to_dict(state: DensityOperator | PureState) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "vector": [[z.real, z.imag] for z in state.amplitudes]}
    flat = state.matrix.reshape(-1)
    return {"dims": list(state.dims), "matrix": [[z.real, z.imag] for z in flat]}


PRESETS = ("singlet", "ghz", "pure_alpha", "werner", "spin1_singlet", "maximally_mixed", "file")


def make_state(preset: str, *, n: int = 3, alpha: float = math.pi / 3, p: float = 1.0,
               d: int = 4, path: str | Path | None = None) -> DensityOperator | PureState:
    """Build one of the named states.

    ``ghz`` uses ``n``, ``pure_alpha`` uses ``alpha``, ``werner`` uses ``p``,
    ``maximally_mixed`` uses ``d`` and ``file`` reads ``path``.
    """
    if preset == "singlet":
        return singlet()
    if preset == "ghz":
        return ghz(n)
    if preset == "pure_alpha":
        return pure_alpha(alpha)
    if preset == "werner":
        return werner(p)
    if preset == "spin1_singlet":
        return spin1_singlet()
    if preset == "maximally_mixed":
        return maximally_mixed(d)
    if preset == "file":
        if path is None:
            raise ValueError("preset 'file' needs a path")
        return load_state(path)
    raise ValueError(f"unknown state preset {preset!r}; choose from {', '.join(PRESETS)}")
