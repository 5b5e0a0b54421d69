"""Small dense complex linear algebra.

Everything here works on matrices of at most a few hundred rows (two spin-1
particles, or up to ten qubits), so plain cyclic Jacobi sweeps are both fast
enough and fully deterministic: the pivot order is fixed (row-major over the
upper triangle), so identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

TOL_ALG = 1e-9
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def kron(*factors) -> np.ndarray:
    """Kronecker product; the leftmost factor is party 1."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def pauli_dot(n) -> np.ndarray:
    """n . sigma for a real 3-vector n."""
    n = np.asarray(n, dtype=float)
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def _rotation_2x2(a: float, b: float, g: complex) -> np.ndarray:
    """Unitary diagonalising the Hermitian block [[a, g], [conj(g), b]].

    The off-diagonal phase is removed first, then a real Givens rotation
    finishes the job.
    """
    mag = abs(g)
    phase = g / mag
    theta = 0.5 * np.arctan2(2.0 * mag, a - b)
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s * phase], [s * np.conj(phase), c]], dtype=complex)


def jacobi_eigh(h, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Returns ``(w, v)`` with eigenvalues ascending and ``h @ v = v * w``.
    """
    a = as_matrix(h).copy()
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(MAX_SWEEPS):
        if np.linalg.norm(a[~np.eye(n, dtype=bool)]) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                if abs(g) <= 1e-300:
                    continue
                r = _rotation_2x2(a[p, p].real, a[q, q].real, g)
                cols = a[:, [p, q]] @ r
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = dagger(r) @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]] @ r
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_svd(m, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD by one-sided (Hestenes) Jacobi rotations.

    Returns ``(u, s, vh)`` with ``m = u @ diag(s) @ vh``, singular values
    descending. Works for rectangular input by transposing when wide.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if cols > rows:
        u, s, vh = jacobi_svd(dagger(a), tol)
        return dagger(vh), s, dagger(u)
    w = a.copy()
    v = np.eye(cols, dtype=complex)
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = np.vdot(w[:, p], w[:, p]).real
                beta = np.vdot(w[:, q], w[:, q]).real
                gamma = np.vdot(w[:, p], w[:, q])
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or abs(gamma) <= 1e-300:
                    continue
                rotated = True
                r = _rotation_2x2(alpha, beta, gamma)
                wc = w[:, [p, q]] @ r
                w[:, p], w[:, q] = wc[:, 0], wc[:, 1]
                vc = v[:, [p, q]] @ r
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
        if not rotated:
            break
    else:
        raise RuntimeError("Jacobi SVD did not converge")
    s = np.linalg.norm(w, axis=0)
    order = np.argsort(-s, kind="stable")
    s, w, v = s[order], w[:, order], v[:, order]
    u = np.zeros_like(w)
    big = s > 1e-300
    u[:, big] = w[:, big] / s[big]
    u = _complete_orthonormal(u, big)
    return u, s, dagger(v)


def _complete_orthonormal(u: np.ndarray, filled: np.ndarray) -> np.ndarray:
    """Fill zero columns of ``u`` so the column set is orthonormal."""
    if filled.all():
        return u
    u = u.copy()
    basis = np.eye(u.shape[0], dtype=complex)
    k = 0
    for j in np.flatnonzero(~filled):
        while k < basis.shape[1]:
            cand = basis[:, k].copy()
            k += 1
            for i in range(u.shape[1]):
                if filled[i] or i < j:
                    cand -= np.vdot(u[:, i], cand) * u[:, i]
            nrm = np.linalg.norm(cand)
            if nrm > 1e-6:
                u[:, j] = cand / nrm
                break
    return u


def singular_values(m) -> np.ndarray:
    return jacobi_svd(m)[1]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
