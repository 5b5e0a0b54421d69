import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocality.correlations import (
    BlochDecomposition,
    Rotation,
    bloch_decompose,
    correlation_tensor_n,
    joint_probability,
    make_rng,
    outcome_distribution,
    quantum_correlation,
    rotate_frames,
    rz,
    sample_outcomes,
    unitary_from_rotation,
)
from nonlocality.linalg import PAULI, kron
from nonlocality.states import (
    DensityOperator,
    ghz,
    maximally_mixed,
    product_state,
    pure_alpha,
    random_density,
    singlet,
)

from conftest import TOL_ALG

seeds = st.integers(0, 2**32 - 1)


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _trace_oracle(rho, mus):
    op = kron(*(PAULI[m] for m in mus))
    return float(np.trace(rho @ op).real)


def test_singlet_bloch():
    d = bloch_decompose(singlet())
    assert np.allclose(d.r, 0, atol=TOL_ALG) and np.allclose(d.s, 0, atol=TOL_ALG)
    assert np.allclose(d.T, -np.eye(3), atol=TOL_ALG)


@pytest.mark.parametrize("alpha", [0.3, math.pi / 3, 1.2])
def test_pure_alpha_bloch(alpha):
    d = bloch_decompose(pure_alpha(alpha))
    assert np.allclose(d.T, np.diag([-math.sin(alpha), math.sin(alpha), 1]), atol=TOL_ALG)
    assert np.allclose(d.r, [0, 0, math.cos(alpha)], atol=TOL_ALG)
    assert np.allclose(d.s, [0, 0, math.cos(alpha)], atol=TOL_ALG)


def test_maximally_mixed_bloch():
    d = bloch_decompose(maximally_mixed((2, 2)))
    assert np.allclose(d.T, 0) and np.allclose(d.r, 0) and np.allclose(d.s, 0)


@given(seeds)
def test_bloch_reconstruction(seed):
    rho = random_density((2, 2), make_rng(seed))
    assert np.max(np.abs(bloch_decompose(rho).density_matrix() - rho.matrix)) < TOL_ALG


def test_ghz3_tensor_against_trace_oracle():
    rho = ghz(3).density().matrix
    t = correlation_tensor_n(ghz(3)).full
    for mus in itertools.product(range(4), repeat=3):
        assert abs(t[mus] - _trace_oracle(rho, mus)) < TOL_ALG
    assert t[1, 1, 1] == pytest.approx(1)
    for mus in ((1, 2, 2), (2, 1, 2), (2, 2, 1)):
        assert t[mus] == pytest.approx(-1)
    # odd number of sigma_z on a 3-qubit GHZ state averages to zero
    assert abs(t[3, 3, 3]) < TOL_ALG
    assert t[3, 3, 0] == pytest.approx(1)


def test_product_zero_zero_tensor():
    up = np.array([1, 0])
    t = correlation_tensor_n(product_state(up, up)).full
    assert t[3, 3] == pytest.approx(1) and t[3, 0] == pytest.approx(1) and t[0, 3] == pytest.approx(1)


@given(seeds)
def test_tensor_n2_matches_bloch(seed):
    rho = random_density((2, 2), make_rng(seed))
    full = correlation_tensor_n(rho).full
    d = bloch_decompose(rho)
    assert np.allclose(full[1:, 1:], d.T, atol=TOL_ALG)
    assert np.allclose(full[1:, 0], d.r, atol=TOL_ALG)
    assert np.allclose(full[0, 1:], d.s, atol=TOL_ALG)


@given(seeds, st.integers(1, 4))
def test_tensor_n_density_round_trip(seed, n):
    rho = random_density((2,) * n, make_rng(seed))
    assert np.max(np.abs(correlation_tensor_n(rho).density_matrix() - rho.matrix)) < TOL_ALG


def test_joint_probability_singlet():
    z = (0, 0, 1)
    assert joint_probability(singlet(), [z, z], [1, 1]) == pytest.approx(0, abs=TOL_ALG)
    assert joint_probability(singlet(), [z, z], [1, -1]) == pytest.approx(0.5, abs=TOL_ALG)


def test_joint_probability_mixed(rng):
    for _ in range(5):
        a, b = _unit(rng), _unit(rng)
        assert joint_probability(maximally_mixed((2, 2)), [a, b], [1, -1]) == pytest.approx(0.25)


@given(seeds, st.integers(1, 3))
def test_probability_law(seed, n):
    rng = make_rng(seed)
    rho = random_density((2,) * n, rng)
    dist = outcome_distribution(rho, [_unit(rng) for _ in range(n)])
    assert abs(sum(dist.values()) - 1) < TOL_ALG
    assert all(-TOL_ALG <= p <= 1 + TOL_ALG for p in dist.values())


def test_singlet_correlation_is_minus_dot(rng):
    t = bloch_decompose(singlet())
    assert quantum_correlation(t, [(1, 0, 0), (1, 0, 0)]) == pytest.approx(-1)
    for _ in range(5):
        a, b = _unit(rng), _unit(rng)
        assert quantum_correlation(t, [a, b]) == pytest.approx(-a @ b, abs=TOL_ALG)


def test_zero_tensor_correlation():
    assert quantum_correlation(np.zeros((3, 3)), [(1, 0, 0), (0, 1, 0)]) == 0


def test_correlation_equals_outcome_sum(rng):
    for _ in range(10):
        rho = random_density((2, 2), rng)
        a, b = _unit(rng), _unit(rng)
        brute = sum(l * m * joint_probability(rho, [a, b], [l, m])
                    for l, m in itertools.product((1, -1), repeat=2))
        assert quantum_correlation(bloch_decompose(rho), [a, b]) == pytest.approx(brute, abs=TOL_ALG)


@given(seeds)
def test_quantum_marginals_non_signaling(seed):
    rng = make_rng(seed)
    rho = random_density((2, 2), rng)
    a, b1, b2 = _unit(rng), _unit(rng), _unit(rng)
    for l in (1, -1):
        m1 = sum(joint_probability(rho, [a, b1], [l, m]) for m in (1, -1))
        m2 = sum(joint_probability(rho, [a, b2], [l, m]) for m in (1, -1))
        assert abs(m1 - m2) < TOL_ALG


def test_rotation_identity_and_singlet_isotropy():
    d = bloch_decompose(singlet())
    same = rotate_frames(d, Rotation(np.eye(3)), Rotation(np.eye(3)))
    assert np.allclose(same.T, d.T)
    rot = rz(0.7)
    assert np.allclose(rotate_frames(d, rot, rot).T, -np.eye(3), atol=TOL_ALG)


@given(seeds)
def test_rotation_preserves_singular_values(seed):
    rng = make_rng(seed)
    d = bloch_decompose(random_density((2, 2), rng))
    o1, o2 = Rotation.random(rng), Rotation.random(rng)
    sv = np.linalg.svd(rotate_frames(d, o1, o2).T, compute_uv=False)
    assert np.allclose(sv, np.linalg.svd(d.T, compute_uv=False), atol=TOL_ALG)


@given(seeds)
def test_correlation_covariance(seed):
    rng = make_rng(seed)
    d = bloch_decompose(random_density((2, 2), rng))
    o1, o2 = Rotation.random(rng), Rotation.random(rng)
    a, b = _unit(rng), _unit(rng)
    lhs = quantum_correlation(rotate_frames(d, o1, o2), [o1.O @ a, o2.O @ b])
    assert abs(lhs - quantum_correlation(d, [a, b])) < TOL_ALG


def test_unitary_identity_and_rz_pi():
    assert np.allclose(unitary_from_rotation(Rotation(np.eye(3))), np.eye(2))
    u = unitary_from_rotation(rz(math.pi))
    # proportional to sigma_z
    ratio = u[0, 0] / PAULI[3][0, 0]
    assert np.allclose(u, ratio * PAULI[3], atol=TOL_ALG)


@given(seeds)
def test_unitary_conjugation_matches_rotate_frames(seed):
    rng = make_rng(seed)
    rho = random_density((2, 2), rng)
    o1, o2 = Rotation.random(rng), Rotation.random(rng)
    u = kron(unitary_from_rotation(o1), unitary_from_rotation(o2))
    turned = DensityOperator((2, 2), u @ rho.matrix @ u.conj().T)
    a, b = bloch_decompose(turned), rotate_frames(bloch_decompose(rho), o1, o2)
    for x, y in ((a.r, b.r), (a.s, b.s), (a.T, b.T)):
        assert np.max(np.abs(x - y)) < TOL_ALG


def test_bloch_decomposition_rejects_out_of_range():
    with pytest.raises(ValueError):
        BlochDecomposition(np.zeros(3), np.zeros(3), 2 * np.eye(3))


def test_sampling_zero_probability_event():
    z = (0, 0, 1)
    counts = sample_outcomes(singlet(), [z, z], make_rng(1), 100_000)
    assert counts[(1, 1)] + counts[(-1, -1)] == 0


def test_sampling_mixed_uniform():
    runs = 40_000
    counts = sample_outcomes(maximally_mixed((2, 2)), [(1, 0, 0), (0, 1, 0)], make_rng(2), runs)
    sigma = math.sqrt(0.25 * 0.75 / runs)
    for k in itertools.product((1, -1), repeat=2):
        assert abs(counts[k] / runs - 0.25) <= 5 * sigma


def test_sampling_singlet_45_degrees():
    runs = 100_000
    c = math.cos(math.pi / 4)
    a, b = (0, 0, 1), (math.sin(math.pi / 4), 0, c)
    counts = sample_outcomes(singlet(), [a, b], make_rng(3), runs)
    p_eq = 0.5 - 0.5 * c
    freq = (counts[(1, 1)] + counts[(-1, -1)]) / runs
    assert abs(freq - p_eq) <= 5 * math.sqrt(p_eq * (1 - p_eq) / runs)


def test_sampling_is_seed_deterministic():
    a = sample_outcomes(singlet(), [(1, 0, 0), (0, 1, 0)], make_rng(9), 500)
    b = sample_outcomes(singlet(), [(1, 0, 0), (0, 1, 0)], make_rng(9), 500)
    assert a == b
