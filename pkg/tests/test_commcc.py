import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocality.commcc import (
    RESPONSES,
    BitBudgetExceeded,
    ClassicalStrategy,
    MessageHarness,
    QuantumProtocolSpec,
    bell_to_task,
    chsh_game_referee,
    chsh_task,
    classical_fidelity,
    classical_fidelity_ascent,
    classical_fidelity_direct,
    classical_fidelity_max,
    ghz_mod4_protocol,
    load_task,
    make_mod4_task,
    maximize_quantum_fidelity,
    mod4_classical_bound,
    quantum_fidelity,
    relay_phases,
    simulate_protocol,
)
from nonlocality.correlations import make_rng
from nonlocality.states import ghz, maximally_mixed, product_state, singlet

from conftest import TOL_ALG, TOL_OPT

seeds = st.integers(0, 2**32 - 1)
SQ2 = math.sqrt(2)


def tree_protocol_optimum(g):
    """Best fidelity over every protocol in which each of the first N-1 parties
    sends one bit (any function of x_k, z_k) and the last party answers with
    any function of its inputs and the bits received."""
    n = g.ndim
    cells = list(itertools.product((0, 1), repeat=2))  # (x_k, z_k)
    best = -np.inf
    for funcs in itertools.product(range(16), repeat=n - 1):
        acc = {}
        for x in itertools.product((0, 1), repeat=n):
            for z in itertools.product((0, 1), repeat=n):
                w = g[x] * np.prod([1 - 2 * b for b in z]) / 2**n
                msgs = tuple((funcs[k] >> cells.index((x[k], z[k]))) & 1 for k in range(n - 1))
                key = (x[-1], z[-1], msgs)
                acc[key] = acc.get(key, 0.0) + w
        best = max(best, sum(abs(v) for v in acc.values()))
    return best


# --------------------------------------------------------------- tasks

def test_mod4_task_support_and_normalization():
    for n in (2, 3, 4, 5):
        task = make_mod4_task(n)
        assert np.sum(np.abs(task.g)) == pytest.approx(1, abs=1e-15)
        for x in itertools.product((0, 1), repeat=n):
            if sum(x) % 2:
                assert task.g[x] == 0
            else:
                assert task.f[x] == (1 if sum(x) % 4 == 0 else -1)
        assert set(np.unique(task.f[task.promise > 0])) <= {-1, 1}


@given(seeds, st.floats(0.01, 100))
def test_bell_to_task_scale_invariant(seed, lam):
    g = make_rng(seed).normal(size=(2, 2, 2))
    assert np.allclose(bell_to_task(lam * g).g, bell_to_task(g).g, atol=1e-15)


def test_chsh_task_uniform_promise():
    assert np.allclose(chsh_task().promise, 0.25)


def test_load_task(tmp_path):
    path = tmp_path / "task.json"
    path.write_text(json.dumps(make_mod4_task(3).to_dict()))
    assert np.array_equal(load_task(path).g, make_mod4_task(3).g)


# ------------------------------------------------------------ classical

@pytest.mark.parametrize("n", range(2, 9))
def test_mod4_classical_bound(n):
    opt = classical_fidelity_max(make_mod4_task(n))
    assert opt.exact
    assert opt.value == pytest.approx(mod4_classical_bound(n), abs=TOL_ALG)


def test_mod4_n4_enumeration():
    opt = classical_fidelity_max(make_mod4_task(4))
    assert opt.n_strategies == 256 and opt.value == pytest.approx(0.5, abs=TOL_ALG)


def test_mod4_n2_is_vacuous():
    assert classical_fidelity_max(make_mod4_task(2)).value == pytest.approx(1)


def test_ascent_is_a_lower_bound_that_reaches_the_bound():
    for n in (4, 6):
        task = make_mod4_task(n)
        asc = classical_fidelity_ascent(task)
        assert not asc.exact
        assert asc.value <= classical_fidelity_max(task).value + TOL_ALG
        assert asc.value == pytest.approx(mod4_classical_bound(n), abs=TOL_ALG)


def test_concentrated_task():
    g = np.zeros((2, 2, 2))
    g[1, 0, 1] = 1
    assert classical_fidelity_max(bell_to_task(g)).value == pytest.approx(1)


@given(seeds, st.integers(2, 4))
def test_direct_sum_equals_reduced_form(seed, n):
    rng = make_rng(seed)
    task = bell_to_task(rng.normal(size=(2,) * n))
    strategy = ClassicalStrategy(tuple(RESPONSES[i] for i in rng.integers(0, 4, n)))
    assert classical_fidelity_direct(task, strategy) == pytest.approx(
        classical_fidelity(task, strategy), abs=TOL_ALG)


@pytest.mark.parametrize("n", [2, 3])
def test_tree_protocols_reduce_to_products(n):
    assert tree_protocol_optimum(make_mod4_task(n).g) == pytest.approx(
        classical_fidelity_max(make_mod4_task(n)).value, abs=TOL_ALG)


@given(seeds)
def test_tree_protocols_reduce_random_tasks(seed):
    task = bell_to_task(make_rng(seed).normal(size=(2, 2)))
    assert tree_protocol_optimum(task.g) == pytest.approx(classical_fidelity_max(task).value, abs=TOL_ALG)


def test_tree_protocols_reduce_random_task_n3():
    task = bell_to_task(make_rng(17).normal(size=(2, 2, 2)))
    assert tree_protocol_optimum(task.g) == pytest.approx(classical_fidelity_max(task).value, abs=TOL_ALG)


# -------------------------------------------------------------- quantum

@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_ghz_mod4_protocol_perfect(n):
    assert quantum_fidelity(make_mod4_task(n), ghz_mod4_protocol(n)) == pytest.approx(1, abs=TOL_ALG)


def test_maximized_ghz_protocol_reaches_one():
    val, proto = maximize_quantum_fidelity(make_mod4_task(4), ghz(4))
    assert val == pytest.approx(1, abs=TOL_OPT)
    assert quantum_fidelity(make_mod4_task(4), proto) == pytest.approx(val, abs=TOL_ALG)


def test_product_state_is_classical():
    plus = np.array([1, 1]) / SQ2
    val, _ = maximize_quantum_fidelity(make_mod4_task(4), product_state(plus, plus, plus, plus))
    assert val <= 0.5 + TOL_OPT


def test_zero_g_is_not_a_task():
    with pytest.raises(ValueError):
        bell_to_task(np.zeros((2, 2, 2)))


def test_uncorrelated_state_gives_zero():
    proto = QuantumProtocolSpec(maximally_mixed((2, 2, 2)), ghz_mod4_protocol(3).settings)
    assert quantum_fidelity(make_mod4_task(3), proto) == pytest.approx(0, abs=TOL_ALG)


def test_violated_inequality_gives_quantum_advantage():
    task = chsh_task()
    val, _ = maximize_quantum_fidelity(task, singlet())
    assert val == pytest.approx(SQ2 / 2, abs=TOL_OPT)
    assert val > classical_fidelity_max(task).value + 0.1


# ------------------------------------------------------------ simulation

def test_quantum_simulation_is_perfect():
    rep = simulate_protocol(make_mod4_task(4), ghz_mod4_protocol(4), make_rng(21), 100_000)
    assert rep.fidelity == 1.0 and rep.success == 1.0
    assert rep.bits_per_run == 3


def test_classical_simulation_within_five_sigma():
    task = make_mod4_task(4)
    opt = classical_fidelity_max(task)
    rep = simulate_protocol(task, opt.strategy, make_rng(22), 100_000)
    assert rep.deviation_sigmas <= 5
    assert abs(rep.fidelity - 0.5) <= 5 * rep.fidelity_sigma


@given(seeds)
def test_success_relation(seed):
    rng = make_rng(seed)
    task = bell_to_task(rng.normal(size=(2, 2, 2)))
    strategy = ClassicalStrategy(tuple(RESPONSES[i] for i in rng.integers(0, 4, 3)))
    rep = simulate_protocol(task, strategy, rng, 2000)
    assert rep.success == pytest.approx((1 + rep.fidelity) / 2, abs=1e-12)
    assert rep.deviation_sigmas <= 5


def test_relay_accounting_and_agreement():
    task = make_mod4_task(5)
    rng = make_rng(23)
    relay = simulate_protocol(task, "qubit-relay", rng, 20_000)
    ent = simulate_protocol(task, ghz_mod4_protocol(5), rng, 20_000)
    assert relay.qubit_passes_per_run == 4 and relay.announcements_per_run == 1
    assert relay.bits_per_run == 0
    assert relay.analytic_fidelity == pytest.approx(ent.analytic_fidelity, abs=TOL_ALG)
    assert relay.fidelity == pytest.approx(ent.fidelity, abs=5 * max(relay.fidelity_sigma, 1e-12) + TOL_ALG)


def test_relay_phases():
    assert np.allclose(relay_phases([0, 1], [1, 1]), [np.pi, 1.5 * np.pi])


def test_harness_refuses_second_bit():
    h = MessageHarness(3, 4)
    h.send(0, [0, 1, 1, 0])
    with pytest.raises(BitBudgetExceeded):
        h.send(0, [1, 1, 1, 1])
    with pytest.raises(ValueError):
        h.send(2, [0, 0, 0, 0])
    with pytest.raises(ValueError):
        h.send(1, [0, 2, 0, 0])


def test_simulation_reproducible():
    task = make_mod4_task(4)
    a = simulate_protocol(task, ghz_mod4_protocol(4), make_rng(5), 1000)
    b = simulate_protocol(task, ghz_mod4_protocol(4), make_rng(5), 1000)
    assert a == b


# --------------------------------------------------------------- referee

@pytest.mark.parametrize("strategy,target", [("classical", 0.0), ("quantum", SQ2 - 1), ("random", -1.0)])
def test_referee_game(strategy, target):
    rep = chsh_game_referee(100_000, strategy, make_rng(31))
    assert rep.analytic == pytest.approx(target, abs=TOL_OPT)
    assert abs(rep.value - target) <= 5 * max(rep.sigma, 1e-12) + TOL_OPT
