import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import CNOT, HADAMARD, PAULI_Z, junta
from core import DenseUnitary, cj_state, dist, haar_random_unitary
from errors import (
    DimensionMismatchError,
    InsufficientCopiesError,
    InvalidParameterError,
    NotUnitaryError,
    PromiseViolationError,
)
from learner import (
    LearnerParams,
    junta_learner,
    pad_support,
    pauli_sample_relevant,
    post_state_distance,
    prepare_copies,
    required_copies,
    state_to_unitary,
    tomography,
)
from oracle import UnitaryOracle


def seeded(hidden, *words):
    return UnitaryOracle(hidden, seed=np.random.SeedSequence(list(words)))


# ---- Parameters ----


def test_learner_params():
    params = LearnerParams(k=1, eps=0.2)
    assert params.gamma == pytest.approx(0.01)
    assert params.sample_count == math.ceil(math.log(100) / 0.01)
    assert params.copies == required_copies(1, 0.01, params.c_t)
    assert params.attempts == 10 * params.copies
    assert params.c_l == 4 * params.c_t


def test_learner_params_validation():
    with pytest.raises(ValueError):
        LearnerParams(k=1, eps=0)
    with pytest.raises(ValueError):
        LearnerParams(k=0, eps=0.5)


# ---- Pauli sampling ----


def test_pauli_sampling_identity_is_empty():
    oracle = UnitaryOracle(DenseUnitary(3, np.eye(8)), seed=0)
    assert pauli_sample_relevant(oracle, 0.1, 2) == frozenset()


def test_pauli_sampling_cnot_in_five_qubits():
    hidden = junta(5, (1, 2), CNOT)
    found = [pauli_sample_relevant(seeded(hidden, 1, t), 0.1, 2) for t in range(100)]
    assert sum(s == {1, 2} for s in found) >= 99
    assert all(s <= {1, 2} for s in found)


def test_pauli_sampling_single_z():
    hidden = junta(6, (4,), PAULI_Z)
    found = [pauli_sample_relevant(seeded(hidden, 2, t), 0.5, 1) for t in range(100)]
    assert sum(s == {4} for s in found) >= 99


def test_pauli_sampling_charges_sample_count(cnot):
    oracle = UnitaryOracle(cnot, seed=3)
    pauli_sample_relevant(oracle, 0.1, 2)
    assert oracle.ledger.simulated_u == math.ceil(math.log(200) / 0.1)


# ---- State preparation ----


def test_prepare_copies_full_support_always_succeeds(rng):
    hidden = junta(4, (1, 3), haar_random_unitary(2, rng).entries)
    copies = prepare_copies(UnitaryOracle(hidden, seed=4), [1, 3], 2, 200)
    assert len(copies) == 200


def test_prepare_copies_cnot_partial_support(cnot):
    copies = prepare_copies(UnitaryOracle(cnot, seed=5), [1], 2, 1000)
    assert len(copies) / 1000 == pytest.approx(0.5, abs=0.06)


def test_prepare_copies_identity():
    copies = prepare_copies(UnitaryOracle(DenseUnitary(2, np.eye(4)), seed=6), [], 1, 50)
    assert len(copies) == 50
    assert copies[0].coefficients.as_dict() == {"I": 1}


def test_prepare_copies_insufficient(cnot):
    with pytest.raises(InsufficientCopiesError) as excinfo:
        prepare_copies(UnitaryOracle(cnot, seed=7), [1], 2, 10, needed=100)
    assert excinfo.value.needed == 100
    assert excinfo.value.obtained <= 10


# ---- Tomography ----


def hadamard_copies(count):
    state = UnitaryOracle(junta(1, (1,), HADAMARD), seed=0).conditional_post_state([1], 1)
    return [state] * count


def test_exact_tomography_returns_state():
    copies = hadamard_copies(required_copies(1, 0.01))
    psi = tomography(copies, 0.01)
    assert_allclose(psi, cj_state(DenseUnitary(1, HADAMARD)).amplitudes, atol=1e-12)


def test_tomography_requires_enough_copies():
    with pytest.raises(InsufficientCopiesError):
        tomography(hadamard_copies(10), 0.01)


def test_measurement_tomography_limited_to_small_k(rng):
    hidden = junta(3, (1, 2, 3), haar_random_unitary(3, rng).entries)
    state = UnitaryOracle(hidden, seed=8).conditional_post_state([1, 2, 3], 3)
    copies = [state] * required_copies(3, 0.5)
    with pytest.raises(InvalidParameterError):
        tomography(copies, 0.5, backend="measurement")


@pytest.mark.slow
def test_measurement_tomography_fidelity():
    copies = hadamard_copies(required_copies(1, 0.01))
    psi = copies[0].statevector()
    rng = np.random.default_rng(9)
    good = 0
    for _ in range(100):
        estimate = tomography(copies, 0.01, backend="measurement", rng=rng)
        good += abs(np.vdot(psi, estimate)) ** 2 >= 0.99
    assert good >= 95


# ---- Reading off the unitary ----


def test_state_to_unitary_inverts_cj_state(cnot):
    hadamard = DenseUnitary(1, HADAMARD)
    assert_allclose(state_to_unitary(cj_state(hadamard).amplitudes).entries, HADAMARD, atol=1e-9)
    assert_allclose(state_to_unitary(cj_state(DenseUnitary(2, np.eye(4))).amplitudes).entries, np.eye(4), atol=1e-9)


def test_state_to_unitary_projects_noisy_state(rng):
    noise = 1e-3 * (rng.standard_normal(16) + 1j * rng.standard_normal(16))
    psi = CNOT.reshape(-1) / 2 + noise
    w = state_to_unitary(psi / np.linalg.norm(psi))
    assert_allclose(w.entries.conj().T @ w.entries, np.eye(4), atol=1e-6)
    assert dist(w, DenseUnitary(2, CNOT)) < 1e-2


def test_state_to_unitary_errors():
    with pytest.raises(NotUnitaryError):
        state_to_unitary(np.zeros(4))
    with pytest.raises(DimensionMismatchError):
        state_to_unitary(np.ones(8) / np.sqrt(8))


def test_fidelity_distance_identity(rng):
    for _ in range(10):
        v, w = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
        overlap = abs(np.vdot(cj_state(v).amplitudes, cj_state(w).amplitudes))
        assert dist(v, w) ** 2 == pytest.approx(1 - overlap, abs=1e-9)


# ---- Support padding and closeness ----


def test_pad_support_uses_lowest_unused():
    assert pad_support([3], 2, 5) == (3, 1)
    assert pad_support([], 2, 5) == (1, 2)
    assert pad_support([2, 4], 2, 5) == (2, 4)
    with pytest.raises(InvalidParameterError):
        pad_support([], 3, 2)


def test_post_state_distance_exact_on_full_support(rng):
    hidden = junta(6, (2, 5), haar_random_unitary(2, rng).entries)
    state = UnitaryOracle(hidden, seed=10).conditional_post_state([2, 5], 2)
    assert post_state_distance(hidden, state, (2, 5)) == pytest.approx(0, abs=1e-7)


def test_closeness_chain_after_sampling(rng):
    eps = 0.25
    hidden = junta(5, (1, 4), haar_random_unitary(2, rng).entries)
    oracle = UnitaryOracle(hidden, seed=11)
    sampled = pauli_sample_relevant(oracle, eps ** 2 / 8, 2)
    support = pad_support(sorted(sampled), 2, 5)
    state = oracle._post_state(tuple(sorted(sampled)), 2)
    assert post_state_distance(hidden, state, support) <= eps / 2


def test_closeness_on_dense_hidden(cnot):
    state = UnitaryOracle(cnot, seed=12).conditional_post_state([1, 2], 2)
    assert post_state_distance(cnot, state, (1, 2)) == pytest.approx(0, abs=1e-7)


# ---- End to end ----


def test_learner_identity():
    hidden = DenseUnitary(2, np.eye(4))
    oracle = UnitaryOracle(hidden, seed=13)
    learned = junta_learner(oracle, LearnerParams(k=1, eps=0.2))
    assert learned.sampled_support == frozenset()
    assert learned.support == (1,)
    assert dist(hidden, learned.as_junta(2)) <= 0.2


def test_learner_rejects_too_many_relevant_qubits():
    # ZZ has a single Pauli string touching both qubits
    oracle = UnitaryOracle(DenseUnitary(2, np.diag([1, -1, -1, 1])), seed=12)
    with pytest.raises(PromiseViolationError) as excinfo:
        junta_learner(oracle, LearnerParams(k=1, eps=0.5))
    assert excinfo.value.sampled == 2
    assert excinfo.value.k == 1


def test_learner_ledger_bound():
    params = LearnerParams(k=1, eps=0.5)
    oracle = UnitaryOracle(junta(3, (2,), HADAMARD), seed=14)
    junta_learner(oracle, params)
    assert oracle.ledger.simulated_u == params.sample_count + params.attempts
    assert oracle.ledger.simulated_u_dagger == 0


@pytest.mark.parametrize("backend", ["exact", "measurement"])
def test_learner_single_hadamard(backend):
    hidden = junta(6, (2,), HADAMARD)
    params = LearnerParams(k=1, eps=0.2, backend=backend)
    successes = 0
    for t in range(10):
        learned = junta_learner(seeded(hidden, 15, t), params)
        assert_allclose(learned.core.entries.conj().T @ learned.core.entries, np.eye(2), atol=1e-6)
        successes += dist(hidden, learned.as_junta(6)) <= 0.2
    assert successes >= 8


@pytest.mark.slow
@pytest.mark.parametrize("backend", ["exact", "measurement"])
def test_learner_cnot_junta(backend):
    hidden = junta(8, (1, 4), CNOT)
    params = LearnerParams(k=2, eps=0.25, backend=backend)
    successes = sum(
        dist(hidden, junta_learner(seeded(hidden, 16, t), params).as_junta(8)) <= 0.25 for t in range(10)
    )
    assert successes >= 8


@pytest.mark.slow
@pytest.mark.parametrize("k,eps", [(1, 0.2), (2, 0.25)])
def test_learner_random_juntas(k, eps):
    rng = np.random.default_rng(17 + k)
    hidden = junta(6, tuple(int(q) + 1 for q in rng.choice(6, size=k, replace=False)),
                   haar_random_unitary(k, rng).entries)
    backends = ["exact", "measurement"]
    for backend in backends:
        params = LearnerParams(k=k, eps=eps, backend=backend)
        successes = sum(
            dist(hidden, junta_learner(seeded(hidden, 18, k, t), params).as_junta(6)) <= eps for t in range(10)
        )
        assert successes >= 8


@pytest.mark.slow
def test_learner_three_qubit_junta():
    rng = np.random.default_rng(23)
    hidden = junta(6, (2, 3, 6), haar_random_unitary(3, rng).entries)
    params = LearnerParams(k=3, eps=0.5)
    successes = sum(
        dist(hidden, junta_learner(seeded(hidden, 19, t), params).as_junta(6)) <= 0.5 for t in range(5)
    )
    assert successes >= 4
