import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import CNOT, HADAMARD, PAULI_X, PAULI_Z, junta
from core import (
    CJState,
    DenseUnitary,
    PauliSpectrum,
    PauliString,
    StructuredJunta,
    cj_overlap,
    cj_state,
    decompose,
    derivative,
    dist,
    embed,
    encode_boolean,
    haar_random_unitary,
    influence,
    influence_via_partial_trace,
    partial_trace,
    pauli_matrix,
    reconstruct,
)
from errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NotUnitaryError,
    QubitIndexError,
    SizeLimitError,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


# ---- Pauli strings and matrices ----


def test_pauli_string_support_is_one_based():
    assert PauliString("IXIZ").support() == frozenset({2, 4})
    assert PauliString("II").is_identity()
    assert PauliString.from_codes([0, 2, 3]).letters == "IYZ"


def test_pauli_string_rejects_bad_letters():
    with pytest.raises(InvalidParameterError):
        PauliString("IXA")


def test_pauli_matrix_examples():
    assert_allclose(pauli_matrix("I"), np.eye(2))
    assert_allclose(pauli_matrix("ZZ"), np.diag([1, -1, -1, 1]))
    block_swap = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    assert_allclose(pauli_matrix("XI"), block_swap)


# ---- Decomposition ----


def test_decompose_identity():
    spectrum = decompose(np.eye(8))
    assert spectrum.as_dict() == {"III": 1}


def test_decompose_zz_is_single_string(zz):
    spectrum = decompose(zz)
    assert len(spectrum) == 1
    assert spectrum.coefficient("ZZ") == pytest.approx(1)


def test_decompose_cnot(cnot):
    spectrum = decompose(cnot)
    expected = {"II": 0.5, "IX": 0.5, "ZI": 0.5, "ZX": -0.5}
    assert set(spectrum.as_dict()) == set(expected)
    for letters, value in expected.items():
        assert spectrum.coefficient(letters) == pytest.approx(value, abs=1e-12)


def test_decompose_rejects_non_power_of_two():
    with pytest.raises(DimensionMismatchError):
        decompose(np.eye(3))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_parseval_and_reconstruction_on_haar(n, rng):
    u = haar_random_unitary(n, rng)
    spectrum = decompose(u)
    assert spectrum.total_weight() == pytest.approx(1, abs=1e-9)
    assert_allclose(reconstruct(spectrum), u.entries, atol=1e-9)


def test_decompose_matches_trace_formula(rng):
    u = haar_random_unitary(2, rng)
    spectrum = decompose(u)
    for letters in ["IY", "XZ", "YY", "ZI"]:
        expected = np.trace(pauli_matrix(letters) @ u.entries) / 4
        assert spectrum.coefficient(letters) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_plancherel_inner_product(n, rng):
    a = haar_random_unitary(n, rng).entries
    b = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(size=(2 ** n, 2 ** n))
    direct = np.trace(a.conj().T @ b) / 2 ** n
    paulis = np.vdot(decompose(a).to_dense(), decompose(b).to_dense())
    assert paulis == pytest.approx(direct, abs=1e-9)


def test_reconstruct_examples():
    assert_allclose(reconstruct(PauliSpectrum.from_mapping(2, {"II": 1})), np.eye(4))
    assert_allclose(reconstruct(PauliSpectrum.from_mapping(2, {"ZZ": 1})), np.diag([1, -1, -1, 1]))


# ---- Derivative and influence ----


def test_derivative_keeps_strings_on_qubit(cnot):
    d1 = derivative(decompose(cnot), 1).as_dict()
    assert set(d1) == {"ZI", "ZX"}
    d2 = derivative(decompose(cnot), 2).as_dict()
    assert set(d2) == {"IX", "ZX"}


def test_derivative_index_out_of_range(cnot):
    with pytest.raises(QubitIndexError):
        derivative(decompose(cnot), 3)


def test_influence_examples(cnot, zz):
    spectrum = decompose(cnot)
    assert influence(spectrum, {1}) == pytest.approx(0.5)
    assert influence(spectrum, {2}) == pytest.approx(0.5)
    assert influence(spectrum, {1, 2}) == pytest.approx(0.75)
    assert influence(spectrum, set()) == 0
    assert influence(decompose(zz), {2}) == pytest.approx(1)
    assert influence(decompose(np.kron(PAULI_X, np.eye(2))), {2}) == pytest.approx(0)


def test_influence_rejects_bad_qubit(cnot):
    with pytest.raises(QubitIndexError):
        influence(decompose(cnot), {0})


# ---- Partial trace ----


def test_partial_trace_of_cnot(cnot):
    assert_allclose(partial_trace(cnot, {2}), np.diag([2, 0]), atol=1e-12)
    assert_allclose(partial_trace(cnot, {1}), np.eye(2) + PAULI_X, atol=1e-12)
    assert_allclose(partial_trace(cnot, set()), CNOT)


def test_influence_via_partial_trace_matches_fourier(rng):
    for _ in range(20):
        n = int(rng.integers(1, 5))
        u = haar_random_unitary(n, rng)
        subset = [q for q in range(1, n + 1) if rng.random() < 0.5] or [1]
        assert influence_via_partial_trace(u, subset) == pytest.approx(
            influence(decompose(u), subset), abs=1e-9
        )


# ---- Distance and CJ states ----


def test_dist_examples(cnot):
    assert dist(PAULI_X, PAULI_Z) == pytest.approx(1)
    assert dist(cnot, np.exp(0.7j) * CNOT) == pytest.approx(0, abs=1e-7)
    assert dist(np.eye(4), cnot) == pytest.approx(np.sqrt(0.5))


def test_dist_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        dist(np.eye(2), np.eye(4))


def test_dist_between_juntas_uses_support_union():
    a = junta(10, (3,), HADAMARD)
    b = junta(10, (7,), HADAMARD)
    c = junta(10, (3,), np.exp(0.3j) * HADAMARD)
    assert dist(a, b) == pytest.approx(1)
    assert dist(a, c) == pytest.approx(0, abs=1e-7)


def test_dist_tensor_invariance(rng):
    a, b = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
    c = haar_random_unitary(1, rng).entries
    assert dist(np.kron(a.entries, c), np.kron(b.entries, c)) == pytest.approx(dist(a, b), abs=1e-9)


def test_dist_triangle_inequality(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        u, v, w = (haar_random_unitary(n, rng) for _ in range(3))
        assert dist(u, w) <= dist(u, v) + dist(v, w) + 1e-9
    # ZZ sits at distance 1 from both I and Z on the first qubit
    zz = np.diag([1, -1, -1, 1]).astype(complex)
    zi = np.kron(PAULI_Z, np.eye(2))
    assert dist(np.eye(4), zi) <= dist(np.eye(4), zz) + dist(zz, zi)


def test_cj_state_of_identity_is_epr_pairs():
    state = cj_state(DenseUnitary(2, np.eye(4)))
    expected = np.zeros(16)
    expected[[0, 5, 10, 15]] = 0.5
    assert_allclose(state.amplitudes, expected)
    assert state.amplitude(1, 1) == pytest.approx(0.5)


def test_cj_overlap_is_fidelity_root(rng):
    a, b = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
    overlap = np.vdot(cj_state(a).amplitudes, cj_state(b).amplitudes)
    assert cj_overlap(a, b) == pytest.approx(overlap)
    assert dist(a, b) ** 2 == pytest.approx(1 - abs(overlap), abs=1e-9)


def test_cj_state_requires_unit_norm():
    with pytest.raises(NotUnitaryError):
        CJState(1, np.ones(4))


# ---- Unitaries, juntas, embedding ----


def test_dense_unitary_validation():
    with pytest.raises(NotUnitaryError):
        DenseUnitary(1, np.array([[1, 1], [0, 1]]))
    with pytest.raises(DimensionMismatchError):
        DenseUnitary(2, np.eye(2))
    with pytest.raises(SizeLimitError):
        DenseUnitary(9, np.eye(2))


def test_haar_is_unitary_and_seeded():
    a = haar_random_unitary(3, 11)
    b = haar_random_unitary(3, 11)
    c = haar_random_unitary(3, 12)
    assert_allclose(a.entries, b.entries)
    assert not np.allclose(a.entries, c.entries)


def test_encode_boolean():
    assert_allclose(encode_boolean("0110").entries, np.diag([1, -1, -1, 1]))
    with pytest.raises(InvalidParameterError):
        encode_boolean("011")
    with pytest.raises(InvalidParameterError):
        encode_boolean("0120")


def test_embed_places_operator_on_support():
    assert_allclose(embed(PAULI_X, [2], 2), np.kron(np.eye(2), PAULI_X))
    assert_allclose(embed(CNOT, [2, 1], 2), SWAP @ CNOT @ SWAP)
    assert_allclose(embed(PAULI_Z, [1], 3), np.kron(PAULI_Z, np.eye(4)))


def test_structured_junta_spectrum_matches_dense(rng):
    v = StructuredJunta(3, (3, 1), haar_random_unitary(2, rng))
    assert_allclose(reconstruct(v.spectrum()), v.to_dense().entries, atol=1e-9)
    assert influence(v.spectrum(), {2}) == pytest.approx(0, abs=1e-12)


def test_structured_junta_large_n_spectrum_only_on_core():
    v = junta(40, (17, 33), CNOT)
    spectrum = v.spectrum()
    assert len(spectrum) == 4
    assert set(np.flatnonzero(spectrum.letters.any(axis=0)) + 1) == {17, 33}
    with pytest.raises(SizeLimitError):
        v.to_dense()


def test_structured_junta_validation():
    with pytest.raises(DimensionMismatchError):
        StructuredJunta(4, (1, 2), DenseUnitary(1, HADAMARD))
    with pytest.raises(InvalidParameterError):
        StructuredJunta(4, (2, 2), DenseUnitary(2, CNOT))
    with pytest.raises(QubitIndexError):
        StructuredJunta(4, (5,), DenseUnitary(1, HADAMARD))
