"""
Pauli algebra, influence, distance, partial trace and Choi-Jamiolkowski states.

Conventions
-----------
* Qubits are numbered 1..n in the public API. Qubit 1 is the most significant
  tensor factor, so the computational basis index of |b_1 ... b_n> is
  sum_q b_q * 2**(n - q).
* A Pauli string is stored as letters over "IXYZ" or as integer codes 0..3 in
  the same order. Dense Pauli coefficient arrays have length 4**n and use the
  same most-significant-first ordering (code of qubit 1 is the leading base-4
  digit).
* A CJ state stores the amplitude of |i>|j> at index i * N + j.
"""
import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, FrozenSet, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from config import COEFFICIENT_CUTOFF, UNITARY_TOL, settings
from errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NotUnitaryError,
    QubitIndexError,
    SizeLimitError,
)

logger = logging.getLogger(__name__)

PAULI_LETTERS = "IXYZ"

PAULI_MATRICES = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# Single-qubit maps between the (row, col) entries of a 2x2 block, indexed as
# 2 * row + col, and the four Pauli coefficients.
# Forward: c_P = Tr(sigma_P A) / 2 = sum_{r,c} sigma_P[c, r] A[r, c] / 2
_TO_PAULI = np.array(
    [[PAULI_MATRICES[p][c, r] / 2 for r in range(2) for c in range(2)] for p in range(4)]
)
# Inverse: A[r, c] = sum_P c_P sigma_P[r, c]
_FROM_PAULI = np.array(
    [[PAULI_MATRICES[p][r, c] for p in range(4)] for r in range(2) for c in range(2)]
)

QubitSubset = Iterable[int]
SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


# -----------------------------------------------------------------------------
# Domain types
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self) -> None:
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise InvalidParameterError(f"Pauli string contains invalid letters: {sorted(bad)}")

    @classmethod
    def from_codes(cls, codes: Sequence[int]) -> "PauliString":
        return cls("".join(PAULI_LETTERS[int(c)] for c in codes))

    @property
    def n(self) -> int:
        return len(self.letters)

    def codes(self) -> np.ndarray:
        return np.array([PAULI_LETTERS.index(ch) for ch in self.letters], dtype=np.int8)

    def support(self) -> FrozenSet[int]:
        return frozenset(q + 1 for q, ch in enumerate(self.letters) if ch != "I")

    def is_identity(self) -> bool:
        return not self.support()

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class PauliSpectrum:
    """
    Sparse Pauli coefficients of an operator on n qubits.

    letters: (m, n) array of codes 0..3, one row per retained string.
    values:  (m,) complex coefficients.
    """
    n: int
    letters: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        letters = np.asarray(self.letters, dtype=np.int8).reshape(-1, self.n)
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if letters.shape[0] != values.shape[0]:
            raise DimensionMismatchError(
                f"{letters.shape[0]} Pauli strings but {values.shape[0]} coefficients"
            )
        letters.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, n: int, coefficients: Mapping[Union[str, PauliString], complex]) -> "PauliSpectrum":
        rows = []
        vals = []
        for key, value in coefficients.items():
            x = key if isinstance(key, PauliString) else PauliString(key)
            if x.n != n:
                raise DimensionMismatchError(f"Pauli string {x} has length {x.n}, expected {n}")
            rows.append(x.codes())
            vals.append(complex(value))
        letters = np.array(rows, dtype=np.int8).reshape(-1, n)
        return cls(n, letters, np.array(vals, dtype=complex))

    @classmethod
    def from_dense(cls, n: int, coefficients: np.ndarray, cutoff: float = COEFFICIENT_CUTOFF) -> "PauliSpectrum":
        coefficients = np.asarray(coefficients, dtype=complex).reshape(-1)
        if coefficients.shape[0] != 4 ** n:
            raise DimensionMismatchError(f"Expected {4 ** n} coefficients, got {coefficients.shape[0]}")
        keep = np.flatnonzero(np.abs(coefficients) > cutoff)
        return cls(n, _index_to_codes(keep, n), coefficients[keep])

    @classmethod
    def empty(cls, n: int) -> "PauliSpectrum":
        return cls(n, np.zeros((0, n), dtype=np.int8), np.zeros(0, dtype=complex))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def to_dense(self) -> np.ndarray:
        _check_dense_cap(self.n)
        dense = np.zeros(4 ** self.n, dtype=complex)
        np.add.at(dense, _codes_to_index(self.letters, self.n), self.values)
        return dense

    def weights(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def total_weight(self) -> float:
        return float(self.weights().sum())

    def coefficient(self, x: Union[str, PauliString]) -> complex:
        x = x if isinstance(x, PauliString) else PauliString(x)
        if x.n != self.n:
            raise DimensionMismatchError(f"Pauli string {x} has length {x.n}, expected {self.n}")
        match = np.all(self.letters == x.codes(), axis=1)
        return complex(self.values[match].sum())

    def as_dict(self) -> Dict[str, complex]:
        return {
            str(PauliString.from_codes(row)): complex(v)
            for row, v in zip(self.letters, self.values)
        }

    def select(self, mask: np.ndarray) -> "PauliSpectrum":
        return PauliSpectrum(self.n, self.letters[mask], self.values[mask])

    def touches(self, subset: QubitSubset) -> np.ndarray:
        """Row mask of strings whose support meets `subset`."""
        cols = [q - 1 for q in check_subset(subset, self.n)]
        if not cols:
            return np.zeros(len(self), dtype=bool)
        return np.any(self.letters[:, cols] != 0, axis=1)


@dataclass(frozen=True)
class DenseUnitary:
    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_dense_cap(self.n)
        entries = np.array(self.entries, dtype=complex)
        dim = 2 ** self.n
        if entries.shape != (dim, dim):
            raise DimensionMismatchError(f"Expected a {dim}x{dim} matrix, got shape {entries.shape}")
        deviation = np.max(np.abs(entries.conj().T @ entries - np.eye(dim)))
        if deviation > UNITARY_TOL:
            raise NotUnitaryError(f"U^dagger U deviates from identity by {deviation:.3e}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "DenseUnitary":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(qubit_count(matrix.shape[0]), matrix)

    @property
    def dim(self) -> int:
        return 2 ** self.n


@dataclass(frozen=True)
class StructuredJunta:
    """
    V_S tensor I on n qubits. `support` is ordered: core tensor factor i acts on
    qubit support[i].
    """
    n: int
    support: Tuple[int, ...]
    core: DenseUnitary

    def __post_init__(self) -> None:
        support = tuple(int(q) for q in self.support)
        object.__setattr__(self, "support", support)
        if len(set(support)) != len(support):
            raise InvalidParameterError(f"Support {support} repeats a qubit")
        if len(support) > self.n:
            raise InvalidParameterError(f"Support of size {len(support)} exceeds n={self.n}")
        check_subset(support, self.n)
        if self.core.n != len(support):
            raise DimensionMismatchError(
                f"Core acts on {self.core.n} qubits but support has {len(support)}"
            )

    def to_dense(self) -> DenseUnitary:
        return DenseUnitary(self.n, embed(self.core.entries, self.support, self.n))

    def spectrum(self) -> PauliSpectrum:
        core_spec = decompose(self.core)
        letters = np.zeros((len(core_spec), self.n), dtype=np.int8)
        if self.support:
            letters[:, [q - 1 for q in self.support]] = core_spec.letters
        return PauliSpectrum(self.n, letters, core_spec.values)


@dataclass(frozen=True)
class CJState:
    n: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != 4 ** self.n:
            raise DimensionMismatchError(f"Expected {4 ** self.n} amplitudes, got {amplitudes.shape[0]}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > UNITARY_TOL:
            raise NotUnitaryError(f"CJ state has norm {norm:.12f}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def amplitude(self, i: int, j: int) -> complex:
        return complex(self.amplitudes[i * 2 ** self.n + j])


Unitary = Union[DenseUnitary, StructuredJunta]
Operator = Union[DenseUnitary, StructuredJunta, np.ndarray]


# -----------------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------------
def qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2 ** n != dim:
        raise DimensionMismatchError(f"Dimension {dim} is not a power of two")
    return n


def check_subset(subset: QubitSubset, n: int) -> Tuple[int, ...]:
    qubits = tuple(sorted({int(q) for q in subset}))
    for q in qubits:
        if q < 1 or q > n:
            raise QubitIndexError(f"Qubit {q} outside 1..{n}")
    return qubits


def _check_dense_cap(n: int) -> None:
    if n > settings.dense_qubit_cap:
        raise SizeLimitError(
            f"Dense operations are capped at {settings.dense_qubit_cap} qubits (got {n})"
        )


def _index_to_codes(indices: np.ndarray, n: int) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    shifts = 2 * (n - 1 - np.arange(n))
    return ((indices[:, None] >> shifts[None, :]) & 3).astype(np.int8)


def _codes_to_index(codes: np.ndarray, n: int) -> np.ndarray:
    powers = 4 ** (n - 1 - np.arange(n, dtype=np.int64))
    return np.asarray(codes, dtype=np.int64).reshape(-1, n) @ powers


def as_matrix(op: Operator) -> np.ndarray:
    if isinstance(op, DenseUnitary):
        return op.entries
    if isinstance(op, StructuredJunta):
        return op.to_dense().entries
    matrix = np.asarray(op, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got shape {matrix.shape}")
    qubit_count(matrix.shape[0])
    return matrix


def _apply_per_qubit(tensor: np.ndarray, single: np.ndarray, n: int) -> np.ndarray:
    for q in range(n):
        tensor = np.moveaxis(np.tensordot(single, tensor, axes=([1], [q])), 0, q)
    return tensor


def _interleave_order(n: int) -> list:
    return [ax for q in range(n) for ax in (q, n + q)]


def embed(matrix: np.ndarray, support: Sequence[int], n: int) -> np.ndarray:
    """Place a len(support)-qubit operator on `support` (in that factor order), identity elsewhere."""
    _check_dense_cap(n)
    support = [int(q) for q in support]
    check_subset(support, n)
    k = len(support)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2 ** k, 2 ** k):
        raise DimensionMismatchError(f"Operator shape {matrix.shape} does not match {k} support qubits")
    rest = [q for q in range(1, n + 1) if q not in support]
    full = np.kron(matrix, np.eye(2 ** len(rest)))
    order = support + rest
    rows = [order.index(q) for q in range(1, n + 1)]
    tensor = full.reshape((2,) * (2 * n)).transpose(rows + [r + n for r in rows])
    return tensor.reshape(2 ** n, 2 ** n)


def pauli_matrix(x: Union[str, PauliString]) -> np.ndarray:
    """sigma_x = sigma_{x_1} (x) ... (x) sigma_{x_n}."""
    x = x if isinstance(x, PauliString) else PauliString(x)
    return reduce(np.kron, [PAULI_MATRICES[c] for c in x.codes()], np.eye(1, dtype=complex))


# -----------------------------------------------------------------------------
# Pauli spectrum
# -----------------------------------------------------------------------------
def decompose(op: Operator) -> PauliSpectrum:
    """
    Pauli coefficients A^(x) = <sigma_x, A> / N, via a per-qubit transform
    (O(n 4^n) rather than one trace per string). Juntas are decomposed on
    their core only.
    """
    if isinstance(op, StructuredJunta):
        return op.spectrum()
    matrix = as_matrix(op)
    n = qubit_count(matrix.shape[0])
    if n == 0:
        return PauliSpectrum.from_dense(0, matrix.reshape(1))
    tensor = matrix.reshape((2,) * (2 * n)).transpose(_interleave_order(n)).reshape((4,) * n)
    coefficients = _apply_per_qubit(tensor, _TO_PAULI, n).reshape(-1)
    return PauliSpectrum.from_dense(n, coefficients)


def reconstruct(spectrum: PauliSpectrum) -> np.ndarray:
    """A = sum_x A^(x) sigma_x."""
    n = spectrum.n
    dense = spectrum.to_dense()
    if n == 0:
        return dense.reshape(1, 1)
    tensor = _apply_per_qubit(dense.reshape((4,) * n), _FROM_PAULI, n)
    inverse = np.argsort(_interleave_order(n))
    return tensor.reshape((2,) * (2 * n)).transpose(inverse).reshape(2 ** n, 2 ** n)


def derivative(spectrum: PauliSpectrum, i: int) -> PauliSpectrum:
    """D_i: keep exactly the strings acting non-trivially on qubit i."""
    if i < 1 or i > spectrum.n:
        raise QubitIndexError(f"Qubit {i} outside 1..{spectrum.n}")
    return spectrum.select(spectrum.letters[:, i - 1] != 0)


def influence(spectrum: PauliSpectrum, subset: QubitSubset) -> float:
    """Inf_S = sum over strings whose support meets S of |A^(x)|^2."""
    mask = spectrum.touches(subset)
    return float(np.sum(np.abs(spectrum.values[mask]) ** 2))


# -----------------------------------------------------------------------------
# Partial trace
# -----------------------------------------------------------------------------
def partial_trace(op: Operator, subset: QubitSubset) -> np.ndarray:
    """Tr_S(U), returned as an operator on the remaining qubits in increasing order."""
    matrix = as_matrix(op)
    n = qubit_count(matrix.shape[0])
    traced = [q - 1 for q in check_subset(subset, n)]
    kept = [q for q in range(n) if q not in traced]
    tensor = matrix.reshape((2,) * (2 * n)).transpose(
        kept + traced + [n + q for q in kept] + [n + q for q in traced]
    )
    a, b = 2 ** len(kept), 2 ** len(traced)
    return np.einsum("ikjk->ij", tensor.reshape(a, b, a, b))


def influence_via_partial_trace(op: Operator, subset: QubitSubset) -> float:
    """Inf_S[U] = 1 - Tr((Tr_S U)^dagger (Tr_S U)) / 2^(n + |S|), valid for unitary U."""
    matrix = as_matrix(op)
    n = qubit_count(matrix.shape[0])
    qubits = check_subset(subset, n)
    reduced = partial_trace(matrix, qubits)
    return float(1.0 - np.vdot(reduced, reduced).real / 2 ** (n + len(qubits)))


# -----------------------------------------------------------------------------
# Distance and CJ states
# -----------------------------------------------------------------------------
def _common_frame(a: Operator, b: Operator) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(a, StructuredJunta) and isinstance(b, StructuredJunta):
        if a.n != b.n:
            raise DimensionMismatchError(f"Juntas on {a.n} and {b.n} qubits")
        union = sorted(set(a.support) | set(b.support))
        width = len(union)
        local_a = [union.index(q) + 1 for q in a.support]
        local_b = [union.index(q) + 1 for q in b.support]
        return embed(a.core.entries, local_a, width), embed(b.core.entries, local_b, width)
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError(f"Shapes {ma.shape} and {mb.shape} differ")
    return ma, mb


def cj_overlap(a: Operator, b: Operator) -> complex:
    """<v(A)|v(B)> = Tr(A^dagger B) / N."""
    ma, mb = _common_frame(a, b)
    return complex(np.vdot(ma, mb) / ma.shape[0])


def dist(a: Operator, b: Operator) -> float:
    """
    min_theta ||e^{i theta} A - B|| / sqrt(2N), in closed form
    sqrt(1 - |Tr(A^dagger B)| / N).
    """
    overlap = abs(cj_overlap(a, b))
    return float(np.sqrt(max(0.0, 1.0 - overlap)))


def cj_state(op: Unitary) -> CJState:
    matrix = as_matrix(op)
    n = qubit_count(matrix.shape[0])
    return CJState(n, matrix.reshape(-1) / np.sqrt(2 ** n))


# -----------------------------------------------------------------------------
# Instance generation
# -----------------------------------------------------------------------------
def haar_random_unitary(k: int, seed: SeedLike = None) -> DenseUnitary:
    """Haar unitary on k qubits: QR of a complex Ginibre matrix with the R-diagonal phases folded into Q."""
    if k < 1:
        raise InvalidParameterError(f"Haar sampling needs k >= 1 (got {k})")
    _check_dense_cap(k)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dim = 2 ** k
    ginibre = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diag = np.diag(r)
    return DenseUnitary(k, q * (diag / np.abs(diag))[None, :])


def encode_boolean(truth_table: Union[str, Sequence[int]]) -> DenseUnitary:
    """U_f = diag((-1)^f(x)); entry x uses qubit 1 as the most significant bit."""
    bits = truth_table_bits(truth_table)
    n = qubit_count(len(bits))
    return DenseUnitary(n, np.diag((-1.0) ** bits).astype(complex))


def truth_table_bits(truth_table: Union[str, Sequence[int]]) -> np.ndarray:
    if isinstance(truth_table, str):
        if set(truth_table) - {"0", "1"}:
            raise InvalidParameterError("Truth table must be a string over {0, 1}")
        bits = np.array([int(ch) for ch in truth_table], dtype=np.int64)
    else:
        bits = np.asarray(truth_table, dtype=np.int64).reshape(-1)
        if np.any((bits != 0) & (bits != 1)):
            raise InvalidParameterError("Truth table entries must be 0 or 1")
    length = len(bits)
    if length == 0 or length & (length - 1):
        raise InvalidParameterError(f"Truth table length {length} is not a power of two")
    return bits
