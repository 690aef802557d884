"""
Junta learner: Pauli-sample the relevant qubits, prepare copies of the
conditional post-measurement state, run tomography on them and read the core
unitary off the estimated CJ state.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import FrozenSet, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt
from scipy.linalg import polar

from config import DEFAULT_C_T
from core import (
    DenseUnitary,
    PauliSpectrum,
    StructuredJunta,
    Unitary,
    check_subset,
    dist,
    embed,
    qubit_count,
    reconstruct,
)
from errors import (
    DimensionMismatchError,
    InsufficientCopiesError,
    InvalidParameterError,
    NotUnitaryError,
    PromiseViolationError,
)
from oracle import PostMeasurementState, UnitaryOracle

logger = logging.getLogger(__name__)

Backend = Literal["exact", "measurement"]

MEASUREMENT_MAX_K = 2

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S_DAGGER = np.diag([1, -1j])
# Rotations taking each Pauli eigenbasis to the computational basis, +1 -> |0>
_BASIS_ROTATIONS = {
    1: _HADAMARD,
    2: _HADAMARD @ _S_DAGGER,
    3: np.eye(2, dtype=complex),
}


class LearnerParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: PositiveInt
    eps: float = Field(gt=0, le=1)
    c_t: float = Field(default=DEFAULT_C_T, gt=0)
    backend: Backend = "exact"

    @property
    def gamma(self) -> float:
        return self.eps ** 2 / (4 * self.k)

    @property
    def tomography_error(self) -> float:
        return self.eps ** 2 / 4

    @property
    def c_l(self) -> float:
        return 4 * self.c_t

    @property
    def copies(self) -> int:
        return required_copies(self.k, self.tomography_error, self.c_t)

    @property
    def attempts(self) -> int:
        return 10 * self.copies

    @property
    def sample_count(self) -> int:
        return sample_count(self.gamma, self.k)


@dataclass(frozen=True)
class LearnedJunta:
    support: Tuple[int, ...]
    core: DenseUnitary
    sampled_support: FrozenSet[int] = frozenset()

    def as_junta(self, n: int) -> StructuredJunta:
        return StructuredJunta(n, self.support, self.core)


def required_copies(k: int, eps_prime: float, c_t: float = DEFAULT_C_T) -> int:
    return math.ceil(c_t * 4 ** k / eps_prime)


def sample_count(gamma: float, k: int) -> int:
    if not 0 < gamma <= 1:
        raise InvalidParameterError(f"gamma must lie in (0, 1] (got {gamma})")
    return math.ceil(math.log(100 * k) / gamma)


# -----------------------------------------------------------------------------
# Steps
# -----------------------------------------------------------------------------
def pauli_sample_relevant(oracle: UnitaryOracle, gamma: float, k: int) -> FrozenSet[int]:
    """Union of supports of ceil(ln(100k) / gamma) Pauli samples."""
    rows = oracle.pauli_samples(sample_count(gamma, k))
    return frozenset(int(q) + 1 for q in np.flatnonzero(np.any(rows != 0, axis=0)))


def prepare_copies(
    oracle: UnitaryOracle,
    subset: Sequence[int],
    k: int,
    attempts: int,
    needed: Optional[int] = None,
) -> List[PostMeasurementState]:
    copies = []
    for _ in range(attempts):
        state = oracle.conditional_post_state(subset, k)
        if state is not None:
            copies.append(state)
    logger.debug("prepared %d/%d copies on %s", len(copies), attempts, sorted(subset))
    if needed is not None and len(copies) < needed:
        raise InsufficientCopiesError(needed, len(copies))
    return copies


def tomography(
    copies: Sequence[PostMeasurementState],
    eps_prime: float,
    backend: Backend = "exact",
    rng: Optional[np.random.Generator] = None,
    c_t: float = DEFAULT_C_T,
) -> np.ndarray:
    """Estimate the common pure state of `copies` to fidelity 1 - eps_prime."""
    if not 0 < eps_prime < 1:
        raise InvalidParameterError(f"Tomography error must lie in (0, 1) (got {eps_prime})")
    if not copies:
        raise InsufficientCopiesError(1, 0)
    k = copies[0].k
    needed = required_copies(k, eps_prime, c_t)
    if len(copies) < needed:
        raise InsufficientCopiesError(needed, len(copies))
    psi = copies[0].statevector()
    if backend == "exact":
        return psi.copy()
    if backend == "measurement":
        if k > MEASUREMENT_MAX_K:
            raise InvalidParameterError(
                f"Measurement tomography is limited to k <= {MEASUREMENT_MAX_K} (got {k})"
            )
        rng = rng if rng is not None else np.random.default_rng()
        return measurement_tomography(psi, needed, rng)
    raise InvalidParameterError(f"Unknown tomography backend {backend!r}")


def measurement_tomography(psi: np.ndarray, copies: int, rng: np.random.Generator) -> np.ndarray:
    """
    Split the copies evenly over all 3^q local Pauli bases, estimate every
    Pauli expectation from the bases that diagonalize it, rebuild rho and
    return its top eigenvector.
    """
    q = qubit_count(len(psi))
    bases = list(itertools.product((1, 2, 3), repeat=q))
    shots = max(1, copies // len(bases))
    outcomes = np.arange(2 ** q)
    signs = 1 - 2 * ((outcomes[:, None] >> (q - 1 - np.arange(q))[None, :]) & 1)
    masks = np.array(list(itertools.product((False, True), repeat=q)))
    powers = 4 ** (q - 1 - np.arange(q))

    sums = np.zeros(4 ** q)
    counts = np.zeros(4 ** q)
    for basis in bases:
        rotation = reduce(np.kron, [_BASIS_ROTATIONS[b] for b in basis])
        probs = np.abs(rotation @ psi) ** 2
        hist = rng.multinomial(shots, probs / probs.sum())
        for mask in masks:
            parity = np.prod(np.where(mask[None, :], signs, 1), axis=1)
            index = int(np.dot(np.where(mask, basis, 0), powers))
            sums[index] += np.dot(hist, parity) / shots
            counts[index] += 1
    expectations = sums / np.maximum(counts, 1)
    expectations[0] = 1.0
    rho = reconstruct(PauliSpectrum.from_dense(q, expectations / 2 ** q))
    values, vectors = np.linalg.eigh(rho)
    return vectors[:, int(np.argmax(values))]


def state_to_unitary(psi: np.ndarray) -> DenseUnitary:
    """W[i, j] = sqrt(K) * psi[i K + j], projected to the nearest unitary."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    dim = int(round(math.sqrt(len(psi))))
    if dim * dim != len(psi):
        raise DimensionMismatchError(f"State of length {len(psi)} is not on 2k qubits")
    k = qubit_count(dim)
    matrix = psi.reshape(dim, dim) * math.sqrt(dim)
    if np.allclose(matrix, 0):
        raise NotUnitaryError("Cannot project an all-zero matrix to a unitary")
    unitary, _ = polar(matrix)
    return DenseUnitary(k, unitary)


def pad_support(retained: Sequence[int], k: int, n: int) -> Tuple[int, ...]:
    if k > n:
        raise InvalidParameterError(f"k={k} exceeds the qubit count n={n}")
    support = sorted(retained)
    filler = (q for q in range(1, n + 1) if q not in retained)
    while len(support) < k:
        support.append(next(filler))
    return tuple(support)


def junta_learner(oracle: UnitaryOracle, params: LearnerParams) -> LearnedJunta:
    sampled = pauli_sample_relevant(oracle, params.gamma, params.k)
    if len(sampled) > params.k:
        raise PromiseViolationError(len(sampled), params.k)
    retained = sorted(sampled)
    copies = prepare_copies(oracle, retained, params.k, params.attempts, needed=params.copies)
    psi_hat = tomography(copies, params.tomography_error, params.backend, oracle.rng, params.c_t)
    core = state_to_unitary(psi_hat)
    support = pad_support(retained, params.k, oracle.n)
    logger.debug("learned support %s (sampled %s) from %d copies", support, retained, len(copies))
    return LearnedJunta(support=support, core=core, sampled_support=sampled)


def post_state_distance(hidden: Unitary, state: PostMeasurementState, support: Sequence[int]) -> float:
    """dist(hidden, V (x) I) for the operator V encoded by `state`, placed on `support`."""
    support = list(support)
    operator = state.operator()
    if isinstance(hidden, StructuredJunta):
        union = sorted(set(hidden.support) | set(support))
        check_subset(union, hidden.n)
        width = len(union)
        a = embed(hidden.core.entries, [union.index(q) + 1 for q in hidden.support], width)
        b = embed(operator, [union.index(q) + 1 for q in support], width)
        return dist(a, b)
    return dist(hidden.entries, embed(operator, support, hidden.n))
