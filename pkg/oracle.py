"""
Black-box access to a hidden unitary.

All measurements on the CJ state |v(U)> are simulated by drawing a full Pauli
string x with probability |U^(x)|^2 and then marginalizing or conditioning on
it. The Bell-basis statistics of |v(U)> are exactly that distribution, so the
simulation is faithful. The spectrum is computed once per oracle and is not
charged to the ledger.
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Optional

import numpy as np
from pydantic import BaseModel, NonNegativeInt

from config import UNITARY_TOL
from core import (
    PauliSpectrum,
    PauliString,
    SeedLike,
    Unitary,
    check_subset,
    decompose,
    influence,
    reconstruct,
)
from errors import InvalidParameterError, NotUnitaryError

logger = logging.getLogger(__name__)


class QueryLedger(BaseModel):
    """Simulated oracle invocations next to the modeled quantum query budget."""
    simulated_u: NonNegativeInt = 0
    simulated_u_dagger: NonNegativeInt = 0
    modeled_quantum: NonNegativeInt = 0

    def charge(self, u: int = 0, u_dagger: int = 0, modeled: int = 0) -> None:
        if u < 0 or u_dagger < 0 or modeled < 0:
            raise InvalidParameterError("Ledger charges must be non-negative")
        self.simulated_u += int(u)
        self.simulated_u_dagger += int(u_dagger)
        self.modeled_quantum += int(modeled)

    def __add__(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(
            simulated_u=self.simulated_u + other.simulated_u,
            simulated_u_dagger=self.simulated_u_dagger + other.simulated_u_dagger,
            modeled_quantum=self.modeled_quantum + other.modeled_quantum,
        )

    @classmethod
    def total(cls, ledgers: Iterable["QueryLedger"]) -> "QueryLedger":
        out = cls()
        for ledger in ledgers:
            out = out + ledger
        return out


@dataclass(frozen=True)
class BellOutcome:
    all_identity: bool
    letters: Optional[PauliString] = None


@dataclass(frozen=True)
class PostMeasurementState:
    """
    State of the 2k retained qubits after the discarded register measured as
    |v(I)>. `coefficients` is a spectrum on k qubits: the retained qubits in
    increasing order, then identity padding.
    """
    k: int
    coefficients: PauliSpectrum
    alpha: float

    def __post_init__(self) -> None:
        if self.coefficients.n != self.k:
            raise InvalidParameterError(
                f"Coefficients act on {self.coefficients.n} qubits, expected {self.k}"
            )
        total = self.coefficients.total_weight()
        if abs(total - 1.0) > UNITARY_TOL:
            raise NotUnitaryError(f"Post-measurement coefficients have total weight {total:.12f}")

    def operator(self) -> np.ndarray:
        """The (generally non-unitary) K x K operator V whose CJ state this is."""
        return reconstruct(self.coefficients)

    def statevector(self) -> np.ndarray:
        v = self.operator()
        return v.reshape(-1) / np.sqrt(v.shape[0])


class UnitaryOracle:
    """
    One handle per trial. Algorithms only call pauli_sample(s),
    bell_outcome_on and conditional_post_state; true_success_probability is
    bookkeeping for amplitude amplification and is free.
    """

    def __init__(self, hidden: Unitary, seed: SeedLike = None, ledger: Optional[QueryLedger] = None):
        self._hidden = hidden
        self._spectrum = decompose(hidden)
        weights = self._spectrum.weights()
        total = weights.sum()
        if abs(total - 1.0) > 1e-6:
            raise NotUnitaryError(f"Pauli weights of the hidden unitary sum to {total:.9f}")
        self._cdf = np.cumsum(weights / total)
        self._cdf[-1] = 1.0
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self.ledger = ledger if ledger is not None else QueryLedger()
        self._influence_cache: Dict[FrozenSet[int], float] = {}
        self._post_states: Dict[tuple, Optional[PostMeasurementState]] = {}

    @property
    def n(self) -> int:
        return self._spectrum.n

    def _draw_rows(self, count: int) -> np.ndarray:
        idx = np.searchsorted(self._cdf, self.rng.random(count), side="right")
        return self._spectrum.letters[np.minimum(idx, len(self._cdf) - 1)]

    def pauli_sample(self) -> PauliString:
        self.ledger.charge(u=1, modeled=1)
        return PauliString.from_codes(self._draw_rows(1)[0])

    def pauli_samples(self, count: int) -> np.ndarray:
        """`count` independent samples as a (count, n) array of letter codes."""
        if count < 0:
            raise InvalidParameterError(f"Sample count must be non-negative (got {count})")
        self.ledger.charge(u=count, modeled=count)
        return self._draw_rows(count)

    def bell_outcome_on(self, subset: Iterable[int]) -> BellOutcome:
        qubits = check_subset(subset, self.n)
        if not qubits:
            raise InvalidParameterError("Bell measurement needs a nonempty qubit subset")
        self.ledger.charge(u=1, modeled=1)
        marginal = self._draw_rows(1)[0][[q - 1 for q in qubits]]
        if not marginal.any():
            return BellOutcome(all_identity=True)
        return BellOutcome(all_identity=False, letters=PauliString.from_codes(marginal))

    def conditional_post_state(self, subset: Iterable[int], k: int) -> Optional[PostMeasurementState]:
        """
        One preparation attempt. Returns None when the measurement on the
        complement of `subset` is not the all-identity outcome.
        """
        qubits = check_subset(subset, self.n)
        if len(qubits) > k:
            raise InvalidParameterError(f"Retained set of size {len(qubits)} exceeds k={k}")
        self.ledger.charge(u=1, modeled=1)
        row = self._draw_rows(1)[0]
        outside = np.ones(self.n, dtype=bool)
        outside[[q - 1 for q in qubits]] = False
        if row[outside].any():
            return None
        return self._post_state(qubits, k)

    def _post_state(self, qubits: tuple, k: int) -> Optional[PostMeasurementState]:
        key = (qubits, k)
        if key not in self._post_states:
            spectrum = self._spectrum
            outside = np.ones(self.n, dtype=bool)
            outside[[q - 1 for q in qubits]] = False
            inside = ~np.any(spectrum.letters[:, outside] != 0, axis=1)
            mass = float(np.sum(np.abs(spectrum.values[inside]) ** 2))
            if mass <= 0.0:
                self._post_states[key] = None
            else:
                letters = np.zeros((int(inside.sum()), k), dtype=np.int8)
                letters[:, : len(qubits)] = spectrum.letters[inside][:, [q - 1 for q in qubits]]
                alpha = 1.0 / np.sqrt(mass)
                self._post_states[key] = PostMeasurementState(
                    k, PauliSpectrum(k, letters, spectrum.values[inside] * alpha), alpha
                )
        return self._post_states[key]

    def true_success_probability(self, subset: Iterable[int]) -> float:
        key = frozenset(check_subset(subset, self.n))
        if key not in self._influence_cache:
            self._influence_cache[key] = influence(self._spectrum, key)
        return self._influence_cache[key]
