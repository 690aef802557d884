"""
Brute-force references and numeric checks of the identities the testers and
learner depend on, grouped into suites for the `verify` command.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from config import DEFAULT_C_GGT, DISTANCE_TOL, STRUCTURAL_TOL, UNITARY_TOL
from core import (
    DenseUnitary,
    Operator,
    StructuredJunta,
    as_matrix,
    check_subset,
    cj_state,
    decompose,
    dist,
    encode_boolean,
    haar_random_unitary,
    influence,
    influence_via_partial_trace,
    pauli_matrix,
    qubit_count,
    reconstruct,
    truth_table_bits,
)
from errors import DimensionMismatchError, SizeLimitError
from learner import measurement_tomography, required_copies
from oracle import QueryLedger
from schemas import CalibrationReport, InvariantResult
from tester import GgtInstanceView, amplify, quantum_ggt

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_QUBITS = 6


@dataclass(frozen=True)
class BooleanFunction:
    """Truth table indexed by x with x_1 as the most significant bit."""
    truth_table: str

    def __post_init__(self) -> None:
        truth_table_bits(self.truth_table)

    @property
    def n(self) -> int:
        return qubit_count(len(self.truth_table))

    def bits(self) -> np.ndarray:
        return truth_table_bits(self.truth_table)

    def unitary(self) -> DenseUnitary:
        return encode_boolean(self.truth_table)

    def complement(self) -> "BooleanFunction":
        return BooleanFunction("".join("1" if ch == "0" else "0" for ch in self.truth_table))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BooleanFunction":
        return cls("".join(str(int(b)) for b in bits))

    @classmethod
    def parity(cls, n: int, m: int) -> "BooleanFunction":
        """x_1 xor ... xor x_m on n bits."""
        if not 0 <= m <= n:
            raise SizeLimitError(f"Parity on {m} of {n} bits")
        return cls.from_bits([bin(x >> (n - m)).count("1") & 1 for x in range(2 ** n)])

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BooleanFunction":
        return cls.from_bits(rng.integers(0, 2, size=2 ** n))

    @classmethod
    def junta(cls, n: int, support: Sequence[int], table: Sequence[int]) -> "BooleanFunction":
        """g(x) = table[x_support], reading support bits in the given order."""
        bits = []
        for x in range(2 ** n):
            local = 0
            for q in support:
                local = (local << 1) | ((x >> (n - q)) & 1)
            bits.append(int(table[local]))
        return cls.from_bits(bits)


# -----------------------------------------------------------------------------
# Boolean distances
# -----------------------------------------------------------------------------
def boolean_distance(f: BooleanFunction, g: BooleanFunction) -> float:
    if f.n != g.n:
        raise DimensionMismatchError(f"Functions on {f.n} and {g.n} bits")
    return float(np.mean(f.bits() != g.bits()))


def distance_to_boolean_juntas(f: BooleanFunction, k: int) -> float:
    """Majority vote per restriction is the nearest junta on a fixed subset."""
    n = f.n
    if n > BRUTE_FORCE_MAX_QUBITS or k > 2:
        raise SizeLimitError(f"Brute force limited to n <= {BRUTE_FORCE_MAX_QUBITS}, k <= 2")
    if k >= n:
        return 0.0
    cube = f.bits().reshape((2,) * n) if n else f.bits()
    best = 1.0
    for subset in itertools.combinations(range(n), k):
        rest = [q for q in range(n) if q not in subset]
        grouped = np.transpose(cube, list(subset) + rest).reshape(2 ** k, -1)
        ones = grouped.sum(axis=1)
        errors = np.minimum(ones, grouped.shape[1] - ones).sum()
        best = min(best, errors / 2 ** n)
    return float(best)


def certified_far_distance(f: BooleanFunction, k: int) -> float:
    """U_f is at least this far from every quantum k-junta."""
    return math.sqrt(distance_to_boolean_juntas(f, k) / 2)


def boolean_juntas(n: int, k: int):
    for subset in itertools.combinations(range(1, n + 1), min(k, n)):
        for table in itertools.product((0, 1), repeat=2 ** len(subset)):
            yield BooleanFunction.junta(n, subset, table)


# -----------------------------------------------------------------------------
# Lemma checks
# -----------------------------------------------------------------------------
def check_wang_lemma(op: Operator, k: int, eps: float) -> bool:
    """Inf over the complement of every T with |T| <= k is at least eps^2 / 4."""
    spectrum = decompose(op)
    n = spectrum.n
    floor = eps ** 2 / 4 - STRUCTURAL_TOL
    for size in range(min(k, n) + 1):
        for kept in itertools.combinations(range(1, n + 1), size):
            outside = [q for q in range(1, n + 1) if q not in kept]
            if influence(spectrum, outside) < floor:
                return False
    return True


def check_encoding_distance(f: BooleanFunction, g: BooleanFunction) -> bool:
    differ = boolean_distance(f, g)
    expected = 2 * min(differ, 1 - differ)
    return abs(dist(f.unitary(), g.unitary()) ** 2 - expected) <= STRUCTURAL_TOL


def check_lb_no_case(f: BooleanFunction, k: int, eps: float) -> bool:
    if f.n > 4 or k > 2:
        raise SizeLimitError("Lower-bound check limited to n <= 4, k <= 2")
    if distance_to_boolean_juntas(f, k) < eps:
        # precondition fails, nothing to assert
        return True
    uf = f.unitary()
    nearest = min(dist(uf, g.unitary()) for g in boolean_juntas(f.n, k))
    return nearest >= math.sqrt(2 * eps) - STRUCTURAL_TOL


def diagonal_distance(a: Operator, b: Operator) -> float:
    """Phase-minimized distance restricted to the diagonal entries."""
    da, db = np.diag(as_matrix(a)), np.diag(as_matrix(b))
    if da.shape != db.shape:
        raise DimensionMismatchError(f"Shapes {da.shape} and {db.shape} differ")
    total = np.sum(np.abs(da) ** 2) + np.sum(np.abs(db) ** 2) - 2 * abs(np.vdot(da, db))
    return float(math.sqrt(max(0.0, total) / (2 * len(da))))


def nearest_boolean_core(core: DenseUnitary) -> Tuple[int, ...]:
    """Table h on the core's qubits minimizing dist(core, U_h)."""
    best, best_table = math.inf, None
    for table in itertools.product((0, 1), repeat=core.dim):
        d = dist(core, encode_boolean(list(table)))
        if d < best - 1e-15:
            best, best_table = d, table
    return best_table


def check_structural_lemma(v: StructuredJunta, f: BooleanFunction) -> bool:
    if len(v.support) > 2:
        raise SizeLimitError("Structural lemma brute force limited to |support| <= 2")
    if v.n != f.n:
        raise DimensionMismatchError(f"Junta on {v.n} qubits, function on {f.n} bits")
    g = BooleanFunction.junta(v.n, v.support, nearest_boolean_core(v.core))
    dense = v.to_dense()
    full_ok = dist(dense, g.unitary()) <= dist(dense, f.unitary()) + STRUCTURAL_TOL
    diag_ok = diagonal_distance(dense, g.unitary()) <= diagonal_distance(dense, f.unitary()) + STRUCTURAL_TOL
    return full_ok and diag_ok


# -----------------------------------------------------------------------------
# Independent references
# -----------------------------------------------------------------------------
def _check_brute_force_size(n: int) -> None:
    if n > BRUTE_FORCE_MAX_QUBITS:
        raise SizeLimitError(f"Brute-force references limited to n <= {BRUTE_FORCE_MAX_QUBITS} (got {n})")


def exact_influence(op: Operator, subset: Sequence[int]) -> float:
    """Influence from one trace per Pauli string."""
    matrix = as_matrix(op)
    n = qubit_count(matrix.shape[0])
    _check_brute_force_size(n)
    qubits = set(check_subset(subset, n))
    total = 0.0
    for codes in itertools.product(range(4), repeat=n):
        if not any(codes[q - 1] for q in qubits):
            continue
        coefficient = np.sum(pauli_matrix("".join("IXYZ"[c] for c in codes)).T * matrix) / 2 ** n
        total += abs(coefficient) ** 2
    return float(total)


def dist_grid(a: Operator, b: Operator, points: int = 100_000) -> float:
    """Grid over theta, then a bounded scalar refine of ||e^{i theta} A - B||."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError(f"Shapes {ma.shape} and {mb.shape} differ")
    _check_brute_force_size(qubit_count(ma.shape[0]))
    norm = 2 * ma.shape[0]

    def objective(theta: float) -> float:
        return float(np.sum(np.abs(np.exp(1j * theta) * ma - mb) ** 2))

    cross = np.vdot(mb, ma)
    base = np.vdot(ma, ma).real + np.vdot(mb, mb).real
    thetas = np.linspace(0, 2 * np.pi, points, endpoint=False)
    values = base - 2 * np.real(np.exp(1j * thetas) * cross)
    start = thetas[int(np.argmin(values))]
    step = 2 * np.pi / points
    refined = minimize_scalar(
        objective, bounds=(start - step, start + step), method="bounded", options={"xatol": 1e-12}
    )
    best = min(refined.fun, objective(start))
    return float(math.sqrt(max(0.0, best) / norm))


# -----------------------------------------------------------------------------
# Suites
# -----------------------------------------------------------------------------
def _logged(check: InvariantResult) -> InvariantResult:
    if not check.passed:
        logger.warning("invariant %s failed on %d of %d cases", check.name, check.failures, check.cases)
    return check


def _random_subset(n: int, rng: np.random.Generator) -> List[int]:
    size = int(rng.integers(1, n + 1))
    return sorted(int(q) + 1 for q in rng.choice(n, size=size, replace=False))


def sweep_spectrum(rng: np.random.Generator, cases: int = 100) -> InvariantResult:
    check = InvariantResult(name="parseval_and_reconstruction")
    for case in range(cases):
        n = int(rng.integers(1, 5))
        u = haar_random_unitary(n, rng)
        spectrum = decompose(u)
        parseval = abs(spectrum.total_weight() - 1)
        rebuilt = np.max(np.abs(reconstruct(spectrum) - u.entries))
        check.record(parseval <= UNITARY_TOL and rebuilt <= UNITARY_TOL, case=case, n=n,
                     parseval_error=float(parseval), reconstruction_error=float(rebuilt))
    return _logged(check)


def sweep_influence_equivalence(rng: np.random.Generator, cases: int = 100) -> InvariantResult:
    check = InvariantResult(name="influence_fourier_vs_partial_trace")
    for case in range(cases):
        n = int(rng.integers(1, 5))
        u = haar_random_unitary(n, rng)
        subset = _random_subset(n, rng)
        fourier = influence(decompose(u), subset)
        traced = influence_via_partial_trace(u, subset)
        brute = exact_influence(u, subset)
        ok = abs(fourier - traced) <= UNITARY_TOL and abs(fourier - brute) <= UNITARY_TOL
        check.record(ok, case=case, n=n, subset=subset, fourier=fourier, partial_trace=traced, brute_force=brute)
    return _logged(check)


def sweep_influence_laws(rng: np.random.Generator, cases: int = 500) -> InvariantResult:
    check = InvariantResult(name="influence_monotone_subadditive")
    slack = 1e-12
    for case in range(cases):
        n = int(rng.integers(2, 5))
        spectrum = decompose(haar_random_unitary(n, rng))
        s = set(_random_subset(n, rng))
        t = set(_random_subset(n, rng))
        inf_s, inf_t = influence(spectrum, s), influence(spectrum, t)
        inf_union = influence(spectrum, s | t)
        monotone = inf_s <= inf_union + slack and inf_t <= inf_union + slack
        subadditive = inf_union <= inf_s + inf_t + slack
        check.record(monotone and subadditive, case=case, n=n, s=sorted(s), t=sorted(t))
    return _logged(check)


def sweep_distance(rng: np.random.Generator, cases: int = 200) -> InvariantResult:
    check = InvariantResult(name="distance_closed_form")
    for case in range(cases):
        n = int(rng.integers(1, 5))
        a, b = haar_random_unitary(n, rng), haar_random_unitary(n, rng)
        closed = dist(a, b)
        grid = dist_grid(a, b)
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        phased = dist(a.entries * phase, b)
        c = haar_random_unitary(1, rng).entries
        tensored = dist(np.kron(a.entries, c), np.kron(b.entries, c))
        fidelity = 1 - abs(np.vdot(cj_state(a).amplitudes, cj_state(b).amplitudes))
        ok = (
            abs(closed - grid) <= DISTANCE_TOL
            and abs(closed - phased) <= UNITARY_TOL
            and abs(closed - tensored) <= UNITARY_TOL
            and abs(closed - dist(b, a)) <= UNITARY_TOL
            and abs(closed ** 2 - fidelity) <= UNITARY_TOL
        )
        check.record(ok, case=case, n=n, closed_form=closed, grid=grid)
    return _logged(check)


def sweep_plancherel_and_triangle(rng: np.random.Generator, cases: int = 200) -> InvariantResult:
    """(1/N) Tr(A^dagger B) against the Pauli-side inner product, and dist on random triples."""
    check = InvariantResult(name="plancherel_and_triangle")
    for case in range(cases):
        n = int(rng.integers(1, 5))
        a = haar_random_unitary(n, rng).entries
        # B need not be unitary
        b = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(size=(2 ** n, 2 ** n))
        direct = np.vdot(a, b) / 2 ** n
        paulis = np.vdot(decompose(a).to_dense(), decompose(b).to_dense())
        plancherel = abs(direct - paulis)
        u, v, w = (haar_random_unitary(n, rng) for _ in range(3))
        slack = dist(u, v) + dist(v, w) - dist(u, w)
        check.record(plancherel <= UNITARY_TOL and slack >= -UNITARY_TOL, case=case, n=n,
                     plancherel_error=float(plancherel), triangle_slack=float(slack))
    return _logged(check)


def sweep_encoding_identity(max_n: int = 3) -> InvariantResult:
    check = InvariantResult(name="encoding_distance_identity")
    for n in range(1, max_n + 1):
        functions = [BooleanFunction.from_bits(bits) for bits in itertools.product((0, 1), repeat=2 ** n)]
        unitaries = [f.unitary() for f in functions]
        for i, f in enumerate(functions):
            for j, g in enumerate(functions):
                differ = boolean_distance(f, g)
                lhs = dist(unitaries[i], unitaries[j]) ** 2
                check.record(abs(lhs - 2 * min(differ, 1 - differ)) <= STRUCTURAL_TOL,
                             f=f.truth_table, g=g.truth_table)
    return _logged(check)


def sweep_lb_no_case() -> InvariantResult:
    check = InvariantResult(name="lb_no_case_parity")
    for n in (2, 3):
        f = BooleanFunction.parity(n, n)
        check.record(check_lb_no_case(f, 1, 0.5), f=f.truth_table, k=1, eps=0.5)
    return _logged(check)


def sweep_structural_lemma(rng: np.random.Generator, cases: int = 50, n: int = 3) -> InvariantResult:
    check = InvariantResult(name="structural_lemma")
    for case in range(cases):
        support = (int(rng.integers(1, n + 1)),)
        v = StructuredJunta(n, support, haar_random_unitary(1, rng))
        f = BooleanFunction.random(n, rng)
        check.record(check_structural_lemma(v, f), case=case, support=list(support), f=f.truth_table)
    return _logged(check)


def sweep_wang_lemma(max_n: int = 3, k: int = 1) -> InvariantResult:
    check = InvariantResult(name="wang_lemma_certified_far")
    for n in range(1, max_n + 1):
        for bits in itertools.product((0, 1), repeat=2 ** n):
            f = BooleanFunction.from_bits(bits)
            eps = certified_far_distance(f, k)
            if eps <= 0:
                continue
            check.record(check_wang_lemma(f.unitary(), k, eps), f=f.truth_table, eps=eps)
    return _logged(check)


# -----------------------------------------------------------------------------
# Calibration
# -----------------------------------------------------------------------------
def calibrate_amplification(
    rng: np.random.Generator,
    grid: Sequence[float] = (2, 4, 6, 8, 10, 12, 16),
    deltas: Sequence[float] = (0.5, 0.1, 0.01),
    runs: int = 1000,
    target: float = 0.9,
) -> Tuple[float, Dict[str, Dict[str, float]]]:
    """Smallest grid c_AA whose schedule fires with frequency >= target at p = delta."""
    table: Dict[str, Dict[str, float]] = {}
    chosen: Optional[float] = None
    ledger = QueryLedger()
    for c_aa in grid:
        row = {str(delta): float(np.mean([amplify(delta, delta, rng, ledger, c_aa=c_aa) for _ in range(runs)]))
               for delta in deltas}
        table[str(c_aa)] = row
        if chosen is None and all(freq >= target for freq in row.values()):
            chosen = float(c_aa)
    return (chosen if chosen is not None else float(grid[-1])), table


def calibrate_ggt(rng: np.random.Generator, ground_sizes: Sequence[int] = (6, 8, 10), instances: int = 20) -> float:
    """Mean stand-in queries per sqrt(1 + k/d) on exact Intersects oracles."""
    ratios = []
    for n in ground_sizes:
        for k in (1, 2, 3):
            for d in (1, 2, 3, 4):
                for _ in range(instances):
                    size = k if rng.random() < 0.5 else min(n, k + d)
                    hidden = set(int(q) + 1 for q in rng.choice(n, size=size, replace=False))
                    asked = [0]

                    def intersects(s, hidden=hidden, asked=asked):
                        asked[0] += 1
                        return int(bool(s & hidden))

                    quantum_ggt(GgtInstanceView(n=n, query=intersects, k=k, d=d, repetitions=1))
                    ratios.append(asked[0] / math.sqrt(1 + k / d))
    return float(np.mean(ratios)) if ratios else DEFAULT_C_GGT


def calibrate_tomography(
    rng: np.random.Generator,
    grid: Sequence[float] = (1, 2, 4, 8),
    runs: int = 100,
    eps_prime: float = 0.01,
    target: float = 0.95,
) -> Tuple[float, Dict[str, float]]:
    """Smallest grid c_T reaching fidelity >= 1 - eps' in >= target of runs (k = 1, Hadamard)."""
    hadamard = DenseUnitary(1, np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))
    psi = cj_state(hadamard).amplitudes
    table: Dict[str, float] = {}
    chosen: Optional[float] = None
    for c_t in grid:
        copies = required_copies(1, eps_prime, c_t)
        hits = 0
        for _ in range(runs):
            estimate = measurement_tomography(psi, copies, rng)
            hits += abs(np.vdot(psi, estimate)) ** 2 >= 1 - eps_prime
        table[str(c_t)] = hits / runs
        if chosen is None and hits / runs >= target:
            chosen = float(c_t)
    return (chosen if chosen is not None else float(grid[-1])), table


def run_calibration(rng: np.random.Generator) -> CalibrationReport:
    c_aa, amplification_table = calibrate_amplification(rng)
    c_ggt = calibrate_ggt(rng)
    c_t, tomography_table = calibrate_tomography(rng)
    return CalibrationReport(
        c_aa=c_aa,
        c_ggt=c_ggt,
        c_t=c_t,
        c_l=4 * c_t,
        amplification_table=amplification_table,
        tomography_table=tomography_table,
    )


SUITES: Dict[str, Callable[[np.random.Generator], List[InvariantResult]]] = {
    "core": lambda rng: [
        sweep_spectrum(rng),
        sweep_influence_equivalence(rng),
        sweep_influence_laws(rng),
        sweep_distance(rng),
        sweep_plancherel_and_triangle(rng),
    ],
    "lower-bound": lambda rng: [
        sweep_encoding_identity(),
        sweep_lb_no_case(),
        sweep_structural_lemma(rng),
        sweep_wang_lemma(),
    ],
}


def run_suite(name: str, rng: np.random.Generator) -> List[InvariantResult]:
    results = SUITES[name](rng)
    logger.info("suite %s: %d/%d invariants passed", name, sum(r.passed for r in results), len(results))
    return results
