"""
Influence estimators, the gapped group testing stand-in and the two-tier
junta tester.

Amplitude amplification is not simulated gate by gate. Given the true
single-shot success probability p = Inf_S[U], a Grover sequence of m
iterations succeeds with probability sin^2((2m+1) arcsin sqrt(p)); the
schedule below draws m the way the exponential-search variant does and stops
at the first success or when the iteration budget runs out.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from config import DEFAULT_C_AA, DEFAULT_C_GGT
from core import check_subset
from errors import InvalidParameterError
from oracle import QueryLedger, UnitaryOracle

logger = logging.getLogger(__name__)

GgtResult = Literal["small", "large"]
StageDecision = Literal["accept", "reject"]

SCHEDULE_GROWTH = 6 / 5


class TesterParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: PositiveInt
    eps: float = Field(gt=0, le=1)
    stage_repetitions: PositiveInt = 3
    tester_two_repetitions: PositiveInt = 1100
    tester_two_threshold: float = 0.8
    c_aa: float = Field(default=DEFAULT_C_AA, gt=0)
    c_ggt: float = Field(default=DEFAULT_C_GGT, gt=0)

    @property
    def max_level(self) -> int:
        # floor(log2(200k)) without floating point
        return (200 * self.k).bit_length() - 1

    @property
    def levels(self) -> range:
        return range(self.max_level + 1)

    @property
    def log_term(self) -> float:
        return math.log2(400 * self.k)

    def delta_l(self, level: int) -> float:
        return self.eps ** 2 / (2 ** (level + 5) * self.log_term)

    def d_l(self, level: int) -> int:
        return 2 ** level

    @property
    def tester_two_k(self) -> int:
        # (1 - 1/k)^k only bounds the junta side for k >= 2
        return max(self.k, 2)

    @property
    def tester_two_delta(self) -> float:
        return self.eps ** 2 / (16 * self.tester_two_k)

    def estimator_cost(self, delta: float) -> int:
        return amplification_budget(delta, self.c_aa)


class TesterRun(BaseModel):
    decision: Literal["yes", "no"]
    stages: Dict[str, StageDecision]
    tester_two_estimate: float


# -----------------------------------------------------------------------------
# Influence estimators
# -----------------------------------------------------------------------------
def amplification_budget(delta: float, c_aa: float = DEFAULT_C_AA) -> int:
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta must lie in (0, 1] (got {delta})")
    return math.ceil(c_aa / math.sqrt(delta))


def amplified_success_probability(p: float, iterations: int) -> float:
    theta = math.asin(math.sqrt(min(max(p, 0.0), 1.0)))
    return math.sin((2 * iterations + 1) * theta) ** 2


def amplify(
    p: float,
    delta: float,
    rng: np.random.Generator,
    ledger: QueryLedger,
    c_aa: float = DEFAULT_C_AA,
    charge_modeled: bool = True,
) -> int:
    """
    Run the amplification schedule against a known success probability `p`.

    Each round of m Grover iterations issues 1 + m raw-estimator calls (m of
    them through U^dagger). The modeled budget ceil(c_aa / sqrt(delta)) is
    charged up front unless the caller accounts for it in bulk.
    """
    budget = amplification_budget(delta, c_aa)
    if charge_modeled:
        ledger.charge(modeled=budget)
    spent = 0
    bound = 1.0
    while spent < budget:
        m = min(int(rng.integers(0, math.ceil(bound))), budget - spent - 1)
        spent += 1 + m
        ledger.charge(u=1 + m, u_dagger=m)
        if p > 0 and rng.random() < amplified_success_probability(p, m):
            return 1
        bound *= SCHEDULE_GROWTH
    return 0


def raw_influence_estimator(oracle: UnitaryOracle, subset: Iterable[int]) -> int:
    """1 iff the Bell measurement on `subset` is not the all-identity outcome."""
    return 0 if oracle.bell_outcome_on(subset).all_identity else 1


def influence_estimator(
    oracle: UnitaryOracle,
    subset: Iterable[int],
    delta: float,
    c_aa: float = DEFAULT_C_AA,
    charge_modeled: bool = True,
) -> int:
    qubits = check_subset(subset, oracle.n)
    if not qubits:
        # Inf of the empty set is 0; nothing to measure
        return 0
    p = oracle.true_success_probability(qubits)
    return amplify(p, delta, oracle.rng, oracle.ledger, c_aa=c_aa, charge_modeled=charge_modeled)


# -----------------------------------------------------------------------------
# Gapped group testing
# -----------------------------------------------------------------------------
@dataclass
class GgtInstanceView:
    """Ground set 1..n and a subset query, with promise parameters k and d."""
    n: int
    query: Callable[[FrozenSet[int]], int]
    k: int
    d: int
    query_cost: int = 1
    repetitions: Optional[int] = None

    def ask(self, subset: Iterable[int]) -> int:
        return int(self.query(frozenset(check_subset(subset, self.n))))

    @property
    def majority_repetitions(self) -> int:
        if self.repetitions is not None:
            return self.repetitions
        return 2 * math.ceil(math.log2(100 * self.n * (self.k + 2))) + 1


def ggt_modeled_cost(view: GgtInstanceView, c_ggt: float = DEFAULT_C_GGT) -> int:
    return math.ceil(c_ggt * math.sqrt(1 + view.k / view.d)) * view.query_cost


def _majority(view: GgtInstanceView, subset: list) -> int:
    needed = view.majority_repetitions // 2 + 1
    yes = no = 0
    while yes < needed and no < needed:
        if view.ask(subset):
            yes += 1
        else:
            no += 1
    return int(yes >= needed)


def quantum_ggt(
    view: GgtInstanceView,
    ledger: Optional[QueryLedger] = None,
    c_ggt: float = DEFAULT_C_GGT,
) -> GgtResult:
    """
    Classical stand-in: binary-search the remaining ground set for a positive
    singleton until k + 1 elements are found ("large") or the remaining set
    answers 0 ("small"). Every query is a majority vote.

    A singleton that fails confirmation is cleared and left out of later
    searches, so sets that only fire jointly cannot stall the search.
    """
    if ledger is not None:
        ledger.charge(modeled=ggt_modeled_cost(view, c_ggt))
    found: set = set()
    cleared: set = set()
    while len(found) <= view.k:
        rest = [i for i in range(1, view.n + 1) if i not in found and i not in cleared]
        if not rest or not _majority(view, rest):
            logger.debug("GGT small, found=%s cleared=%s", sorted(found), sorted(cleared))
            return "small"
        candidates = rest
        while len(candidates) > 1:
            half = len(candidates) // 2
            candidates = candidates[:half] if _majority(view, candidates[:half]) else candidates[half:]
        if _majority(view, candidates):
            found.add(candidates[0])
        else:
            cleared.add(candidates[0])
    logger.debug("GGT large, found=%s", sorted(found))
    return "large"


# -----------------------------------------------------------------------------
# Testers
# -----------------------------------------------------------------------------
def tester_one(oracle: UnitaryOracle, params: TesterParams, level: int) -> StageDecision:
    if level not in params.levels:
        raise InvalidParameterError(f"Stage {level} outside 0..{params.max_level}")
    delta = params.delta_l(level)
    view = GgtInstanceView(
        n=oracle.n,
        query=lambda s: influence_estimator(oracle, s, delta, c_aa=params.c_aa, charge_modeled=False),
        k=params.k,
        d=params.d_l(level),
        query_cost=params.estimator_cost(delta),
    )
    return "accept" if quantum_ggt(view, oracle.ledger, params.c_ggt) == "small" else "reject"


def tester_two_estimate(oracle: UnitaryOracle, params: TesterParams) -> float:
    """Fraction of random subsets (each qubit kept w.p. 1/k) on which the estimator fires."""
    inclusion = 1.0 / params.tester_two_k
    delta = params.tester_two_delta
    hits = 0
    for _ in range(params.tester_two_repetitions):
        chosen = np.flatnonzero(oracle.rng.random(oracle.n) < inclusion) + 1
        hits += influence_estimator(oracle, chosen.tolist(), delta, c_aa=params.c_aa)
    return hits / params.tester_two_repetitions


def tester_two(oracle: UnitaryOracle, params: TesterParams) -> StageDecision:
    estimate = tester_two_estimate(oracle, params)
    return "accept" if estimate <= params.tester_two_threshold else "reject"


def junta_tester(oracle: UnitaryOracle, params: TesterParams) -> TesterRun:
    stages: Dict[str, StageDecision] = {}
    for level in params.levels:
        votes = [tester_one(oracle, params, level) for _ in range(params.stage_repetitions)]
        accepted = votes.count("accept") * 2 > len(votes)
        stages[f"tester_one_l{level}"] = "accept" if accepted else "reject"
    estimate = tester_two_estimate(oracle, params)
    stages["tester_two"] = "accept" if estimate <= params.tester_two_threshold else "reject"
    decision = "yes" if all(v == "accept" for v in stages.values()) else "no"
    logger.debug("junta tester k=%d eps=%.3f: %s (tester two estimate %.4f)", params.k, params.eps, decision, estimate)
    return TesterRun(decision=decision, stages=stages, tester_two_estimate=estimate)
