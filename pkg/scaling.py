import math
from typing import Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel

from oracle import QueryLedger

Algorithm = Literal["tester", "learner"]

# Measured/reference ratios must stay within this factor of the fitted constant
SCALING_FACTOR = 3.0


class TrialSummary(BaseModel):
    """
    Mean ledger over a batch of trials.

    NOTE:
    - accept_fraction is None for batches that carry no yes/no decisions.
    """
    trials: int
    accept_fraction: Optional[float] = None
    mean_simulated_u: float
    mean_simulated_u_dagger: float
    mean_modeled: float


class ScalingFit(BaseModel):
    algorithm: Algorithm
    constant: float
    ratios: Dict[int, float]
    within_factor: Dict[int, bool]

    @property
    def all_within(self) -> bool:
        return all(self.within_factor.values())


def compute_accept_fraction(decisions: Sequence[str], accept: str = "yes") -> Optional[float]:
    """
    Fraction of trials that returned `accept`.
    Returns None for an empty batch.
    """
    if not decisions:
        return None
    return sum(1 for d in decisions if d == accept) / len(decisions)


def summarize_ledgers(ledgers: Sequence[QueryLedger], decisions: Optional[Sequence[str]] = None) -> TrialSummary:
    count = len(ledgers)
    if count == 0:
        return TrialSummary(trials=0, mean_simulated_u=0.0, mean_simulated_u_dagger=0.0, mean_modeled=0.0)
    return TrialSummary(
        trials=count,
        accept_fraction=compute_accept_fraction(decisions) if decisions is not None else None,
        mean_simulated_u=sum(l.simulated_u for l in ledgers) / count,
        mean_simulated_u_dagger=sum(l.simulated_u_dagger for l in ledgers) / count,
        mean_modeled=sum(l.modeled_quantum for l in ledgers) / count,
    )


# ---- Reference shapes ----


def tester_reference(k: int, eps: float) -> float:
    """
    sqrt(k L) * L / eps with L = log2(400k).

    L stands in for log k; it matches the tester's own stage count and stays
    positive at k = 1.
    """
    log_term = math.log2(400 * k)
    return math.sqrt(k * log_term) * log_term / eps


def learner_reference(k: int, eps: float) -> float:
    return 4 ** k / eps ** 2


REFERENCES = {
    "tester": tester_reference,
    "learner": learner_reference,
}


def fit_scaling(algorithm: Algorithm, measured: Dict[int, float], eps: float) -> Optional[ScalingFit]:
    """
    Fit C in measured(k) ~ C * reference(k, eps).

    Rules:
      - C is the geometric mean of the per-k ratios.
      - A point is within range when ratio / C lies in [1/3, 3].
      - Returns None when there are no points with a positive count.
    """
    reference = REFERENCES[algorithm]
    ratios = {k: value / reference(k, eps) for k, value in sorted(measured.items()) if value > 0}
    if not ratios:
        return None
    constant = math.exp(sum(math.log(r) for r in ratios.values()) / len(ratios))
    within = {k: 1 / SCALING_FACTOR <= r / constant <= SCALING_FACTOR for k, r in ratios.items()}
    return ScalingFit(algorithm=algorithm, constant=constant, ratios=ratios, within_factor=within)


def monotone_in_k(measured: Dict[int, float]) -> bool:
    values: List[float] = [measured[k] for k in sorted(measured)]
    return all(a <= b for a, b in zip(values, values[1:]))
