from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from config import MAX_COUNTEREXAMPLES, SCHEMA_VERSION
from oracle import QueryLedger

InstanceKind = Literal["junta", "boolean", "dense"]
CommandName = Literal["gen", "test", "learn", "verify", "bench"]

# complex numbers travel as [re, im]
ComplexPair = Tuple[float, float]


class InstanceFile(BaseModel):
    """
    On-disk description of a hidden unitary.

      - junta:   n, support, core (row-major, 4^|support| pairs)
      - boolean: n, truth_table over {0, 1} of length 2^n
      - dense:   n, entries (row-major, 4^n pairs)
    """
    n: int = Field(ge=0)
    kind: InstanceKind
    support: Optional[List[int]] = None
    core: Optional[List[ComplexPair]] = None
    truth_table: Optional[str] = None
    entries: Optional[List[ComplexPair]] = None


class TrialRecord(BaseModel):
    index: int
    # entropy words of the per-trial SeedSequence
    seed_words: List[int]
    outcome: str
    # learner: exact dist(hidden, learned); tester: tester-two estimate
    value: Optional[float] = None
    ledger: QueryLedger
    # per-stage decisions, learned support, error detail
    detail: Dict[str, Any] = {}


class InvariantResult(BaseModel):
    """Outcome of one invariant sweep, filled in case by case with `record`."""
    name: str
    passed: bool = True
    cases: int = 0
    failures: int = 0
    counterexamples: List[Dict[str, Any]] = []

    def record(self, ok: bool, **detail: Any) -> None:
        self.cases += 1
        if ok:
            return
        self.failures += 1
        self.passed = False
        if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
            self.counterexamples.append(detail)


class CalibrationReport(BaseModel):
    c_aa: float
    c_ggt: float
    c_t: float
    c_l: float
    amplification_table: Dict[str, Dict[str, float]]
    tomography_table: Dict[str, float]


class BenchRow(BaseModel):
    algorithm: Literal["tester", "learner"]
    k: int
    eps: float
    trials: int
    mean_simulated_u: float
    mean_simulated_u_dagger: float
    mean_modeled: float
    reference: float
    ratio: float
    within_factor: bool


class ExperimentReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: CommandName
    parameters: Dict[str, Any]
    decision: Optional[str] = None
    learned_instance: Optional[str] = None
    summary: Dict[str, Any] = {}
    trials: List[TrialRecord] = []
    ledger: QueryLedger = Field(default_factory=QueryLedger)
    wall_time: float = 0.0

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)
