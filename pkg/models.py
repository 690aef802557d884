from datetime import datetime, timezone
from enum import Enum

from sqlalchemy import Column, DateTime, Enum as SAEnum, Float, Integer, String, Text

from database import Base


class CommandDB(str, Enum):
    Gen = "gen"
    Test = "test"
    Learn = "learn"
    Verify = "verify"
    Bench = "bench"


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(SAEnum(CommandDB), nullable=False)
    seed = Column(Integer, nullable=True)
    schema_version = Column(Integer, nullable=False)

    # yes/no, pass/fail, or None for bench
    decision = Column(String, nullable=True)

    # JSON text, as emitted in the report
    parameters = Column(Text, nullable=False)
    summary = Column(Text, nullable=False)

    simulated_u = Column(Integer, default=0)
    simulated_u_dagger = Column(Integer, default=0)
    modeled_quantum = Column(Integer, default=0)
    wall_time = Column(Float, nullable=True)

    created_at = Column(DateTime, default=lambda: datetime.now(timezone.utc))
