import json
from typing import Any, Dict, List, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, sessionmaker

from config import settings

DATABASE_URL = settings.database_url

engine = create_engine(
    DATABASE_URL,
    connect_args={"check_same_thread": False} if DATABASE_URL.startswith("sqlite") else {},
)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


class Base(DeclarativeBase):
    pass


def init_db(bind: Optional[Engine] = None) -> None:
    import models  # noqa: F401  registers the tables on Base

    Base.metadata.create_all(bind=bind or engine)


def record_report(report) -> int:
    """Store an ExperimentReport; returns the new run id."""
    from models import CommandDB, ExperimentRun

    init_db(SessionLocal.kw.get("bind"))
    db = SessionLocal()
    try:
        run = ExperimentRun(
            command=CommandDB(report.command),
            seed=report.parameters.get("seed"),
            schema_version=report.schema_version,
            decision=report.decision,
            parameters=json.dumps(report.parameters, sort_keys=True),
            summary=json.dumps(report.summary, sort_keys=True, default=str),
            simulated_u=report.ledger.simulated_u,
            simulated_u_dagger=report.ledger.simulated_u_dagger,
            modeled_quantum=report.ledger.modeled_quantum,
            wall_time=report.wall_time,
        )
        db.add(run)
        db.commit()
        db.refresh(run)
        return run.id
    finally:
        db.close()


def list_runs(limit: int = 20, command: Optional[str] = None) -> List[Dict[str, Any]]:
    from models import CommandDB, ExperimentRun

    init_db(SessionLocal.kw.get("bind"))
    db = SessionLocal()
    try:
        query = db.query(ExperimentRun)
        if command:
            query = query.filter(ExperimentRun.command == CommandDB(command))
        rows = query.order_by(ExperimentRun.id.desc()).limit(limit).all()
        return [
            {
                "id": r.id,
                "command": r.command.value,
                "seed": r.seed,
                "schema": r.schema_version,
                "decision": r.decision,
                "parameters": json.loads(r.parameters),
                "summary": json.loads(r.summary),
                "ledger": {
                    "simulated_u": r.simulated_u,
                    "simulated_u_dagger": r.simulated_u_dagger,
                    "modeled_quantum": r.modeled_quantum,
                },
                "created_at": r.created_at.isoformat() if r.created_at else None,
            }
            for r in rows
        ]
    finally:
        db.close()
