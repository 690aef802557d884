import csv
import functools
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from pydantic import ValidationError

from config import DEFAULT_C_AA, DEFAULT_C_GGT, DEFAULT_C_T, SCHEMA_VERSION, resolve_seed, settings
from core import Unitary, dist
from errors import InsufficientCopiesError, InvalidParameterError, PromiseViolationError, QJuntaError
from instances import (
    instance_from_truth_table,
    instance_from_unitary,
    load_instance,
    random_dense,
    random_junta,
    save_instance,
    unitary_from_instance,
)
from learner import LearnedJunta, LearnerParams, junta_learner
from oracle import QueryLedger, UnitaryOracle
from scaling import REFERENCES, fit_scaling, monotone_in_k, summarize_ledgers
from schemas import BenchRow, ExperimentReport, TrialRecord
from tester import TesterParams, junta_tester
from verify import BooleanFunction, run_calibration, run_suite

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
# Trials
# -----------------------------------------------------------------------------
def trial_rng(seed_words: Sequence[int]) -> np.random.Generator:
    """Counter-based split: trial i of a run seeded s draws from SeedSequence([s, i])."""
    return np.random.default_rng(np.random.SeedSequence(list(seed_words)))


def run_test_trial(hidden: Unitary, params: TesterParams, seed_words: List[int], index: int) -> TrialRecord:
    oracle = UnitaryOracle(hidden, trial_rng(seed_words))
    run = junta_tester(oracle, params)
    return TrialRecord(
        index=index,
        seed_words=seed_words,
        outcome=run.decision,
        value=run.tester_two_estimate,
        ledger=oracle.ledger,
        detail={"stages": run.stages},
    )


def run_learn_trial(
    hidden: Unitary, params: LearnerParams, seed_words: List[int], index: int
) -> Tuple[TrialRecord, Optional[LearnedJunta]]:
    oracle = UnitaryOracle(hidden, trial_rng(seed_words))
    try:
        learned = junta_learner(oracle, params)
    except (InsufficientCopiesError, PromiseViolationError) as exc:
        record = TrialRecord(
            index=index,
            seed_words=seed_words,
            outcome="insufficient-copies" if isinstance(exc, InsufficientCopiesError) else "not-a-junta",
            ledger=oracle.ledger,
            detail={"error": exc.to_payload()},
        )
        return record, None
    distance = dist(hidden, learned.as_junta(hidden.n))
    record = TrialRecord(
        index=index,
        seed_words=seed_words,
        outcome="success" if distance <= params.eps else "failure",
        value=distance,
        ledger=oracle.ledger,
        detail={"support": list(learned.support), "sampled_support": sorted(learned.sampled_support)},
    )
    return record, learned


def _map_trials(fn: Callable, jobs: List[tuple], workers: int) -> list:
    """Results come back in job order whatever the pool size."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, *zip(*jobs)))
    return [fn(*job) for job in jobs]


# -----------------------------------------------------------------------------
# Output helpers
# -----------------------------------------------------------------------------
def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        click.echo(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text + "\n", encoding="utf-8")


def _finish(report: ExperimentReport, out: Optional[Path], record: bool) -> None:
    _emit(report.to_json(), out)
    if record:
        from database import record_report

        run_id = record_report(report)
        logger.info("recorded run %d", run_id)


def machine_errors(fn: Callable) -> Callable:
    """Render library and validation errors as {"schema": 1, "error": {...}} and exit 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except QJuntaError as exc:
            payload = exc.to_payload()
        except ValidationError as exc:
            payload = {"type": "ValidationError", "detail": str(exc)}
        logger.error("%s: %s", payload["type"], payload["detail"])
        click.echo(json.dumps({"schema": SCHEMA_VERSION, "error": payload}))
        sys.exit(2)

    return wrapper


def _load_hidden(path: Path) -> Unitary:
    return unitary_from_instance(load_instance(path))


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------
@click.group()
@click.option("--log-level", default=None, help="Overrides QJUNTA_LOG_LEVEL.")
def cli(log_level: Optional[str]) -> None:
    """Simulate quantum k-junta testers and learners."""
    logging.basicConfig(
        stream=sys.stderr,
        level=(log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


out_option = click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
seed_option = click.option("--seed", type=int, default=0, show_default=True)
record_option = click.option("--record", is_flag=True, help="Store the report in the run registry.")
workers_option = click.option("--workers", type=int, default=None, help="Trial pool size.")


@cli.command()
@click.argument("kind", type=click.Choice(["junta", "boolean", "dense"]))
@click.option("--n", "n", type=int, required=True)
@click.option("--k", type=int, default=None, help="Support size for junta instances.")
@click.option("--family", default="random", show_default=True, help="Boolean family: parity-m or random.")
@seed_option
@out_option
@machine_errors
def gen(kind: str, n: int, k: Optional[int], family: str, seed: int, out: Optional[Path]) -> None:
    """Write a random instance file."""
    rng = np.random.default_rng(resolve_seed(seed))
    if kind == "junta":
        if k is None:
            raise InvalidParameterError("junta instances need --k")
        instance = instance_from_unitary(random_junta(n, k, rng))
    elif kind == "dense":
        instance = instance_from_unitary(random_dense(n, rng))
    else:
        if family == "random":
            f = BooleanFunction.random(n, rng)
        elif family.startswith("parity-") and family[len("parity-"):].isdigit():
            f = BooleanFunction.parity(n, int(family[len("parity-"):]))
        else:
            raise InvalidParameterError(f"Unknown boolean family {family!r}")
        instance = instance_from_truth_table(f.truth_table)
    if out is None:
        click.echo(instance.model_dump_json(exclude_none=True, indent=2))
    else:
        save_instance(out, instance)


@cli.command("test")
@click.argument("instance", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--k", type=int, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--trials", type=int, default=1, show_default=True)
@click.option("--c-aa", type=float, default=DEFAULT_C_AA, show_default=True)
@click.option("--c-ggt", type=float, default=DEFAULT_C_GGT, show_default=True)
@seed_option
@workers_option
@out_option
@record_option
@machine_errors
def test_command(instance, k, eps, trials, c_aa, c_ggt, seed, workers, out, record) -> None:
    """Run the junta tester on an instance."""
    started = time.perf_counter()
    seed = resolve_seed(seed)
    hidden = _load_hidden(instance)
    params = TesterParams(k=k, eps=eps, c_aa=c_aa, c_ggt=c_ggt)
    jobs = [(hidden, params, [seed, i], i) for i in range(trials)]
    records: List[TrialRecord] = _map_trials(run_test_trial, jobs, workers or settings.workers)

    summary = summarize_ledgers([r.ledger for r in records], [r.outcome for r in records])
    stage_rejects: Dict[str, int] = {}
    for r in records:
        for stage, decision in r.detail["stages"].items():
            stage_rejects[stage] = stage_rejects.get(stage, 0) + (decision == "reject")
    report = ExperimentReport(
        command="test",
        parameters={
            "instance": str(instance), "n": hidden.n, "k": k, "eps": eps, "trials": trials,
            "seed": seed, "c_aa": c_aa, "c_ggt": c_ggt,
        },
        decision=None if summary.accept_fraction is None else ("yes" if summary.accept_fraction >= 0.5 else "no"),
        summary={**summary.model_dump(), "stage_rejects": stage_rejects},
        trials=records,
        ledger=QueryLedger.total(r.ledger for r in records),
        wall_time=time.perf_counter() - started,
    )
    logger.info("test: %d trials on n=%d, decision %s", trials, hidden.n, report.decision)
    _finish(report, out, record)


@cli.command()
@click.argument("instance", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--k", type=int, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--trials", type=int, default=1, show_default=True)
@click.option("--backend", type=click.Choice(["exact", "measurement"]), default="exact", show_default=True)
@click.option("--c-t", type=float, default=DEFAULT_C_T, show_default=True)
@click.option("--learned-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the first learned junta as an instance file.")
@seed_option
@workers_option
@out_option
@record_option
@machine_errors
def learn(instance, k, eps, trials, backend, c_t, learned_out, seed, workers, out, record) -> None:
    """Run the junta learner on an instance."""
    started = time.perf_counter()
    seed = resolve_seed(seed)
    hidden = _load_hidden(instance)
    params = LearnerParams(k=k, eps=eps, c_t=c_t, backend=backend)
    jobs = [(hidden, params, [seed, i], i) for i in range(trials)]
    results = _map_trials(run_learn_trial, jobs, workers or settings.workers)
    records = [r for r, _ in results]

    learned_path = None
    first = next((learned for _, learned in results if learned is not None), None)
    if learned_out is not None and first is not None:
        save_instance(learned_out, instance_from_unitary(first.as_junta(hidden.n)))
        learned_path = str(learned_out)

    distances = [r.value for r in records if r.value is not None]
    summary = summarize_ledgers([r.ledger for r in records])
    report = ExperimentReport(
        command="learn",
        parameters={
            "instance": str(instance), "n": hidden.n, "k": k, "eps": eps, "trials": trials,
            "seed": seed, "backend": backend, "c_t": c_t, "c_l": params.c_l,
            "copies": params.copies, "attempts": params.attempts, "samples": params.sample_count,
        },
        decision=None,
        learned_instance=learned_path,
        summary={
            **summary.model_dump(),
            "success_fraction": sum(r.outcome == "success" for r in records) / trials if trials else None,
            "insufficient_copies": sum(r.outcome == "insufficient-copies" for r in records),
            "not_a_junta": sum(r.outcome == "not-a-junta" for r in records),
            "mean_distance": float(np.mean(distances)) if distances else None,
            "max_distance": max(distances) if distances else None,
        },
        trials=records,
        ledger=QueryLedger.total(r.ledger for r in records),
        wall_time=time.perf_counter() - started,
    )
    logger.info("learn: %d trials on n=%d, success fraction %s", trials, hidden.n, report.summary["success_fraction"])
    _finish(report, out, record)


@cli.command()
@click.option("--suite", type=click.Choice(["core", "lower-bound", "calibration", "all"]), default="all",
              show_default=True)
@seed_option
@out_option
@record_option
@machine_errors
def verify(suite: str, seed: int, out: Optional[Path], record: bool) -> None:
    """Run invariant sweeps; exits 1 if any invariant fails."""
    started = time.perf_counter()
    seed = resolve_seed(seed)
    rng = np.random.default_rng(seed)
    names = ["core", "lower-bound", "calibration"] if suite == "all" else [suite]
    summary: Dict[str, object] = {}
    passed = True
    for name in names:
        if name == "calibration":
            summary["calibration"] = run_calibration(rng).model_dump()
            continue
        results = run_suite(name, rng)
        passed = passed and all(r.passed for r in results)
        summary[name] = [r.model_dump() for r in results]
    report = ExperimentReport(
        command="verify",
        parameters={"suite": suite, "seed": seed},
        decision="pass" if passed else "fail",
        summary=summary,
        wall_time=time.perf_counter() - started,
    )
    logger.info("verify %s: %s", suite, report.decision)
    _finish(report, out, record)
    if not passed:
        sys.exit(1)


@cli.command()
@click.option("--k", "k_list", type=int, multiple=True, help="Repeat for each k.")
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--trials", type=int, default=5, show_default=True)
@click.option("--algorithm", type=click.Choice(["tester", "learner", "both"]), default="both", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@seed_option
@workers_option
@out_option
@record_option
@machine_errors
def bench(k_list, eps, trials, algorithm, fmt, seed, workers, out, record) -> None:
    """Query counts against k for the tester and the learner."""
    started = time.perf_counter()
    seed = resolve_seed(seed)
    workers = workers or settings.workers
    algorithms = ["tester", "learner"] if algorithm == "both" else [algorithm]
    rows: List[BenchRow] = []
    fits: Dict[str, object] = {}
    for code, name in enumerate(algorithms):
        summaries = {}
        for k in sorted(set(k_list)):
            hidden = random_junta(2 * k if name == "tester" else k + 1, k, trial_rng([seed, k, code]))
            if name == "tester":
                params = TesterParams(k=k, eps=eps)
                jobs = [(hidden, params, [seed, k, code, i], i) for i in range(trials)]
                records = _map_trials(run_test_trial, jobs, workers)
            else:
                params = LearnerParams(k=k, eps=eps)
                jobs = [(hidden, params, [seed, k, code, i], i) for i in range(trials)]
                records = [r for r, _ in _map_trials(run_learn_trial, jobs, workers)]
            summaries[k] = summarize_ledgers([r.ledger for r in records])
        measured = {k: s.mean_modeled for k, s in summaries.items()}
        fit = fit_scaling(name, measured, eps)
        if fit is None:
            continue
        fits[name] = {**fit.model_dump(), "monotone": monotone_in_k(measured)}
        for k, s in summaries.items():
            reference = fit.constant * REFERENCES[name](k, eps)
            rows.append(BenchRow(
                algorithm=name, k=k, eps=eps, trials=trials,
                mean_simulated_u=s.mean_simulated_u,
                mean_simulated_u_dagger=s.mean_simulated_u_dagger,
                mean_modeled=s.mean_modeled,
                reference=reference,
                ratio=s.mean_modeled / reference,
                within_factor=fit.within_factor[k],
            ))

    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(BenchRow.model_fields), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())
        _emit(buffer.getvalue().rstrip("\n"), out)
        return
    report = ExperimentReport(
        command="bench",
        parameters={"k_list": sorted(set(k_list)), "eps": eps, "trials": trials, "seed": seed, "algorithm": algorithm},
        summary={"rows": [r.model_dump() for r in rows], "fits": fits},
        wall_time=time.perf_counter() - started,
    )
    _finish(report, out, record)


@cli.command()
@click.option("--limit", type=int, default=20, show_default=True)
@click.option("--command", "command_name", type=click.Choice(["gen", "test", "learn", "verify", "bench"]),
              default=None)
@machine_errors
def runs(limit: int, command_name: Optional[str]) -> None:
    """List recorded runs."""
    from database import list_runs

    click.echo(json.dumps(list_runs(limit=limit, command=command_name), indent=2))


if __name__ == "__main__":
    cli()
