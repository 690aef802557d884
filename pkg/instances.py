import json
from pathlib import Path
from typing import List, Sequence

import numpy as np
from pydantic import ValidationError

from core import (
    DenseUnitary,
    StructuredJunta,
    Unitary,
    encode_boolean,
    haar_random_unitary,
    qubit_count,
)
from errors import InstanceFormatError, InvalidParameterError, QJuntaError
from schemas import ComplexPair, InstanceFile

# ---------------------------------------------------------------------
# Complex matrices <-> [re, im] lists (row-major)
# ---------------------------------------------------------------------


def matrix_to_pairs(matrix: np.ndarray) -> List[ComplexPair]:
    return [(float(z.real), float(z.imag)) for z in np.asarray(matrix).reshape(-1)]


def pairs_to_matrix(pairs: Sequence[ComplexPair], qubits: int) -> np.ndarray:
    dim = 2 ** qubits
    if len(pairs) != dim * dim:
        raise InstanceFormatError(f"Expected {dim * dim} entries for {qubits} qubits, got {len(pairs)}")
    flat = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    return flat.reshape(dim, dim)


# ---------------------------------------------------------------------
# Instance <-> unitary
# ---------------------------------------------------------------------


def instance_from_unitary(op: Unitary) -> InstanceFile:
    if isinstance(op, StructuredJunta):
        return InstanceFile(n=op.n, kind="junta", support=list(op.support), core=matrix_to_pairs(op.core.entries))
    return InstanceFile(n=op.n, kind="dense", entries=matrix_to_pairs(op.entries))


def instance_from_truth_table(truth_table: str) -> InstanceFile:
    n = qubit_count(len(truth_table))
    # validates the alphabet
    encode_boolean(truth_table)
    return InstanceFile(n=n, kind="boolean", truth_table=truth_table)


def unitary_from_instance(instance: InstanceFile) -> Unitary:
    """Build the hidden unitary; any validation failure is an InstanceFormatError."""
    try:
        if instance.kind == "junta":
            if instance.support is None or instance.core is None:
                raise InstanceFormatError("junta instance needs 'support' and 'core'")
            core = DenseUnitary(len(instance.support), pairs_to_matrix(instance.core, len(instance.support)))
            return StructuredJunta(instance.n, tuple(instance.support), core)
        if instance.kind == "boolean":
            if instance.truth_table is None:
                raise InstanceFormatError("boolean instance needs 'truth_table'")
            unitary = encode_boolean(instance.truth_table)
            if unitary.n != instance.n:
                raise InstanceFormatError(
                    f"Truth table of length {len(instance.truth_table)} does not match n={instance.n}"
                )
            return unitary
        if instance.entries is None:
            raise InstanceFormatError("dense instance needs 'entries'")
        return DenseUnitary(instance.n, pairs_to_matrix(instance.entries, instance.n))
    except InstanceFormatError:
        raise
    except QJuntaError as exc:
        raise InstanceFormatError(f"Invalid {instance.kind} instance: {exc.detail}") from exc


# ---------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------


def random_junta(n: int, k: int, rng: np.random.Generator) -> StructuredJunta:
    """Haar core on a uniformly random k-subset of 1..n."""
    if not 1 <= k <= n:
        raise InvalidParameterError(f"Need 1 <= k <= n (got k={k}, n={n})")
    support = tuple(int(q) + 1 for q in rng.choice(n, size=k, replace=False))
    return StructuredJunta(n, support, haar_random_unitary(k, rng))


def random_dense(n: int, rng: np.random.Generator) -> DenseUnitary:
    return haar_random_unitary(n, rng)


# ---------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------


def load_instance(path: Path) -> InstanceFile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise InstanceFormatError(f"Cannot read instance {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"Instance {path} is not valid JSON: {exc}") from exc
    try:
        return InstanceFile.model_validate(data)
    except ValidationError as exc:
        raise InstanceFormatError(f"Instance {path} does not match the schema: {exc}") from exc


def save_instance(path: Path, instance: InstanceFile) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(instance.model_dump_json(exclude_none=True, indent=2))
