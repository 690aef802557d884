import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import CNOT, junta
from core import DenseUnitary, StructuredJunta
from errors import InstanceFormatError, InvalidParameterError
from instances import (
    instance_from_truth_table,
    instance_from_unitary,
    load_instance,
    random_junta,
    save_instance,
    unitary_from_instance,
)
from schemas import InstanceFile


def test_junta_instance_keeps_support_and_core(tmp_path):
    hidden = junta(6, (5, 2), CNOT)
    path = tmp_path / "nested" / "cnot.json"
    save_instance(path, instance_from_unitary(hidden))
    loaded = unitary_from_instance(load_instance(path))
    assert isinstance(loaded, StructuredJunta)
    assert loaded.n == 6
    assert loaded.support == (5, 2)
    assert_allclose(loaded.core.entries, CNOT)


def test_saved_instance_omits_unused_fields(tmp_path):
    path = tmp_path / "b.json"
    save_instance(path, instance_from_truth_table("0110"))
    assert json.loads(path.read_text(encoding="utf-8")) == {"n": 2, "kind": "boolean", "truth_table": "0110"}


def test_boolean_instance_builds_diagonal():
    unitary = unitary_from_instance(instance_from_truth_table("0110"))
    assert_allclose(unitary.entries, np.diag([1, -1, -1, 1]))


def test_boolean_truth_table_must_match_n():
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=3, kind="boolean", truth_table="0110"))
    with pytest.raises(InvalidParameterError):
        instance_from_truth_table("0120")


def test_incomplete_instances():
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=2, kind="junta", support=[1]))
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=2, kind="boolean"))
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=1, kind="dense"))


def test_invalid_matrices_become_format_errors():
    not_unitary = [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=1, kind="dense", entries=not_unitary))
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=1, kind="dense", entries=[[1.0, 0.0]] * 3))
    with pytest.raises(InstanceFormatError):
        unitary_from_instance(InstanceFile(n=2, kind="junta", support=[3], core=[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]))


def test_load_instance_errors(tmp_path):
    with pytest.raises(InstanceFormatError):
        load_instance(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(InstanceFormatError):
        load_instance(bad)
    bad.write_text(json.dumps({"n": 2, "kind": "sparse"}), encoding="utf-8")
    with pytest.raises(InstanceFormatError):
        load_instance(bad)


def test_dense_instance_entries_are_row_major():
    instance = instance_from_unitary(DenseUnitary(2, CNOT))
    assert instance.kind == "dense"
    assert instance.entries[2] == (0.0, 0.0)
    assert instance.entries[11] == (1.0, 0.0)


def test_random_junta(rng):
    hidden = random_junta(5, 2, rng)
    assert len(set(hidden.support)) == 2
    assert all(1 <= q <= 5 for q in hidden.support)
    with pytest.raises(InvalidParameterError):
        random_junta(3, 0, rng)
    with pytest.raises(InvalidParameterError):
        random_junta(3, 4, rng)
